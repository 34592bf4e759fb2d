"""Connections on free modules and lattice gauge theory.

Module elements are row vectors: ``psi[g]`` has shape ``(1, m)`` and
``psi[g] @ T`` applies a transport matrix.  Matter fields for the gauge
theory are columns ``(m, 1)`` acted on from the left by ``W_h``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forms import Delta, Form, GradeMismatchError, d, decompose_2form, delta_e
from .lattice import GroupLattice
from .vector_fields import DiscreteVF, VectorField


class GaugeError(ValueError):
    pass


def random_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_unitary_field(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    return np.array([random_unitary(m, rng) for _ in range(n)])


def _dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


# connections on a free left module with basis E_1..E_m

@dataclass(frozen=True, eq=False)
class ModuleConnection:
    """∇E = θ⊗E − Σ_h θ^h ⊗ V_{ℓ_h}(E) with V_{ℓ_h}(Σ f^i E_i)[g] = f(g h^-1) T_h(g)."""

    lattice: GroupLattice
    T: np.ndarray  # (k, n, m, m)

    @property
    def m(self) -> int:
        return self.T.shape[-1]

    def transport(self, i: int, psi: np.ndarray) -> np.ndarray:
        """V_{ℓ_h} for h = S[i] on a module element (n, 1, m)."""
        G = self.lattice.group
        h = self.lattice.S[i]
        back = G.mul[:, G.inv[h]]
        return psi[back] @ self.T[i]

    def transport_along(self, X: VectorField | DiscreteVF, psi: np.ndarray) -> np.ndarray:
        """V_X = Σ_h (R*_{h^-1} X^h) V_{ℓ_h}."""
        L = self.lattice
        G = L.group
        comps = X.components
        out = np.zeros_like(psi, dtype=complex)
        for i, h in enumerate(L.S):
            coeff = comps[G.mul[:, G.inv[h]], i]
            out = out + coeff[:, None, None] * self.transport(i, psi)
        return out

    @property
    def connection_form(self) -> Form:
        """Matrix 1-form N with ∇ψ = dψ + ψ N."""
        L = self.lattice
        N = np.zeros((L.n, L.k, self.m, self.m), dtype=complex)
        eye = np.eye(self.m)
        for i in range(L.k):
            N[:, i] = eye - self.T[i][L.neighbours[:, i]]
        return Form(L, 1, N)

    def nabla(self, omega: Form) -> Form:
        """∇(ω⊗E) = dω⊗E + (−1)^r ω ∇E on row-vector valued forms."""
        sign = -1.0 if omega.grade % 2 else 1.0
        return d(omega) + sign * (omega * self.connection_form)

    def curvature_form(self) -> Form:
        """Matrix 2-form N² − dN, so that R(ψ) = ψ (N² − dN)."""
        N = self.connection_form
        return N * N - d(N)

    def curvature(self, omega: Form) -> Form:
        return omega * self.curvature_form()


def module_element(L: GroupLattice, psi: np.ndarray) -> Form:
    """Grade-0 row-vector valued form from an (n, m) array."""
    psi = np.asarray(psi, dtype=complex)
    return Form(L, 0, psi[:, None, None, :])


@dataclass(frozen=True)
class TransportCheck:
    ok: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_transport(L: GroupLattice, ops: np.ndarray, m: int) -> TransportCheck:
    """Dense operators (k, n m, n m) must map e^g-supported elements to e^{gh}.

    Entries are ``(V ψ)_flat = A @ ψ_flat`` with flat index ``g m + i``.
    """
    ops = np.asarray(ops)
    G = L.group
    for i, h in enumerate(L.S):
        A = ops[i].reshape(L.n, m, L.n, m)
        for src in range(L.n):
            for dst in range(L.n):
                if dst != G.mul[src, h] and np.abs(A[dst, :, src, :]).max() > L.tol:
                    return TransportCheck(False, (h, src, dst))
    return TransportCheck(True)


def connection_from_transport(L: GroupLattice, ops: np.ndarray, m: int) -> ModuleConnection:
    """Build from dense transport operators after checking the transport property."""
    check = check_transport(L, ops, m)
    if not check:
        h, src, dst = check.witness
        raise GaugeError(f"transport along {L.label(h)} maps e^{L.label(src)} onto e^{L.label(dst)}")
    G = L.group
    T = np.zeros((L.k, L.n, m, m), dtype=complex)
    for i, h in enumerate(L.S):
        A = np.asarray(ops[i]).reshape(L.n, m, L.n, m)
        for g in range(L.n):
            src = int(G.mul[g, G.inv[h]])
            T[i, g] = A[g, :, src, :].T
    return ModuleConnection(L, T)


def transport_operators(C: ModuleConnection) -> np.ndarray:
    """Dense form of the transports, inverse of connection_from_transport."""
    L, m = C.lattice, C.m
    G = L.group
    ops = np.zeros((L.k, L.n, m, L.n, m), dtype=complex)
    for i, h in enumerate(L.S):
        for g in range(L.n):
            ops[i, g, :, int(G.mul[g, G.inv[h]]), :] = C.T[i, g].T
    return ops.reshape(L.k, L.n * m, L.n * m)


# gauge fields

@dataclass(frozen=True, eq=False)
class GaugeField:
    """W = Σ_h W_h θ^h with ``W[g, i]`` the m×m matrix W_{S[i]}(g)."""

    lattice: GroupLattice
    W: np.ndarray

    @property
    def m(self) -> int:
        return self.W.shape[-1]

    @classmethod
    def trivial(cls, L: GroupLattice, m: int) -> "GaugeField":
        return cls(L, np.broadcast_to(np.eye(m, dtype=complex), (L.n, L.k, m, m)).copy())

    @classmethod
    def random_unitary(cls, L: GroupLattice, m: int, rng: np.random.Generator) -> "GaugeField":
        return cls(L, np.array([[random_unitary(m, rng) for _ in range(L.k)] for _ in range(L.n)]))

    def as_form(self) -> Form:
        return Form(self.lattice, 1, self.W)

    def potential(self) -> Form:
        """A = W − θ I."""
        return Form(self.lattice, 1, self.W - np.eye(self.m))

    def is_unitary(self, tol: float | None = None) -> bool:
        tol = self.lattice.tol if tol is None else tol
        return bool(np.abs(_dagger(self.W) @ self.W - np.eye(self.m)).max() < tol)


@dataclass(frozen=True, eq=False)
class GaugeTransform:
    gamma: np.ndarray  # (n, m, m)

    def __post_init__(self):
        cond = np.linalg.cond(self.gamma)
        if not np.all(np.isfinite(cond)) or cond.max() > 1e12:
            g = int(np.argmax(np.where(np.isfinite(cond), cond, np.inf)))
            raise GaugeError(f"gauge transform is singular at site index {g}")

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.gamma)


def _as_transform(gamma) -> GaugeTransform:
    return gamma if isinstance(gamma, GaugeTransform) else GaugeTransform(np.asarray(gamma, dtype=complex))


def gauge_transform(Wf: GaugeField, gamma) -> GaugeField:
    """W'_h = γ W_h R*_h(γ^-1)."""
    gt = _as_transform(gamma)
    L = Wf.lattice
    inv_shift = gt.inverse[L.neighbours]  # (n, k, m, m)
    return GaugeField(L, gt.gamma[:, None] @ Wf.W @ inv_shift)


def pure_gauge(L: GroupLattice, gamma) -> GaugeField:
    return gauge_transform(GaugeField.trivial(L, np.asarray(gamma).shape[-1]), gamma)


@dataclass(frozen=True)
class MatterField:
    values: np.ndarray  # (n, m)
    side: str = "left"


def transform_matter(psi: MatterField, gamma) -> MatterField:
    """ψ' = γψ for columns, φ' = φγ^-1 for rows."""
    gt = _as_transform(gamma)
    v = np.asarray(psi.values, dtype=complex)
    if psi.side == "left":
        return MatterField(np.einsum("gij,gj->gi", gt.gamma, v), "left")
    return MatterField(np.einsum("gi,gij->gj", v, gt.inverse), "right")


def field_strength(Wf: GaugeField) -> Form:
    """F = W² − Δ(W) − Δ^e I."""
    W = Wf.as_form()
    De = delta_e(Wf.lattice)
    return W * W - Delta(W) - Form(Wf.lattice, 2, De.coeffs[..., None, None] * np.eye(Wf.m))


def field_strength_parts(Wf: GaugeField) -> dict:
    """Biangle, triangle and pairwise quadrangle parts of F keyed by elements."""
    F = field_strength(Wf)
    parts = decompose_2form(F)
    quad = {}
    for g, cols in parts.raw_quadrangle.items():
        keys = list(cols)
        quad[g] = {(a, b): cols[a] - cols[b] for a in keys for b in keys if a != b}
    return {"biangle": parts.biangle, "triangle": parts.triangle, "quadrangle": quad}


def covariant_derivative(psi, Wf: GaugeField) -> Form:
    """Dψ = Σ_h (W_h R*_h ψ − ψ) θ^h for column matter fields (n, m)."""
    L = Wf.lattice
    v = np.asarray(psi.values if isinstance(psi, MatterField) else psi, dtype=complex)
    shifted = v[L.neighbours]  # (n, k, m)
    nab = np.einsum("gkij,gkj->gki", Wf.W, shifted) - v[:, None, :]
    return Form(L, 1, nab[..., None])


def matter_lagrangian(psi, Wf: GaugeField) -> np.ndarray:
    Dpsi = covariant_derivative(psi, Wf).coeffs[..., 0]
    return 0.5 * np.einsum("gki,gki->g", np.conj(Dpsi), Dpsi).real


def matter_action(psi, Wf: GaugeField) -> float:
    return float(np.sum(matter_lagrangian(psi, Wf)))


# inner products

def _pair(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a† b per site for scalar or matrix coefficients."""
    if a.ndim == 1:
        return np.conj(a) * b
    return _dagger(a) @ b


def form_inner_product(a: Form, b: Form) -> np.ndarray:
    """Sesquilinear pairing of forms of equal grade <= 2."""
    if a.grade != b.grade:
        raise GradeMismatchError("inner product needs equal grades")
    L = a.lattice
    if a.grade == 0:
        return _pair(a.coeffs[:, 0], b.coeffs[:, 0])
    if a.grade == 1:
        return sum(_pair(a.coeffs[:, i], b.coeffs[:, i]) for i in range(L.k))
    if a.grade != 2:
        raise GradeMismatchError("inner products are defined up to grade 2")
    total = 0
    for g, pairs in L.pairs_by_product.items():
        cols_a = [a.coeffs[:, i * L.k + j] for i, j in pairs]
        cols_b = [b.coeffs[:, i * L.k + j] for i, j in pairs]
        if L.in_S_e(g):
            total = total + sum(_pair(x, y) for x, y in zip(cols_a, cols_b))
        else:
            mult = len(pairs)
            total = total + mult * sum(_pair(x, y) for x, y in zip(cols_a, cols_b)) \
                - _pair(sum(cols_a), sum(cols_b))
    return total


@dataclass
class YangMillsResult:
    action: float
    lagrangian: np.ndarray
    biangle: float
    triangle: dict = field(default_factory=dict)
    quadrangle: dict = field(default_factory=dict)


def _trace(x: np.ndarray) -> np.ndarray:
    return np.trace(x, axis1=-2, axis2=-1).real


def yang_mills(Wf: GaugeField) -> YangMillsResult:
    """L_YM = 1/(2m) tr[(p_e F, p_e F) + Σ_{S1}(p_h F, p_h F) + Σ_{S2} |g|^-1 (p_g F, p_g F)]."""
    L = Wf.lattice
    m = Wf.m
    F = field_strength(Wf).coeffs
    scale = 1.0 / (2 * m)
    lag = np.zeros(L.n)
    biangle = 0.0
    triangle, quadrangle = {}, {}
    for g in sorted(L.pairs_by_product):
        pairs = L.pairs_by_product[g]
        cols = [F[:, i * L.k + j] for i, j in pairs]
        if L.in_S_e(g):
            block = scale * _trace(sum(_dagger(c) @ c for c in cols))
        else:
            mult = len(pairs)
            total = sum(cols)
            block = scale * (_trace(sum(_dagger(c) @ c for c in cols)) - _trace(_dagger(total) @ total) / mult)
        lag = lag + block
        if g == L.group.identity:
            biangle = float(block.sum())
        elif L.in_S(g):
            triangle[g] = float(block.sum())
        else:
            quadrangle[g] = float(block.sum())
    return YangMillsResult(float(lag.sum()), lag, biangle, triangle, quadrangle)


def yang_mills_action(Wf: GaugeField) -> float:
    return yang_mills(Wf).action


def yang_mills_trace_expansion(Wf: GaugeField, quadrangle_constant=None) -> float:
    """Expanded trace blocks for unitary W.

    ``quadrangle_constant(mult)`` gives the identity coefficient of the
    quadrangle block; the default ``mult**2`` is what the inner product
    produces.
    """
    L = Wf.lattice
    m = Wf.m
    const = quadrangle_constant or (lambda mult: mult ** 2)
    W = Wf.W
    eye = np.eye(m)
    total = 0.0
    for g in sorted(L.pairs_by_product):
        pairs = L.pairs_by_product[g]
        U = [W[:, i] @ W[L.neighbours[:, i], j] for i, j in pairs]
        if g == L.group.identity:
            for u in U:
                total += _trace(2 * eye - u - _dagger(u)).sum()
        elif L.in_S(g):
            W0 = W[:, int(L.pos[g])]
            for u in U:
                total += _trace(2 * eye - _dagger(W0) @ u - _dagger(u) @ W0).sum()
        else:
            mult = len(pairs)
            cross = sum(_dagger(a) @ b for a in U for b in U)
            total += (_trace(const(mult) * eye - cross) / mult).sum()
    return total / (2 * m)
