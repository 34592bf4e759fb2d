"""Linear connections on 1-forms: transports, torsion, curvature and Bianchi identities.

Coefficients are stored as ``V[g, a, b, c] = V^{S[a]}_{S[b], S[c]}(g)``.  The
per-site matrix V_{h'} for ``h' = S[b]`` is ``V[g, :, b, :]`` with rows the
upper index h and columns h''.  A 1-form Σ f_h θ^h is handled as the row
vector ``(f_h)`` so that the module machinery of ``gauge`` applies with
E_h = θ^h.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forms import Delta, Form, d, decompose_2form, delta_e, normal_form, theta
from .gauge import ModuleConnection
from .lattice import GroupLattice
from .vector_fields import DiscreteVF, VectorField


class SingularTransportError(ValueError):
    def __init__(self, h: int, site: int, message: str):
        super().__init__(message)
        self.h = h
        self.site = site


@dataclass(frozen=True, eq=False)
class LinearConnection:
    lattice: GroupLattice
    V: np.ndarray  # (n, k, k, k)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        L = self.lattice
        shape = (L.n, L.k, L.k, L.k)
        if self.V.shape != shape:
            raise ValueError(f"V must have shape {shape}, got {self.V.shape}")

    @classmethod
    def zero(cls, L: GroupLattice) -> "LinearConnection":
        return cls(L, np.zeros((L.n, L.k, L.k, L.k), dtype=complex))

    @classmethod
    def canonical(cls, L: GroupLattice) -> "LinearConnection":
        """V^h_{h1,h2} = δ^h_{h1 h2} (only when h1 h2 ∈ S) − δ^h_{h1}; torsion free."""
        V = np.zeros((L.k, L.k, L.k), dtype=complex)
        for b in range(L.k):
            V[b, b, :] -= 1.0
            for c in range(L.k):
                p = int(L.pos[L.pair_product[b, c]])
                if p >= 0:
                    V[p, b, c] += 1.0
        return cls(L, np.broadcast_to(V, (L.n,) + V.shape).copy())

    @classmethod
    def random(cls, L: GroupLattice, rng: np.random.Generator, complex_valued: bool = True) -> "LinearConnection":
        shape = (L.n, L.k, L.k, L.k)
        V = rng.normal(size=shape).astype(complex)
        if complex_valued:
            V = V + 1j * rng.normal(size=shape)
        return cls(L, V)

    @classmethod
    def from_permutations(cls, L: GroupLattice, perms) -> "LinearConnection":
        """``perms[g, b]`` is a permutation p of range(k); V_{S[b]}(g) maps h'' to row p[h'']."""
        perms = np.asarray(perms, dtype=np.int64)
        V = np.zeros((L.n, L.k, L.k, L.k), dtype=complex)
        for g in range(L.n):
            for b in range(L.k):
                V[g, perms[g, b], b, np.arange(L.k)] = 1.0
        return cls(L, V)

    def matrix(self, h, site: int) -> np.ndarray:
        """V_h(g) with entry (upper, lower h'')."""
        b = self.lattice.positions([h])[0]
        return self.V[site, :, b, :]

    def as_module_connection(self) -> ModuleConnection:
        """T_{h'}(g)[h, h''] = V^h_{h', h''}(g h'^-1)."""
        if "module" not in self._cache:
            L = self.lattice
            G = L.group
            T = np.zeros((L.k, L.n, L.k, L.k), dtype=complex)
            for b, hp in enumerate(L.S):
                back = G.mul[:, G.inv[hp]]
                T[b] = self.V[back, :, b, :]
            self._cache["module"] = ModuleConnection(L, T)
        return self._cache["module"]

    def V_forms(self) -> Form:
        """Matrix 1-form with entry (h, h') equal to V^h_{h'} = Σ_{h''} V^h_{h'', h'} θ^{h''}."""
        return Form(self.lattice, 1, np.transpose(self.V, (0, 2, 1, 3)))


def _row(L: GroupLattice, h) -> np.ndarray:
    """θ^h as a row-vector module element (n, 1, k)."""
    out = np.zeros((L.n, 1, L.k), dtype=complex)
    out[:, 0, L.positions([h])[0]] = 1.0
    return out


def one_form_from_row(L: GroupLattice, row: np.ndarray) -> Form:
    return Form(L, 1, np.asarray(row)[:, 0, :])


def transport_1form(C: LinearConnection, h, alpha: Form) -> Form:
    """V_{ℓ_h} α on a scalar 1-form."""
    L = C.lattice
    M = C.as_module_connection()
    out = M.transport(L.positions([h])[0], alpha.coeffs[:, None, :])
    return one_form_from_row(L, out)


def nabla_theta(C: LinearConnection, h) -> Form:
    """∇θ^h as the row of 1-forms N^h_{h'} with ∇θ^h = Σ N^h_{h'} ⊗ θ^{h'}."""
    L = C.lattice
    b = L.positions([h])[0]
    N = C.as_module_connection().connection_form
    return Form(L, 1, N.coeffs[:, :, b, :])


def nabla_theta_expanded(C: LinearConnection, h) -> Form:
    """Same row built as θ δ^h_{h'} − V^h_{h'}."""
    L = C.lattice
    b = L.positions([h])[0]
    out = np.zeros((L.n, L.k, L.k), dtype=complex)
    out[:, :, b] = 1.0
    return Form(L, 1, out - C.V_forms().coeffs[:, :, b, :])


# transports on vector fields

def _components(Y) -> np.ndarray:
    return Y.components if isinstance(Y, (VectorField, DiscreteVF)) else np.asarray(Y)


def transport_vf(C: LinearConnection, h, Y) -> VectorField:
    """Ṽ_{ℓ_h} Y: (Ṽ Y)^{h''}(g) = Σ_{h'} V^{h''}_{h, h'}(g) Y^{h'}(g h)."""
    L = C.lattice
    b = L.positions([h])[0]
    comps = _components(Y)
    fwd = comps[L.neighbours[:, b]]
    return VectorField(L, np.einsum("gcb,gb->gc", C.V[:, :, b, :], fwd))


def hat_transport(C: LinearConnection, h, Y) -> VectorField:
    """V̂_{ℓ_h} := Ṽ_{ℓ_{h^-1}}, available on symmetric lattices only."""
    L = C.lattice
    if len(L.S0) != L.k:
        raise ValueError("V̂ needs S = S^-1")
    return transport_vf(C, int(L.group.inv[L.group.index(h)]), Y)


@dataclass(frozen=True)
class InvertibilityReport:
    invertible: bool
    determinants: np.ndarray  # (k, n)
    singular: tuple = ()  # (h, site) pairs

    def __bool__(self) -> bool:
        return self.invertible


def transport_invertibility(C: LinearConnection, tol: float | None = None) -> InvertibilityReport:
    L = C.lattice
    tol = L.tol if tol is None else tol
    mats = np.transpose(C.V, (2, 0, 1, 3))  # (k, n, k, k)
    dets = np.linalg.det(mats)
    conds = np.linalg.cond(mats)
    bad = tuple((L.S[b], g) for b in range(L.k) for g in range(L.n)
                if abs(dets[b, g]) <= tol or not np.isfinite(conds[b, g]) or conds[b, g] > 1.0 / tol)
    return InvertibilityReport(not bad, dets, bad)


def inverse_transport(C: LinearConnection) -> np.ndarray:
    """U_h = V_h^-1 per site, shape (k, n, k, k); raises on a singular V_h(g)."""
    report = transport_invertibility(C)
    if not report:
        h, g = report.singular[0]
        L = C.lattice
        raise SingularTransportError(h, g, f"V_{L.label(h)} is singular at site {L.label(g)}")
    return np.linalg.inv(np.transpose(C.V, (2, 0, 1, 3)))


def U_transport(C: LinearConnection, h, Y) -> VectorField:
    """U_{ℓ_h} Y: (U Y)^{h''}(g) = Σ_{h'} U_h(g h^-1)[h'', h'] Y^{h'}(g h^-1)."""
    L = C.lattice
    G = L.group
    b = L.positions([h])[0]
    U = inverse_transport(C)[b]
    back = G.mul[:, G.inv[L.S[b]]]
    comps = _components(Y)
    return VectorField(L, np.einsum("gcb,gb->gc", U[back], comps[back]))


def transport_vf_along(C: LinearConnection, X, Y) -> VectorField:
    """Ṽ_X = Σ_h X^h Ṽ_{ℓ_h}."""
    L = C.lattice
    comps = _components(X)
    out = np.zeros((L.n, L.k), dtype=complex)
    for b, h in enumerate(L.S):
        out += comps[:, b, None] * transport_vf(C, h, Y).components
    return VectorField(L, out)


def U_transport_along(C: LinearConnection, X, Y) -> VectorField:
    """U_X = Σ_h (R*_{h^-1} X^h) U_{ℓ_h}."""
    L = C.lattice
    G = L.group
    comps = _components(X)
    out = np.zeros((L.n, L.k), dtype=complex)
    for b, h in enumerate(L.S):
        coeff = comps[G.mul[:, G.inv[h]], b]
        out += coeff[:, None] * U_transport(C, h, Y).components
    return VectorField(L, out)


def transport_1form_along(C: LinearConnection, X, alpha: Form) -> Form:
    M = C.as_module_connection()
    X = X if isinstance(X, (VectorField, DiscreteVF)) else VectorField(C.lattice, np.asarray(X))
    return one_form_from_row(C.lattice, M.transport_along(X, alpha.coeffs[:, None, :]))


def nabla_on_vf(C: LinearConnection, h, Y) -> VectorField:
    """∇_{ℓ_h} Y = Y − U_{ℓ_h} Y."""
    L = C.lattice
    return VectorField(L, _components(Y) - U_transport(C, h, Y).components)


def nabla_on_1form(C: LinearConnection, h, alpha: Form) -> Form:
    """∇_{ℓ_h} α = α − V_{ℓ_h} α."""
    return alpha - transport_1form(C, h, alpha)


def is_discrete(C: LinearConnection, tol: float | None = None) -> bool:
    """All V_h(g) are permutation matrices."""
    tol = C.lattice.tol if tol is None else tol
    V = C.V
    rounded = np.round(V.real)
    if np.abs(V - rounded).max(initial=0.0) > tol:
        return False
    if not np.isin(rounded, (0.0, 1.0)).all():
        return False
    return bool((rounded.sum(axis=1) == 1).all() and (rounded.sum(axis=3) == 1).all())


# torsion

def torsion(C: LinearConnection, h) -> Form:
    """Θ^h = Σ (δ^h_{h1} − δ^h_{h1 h2} + V^h_{h1,h2}) θ^{h1} θ^{h2}."""
    L = C.lattice
    a = L.positions([h])[0]
    coeff = C.V[:, a].copy()
    coeff[:, a, :] += 1.0
    coeff -= (L.pair_product == L.S[a]).astype(float)[None]
    return Form(L, 2, coeff.reshape(L.n, L.k * L.k))


def torsion_via_nabla(C: LinearConnection, h) -> Form:
    """dθ^h − π ∇θ^h."""
    L = C.lattice
    row = nabla_theta(C, h)
    pi = Form.zeros(L, 2)
    for b, hp in enumerate(L.S):
        pi = pi + Form(L, 1, row.coeffs[:, :, b]) * theta(L, hp)
    return d(theta(L, h)) - pi


@dataclass
class TorsionReport:
    biangle: dict  # h -> {(h1, h2): residual per site}
    triangle: dict  # h -> {h0: {(h1, h2): residual per site}}
    quadrangle: dict  # h -> {g: {((h1, h2), (ĥ1, ĥ2)): Q per site}}
    norms: dict  # 'biangle' / 'triangle' / 'quadrangle' -> max residual
    tol: float

    @property
    def biangle_free(self) -> bool:
        return self.norms["biangle"] <= self.tol

    @property
    def triangle_free(self) -> bool:
        return self.norms["triangle"] <= self.tol

    @property
    def quadrangle_free(self) -> bool:
        return self.norms["quadrangle"] <= self.tol

    @property
    def torsion_free(self) -> bool:
        return self.biangle_free and self.triangle_free and self.quadrangle_free

    def to_dict(self, label) -> dict:
        quad = {}
        for h, classes in self.quadrangle.items():
            for g, diffs in classes.items():
                key = f"{label(h)}|{label(g)}"
                quad[key] = max(float(np.abs(q).max()) for q in diffs.values()) if diffs else 0.0
        return {
            "biangle_free": self.biangle_free,
            "triangle_free": self.triangle_free,
            "quadrangle_free": self.quadrangle_free,
            "torsion_free": self.torsion_free,
            "norms": {k: float(v) for k, v in self.norms.items()},
            "quadrangle_classes": quad,
        }


def torsion_report(C: LinearConnection, tol: float | None = None) -> TorsionReport:
    L = C.lattice
    tol = L.tol if tol is None else tol
    bi, tri, quad = {}, {}, {}
    norms = {"biangle": 0.0, "triangle": 0.0, "quadrangle": 0.0}
    for h in L.S:
        parts = decompose_2form(torsion(C, h))
        bi[h] = parts.biangle
        tri[h] = parts.triangle
        quad[h] = {}
        for g, cols in parts.raw_quadrangle.items():
            keys = list(cols)
            quad[h][g] = {(keys[0], other): cols[keys[0]] - cols[other] for other in keys[1:]}
        for c in parts.biangle.values():
            norms["biangle"] = max(norms["biangle"], float(np.abs(c).max()))
        for cols in parts.triangle.values():
            for c in cols.values():
                norms["triangle"] = max(norms["triangle"], float(np.abs(c).max()))
        for diffs in quad[h].values():
            for q in diffs.values():
                norms["quadrangle"] = max(norms["quadrangle"], float(np.abs(q).max()))
    return TorsionReport(bi, tri, quad, norms, tol)


def is_torsion_free(C: LinearConnection, tol: float | None = None) -> bool:
    return torsion_report(C, tol).torsion_free


def torsion_free_modulo_relations(C: LinearConnection, tol: float | None = None) -> bool:
    """Cross-check: every Θ^h vanishes in the quotient by the relations."""
    tol = C.lattice.tol if tol is None else tol
    return all(normal_form(torsion(C, h)).norm() <= tol for h in C.lattice.S)


# curvature

def curvature_matrix(C: LinearConnection) -> Form:
    """2-form matrix with entry (h, h') equal to R^h_{h'}, from N² − dN."""
    return C.as_module_connection().curvature_form()


def curvature_row(C: LinearConnection, h) -> Form:
    """R^h_{h'} for all h' by the explicit expansion of R(θ^h); fiber (k,)."""
    L = C.lattice
    M = C.as_module_connection()
    a = L.positions([h])[0]
    row = _row(L, h)
    out = np.zeros((L.n, L.k * L.k, L.k), dtype=complex)
    out[:, :, a] -= delta_e(L).coeffs
    once = [M.transport(b, row) for b in range(L.k)]
    for b, hp in enumerate(L.S):
        dth = Delta(theta(L, hp))
        for c in range(L.k):
            out[:, :, c] -= dth.rmul(once[b][:, 0, c]).coeffs
    for b1, h1 in enumerate(L.S):
        for b2, h2 in enumerate(L.S):
            twice = M.transport(b2, once[b1])
            word = theta(L, h1) * theta(L, h2)
            for c in range(L.k):
                out[:, :, c] += word.rmul(twice[:, 0, c]).coeffs
    return Form(L, 2, out)


def curvature_of(C: LinearConnection, alpha: Form) -> Form:
    """R(α) for a scalar 1-form α, returned as the row of 2-forms R_{h'}."""
    row = Form(C.lattice, 0, alpha.coeffs[:, None, None, :])
    return row * curvature_matrix(C)


def first_bianchi_residual(C: LinearConnection, h) -> float:
    """Θ^h θ + Δ(Θ^h) − Σ V^h_{h'} Θ^{h'} + π R(θ^h), measured modulo relations."""
    L = C.lattice
    a = L.positions([h])[0]
    th = theta(L)
    Theta = torsion(C, h)
    lhs = Theta * th + Delta(Theta)
    Vf = C.V_forms()
    R = curvature_matrix(C)
    for b, hp in enumerate(L.S):
        lhs = lhs - Form(L, 1, Vf.coeffs[:, :, a, b]) * torsion(C, hp)
        lhs = lhs + Form(L, 2, R.coeffs[:, :, a, b]) * theta(L, hp)
    return normal_form(lhs).norm()


def second_bianchi_residual(C: LinearConnection) -> float:
    """Δ(R) − (V R − R V) modulo relations, over all entries."""
    R = curvature_matrix(C)
    Vf = C.V_forms()
    return normal_form(Delta(R) - (Vf * R - R * Vf)).norm()


def contraction_identity_residual(C: LinearConnection, h, Y, alpha: Form) -> float:
    """ℓ̄_h<Y,α> − <∇Y,α> − <Y,∇α> + <∇Y,∇α>."""
    L = C.lattice
    G = L.group
    hi = G.index(h)
    comps = _components(Y)
    pair = np.einsum("gi,gi->g", comps, alpha.coeffs)
    bar = pair - pair[G.mul[:, G.inv[hi]]]
    nY = nabla_on_vf(C, hi, comps).components
    na = nabla_on_1form(C, hi, alpha).coeffs
    rhs = (np.einsum("gi,gi->g", nY, alpha.coeffs) + np.einsum("gi,gi->g", comps, na)
           - np.einsum("gi,gi->g", nY, na))
    return float(np.abs(bar - rhs).max())
