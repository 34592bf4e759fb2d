"""Calculi on right coset spaces G/H and their Schreier diagrams."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .forms import Delta, Form, d, normal_form, theta
from .groups import is_subgroup
from .lattice import GroupLattice, LatticeError


class CosetError(LatticeError):
    pass


@dataclass(frozen=True, eq=False)
class CosetDiagram:
    """Right cosets Hg with arrows K -> Kh for h in S (loops and parallel arrows kept)."""

    lattice: GroupLattice
    H: frozenset
    cosets: tuple[tuple[int, ...], ...]  # ordered by representative
    coset_of: np.ndarray  # site -> coset index
    action: np.ndarray  # (cosets, k): K, S[i] -> K'
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.cosets)

    def representative(self, K: int) -> int:
        return self.cosets[K][0]

    def label(self, K: int) -> str:
        G = self.lattice.group
        rep = self.representative(K)
        if rep == G.identity:
            return "H"
        if G.kind == "cyclic":
            return f"H+{G.label(rep)}"
        return f"H{G.label(rep)}"

    def labels(self) -> list[str]:
        return [self.label(K) for K in range(self.size)]

    def find(self, g) -> int:
        """Coset containing the group element g (label or index)."""
        return int(self.coset_of[self.lattice.group.index(g)])

    def edges(self) -> list[tuple[int, int, int]]:
        """Full multiset of (K, h, K') in coset then S order."""
        L = self.lattice
        return [(K, L.S[i], int(self.action[K, i])) for K in range(self.size) for i in range(L.k)]

    def loops(self) -> list[tuple[int, int]]:
        return [(K, h) for K, h, Kp in self.edges() if K == Kp]

    def multi_edges(self) -> dict[tuple[int, int], tuple[int, ...]]:
        """(K, K') with K != K' reached by at least two letters."""
        groups: dict[tuple[int, int], list[int]] = {}
        for K, h, Kp in self.edges():
            if K != Kp:
                groups.setdefault((K, Kp), []).append(h)
        return {key: tuple(v) for key, v in groups.items() if len(v) >= 2}

    def out_degree(self, K: int) -> int:
        return sum(1 for src, _, _ in self.edges() if src == K)

    def action_table(self) -> dict[str, dict[str, str]]:
        L = self.lattice
        return {self.label(K): {L.label(h): self.label(int(self.action[K, i])) for i, h in enumerate(L.S)}
                for K in range(self.size)}

    def dot_nodes(self) -> list[str]:
        return self.labels()

    def dot_edges(self) -> list[tuple[str, str, str]]:
        L = self.lattice
        return [(self.label(K), L.label(h), self.label(Kp)) for K, h, Kp in self.edges()]

    def calculus(self) -> "CosetCalculus":
        return CosetCalculus(self)


def build_coset_diagram(L: GroupLattice, H: Iterable) -> CosetDiagram:
    G = L.group
    members = frozenset(G.index(h) for h in H)
    if not members or not is_subgroup(G, members):
        raise CosetError(f"{sorted(G.label(h) for h in members)} is not a subgroup of {G.name}")
    coset_of = np.full(G.order, -1, dtype=np.int64)
    raw = []
    for g in range(G.order):
        if coset_of[g] >= 0:
            continue
        K = tuple(sorted(int(G.mul[h, g]) for h in members))
        coset_of[list(K)] = len(raw)
        raw.append(K)
    # raw is already ordered by minimum element since g runs upward
    action = coset_of[G.mul[np.array([K[0] for K in raw])][:, L.S_array]]
    return CosetDiagram(L, members, tuple(raw), coset_of, action)


@dataclass(frozen=True)
class Relation:
    kind: str  # 'loop' or 'multi'
    coset: int
    letters: tuple[int, ...]  # (h,) or (h1, h2)
    form: Form
    closed: bool  # d(relation) lies in the span of relation-generated 2-forms
    d_matches_delta: bool  # d(ρ) ≡ −Δ(ρ) modulo the ideal

    def describe(self, D: CosetDiagram) -> str:
        L = D.lattice
        K = D.label(self.coset)
        if self.kind == "loop":
            return f"e^{K} θ^{L.label(self.letters[0])} = 0"
        h1, h2 = (L.label(h) for h in self.letters)
        return f"e^{K} (θ^{h1} − θ^{h2}) = 0"


def _relation_1form(D: CosetDiagram, K: int, letters: tuple[int, ...]) -> Form:
    L = D.lattice
    out = Form.zeros(L, 1)
    sites = list(D.cosets[K])
    out.coeffs[sites, int(L.pos[letters[0]])] += 1.0
    if len(letters) == 2:
        out.coeffs[sites, int(L.pos[letters[1]])] -= 1.0
    return out


def _bimodule_basis(D: CosetDiagram, rels: list[Form]) -> list[Form]:
    """Orthonormal basis of span{e^K ρ e^K'} over cosets K, K' and relations ρ."""
    L = D.lattice
    C = CosetCalculus(D)
    indicators = [C.e(K) for K in range(D.size)]
    out = []
    for rho in rels:
        for left in indicators:
            for right in indicators:
                v = Form(L, 1, rho.coeffs * left[:, None]).rmul(right).coeffs
                if np.abs(v).max() > 0:
                    out.append(v.ravel())
    if not out:
        return []
    A = np.array(out).T
    u, sv, _ = np.linalg.svd(A, full_matrices=False)
    rank = int((sv > L.tol * max(1.0, sv[0])).sum())
    return [Form(L, 1, u[:, i].reshape(L.n, L.k)) for i in range(rank)]


def _ideal_span(D: CosetDiagram, rels: list[Form]) -> np.ndarray:
    """Columns spanning the grade-2 part of the two-sided ideal, in normal form.

    The bimodule B generated by the relations over coset functions is closed
    under them on both sides, so its grade-2 part is spanned by B θ^h and θ^h B.
    """
    L = D.lattice
    cols = []
    for b in _bimodule_basis(D, rels):
        for h in L.S:
            th = theta(L, h)
            cols.append(normal_form(b * th).coeffs.ravel())
            cols.append(normal_form(th * b).coeffs.ravel())
    if not cols:
        return np.zeros((L.n * L.k * L.k, 0), dtype=complex)
    return np.array(cols).T


def _in_span(A: np.ndarray, v: np.ndarray, tol: float) -> bool:
    if not np.any(np.abs(v) > tol):
        return True
    if A.shape[1] == 0:
        return False
    x, *_ = np.linalg.lstsq(A, v, rcond=None)
    return bool(np.abs(A @ x - v).max() <= tol * max(1.0, np.abs(v).max()))


def reduction_relations(D: CosetDiagram, check_closure: bool = True) -> list[Relation]:
    """Loop relations e^K θ^h and multi-edge relations e^K(θ^{h1} − θ^{h2}).

    Multi-edge relations chain consecutive letters of each parallel bundle.
    """
    L = D.lattice
    specs = [("loop", K, (h,)) for K, h in D.loops()]
    for (K, _), letters in sorted(D.multi_edges().items()):
        specs += [("multi", K, (a, b)) for a, b in zip(letters, letters[1:])]
    forms = [_relation_1form(D, K, letters) for _, K, letters in specs]
    span = _ideal_span(D, forms) if check_closure else None
    out = []
    for (kind, K, letters), rho in zip(specs, forms):
        drho = d(rho)
        if check_closure:
            closed = _in_span(span, normal_form(drho).coeffs.ravel(), L.tol)
            matches = _in_span(span, normal_form(drho + Delta(rho)).coeffs.ravel(), L.tol)
        else:
            closed = matches = True
        out.append(Relation(kind, K, letters, rho, closed, matches))
    return out


class CosetCalculus:
    """Functions on G/H embedded in functions on G, with the ambient calculus restricted."""

    def __init__(self, D: CosetDiagram):
        self.diagram = D
        self.lattice = D.lattice

    def e(self, K: int) -> np.ndarray:
        out = np.zeros(self.lattice.n, dtype=complex)
        out[list(self.diagram.cosets[K])] = 1.0
        return out

    def embed(self, F) -> np.ndarray:
        """F on cosets -> Σ F(K) e^K on G."""
        F = np.asarray(F, dtype=complex)
        return F[self.diagram.coset_of]

    def restrict(self, f, tol: float | None = None) -> np.ndarray:
        """Inverse of embed; raises unless f is constant on every coset."""
        tol = self.lattice.tol if tol is None else tol
        f = np.asarray(f, dtype=complex)
        out = np.array([f[K[0]] for K in self.diagram.cosets])
        if np.abs(f - out[self.diagram.coset_of]).max(initial=0.0) > tol:
            raise CosetError("function is not constant on the cosets")
        return out

    def is_coset_function(self, f, tol: float | None = None) -> bool:
        try:
            self.restrict(f, tol)
        except CosetError:
            return False
        return True

    def shifted_coset(self, K: int, g: int) -> int:
        """K g."""
        G = self.lattice.group
        return int(self.diagram.coset_of[G.mul[self.diagram.cosets[K][0], g]])

    def right_action(self, g, F) -> np.ndarray:
        """R*_g F = Σ F(K) e^{K g^-1} on coset values."""
        G = self.lattice.group
        g = G.index(g)
        F = np.asarray(F, dtype=complex)
        out = np.zeros_like(F)
        for K in range(self.diagram.size):
            out[self.shifted_coset(K, int(G.inv[g]))] += F[K]
        return out

    def d_restricted(self, F) -> Form:
        """d F = Σ_K F(K) Σ_h (e^{K h^-1} − e^K) θ^h."""
        L = self.lattice
        G = L.group
        F = np.asarray(F, dtype=complex)
        out = Form.zeros(L, 1)
        for K in range(self.diagram.size):
            for i, h in enumerate(L.S):
                back = self.shifted_coset(K, int(G.inv[h]))
                out.coeffs[:, i] += F[K] * (self.e(back) - self.e(K))
        return out

    def d(self, F) -> Form:
        return d(Form.function(self.lattice, self.embed(F)))

    def leibniz_residual(self, F1, F2) -> float:
        f1, f2 = self.embed(F1), self.embed(F2)
        lhs = self.d(np.asarray(F1) * np.asarray(F2))
        rhs = self.d(F1).rmul(f2) + self.d(F2).lmul(f1)
        return (lhs - rhs).norm()
