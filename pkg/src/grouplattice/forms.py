"""Differential forms on a group lattice.

A grade-r form is stored densely as ``coeffs[g, w, ...]``: the coefficient of
``e^g theta^{w_1} ... theta^{w_r}`` with the word ``w`` flattened in base |S|
(first letter most significant).  Trailing axes hold matrix coefficients.

Forms of grade >= 2 are compared modulo the ideal generated by the 2-form
relations ``sum_{h h' = g} theta^h theta^h' = 0`` for ``g`` outside S_e.
"""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Sequence

import numpy as np

from .lattice import (GroupLattice, LatticeError, enumerate_cycles, connected_components,
                      is_differentiable_map, require_bicovariant)


class GradeCapError(ValueError):
    pass


class GradeMismatchError(ValueError):
    pass


def _fiber_product(a: np.ndarray, b: np.ndarray, fa: tuple, fb: tuple) -> np.ndarray:
    """Multiply coefficient arrays whose trailing axes are scalars or matrices."""
    if not fa and not fb:
        return a * b
    if not fa:
        return a.reshape(a.shape + (1,) * len(fb)) * b
    if not fb:
        return a * b.reshape(b.shape + (1,) * len(fa))
    return np.matmul(a, b)


class Form:
    __slots__ = ("lattice", "grade", "coeffs")

    def __init__(self, lattice: GroupLattice, grade: int, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        expected = (lattice.n, lattice.k ** grade)
        if coeffs.shape[:2] != expected:
            raise ValueError(f"coefficient shape {coeffs.shape} does not start with {expected}")
        self.lattice = lattice
        self.grade = grade
        self.coeffs = coeffs

    # constructors
    @classmethod
    def zeros(cls, L: GroupLattice, grade: int, fiber: tuple = ()) -> "Form":
        return cls(L, grade, np.zeros((L.n, L.k ** grade) + tuple(fiber), dtype=complex))

    @classmethod
    def function(cls, L: GroupLattice, f) -> "Form":
        f = np.asarray(f, dtype=complex)
        if f.ndim == 0:
            f = np.full(L.n, complex(f))
        return cls(L, 0, f[:, None])

    @classmethod
    def word(cls, L: GroupLattice, letters: Sequence, coeff=1.0, site: int | None = None) -> "Form":
        """theta^{h_1} ... theta^{h_r} (times e^site if given); letters are elements."""
        positions = L.positions(letters)
        out = cls.zeros(L, len(positions))
        idx = L.word_index(positions)
        if site is None:
            out.coeffs[:, idx] = coeff
        else:
            out.coeffs[site, idx] = coeff
        return out

    # shape helpers
    @property
    def fiber(self) -> tuple:
        return self.coeffs.shape[2:]

    @property
    def values(self) -> np.ndarray:
        """Grade-0 forms as functions."""
        if self.grade != 0:
            raise GradeMismatchError("only grade-0 forms are functions")
        return self.coeffs[:, 0]

    def copy(self) -> "Form":
        return Form(self.lattice, self.grade, self.coeffs.copy())

    def _check(self, other: "Form") -> None:
        if other.lattice is not self.lattice:
            raise ValueError("forms live on different lattices")
        if other.grade != self.grade:
            raise GradeMismatchError(f"grade {self.grade} vs {other.grade}")

    # arithmetic
    def __add__(self, other):
        if isinstance(other, Form):
            self._check(other)
            return Form(self.lattice, self.grade, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Form):
            self._check(other)
            return Form(self.lattice, self.grade, self.coeffs - other.coeffs)
        return NotImplemented

    def __neg__(self):
        return Form(self.lattice, self.grade, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Form):
            return wedge_product(self, other)
        if isinstance(other, Number):
            return Form(self.lattice, self.grade, self.coeffs * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return Form(self.lattice, self.grade, self.coeffs * other)
        return NotImplemented

    def lmul(self, f) -> "Form":
        """f * omega for a function f (scalar or matrix valued)."""
        f = np.asarray(f, dtype=complex)
        return Form(self.lattice, 0, f[:, None]) * self

    def rmul(self, f) -> "Form":
        """omega * f."""
        f = np.asarray(f, dtype=complex)
        return self * Form(self.lattice, 0, f[:, None])

    def coefficient(self, site: int, letters: Sequence) -> complex:
        return self.coeffs[site, self.lattice.word_index(self.lattice.positions(letters))]

    def terms(self, tol: float = 0.0) -> list[tuple[int, tuple[int, ...], np.ndarray]]:
        """Nonzero monomials as (site, word of elements, coefficient)."""
        L = self.lattice
        words = L.words(self.grade)
        mags = np.abs(self.coeffs).reshape(L.n, -1, int(np.prod(self.fiber, dtype=int)) or 1).max(axis=2)
        out = []
        for g, w in zip(*np.nonzero(mags > tol)):
            out.append((int(g), tuple(L.S[i] for i in words[w]), self.coeffs[g, w]))
        return out

    def norm(self) -> float:
        return float(np.abs(self.coeffs).max(initial=0.0))

    def __repr__(self) -> str:
        L = self.lattice
        parts = []
        for g, word, c in self.terms(1e-12)[:12]:
            letters = "".join(f"θ^{L.label(h)}" for h in word)
            parts.append(f"({np.round(c, 6)}) e^{L.label(g)} {letters}")
        more = " + ..." if len(self.terms(1e-12)) > 12 else ""
        return f"Form(grade={self.grade}: " + (" + ".join(parts) or "0") + more + ")"


def wedge_product(a: Form, b: Form) -> Form:
    """(e^g θ^w)(e^g' θ^w') = e^g θ^{ww'} when g' = g·(w_1···w_r), else 0."""
    if a.lattice is not b.lattice:
        raise ValueError("forms live on different lattices")
    L = a.lattice
    dest = L.shifted_sites(a.grade)
    cb = b.coeffs[dest]
    ca = a.coeffs[:, :, None]
    out = _fiber_product(ca, cb, a.fiber, b.fiber)
    return Form(L, a.grade + b.grade, out.reshape((L.n, -1) + out.shape[3:]))


def product(*forms: Form) -> Form:
    out = forms[0]
    for f in forms[1:]:
        out = out * f
    return out


def theta(L: GroupLattice, h=None) -> Form:
    """theta^h, or theta = sum_h theta^h when h is None."""
    out = Form.zeros(L, 1)
    if h is None:
        out.coeffs[:, :] = 1.0
    else:
        out.coeffs[:, L.positions([h])[0]] = 1.0
    return out


def delta_e(L: GroupLattice) -> Form:
    """sum over h in S0 of theta^h theta^{h^-1}."""
    out = Form.zeros(L, 2)
    for h in L.S0:
        i, j = int(L.pos[h]), int(L.pos[L.group.inv[h]])
        out.coeffs[:, i * L.k + j] = 1.0
    return out


def identity_form(L: GroupLattice, m: int) -> Form:
    return Form.function(L, np.broadcast_to(np.eye(m, dtype=complex), (L.n, m, m)).copy())


def Delta(omega: Form) -> Form:
    """Graded derivation with Δ(f) = 0 and Δ(θ^h) = sum_{h'h''=h} θ^h' θ^h''."""
    L = omega.lattice
    r, k = omega.grade, L.k
    fiber = omega.fiber
    out = np.zeros((L.n,) + (k,) * (r + 1) + fiber, dtype=complex)
    if r == 0:
        return Form(L, 1, out.reshape((L.n, k) + fiber))
    c = omega.coeffs.reshape((L.n,) + (k,) * r + fiber)
    splits = [(int(L.pos[L.pair_product[a, b]]), a, b)
              for a in range(k) for b in range(k) if L.pos[L.pair_product[a, b]] >= 0]
    for i in range(r):
        sign = -1.0 if i % 2 else 1.0
        src = c.reshape((L.n, k ** i, k, k ** (r - i - 1)) + fiber)
        dst = out.reshape((L.n, k ** i, k, k, k ** (r - i - 1)) + fiber)
        for letter, a, b in splits:
            dst[:, :, a, b] += sign * src[:, :, letter]
    return Form(L, r + 1, out.reshape((L.n, k ** (r + 1)) + fiber))


def graded_commutator(a: Form, b: Form) -> Form:
    sign = -1.0 if (a.grade * b.grade) % 2 else 1.0
    return a * b - sign * (b * a)


def d(omega: Form) -> Form:
    """dω = [θ, ω] − Δ(ω)."""
    L = omega.lattice
    th = theta(L)
    sign = -1.0 if omega.grade % 2 else 1.0
    return th * omega - sign * (omega * th) - Delta(omega)


# relation ideal

def relation_generators(L: GroupLattice, r: int) -> np.ndarray:
    """Columns spanning the per-site relation space of grade r."""
    k = L.k
    K = k ** r
    cols = []
    if r >= 2:
        for i in range(r - 1):
            left, right = k ** i, k ** (r - 2 - i)
            for g in L.S2:
                pairs = L.pairs_by_product[g]
                for u in range(left):
                    for v in range(right):
                        col = np.zeros(K)
                        for a, b in pairs:
                            col[((u * k + a) * k + b) * right + v] = 1.0
                        cols.append(col)
    if not cols:
        return np.zeros((K, 0))
    return np.array(cols).T


def relation_basis(L: GroupLattice, r: int) -> np.ndarray:
    """Orthonormal basis (columns) of the per-site relation space at grade r."""
    key = ("relbasis", r)
    if key in L._cache:
        return L._cache[key]
    if r > L.grade_cap:
        raise GradeCapError(f"grade {r} exceeds the lattice grade cap {L.grade_cap}")
    gens = relation_generators(L, r)
    if gens.shape[1] == 0:
        basis = np.zeros((L.k ** r, 0))
    elif r == 2:
        # disjoint supports: one normalized vector per class
        basis = gens / np.linalg.norm(gens, axis=0)
    else:
        u, s, _ = np.linalg.svd(gens, full_matrices=False)
        rank = int((s > s.max() * max(gens.shape) * 1e-12).sum())
        basis = u[:, :rank]
    L._cache[key] = basis
    return basis


def relation_rank(L: GroupLattice, r: int) -> int:
    return relation_basis(L, r).shape[1]


def independent_words(L: GroupLattice, r: int) -> int:
    return L.k ** r - relation_rank(L, r)


def normal_form(omega: Form) -> Form:
    """Orthogonal projection onto the complement of the relation space."""
    if omega.grade < 2:
        return omega.copy()
    Q = relation_basis(omega.lattice, omega.grade)
    c = omega.coeffs
    if Q.shape[1] == 0:
        return omega.copy()
    overlap = np.einsum("kq,gk...->gq...", Q, c)
    return Form(omega.lattice, omega.grade, c - np.einsum("kq,gq...->gk...", Q, overlap))


def residual(a: Form, b: Form) -> float:
    """Size of a - b modulo relations."""
    if a.grade != b.grade:
        raise GradeMismatchError(f"grade {a.grade} vs {b.grade}")
    return normal_form(a - b).norm()


def forms_equal(a: Form, b: Form, tol: float | None = None) -> bool:
    tol = a.lattice.tol if tol is None else tol
    scale = max(1.0, a.norm(), b.norm())
    return residual(a, b) <= tol * scale


def is_zero(a: Form, tol: float | None = None) -> bool:
    return forms_equal(a, Form(a.lattice, a.grade, np.zeros_like(a.coeffs)), tol)


def relation_form(L: GroupLattice, g: int) -> Form:
    """sum_{h h' = g} theta^h theta^h' as a left-invariant 2-form."""
    out = Form.zeros(L, 2)
    for a, b in L.pairs_by_product.get(g, ()):
        out.coeffs[:, a * L.k + b] = 1.0
    return out


# 2-form decomposition

@dataclass
class TwoFormParts:
    biangle: dict[tuple[int, int], np.ndarray]
    triangle: dict[int, dict[tuple[int, int], np.ndarray]]
    quadrangle: dict[int, dict[tuple[int, int], np.ndarray]]

    def projection(self, L: GroupLattice, key) -> Form:
        """p_(e), p_(h0) or p_(g) as a raw 2-form (key 'e', h0 or g)."""
        if key == "e":
            parts = self.biangle
        elif key in self.triangle:
            parts = self.triangle[key]
        else:
            parts = self.raw_quadrangle[key]
        sample = next(iter(parts.values()))
        out = Form.zeros(L, 2, sample.shape[1:])
        for (h1, h2), c in parts.items():
            out.coeffs[:, int(L.pos[h1]) * L.k + int(L.pos[h2])] = c
        return out


def decompose_2form(psi: Form) -> TwoFormParts:
    """Split into biangle, triangle and quadrangle parts.

    Quadrangle components are ``|g| ψ_{h,h'} − Σ_{ĥĥ'=g} ψ_{ĥ,ĥ'}``, which do
    not change when a multiple of a relation is added.
    """
    if psi.grade != 2:
        raise GradeMismatchError("decompose_2form needs a 2-form")
    L = psi.lattice
    e = L.group.identity
    biangle, triangle, quadrangle, raw = {}, {}, {}, {}
    for g, pairs in L.pairs_by_product.items():
        cols = {(L.S[a], L.S[b]): psi.coeffs[:, a * L.k + b] for a, b in pairs}
        if g == e:
            biangle.update(cols)
        elif L.in_S(g):
            triangle[g] = cols
        else:
            total = sum(cols.values())
            mult = len(pairs)
            quadrangle[g] = {key: mult * c - total for key, c in cols.items()}
            raw[g] = cols
    parts = TwoFormParts(biangle, triangle, quadrangle)
    parts.raw_quadrangle = raw
    return parts


# braiding and wedge on the tensor square

def _sigma_permutation(L: GroupLattice, inverse: bool = False) -> np.ndarray:
    require_bicovariant(L)
    G = L.group
    perm = np.empty(L.k * L.k, dtype=np.int64)
    for a in range(L.k):
        for b in range(L.k):
            h1, h2 = L.S[a], L.S[b]
            if not inverse:
                first, second = G.conjugate(h1, h2), h1
            else:
                first, second = h2, G.conjugate(int(G.inv[h2]), h1)
            perm[a * L.k + b] = int(L.pos[first]) * L.k + int(L.pos[second])
    return perm


def sigma(omega: Form, inverse: bool = False) -> Form:
    """σ(θ^h1 ⊗ θ^h2) = θ^{ad(h1)h2} ⊗ θ^h1, extended left-linearly.

    The input is read as an element of the tensor square (no relations).
    """
    if omega.grade != 2:
        raise GradeMismatchError("sigma acts on the tensor square of 1-forms")
    perm = _sigma_permutation(omega.lattice, inverse)
    out = np.zeros_like(omega.coeffs)
    out[:, perm] = omega.coeffs
    return Form(omega.lattice, 2, out)


def sigma_inv(omega: Form) -> Form:
    return sigma(omega, inverse=True)


def antisymmetrize(tensor: Form) -> Form:
    """½(id − σ) on the tensor square."""
    return 0.5 * (tensor - sigma(tensor))


def wedge(a: Form, b: Form) -> Form:
    """Woronowicz wedge of two 1-forms, as an element of the tensor square."""
    return antisymmetrize(a * b)


def cycle_relations(L: GroupLattice) -> list[tuple[int, tuple[int, ...], Form]]:
    """One tensor Σ θ^{h_i} ⊗ θ^{h_{i+1}} per cycle of each quadrangle class."""
    out = []
    for g in L.S2:
        for cyc in enumerate_cycles(L, g):
            t = Form.zeros(L, 2)
            for i, h in enumerate(cyc):
                nxt = cyc[(i + 1) % len(cyc)]
                t.coeffs[:, int(L.pos[h]) * L.k + int(L.pos[nxt])] += 1.0
            out.append((g, cyc, t))
    return out


# pullbacks along differentiable maps

def _pulled_theta(L: GroupLattice, phi: np.ndarray) -> np.ndarray:
    """Stack of φ*θ^h = Σ_g φ*(e^g) d φ*(e^{gh}); shape (k, n, k)."""
    key = ("pulled_theta", phi.tobytes())
    if key in L._cache:
        return L._cache[key]
    G = L.group
    pre = [Form.function(L, (phi == g).astype(complex)) for g in range(L.n)]
    dpre = [d(p) for p in pre]
    out = np.zeros((L.k, L.n, L.k), dtype=complex)
    for i, h in enumerate(L.S):
        acc = Form.zeros(L, 1)
        for g in range(L.n):
            if pre[g].coeffs.any():
                acc = acc + pre[g] * dpre[int(G.mul[g, h])]
        out[i] = acc.coeffs
    L._cache[key] = out
    return out


def pulled_word_stack(L: GroupLattice, phi, r: int) -> np.ndarray:
    """Coefficients of φ*(θ^{w}) for every word of length r; shape (k^r, n, k^r)."""
    phi = np.asarray(phi, dtype=np.int64)
    if r == 0:
        return np.ones((1, L.n, 1), dtype=complex)
    key = ("pulled_words", phi.tobytes(), r)
    if key in L._cache:
        return L._cache[key]
    first = _pulled_theta(L, phi)
    if r == 1:
        images = first
    else:
        prev = pulled_word_stack(L, phi, r - 1)
        images = np.array([(Form(L, r - 1, img) * Form(L, 1, first[i])).coeffs
                           for img in prev for i in range(L.k)])
    L._cache[key] = images
    return images


def pullback_form(L: GroupLattice, phi, omega: Form, check: bool = True) -> Form:
    """φ*ω for a differentiable map φ, multiplicative on products of 1-forms."""
    phi = np.asarray(phi, dtype=np.int64)
    if check:
        ok = is_differentiable_map(L, phi)
        if not ok:
            g, t = ok.witness
            raise LatticeError(f"map is not differentiable: arrow {L.label(g)} -> {L.label(t)}")
    r = omega.grade
    c = omega.coeffs[phi]
    if r == 0:
        return Form(L, 0, c)
    images = pulled_word_stack(L, phi, r)
    out = np.einsum("xw...,wxv->xv...", c, images)
    return Form(L, r, out)


# exactness and first cohomology

def _component_pins(L: GroupLattice) -> list[int]:
    return [comp[0] for comp in connected_components(L)]


def solve_exact(alpha: Form, tol: float | None = None):
    """Return f with df = α (pinned to 0 at the first site of each component), or None."""
    if alpha.grade != 1 or alpha.fiber:
        raise GradeMismatchError("solve_exact needs a scalar 1-form")
    L = alpha.lattice
    tol = L.tol if tol is None else tol
    A = _d0_matrix(L)
    pins = _component_pins(L)
    keep = [g for g in range(L.n) if g not in pins]
    b = alpha.coeffs.reshape(-1)
    f = np.zeros(L.n, dtype=complex)
    if keep:
        sol, *_ = np.linalg.lstsq(A[:, keep], b, rcond=None)
        f[keep] = sol
    res = np.abs(A @ f - b).max(initial=0.0)
    if res > tol * max(1.0, np.abs(b).max(initial=0.0)):
        return None
    return f


def _d0_matrix(L: GroupLattice) -> np.ndarray:
    """Matrix of d on functions, rows indexed by (site, letter)."""
    A = np.zeros((L.n * L.k, L.n))
    for g in range(L.n):
        for i, h in enumerate(L.S):
            A[g * L.k + i, int(L.group.mul[g, h])] += 1.0
            A[g * L.k + i, g] -= 1.0
    return A


def _rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int((s > max(M.shape) * 1e-10 * max(1.0, s.max(initial=0.0))).sum())


def h1_dimension(L: GroupLattice) -> int:
    """dim(closed 1-forms) − dim(exact 1-forms)."""
    cols = []
    for g in range(L.n):
        for i in range(L.k):
            basis = Form.zeros(L, 1)
            basis.coeffs[g, i] = 1.0
            cols.append(normal_form(d(basis)).coeffs.reshape(-1))
    D1 = np.array(cols).T
    closed = L.n * L.k - _rank(D1)
    exact = _rank(_d0_matrix(L))
    return closed - exact
