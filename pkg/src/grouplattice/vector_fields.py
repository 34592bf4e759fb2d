"""Vector fields X = sum_h X^h ell_h, discrete fields, flows and contraction."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .forms import (Form, GradeMismatchError, _pulled_theta, pullback_form, pulled_word_stack)
from .lattice import (Check, GroupLattice, is_differentiable_map, require_bicovariant,
                      right_translation)


class VectorFieldError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class VectorField:
    """General field; ``components[g, i]`` is X^{S[i]}(g)."""

    lattice: GroupLattice
    components: np.ndarray

    def __call__(self, f) -> np.ndarray:
        f = np.asarray(f)
        nb = self.lattice.neighbours
        diff = f[nb] - f[:, None]
        return np.einsum("gi,gi...->g...", self.components, diff)

    def pair(self, alpha: Form) -> np.ndarray:
        """<X, α> = sum_h X^h α_h for a 1-form with left coefficients."""
        if alpha.grade != 1:
            raise GradeMismatchError("pairing needs a 1-form")
        return np.einsum("gi,gi...->g...", self.components, alpha.coeffs)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.lattice, self.components + other.components)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.lattice, self.components - other.components)

    def scale(self, f) -> "VectorField":
        return VectorField(self.lattice, np.asarray(f)[:, None] * self.components)


def ell_field(L: GroupLattice, h) -> VectorField:
    comps = np.zeros((L.n, L.k), dtype=complex)
    comps[:, L.positions([h])[0]] = 1.0
    return VectorField(L, comps)


@dataclass(frozen=True, eq=False)
class DiscreteVF:
    """Discrete field given by s: G -> S_e (element indices)."""

    lattice: GroupLattice
    s: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def components(self) -> np.ndarray:
        L = self.lattice
        comps = np.zeros((L.n, L.k), dtype=complex)
        mask = L.pos[self.s] >= 0
        comps[np.flatnonzero(mask), L.pos[self.s[mask]]] = 1.0
        return comps

    def as_vector_field(self) -> VectorField:
        return VectorField(self.lattice, self.components)

    @property
    def flow(self) -> np.ndarray:
        return self.lattice.group.mul[np.arange(self.lattice.n), self.s].astype(np.int64)

    def __call__(self, f) -> np.ndarray:
        f = np.asarray(f)
        return f[self.flow] - f

    def labels(self) -> dict[str, str]:
        lab = self.lattice.label
        return {lab(g): lab(int(t)) for g, t in enumerate(self.s)}


def make_discrete(L: GroupLattice, s) -> DiscreteVF:
    """Build from a sequence over sites or a mapping site -> step (labels or indices)."""
    G = L.group
    if isinstance(s, Mapping):
        arr = np.full(L.n, -1, dtype=np.int64)
        for site, step in s.items():
            arr[G.index(site)] = G.index(step)
        if (arr < 0).any():
            missing = [L.label(g) for g in np.flatnonzero(arr < 0)]
            raise VectorFieldError(f"s is not total; missing sites {missing}")
    else:
        arr = np.array([G.index(x) for x in s], dtype=np.int64)
        if arr.shape != (L.n,):
            raise VectorFieldError(f"s must have one entry per site ({L.n})")
    bad = [g for g in range(L.n) if not L.in_S_e(int(arr[g]))]
    if bad:
        raise VectorFieldError(f"s({L.label(bad[0])}) = {L.label(int(arr[bad[0]]))} is not in S_e")
    arr.setflags(write=False)
    return DiscreteVF(L, arr)


def constant_field(L: GroupLattice, h) -> DiscreteVF:
    return make_discrete(L, [h] * L.n)


def validate_discrete(X: VectorField, tol: float | None = None) -> DiscreteVF:
    L = X.lattice
    tol = L.tol if tol is None else tol
    c = X.components
    rounded = np.round(c.real)
    if np.abs(c - rounded).max(initial=0.0) > tol or ((rounded != 0) & (rounded != 1)).any():
        raise VectorFieldError("components are not indicator functions")
    counts = rounded.sum(axis=1)
    if (counts > 1).any():
        g = int(np.flatnonzero(counts > 1)[0])
        raise VectorFieldError(f"two nonzero components at site {L.label(g)}")
    s = np.full(L.n, L.group.identity, dtype=np.int64)
    for g, i in zip(*np.nonzero(rounded)):
        s[g] = L.S[i]
    return make_discrete(L, s)


def flow(X: DiscreteVF) -> np.ndarray:
    return X.flow


def apply_flow_pullback(X: DiscreteVF, f) -> np.ndarray:
    """φ*_X f = (I + X) f."""
    return np.asarray(f)[X.flow]


# invertibility

@dataclass(frozen=True)
class Invertibility:
    invertible: bool
    conditions: tuple[bool, bool, bool]
    r: np.ndarray | None = None
    witness: int | None = None

    def __bool__(self) -> bool:
        return self.invertible


def _incoming_count(X: DiscreteVF) -> np.ndarray:
    """sum_{h in S_e} X^h(g h^-1) for each g."""
    return np.bincount(X.flow, minlength=X.lattice.n)


def invertibility(X: DiscreteVF) -> Invertibility:
    L = X.lattice
    G = L.group
    e = G.identity
    phi = X.flow
    # (1) I + X is bijective on functions: its matrix has full rank
    M = np.zeros((L.n, L.n))
    M[np.arange(L.n), phi] = 1.0
    cond1 = np.linalg.matrix_rank(M) == L.n
    # (2) as stated with S (not S_e)
    cond2 = True
    for g in range(L.n):
        incoming = sum(1 for h in L.S if X.s[G.mul[g, G.inv[h]]] == h)
        if X.s[g] != e and incoming != 1:
            cond2 = False
        if X.s[g] == e and incoming != 0:
            cond2 = False
    # (3)
    counts = _incoming_count(X)
    cond3 = bool((counts == 1).all())
    conditions = (bool(cond1), cond2, cond3)
    if not cond3:
        witness = int(np.flatnonzero(counts != 1)[0])
        return Invertibility(False, conditions, witness=witness)
    r = np.empty(L.n, dtype=np.int64)
    r[phi] = X.s
    return Invertibility(True, conditions, r=r)


def inverse_flow(X: DiscreteVF) -> np.ndarray:
    info = invertibility(X)
    if not info:
        raise VectorFieldError(f"flow is not invertible at site {X.lattice.label(info.witness)}")
    G = X.lattice.group
    return G.mul[np.arange(X.lattice.n), G.inv[info.r]].astype(np.int64)


def is_basic(X: DiscreteVF) -> bool:
    L = X.lattice
    return bool((L.pos[X.s] >= 0).all()) and bool(invertibility(X))


def is_flow_differentiable(X: DiscreteVF) -> Check:
    return is_differentiable_map(X.lattice, X.flow)


def s_compatible(X: DiscreteVF) -> bool:
    """(g s(g))^-1 g' s(g') in S_e for every arrow g -> g'."""
    L = X.lattice
    G = L.group
    phi = X.flow
    for g in range(L.n):
        for h in L.S:
            step = G.mul[G.inv[phi[g]], phi[G.mul[g, h]]]
            if not L.in_S_e(int(step)):
                return False
    return True


def intertwiner(X: DiscreteVF, Y: DiscreteVF) -> DiscreteVF | None:
    """Discrete Z with φ*_Y φ*_X = φ*_X φ*_Z, or None.

    s_Z is fixed on the image of φ_X; elsewhere it is set to e.
    """
    L = X.lattice
    G = L.group
    phiX, phiY = X.flow, Y.flow
    sZ = np.full(L.n, -1, dtype=np.int64)
    for g in range(L.n):
        target = int(phiX[g])
        value = int(G.mul[G.inv[target], phiX[phiY[g]]])
        if not L.in_S_e(value):
            return None
        if sZ[target] >= 0 and sZ[target] != value:
            return None
        sZ[target] = value
    sZ[sZ < 0] = G.identity
    return make_discrete(L, sZ)


def enumerate_discrete_fields(L: GroupLattice, include_identity: bool = True,
                              limit: int = 200_000) -> Iterator[DiscreteVF]:
    steps = list(L.S) + ([L.group.identity] if include_identity else [])
    if len(steps) ** L.n > limit:
        raise VectorFieldError(f"{len(steps)}^{L.n} fields exceed the enumeration limit")
    for s in itertools.product(steps, repeat=L.n):
        yield make_discrete(L, s)


def random_discrete(L: GroupLattice, rng: np.random.Generator, p_rest: float = 0.2) -> DiscreteVF:
    steps = np.array(list(L.S), dtype=np.int64)
    s = steps[rng.integers(0, L.k, size=L.n)]
    rest = rng.random(L.n) < p_rest
    s[rest] = L.group.identity
    return make_discrete(L, s)


def random_basic(L: GroupLattice, rng: np.random.Generator, differentiable: bool = False,
                 attempts: int = 1000) -> DiscreteVF:
    """Random basic field by randomized matching of sites to S-steps."""
    for _ in range(attempts):
        order = rng.permutation(L.n)
        s = np.full(L.n, -1, dtype=np.int64)
        used = set()
        ok = _match(L, order, 0, s, used, rng)
        if not ok:
            continue
        X = make_discrete(L, s)
        if not differentiable or is_flow_differentiable(X):
            return X
    raise VectorFieldError("no basic field found")


def _match(L, order, depth, s, used, rng) -> bool:
    if depth == len(order):
        return True
    g = int(order[depth])
    for i in rng.permutation(L.k):
        t = int(L.group.mul[g, L.S[i]])
        if t not in used:
            used.add(t)
            s[g] = L.S[i]
            if _match(L, order, depth + 1, s, used, rng):
                return True
            used.discard(t)
    s[g] = -1
    return False


def basic_basis(L: GroupLattice, fixed: Mapping | None = None,
                differentiable: bool = False) -> list[DiscreteVF] | None:
    """Basic fields X_h (h in S) with s_{X_h}(e) = h forming a per-site permutation of S.

    ``fixed`` maps some h to prescribed fields.  Backtracking over sites tries
    the identity assignment first, so without constraints the result is
    {ell_h}.  Returns None when no basis exists.
    """
    require_bicovariant(L)
    G = L.group
    k = L.k
    fixed = {G.index(h): X for h, X in (fixed or {}).items()}
    assign = np.full((k, L.n), -1, dtype=np.int64)
    for h, X in fixed.items():
        assign[int(L.pos[h])] = X.s
    targets = [set() for _ in range(k)]
    sites = [G.identity] + [g for g in range(L.n) if g != G.identity]
    perms = list(itertools.permutations(range(k)))

    def options(g):
        for p in perms:
            choice = [L.S[p[i]] for i in range(k)]
            if g == G.identity and choice != list(L.S):
                continue
            if any(assign[i, g] >= 0 and assign[i, g] != choice[i] for i in range(k)):
                continue
            yield choice

    def place(depth: int) -> bool:
        if depth == len(sites):
            return True
        g = sites[depth]
        saved = assign[:, g].copy()
        for choice in options(g):
            dests = [int(G.mul[g, c]) for c in choice]
            if any(dests[i] in targets[i] for i in range(k)):
                continue
            for i in range(k):
                targets[i].add(dests[i])
                assign[i, g] = choice[i]
            if place(depth + 1):
                return True
            for i in range(k):
                targets[i].discard(dests[i])
            assign[:, g] = saved
        return False

    def search() -> Iterator[list[DiscreteVF]]:
        if place(0):
            yield [make_discrete(L, assign[i]) for i in range(k)]

    for basis in search():
        if not differentiable or all(is_flow_differentiable(X) for X in basis):
            return basis
    return None


def dual_basis(basis: Sequence[DiscreteVF]) -> list[Form]:
    """1-forms α^h with <X_h, α^h'> = δ."""
    L = basis[0].lattice
    k = L.k
    # M[g][h', h] = X_h^{h'}(g)
    M = np.stack([X.components for X in basis], axis=2)
    inv = np.linalg.inv(M)
    out = []
    for a in range(k):
        out.append(Form(L, 1, inv[:, a, :]))
    return out


# right actions on forms

def right_pullback(L: GroupLattice, h: int, omega: Form) -> Form:
    """R*_h on forms (needs R_h differentiable)."""
    return pullback_form(L, right_translation(L, h), omega)


def R_X(X: DiscreteVF, omega: Form) -> Form:
    """sum_{h in S_e} X^h R*_h ω."""
    L = X.lattice
    require_bicovariant(L)
    out = Form(L, omega.grade, np.zeros_like(omega.coeffs))
    for h in sorted(set(int(v) for v in X.s)):
        mask = (X.s == h).astype(complex)
        out = out + right_pullback(L, h, omega).lmul(mask)
    return out


def R_X_inv(X: DiscreteVF, omega: Form) -> Form:
    """sum_{h in S_e} (R*_{h^-1} X^h) R*_{h^-1} ω."""
    L = X.lattice
    require_bicovariant(L)
    if not invertibility(X):
        raise VectorFieldError("flow is not invertible")
    G = L.group
    out = Form(L, omega.grade, np.zeros_like(omega.coeffs))
    for h in sorted(set(int(v) for v in X.s)):
        h_inv = int(G.inv[h])
        mask = (X.s == h).astype(complex)[G.mul[:, h_inv]]
        out = out + right_pullback(L, h_inv, omega).lmul(mask)
    return out


def R_X_star(X: DiscreteVF, Y: VectorField | DiscreteVF):
    """(R_{X*}Y)^{h'}(g) = Y^{ad(r(g)) h'}(g r(g)^-1); discrete in, discrete out."""
    L = X.lattice
    require_bicovariant(L)
    info = invertibility(X)
    if not info:
        raise VectorFieldError("flow is not invertible")
    G = L.group
    r = info.r
    back = G.mul[np.arange(L.n), G.inv[r]]
    if isinstance(Y, DiscreteVF):
        s = [G.conjugate(int(G.inv[r[g]]), int(Y.s[back[g]])) for g in range(L.n)]
        return make_discrete(L, s)
    comps = np.zeros_like(Y.components)
    for g in range(L.n):
        for j, hp in enumerate(L.S):
            comps[g, j] = Y.components[back[g], int(L.pos[G.conjugate(int(r[g]), hp)])]
    return VectorField(L, comps)


def R_X_functions(X: DiscreteVF, f) -> np.ndarray:
    """R_X on functions: f ↦ f(g s_X(g))."""
    return np.asarray(f)[X.flow]


def polygon_relation(X: DiscreteVF, Y: DiscreteVF, *others: DiscreteVF) -> str | None:
    """Biangle (X, Y), triangle (X, Y, Z) or quadrangle (X, Y, W, Z) test.

    Uses the pointwise product (s_Y s_X)(g) = s_Y(g) s_X(g).
    """
    L = X.lattice
    require_bicovariant(L)
    fields = (X, Y) + others
    if not all(is_basic(F) for F in fields):
        raise VectorFieldError("polygon relations are defined for basic fields")
    G = L.group
    prod = G.mul[Y.s, X.s]
    if not others:
        return "biangle" if (prod == G.identity).all() else None
    if len(others) == 1:
        (Z,) = others
        return "triangle" if (prod == Z.s).all() else None
    if len(others) == 2:
        W, Z = others
        outside = all(not L.in_S_e(int(p)) for p in prod)
        return "quadrangle" if outside and (prod == G.mul[W.s, Z.s]).all() else None
    raise TypeError("polygon_relation takes two to four fields")


def composed_right_action(X: DiscreteVF, Y: DiscreteVF, f) -> np.ndarray:
    """R_X R_{R_{X*}Y} on a function, computed from the definitions."""
    Z = R_X_star(X, Y)
    return R_X_functions(X, R_X_functions(Z, f))


# Lie derivatives and contraction

def _require_differentiable_flow(X: DiscreteVF) -> None:
    check = is_flow_differentiable(X)
    if not check:
        g, t = check.witness
        L = X.lattice
        raise VectorFieldError(f"flow is not differentiable: arrow {L.label(g)} -> {L.label(t)}")


def push_forward_components(L: GroupLattice, phi: np.ndarray, Y: VectorField) -> VectorField:
    """φ_* Y for an invertible differentiable map φ: components <Y, φ*θ^h> ∘ φ^-1."""
    pulled = _pulled_theta(L, phi)
    at_source = np.einsum("xj,hxj->xh", Y.components, pulled)
    comps = np.zeros_like(at_source)
    comps[phi] = at_source
    return VectorField(L, comps)


def push_forward(phi: np.ndarray, X: DiscreteVF) -> DiscreteVF:
    """Discrete field with flow φ ∘ φ_X ∘ φ^-1 (φ bijective)."""
    L = X.lattice
    phi = np.asarray(phi, dtype=np.int64)
    inv = np.empty_like(phi)
    inv[phi] = np.arange(L.n)
    psi = phi[X.flow[inv]]
    s = L.group.mul[L.group.inv[np.arange(L.n)], psi]
    return make_discrete(L, s)


def lie_derivative(X: DiscreteVF, target):
    L = X.lattice
    if isinstance(target, Form):
        _require_differentiable_flow(X)
        return pullback_form(L, X.flow, target, check=False) - target
    if isinstance(target, (VectorField, DiscreteVF)):
        _require_differentiable_flow(X)
        if not invertibility(X):
            raise VectorFieldError("flow is not invertible")
        Y = target.as_vector_field() if isinstance(target, DiscreteVF) else target
        return Y - push_forward_components(L, X.flow, Y)
    return X(np.asarray(target))


def contract(X: DiscreteVF, omega: Form) -> Form:
    """X⌟ω via X⌟(θ^h ω') = X^h φ*_X ω' − θ^h X⌟ω', left-linear."""
    L = X.lattice
    r = omega.grade
    if r == 0:
        raise GradeMismatchError("contraction of a function is zero of grade -1")
    _require_differentiable_flow(X)
    k = L.k
    rest = r - 1
    c = omega.coeffs.reshape((L.n, k, k ** rest) + omega.fiber)
    comps = X.components
    images = pulled_word_stack(L, X.flow, rest)  # (K', n, K')
    term1 = np.einsum("xhw...,xh,wxv->xv...", c, comps, images)
    if rest == 0:
        return Form(L, 0, term1)
    B = _contract_words(X, rest)  # (K', n, K'')
    shifted = B[:, L.neighbours]  # (K', n, k, K'')
    term2 = np.einsum("xhw...,wxhu->xhu...", c, shifted)
    term2 = term2.reshape((L.n, -1) + omega.fiber)
    return Form(L, r - 1, term1 - term2)


def _contract_words(X: DiscreteVF, r: int) -> np.ndarray:
    key = ("contract_words", r)
    if key not in X._cache:
        L = X.lattice
        K = L.k ** r
        stack = []
        for w in range(K):
            word = Form.zeros(L, r)
            word.coeffs[:, w] = 1.0
            stack.append(contract(X, word).coeffs)
        X._cache[key] = np.array(stack)
    return X._cache[key]


# integral curves

def integral_curve(X: DiscreteVF, g0: int, T: int) -> list[int]:
    """γ(0) = g0, γ(t+1) = γ(t) s_X(γ(t))."""
    if T < 0:
        raise ValueError("T must be >= 0")
    phi = X.flow
    curve = [int(g0)]
    for _ in range(T):
        curve.append(int(phi[curve[-1]]))
    return curve


def flow_power(X: DiscreteVF, f, t: int) -> np.ndarray:
    """(I + X)^t f."""
    out = np.asarray(f)
    for _ in range(t):
        out = out + X(out)
    return out
