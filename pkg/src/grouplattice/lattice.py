"""Group lattices (Cayley digraphs) and their plaquette classification."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

from .groups import GroupTable, conjugate, subgroup_closure

DEFAULT_TOL = 1e-9
DEFAULT_GRADE_CAP = 4


class LatticeError(ValueError):
    pass


class NotBicovariantError(LatticeError):
    pass


@dataclass(frozen=True)
class Check:
    """Boolean result that carries a failure witness."""

    ok: bool
    witness: Any = None
    violations: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class Polygons:
    biangles: tuple[tuple[int, int], ...]
    triangles: tuple[tuple[int, int, int], ...]
    quadrangles: dict[int, tuple[tuple[int, int], ...]] = field(default_factory=dict)


class GroupLattice:
    """The pair (G, S) with arrows g -> g h for h in S.

    Words in S are handled by position: letter ``i`` stands for ``S[i]``.
    """

    def __init__(self, group: GroupTable, S: Iterable, *, tol: float = DEFAULT_TOL,
                 grade_cap: int = DEFAULT_GRADE_CAP):
        S_idx: list[int] = []
        for s in S:
            try:
                g = group.index(s)
            except KeyError as exc:
                raise LatticeError(f"{s!r} is not an element of {group.name}") from exc
            if g not in S_idx:
                S_idx.append(g)
        if not S_idx:
            raise LatticeError("S must be nonempty")
        if group.identity in S_idx:
            raise LatticeError("S must not contain the identity")
        self.group = group
        self.S = tuple(S_idx)
        self.tol = tol
        self.grade_cap = grade_cap
        self._cache: dict = {}
        pos = np.full(group.order, -1, dtype=np.int64)
        pos[list(self.S)] = np.arange(len(self.S))
        self.pos = pos
        self.pos.setflags(write=False)

    # basic sizes
    @property
    def n(self) -> int:
        return self.group.order

    @property
    def k(self) -> int:
        return len(self.S)

    @property
    def S_e(self) -> tuple[int, ...]:
        return self.S + (self.group.identity,)

    def in_S(self, g: int) -> bool:
        return self.pos[g] >= 0

    def in_S_e(self, g: int) -> bool:
        return self.pos[g] >= 0 or g == self.group.identity

    def label(self, g: int) -> str:
        return self.group.label(g)

    def letter(self, i: int) -> int:
        return self.S[i]

    @cached_property
    def S_array(self) -> np.ndarray:
        return np.array(self.S, dtype=np.int64)

    @cached_property
    def neighbours(self) -> np.ndarray:
        """``neighbours[g, i] = g S[i]``."""
        return self.group.mul[:, self.S_array].astype(np.int64)

    def arrows(self) -> list[tuple[int, int, int]]:
        return [(g, h, int(self.group.mul[g, h])) for g in range(self.n) for h in self.S]

    # classification
    @cached_property
    def pair_product(self) -> np.ndarray:
        """``pair_product[i, j] = S[i] S[j]``."""
        return self.group.mul[np.ix_(self.S_array, self.S_array)].astype(np.int64)

    @cached_property
    def S0(self) -> tuple[int, ...]:
        return tuple(h for h in self.S if self.in_S(int(self.group.inv[h])))

    @cached_property
    def S1(self) -> tuple[int, ...]:
        products = set(self.pair_product.ravel().tolist())
        return tuple(h for h in self.S if h in products)

    @cached_property
    def S2(self) -> tuple[int, ...]:
        products = set(self.pair_product.ravel().tolist())
        return tuple(sorted(g for g in products if not self.in_S_e(g)))

    @cached_property
    def pairs_by_product(self) -> dict[int, tuple[tuple[int, int], ...]]:
        """Product g -> list of letter-position pairs (i, j) with S[i] S[j] = g."""
        out: dict[int, list] = {}
        for i in range(self.k):
            for j in range(self.k):
                out.setdefault(int(self.pair_product[i, j]), []).append((i, j))
        return {g: tuple(v) for g, v in out.items()}

    def multiplicity(self, g: int) -> int:
        return len(self.pairs_by_product.get(g, ()))

    def independent_2form_count(self) -> int:
        return self.k ** 2 - len(self.S2)

    def polygons(self) -> Polygons:
        return enumerate_polygons(self)

    # word helpers
    def words(self, r: int) -> np.ndarray:
        key = ("words", r)
        if key not in self._cache:
            if r == 0:
                arr = np.zeros((1, 0), dtype=np.int64)
            else:
                arr = np.array(list(itertools.product(range(self.k), repeat=r)), dtype=np.int64)
            self._cache[key] = arr
        return self._cache[key]

    def word_products(self, r: int) -> np.ndarray:
        """Group element given by the product of the letters of each word."""
        key = ("wprod", r)
        if key not in self._cache:
            if r == 0:
                out = np.array([self.group.identity])
            else:
                prev = self.word_products(r - 1)
                out = self.group.mul[prev[:, None], self.S_array[None, :]].reshape(-1).astype(np.int64)
            self._cache[key] = out
        return self._cache[key]

    def shifted_sites(self, r: int) -> np.ndarray:
        """``out[g, w] = g * (w_1 ... w_r)``."""
        key = ("shift", r)
        if key not in self._cache:
            self._cache[key] = self.group.mul[:, self.word_products(r)].astype(np.int64)
        return self._cache[key]

    def word_index(self, letters: Sequence[int]) -> int:
        idx = 0
        for i in letters:
            idx = idx * self.k + int(i)
        return idx

    def positions(self, elements: Sequence) -> list[int]:
        out = []
        for h in elements:
            p = int(self.pos[self.group.index(h)])
            if p < 0:
                raise LatticeError(f"{h!r} is not in S")
            out.append(p)
        return out

    def __repr__(self) -> str:
        return f"GroupLattice({self.group.name}, S={self.group.labels(self.S)})"


def build_lattice(G: GroupTable, S: Iterable, **kwargs) -> GroupLattice:
    return GroupLattice(G, S, **kwargs)


def connected_components(L: GroupLattice) -> list[tuple[int, ...]]:
    """Weakly connected components, ordered by their smallest site."""
    comp = np.full(L.n, -1, dtype=np.int64)
    inverse_steps = L.group.inv[L.S_array]
    out = []
    for start in range(L.n):
        if comp[start] >= 0:
            continue
        cid = len(out)
        comp[start] = cid
        stack, members = [start], [start]
        while stack:
            g = stack.pop()
            for h in itertools.chain(L.S, inverse_steps):
                nxt = int(L.group.mul[g, h])
                if comp[nxt] < 0:
                    comp[nxt] = cid
                    stack.append(nxt)
                    members.append(nxt)
        out.append(tuple(sorted(members)))
    return out


def enumerate_polygons(L: GroupLattice) -> Polygons:
    e = L.group.identity
    biangles, triangles, quads = [], [], {}
    for i in range(L.k):
        for j in range(L.k):
            h1, h2 = L.S[i], L.S[j]
            g = int(L.pair_product[i, j])
            if g == e:
                if i <= j:
                    biangles.append((h1, h2))
            elif L.in_S(g):
                triangles.append((g, h1, h2))
            else:
                quads.setdefault(g, []).append((h1, h2))
    quads = {g: tuple(quads[g]) for g in sorted(quads)}
    return Polygons(tuple(biangles), tuple(triangles), quads)


def is_right_differentiable(L: GroupLattice, g: int) -> Check:
    """R_g is differentiable iff ad(g^-1) S is contained in S."""
    g_inv = int(L.group.inv[g])
    for h in L.S:
        image = conjugate(L.group, g_inv, h)
        if not L.in_S(image):
            return Check(False, (g, h, image))
    return Check(True)


def is_bicovariant(L: GroupLattice) -> Check:
    if "bicov" not in L._cache:
        result = Check(True)
        for g in L.S:
            for h in L.S:
                image = conjugate(L.group, g, h)
                if not L.in_S(image):
                    result = Check(False, (g, h, image))
                    break
            if not result:
                break
        L._cache["bicov"] = result
    return L._cache["bicov"]


def require_bicovariant(L: GroupLattice) -> None:
    check = is_bicovariant(L)
    if not check:
        g, h, image = check.witness
        raise NotBicovariantError(
            f"ad({L.label(g)}){L.label(h)} = {L.label(image)} is not in S")


def is_differentiable_map(L: GroupLattice, phi: Sequence[int]) -> Check:
    """Every arrow g -> gh must map to an arrow or collapse to a point.

    The witness is the first violating arrow ``(g, gh)`` in site order; all
    violations are listed in ``violations``.
    """
    phi = np.asarray(phi, dtype=np.int64)
    inv = L.group.inv
    violations = []
    for g in range(L.n):
        for h in L.S:
            target = int(L.group.mul[g, h])
            step = int(L.group.mul[inv[phi[g]], phi[target]])
            if not L.in_S_e(step):
                violations.append((g, target))
    if violations:
        return Check(False, violations[0], tuple(violations))
    return Check(True)


def left_translation(L: GroupLattice, g: int) -> np.ndarray:
    return L.group.mul[g, :].astype(np.int64)


def right_translation(L: GroupLattice, g: int) -> np.ndarray:
    return L.group.mul[:, g].astype(np.int64)


def is_universal(L: GroupLattice) -> bool:
    """Every two distinct sites of a component are joined by an arrow."""
    for comp in connected_components(L):
        members = set(comp)
        for g in comp:
            targets = set(L.neighbours[g].tolist())
            if members - {g} - targets:
                return False
    return True


def enumerate_cycles(L: GroupLattice, g: int) -> list[tuple[int, ...]]:
    """Split the pairs (h, h') with h h' = g into cycles h1 h2 = h2 h3 = ... = hr h1.

    Each cycle is reported as the sequence (h1, ..., hr) of elements; walks
    start from the first unvisited pair in S-order.
    """
    require_bicovariant(L)
    pairs = L.pairs_by_product.get(g, ())
    remaining = list(pairs)
    visited = set()
    cycles = []
    G = L.group
    for start in remaining:
        if start in visited:
            continue
        seq = []
        i, j = start
        while (i, j) not in visited:
            visited.add((i, j))
            seq.append(L.S[i])
            # next pair (h2, h3) with h3 = ad(h2^-1) h1
            h3 = conjugate(G, int(G.inv[L.S[j]]), L.S[i])
            i, j = j, int(L.pos[h3])
        cycles.append(tuple(seq))
    return cycles


def classification_report(L: GroupLattice) -> dict:
    bicov = bool(is_bicovariant(L))
    lab = L.label
    s2 = []
    for g in L.S2:
        entry = {
            "g": lab(g),
            "multiplicity": L.multiplicity(g),
            "pairs": [[lab(L.S[i]), lab(L.S[j])] for i, j in L.pairs_by_product[g]],
        }
        if bicov:
            entry["cycles"] = [[lab(h) for h in cyc] for cyc in enumerate_cycles(L, g)]
        s2.append(entry)
    return {
        "S0": [lab(h) for h in L.S0],
        "S1": [lab(h) for h in L.S1],
        "S2": s2,
    }


def export_dot(obj, name: str = "lattice") -> str:
    """DOT text for a lattice or a coset diagram (anything with ``dot_edges``)."""
    if hasattr(obj, "dot_edges"):
        nodes, edges = obj.dot_nodes(), obj.dot_edges()
    else:
        nodes = list(obj.group.elements)
        edges = [(obj.label(g), obj.label(h), obj.label(t)) for g, h, t in obj.arrows()]
    lines = [f"digraph {name} {{"]
    for node in nodes:
        lines.append(f'  "{node}";')
    for src, lab, dst in edges:
        lines.append(f'  "{src}" -> "{dst}" [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def identity_component(L: GroupLattice) -> frozenset[int]:
    return subgroup_closure(L.group, L.S)
