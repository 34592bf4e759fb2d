"""Finite groups stored as exact multiplication tables.

Products read left to right: ``gh`` applies ``g`` first, then ``h``.  For
permutations this means ``(12)(13) = (123)``.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

DEFAULT_ORDER_CAP = 10_000


class GroupSpecError(ValueError):
    pass


class OrderCapError(ValueError):
    pass


@dataclass(frozen=True)
class Cyclic:
    m: int


@dataclass(frozen=True)
class Symmetric:
    n: int


@dataclass(frozen=True)
class Alternating:
    n: int


@dataclass(frozen=True)
class DirectProduct:
    left: "GroupSpec"
    right: "GroupSpec"


GroupSpec = Union[Cyclic, Symmetric, Alternating, DirectProduct]

_FACTOR = re.compile(r"\s*([ZSA])\s*\(\s*(\d+)\s*\)\s*")


def parse_spec(text: str) -> GroupSpec:
    """Parse ``Z(4)``, ``S(3)``, ``A(5)`` or ``x``-separated products of them."""
    parts = text.strip().split("x")
    specs: list[GroupSpec] = []
    for part in parts:
        match = _FACTOR.fullmatch(part)
        if match is None:
            raise GroupSpecError(f"cannot parse group factor {part!r} in {text!r}")
        kind, size = match.group(1), int(match.group(2))
        if size < 1:
            raise GroupSpecError(f"group parameter must be >= 1, got {size}")
        specs.append({"Z": Cyclic, "S": Symmetric, "A": Alternating}[kind](size))
    spec = specs[0]
    for nxt in specs[1:]:
        spec = DirectProduct(spec, nxt)
    return spec


def spec_order(spec: GroupSpec) -> int:
    if isinstance(spec, Cyclic):
        return spec.m
    if isinstance(spec, Symmetric):
        return math.factorial(spec.n)
    if isinstance(spec, Alternating):
        return max(1, math.factorial(spec.n) // 2)
    if isinstance(spec, DirectProduct):
        return spec_order(spec.left) * spec_order(spec.right)
    raise GroupSpecError(f"not a group spec: {spec!r}")


def spec_name(spec: GroupSpec) -> str:
    if isinstance(spec, Cyclic):
        return f"Z({spec.m})"
    if isinstance(spec, Symmetric):
        return f"S({spec.n})"
    if isinstance(spec, Alternating):
        return f"A({spec.n})"
    return f"{spec_name(spec.left)}x{spec_name(spec.right)}"


def _leaves(spec: GroupSpec) -> list[GroupSpec]:
    if isinstance(spec, DirectProduct):
        return _leaves(spec.left) + _leaves(spec.right)
    return [spec]


@dataclass(frozen=True, eq=False)
class GroupTable:
    name: str
    elements: tuple[str, ...]
    mul: np.ndarray
    inv: np.ndarray
    identity: int
    kind: str
    degree: int = 0
    perms: np.ndarray | None = None
    factors: tuple["GroupTable", ...] = ()

    def __post_init__(self):
        index = {label: i for i, label in enumerate(self.elements)}
        object.__setattr__(self, "_index", index)
        self.mul.setflags(write=False)
        self.inv.setflags(write=False)

    @property
    def order(self) -> int:
        return len(self.elements)

    def label(self, g: int) -> str:
        return self.elements[g]

    def labels(self, gs: Iterable[int]) -> list[str]:
        return [self.elements[g] for g in gs]

    def index(self, literal: str | int) -> int:
        """Resolve an element literal (or pass through an index)."""
        if isinstance(literal, (int, np.integer)):
            if not 0 <= literal < self.order:
                raise KeyError(f"element index {literal} out of range")
            return int(literal)
        text = re.sub(r"\s+", "", str(literal)) if self.kind != "perm" else str(literal).strip()
        if text in self._index:
            return self._index[text]
        if self.kind == "perm":
            return self._index[self._perm_label(parse_cycles(text, self.degree))]
        if self.kind == "product":
            parts = split_top_level(text[1:-1]) if text.startswith("(") and text.endswith(")") else []
            if len(parts) != len(self.factors):
                raise KeyError(f"{literal!r} is not an element of {self.name}")
            idx = 0
            for factor, part in zip(self.factors, parts):
                idx = idx * factor.order + factor.index(part)
            return idx
        if self.kind == "cyclic" and re.fullmatch(r"-?\d+", text):
            return int(text) % self.order
        raise KeyError(f"{literal!r} is not an element of {self.name}")

    def _perm_label(self, perm: tuple[int, ...]) -> str:
        return cycle_label(perm)

    def product(self, *gs) -> int:
        """Left-to-right product of elements given as indices or literals."""
        out = self.identity
        for g in gs:
            out = int(self.mul[out, self.index(g)])
        return out

    def conjugate(self, g: int, h: int) -> int:
        return conjugate(self, g, h)


def conjugate(G: GroupTable, g: int, h: int) -> int:
    """ad(g)h = g h g^-1."""
    return int(G.mul[G.mul[g, h], G.inv[g]])


def subgroup_closure(G: GroupTable, gens: Iterable[int]) -> frozenset[int]:
    gens = [int(g) for g in gens]
    seen = {G.identity}
    frontier = [G.identity]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                for b in (int(G.mul[a, g]), int(G.mul[a, G.inv[g]])):
                    if b not in seen:
                        seen.add(b)
                        nxt.append(b)
        frontier = nxt
    return frozenset(seen)


def is_subgroup(G: GroupTable, H: Iterable[int]) -> bool:
    H = set(int(h) for h in H)
    if G.identity not in H:
        return False
    return all(int(G.mul[a, b]) in H for a in H for b in H)


def split_top_level(text: str) -> list[str]:
    """Split on commas that are not nested inside parentheses."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i].strip())
            start = i + 1
    parts.append(text[start:].strip())
    return [p for p in parts if p]


def cycle_label(perm: tuple[int, ...]) -> str:
    """Disjoint-cycle notation, 1-based, each cycle starting at its smallest point."""
    n = len(perm)
    seen = [False] * n
    cycles = []
    for start in range(n):
        if seen[start] or perm[start] == start:
            seen[start] = True
            continue
        cyc = []
        x = start
        while not seen[x]:
            seen[x] = True
            cyc.append(x + 1)
            x = perm[x]
        cycles.append(cyc)
    if not cycles:
        return "e"
    sep = " " if n >= 10 else ""
    return "".join("(" + sep.join(str(c) for c in cyc) + ")" for cyc in cycles)


def parse_cycles(text: str, degree: int) -> tuple[int, ...]:
    """Parse cycle notation; a product of several cycles composes left to right."""
    text = text.strip()
    if text in ("e", "()", ""):
        return tuple(range(degree))
    cycles = re.findall(r"\(([^()]*)\)", text)
    if "".join(f"({c})" for c in cycles) != re.sub(r"\s*\(\s*", "(", re.sub(r"\s*\)\s*", ")", text)):
        raise KeyError(f"cannot parse permutation {text!r}")
    perm = list(range(degree))
    for body in cycles:
        body = body.strip()
        if "," in body or " " in body:
            points = [int(t) for t in re.split(r"[,\s]+", body) if t]
        else:
            points = [int(ch) for ch in body]
        if len(set(points)) != len(points) or any(not 1 <= p <= degree for p in points):
            raise KeyError(f"invalid cycle ({body}) for degree {degree}")
        step = list(range(degree))
        for a, b in zip(points, points[1:] + points[:1]):
            step[a - 1] = b - 1
        perm = [step[perm[x]] for x in range(degree)]
    return tuple(perm)


def _perm_group(name: str, perms: np.ndarray) -> GroupTable:
    count, n = perms.shape
    codes = (perms * (n ** np.arange(n))).sum(axis=1)
    order = np.argsort(codes)
    sorted_codes = codes[order]
    mul = np.empty((count, count), dtype=np.int32)
    weights = n ** np.arange(n)
    for i in range(count):
        # apply perms[i] first, then perms[j]
        composed = perms[:, perms[i]]
        pos = np.searchsorted(sorted_codes, composed @ weights)
        mul[i] = order[pos]
    identity = int(np.flatnonzero((perms == np.arange(n)).all(axis=1))[0])
    inv = np.argmax(mul == identity, axis=1).astype(np.int32)
    labels = tuple(cycle_label(tuple(int(x) for x in p)) for p in perms)
    return GroupTable(name, labels, mul, inv, identity, "perm", degree=n, perms=perms)


def _build_leaf(spec: GroupSpec) -> GroupTable:
    if isinstance(spec, Cyclic):
        m = spec.m
        r = np.arange(m)
        mul = ((r[:, None] + r[None, :]) % m).astype(np.int32)
        inv = ((-r) % m).astype(np.int32)
        return GroupTable(spec_name(spec), tuple(str(i) for i in range(m)), mul, inv, 0, "cyclic")
    n = spec.n
    # lexicographic order of image tuples puts the identity first
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    if isinstance(spec, Alternating):
        parity = np.array([_parity(p) for p in perms])
        perms = perms[parity == 0]
    return _perm_group(spec_name(spec), perms)


def _parity(perm) -> int:
    perm = list(perm)
    swaps = 0
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            swaps += length - 1
    return swaps % 2


def build_group(spec: GroupSpec | str, order_cap: int = DEFAULT_ORDER_CAP) -> GroupTable:
    if isinstance(spec, str):
        spec = parse_spec(spec)
    order = spec_order(spec)
    if order > order_cap:
        raise OrderCapError(f"group order {order} exceeds cap {order_cap}")
    leaves = [_build_leaf(leaf) for leaf in _leaves(spec)]
    if len(leaves) == 1:
        return leaves[0]
    mul = leaves[0].mul.astype(np.int64)
    inv = leaves[0].inv.astype(np.int64)
    size = leaves[0].order
    for leaf in leaves[1:]:
        b = leaf.order
        mul = (mul[:, None, :, None] * b + leaf.mul[None, :, None, :]).reshape(size * b, size * b)
        inv = (inv[:, None] * b + leaf.inv[None, :]).reshape(-1)
        size *= b
    labels = tuple("(" + ",".join(combo) + ")" for combo in itertools.product(*(leaf.elements for leaf in leaves)))
    return GroupTable(spec_name(spec), labels, mul.astype(np.int32), inv.astype(np.int32), 0, "product",
                      factors=tuple(leaves))
