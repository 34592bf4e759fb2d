"""Functions on a finite group: indicators, pullbacks and difference operators.

A function is a numpy array whose first axis runs over the group sites.
Trailing axes (e.g. ``(m, m)`` matrices) ride along unchanged.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np

from .groups import GroupTable


def indicator(G: GroupTable, g: int) -> np.ndarray:
    """e^g."""
    out = np.zeros(G.order, dtype=complex)
    out[g] = 1.0
    return out


def set_indicator(G: GroupTable, K: Iterable[int]) -> np.ndarray:
    """e^K = sum of e^g over g in K."""
    out = np.zeros(G.order, dtype=complex)
    out[list(K)] = 1.0
    return out


def one(G: GroupTable) -> np.ndarray:
    return np.ones(G.order, dtype=complex)


def pullback(G: GroupTable, side: str, g: int, f: np.ndarray) -> np.ndarray:
    """(R*_g f)(x) = f(x g) for side 'right'; (L*_g f)(x) = f(g x) for side 'left'."""
    f = np.asarray(f)
    if side == "right":
        return f[G.mul[:, g]]
    if side == "left":
        return f[G.mul[g, :]]
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def ell(G: GroupTable, h: int, f: np.ndarray) -> np.ndarray:
    """Forward difference ell_h f = R*_h f - f."""
    f = np.asarray(f)
    return f[G.mul[:, h]] - f


def bar_ell(G: GroupTable, h: int, f: np.ndarray) -> np.ndarray:
    """Backward difference f - R*_{h^-1} f."""
    f = np.asarray(f)
    return f - f[G.mul[:, G.inv[h]]]


def map_pullback(phi: np.ndarray, f: np.ndarray) -> np.ndarray:
    """(phi* f)(x) = f(phi(x))."""
    return np.asarray(f)[np.asarray(phi)]


def preimage_indicator(phi: np.ndarray, g: int) -> np.ndarray:
    """phi*(e^g), the indicator of phi^-1{g}."""
    return (np.asarray(phi) == g).astype(complex)
