"""JSON encoding of functions, forms, fields, gauge configurations and connections.

Complex numbers are ``[re, im]`` pairs; matrices are nested lists of pairs.
Readers also accept plain real numbers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .forms import Form
from .gauge import GaugeField
from .groups import build_group
from .lattice import GroupLattice
from .lincon import LinearConnection
from .vector_fields import DiscreteVF, make_discrete


def _clean(x: float) -> float:
    # avoid "-0.0" so output is byte-stable
    x = float(x)
    return 0.0 if x == 0.0 else x


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [_clean(z.real), _clean(z.imag)]


def decode_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    raise ValueError(f"cannot read {v!r} as a complex number")


def encode_array(a) -> list:
    a = np.asarray(a)
    if a.ndim == 0:
        return encode_complex(a)
    return [encode_array(x) for x in a]


def decode_matrix(v) -> np.ndarray:
    rows = [[decode_complex(x) for x in row] for row in v]
    return np.array(rows, dtype=complex)


def function_to_json(L: GroupLattice, f) -> dict:
    f = np.asarray(f)
    return {L.label(g): encode_array(f[g]) for g in range(L.n)}


def function_from_json(L: GroupLattice, data: dict) -> np.ndarray:
    values = {}
    for key, v in data.items():
        g = L.group.index(key)
        values[g] = decode_matrix(v) if isinstance(v, list) and v and isinstance(v[0], list) \
            and isinstance(v[0][0], list) else decode_complex(v)
    sample = next(iter(values.values()))
    out = np.zeros((L.n,) + np.shape(sample), dtype=complex)
    for g, v in values.items():
        out[g] = v
    return out


def form_to_json(omega: Form, tol: float = 0.0) -> dict:
    L = omega.lattice
    terms = [{"site": L.label(g), "word": [L.label(h) for h in word], "coeff": encode_array(c)}
             for g, word, c in omega.terms(tol)]
    return {"grade": omega.grade, "terms": terms}


def form_from_json(L: GroupLattice, data: dict) -> Form:
    grade = int(data["grade"])
    terms = data.get("terms", [])
    fiber = ()
    if terms and isinstance(terms[0]["coeff"][0], list):
        fiber = decode_matrix(terms[0]["coeff"]).shape
    out = Form.zeros(L, grade, fiber)
    for t in terms:
        g = L.group.index(t["site"])
        idx = L.word_index(L.positions(t["word"]))
        c = decode_matrix(t["coeff"]) if fiber else decode_complex(t["coeff"])
        out.coeffs[g, idx] += c
    return out


def discrete_to_json(X: DiscreteVF) -> dict:
    return X.labels()


def discrete_from_json(L: GroupLattice, data: dict) -> DiscreteVF:
    return make_discrete(L, {key: v for key, v in data.items()})


@dataclass
class GaugeConfig:
    lattice: GroupLattice
    field: GaugeField
    group_spec: str
    S: list[str]


def gauge_to_json(group_spec: str, Wf: GaugeField) -> dict:
    L = Wf.lattice
    W = {L.label(h): {L.label(g): encode_array(Wf.W[g, i]) for g in range(L.n)} for i, h in enumerate(L.S)}
    return {"group": group_spec, "S": [L.label(h) for h in L.S], "m": Wf.m, "W": W}


def gauge_from_json(data: dict, **lattice_kwargs) -> GaugeConfig:
    """Missing W (or missing entries of it) mean W_h(g) = I, i.e. W = θ."""
    G = build_group(data["group"])
    L = GroupLattice(G, data["S"], **lattice_kwargs)
    m = int(data.get("m", 1))
    W = np.broadcast_to(np.eye(m, dtype=complex), (L.n, L.k, m, m)).copy()
    for h_label, sites in (data.get("W") or {}).items():
        i = L.positions([h_label])[0]
        for site, mat in sites.items():
            value = decode_matrix(mat) if isinstance(mat, list) and mat and isinstance(mat[0], list) \
                else np.array([[decode_complex(mat)]])
            if value.shape != (m, m):
                raise ValueError(f"W[{h_label}][{site}] has shape {value.shape}, expected {(m, m)}")
            W[G.index(site), i] = value
    return GaugeConfig(L, GaugeField(L, W), data["group"], [L.label(h) for h in L.S])


def connection_to_json(C: LinearConnection) -> dict:
    """{h': {site: matrix over (h, h'')}}."""
    L = C.lattice
    return {L.label(hp): {L.label(g): encode_array(C.V[g, :, b, :]) for g in range(L.n)}
            for b, hp in enumerate(L.S)}


def connection_from_json(L: GroupLattice, data: dict) -> LinearConnection:
    V = np.zeros((L.n, L.k, L.k, L.k), dtype=complex)
    for hp, sites in data.items():
        b = L.positions([hp])[0]
        for site, mat in sites.items():
            V[L.group.index(site), :, b, :] = decode_matrix(mat)
    return LinearConnection(L, V)


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
