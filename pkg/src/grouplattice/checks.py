"""Seeded invariant suites shared by the CLI and the acceptance tests."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .forms import Delta, Form, d, delta_e, graded_commutator, normal_form, theta
from .gauge import (GaugeField, MatterField, matter_action, random_unitary_field, gauge_transform,
                    pure_gauge, transform_matter, yang_mills_action)
from .lattice import GroupLattice, is_bicovariant
from .lincon import LinearConnection, first_bianchi_residual, second_bianchi_residual
from .vector_fields import contract, invertibility, lie_derivative, random_basic, random_discrete

TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    passed: bool
    trials: int
    max_residual: float
    tol: float
    skipped: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def random_form(L: GroupLattice, grade: int, rng: np.random.Generator, fiber: tuple = ()) -> Form:
    shape = (L.n, L.k ** grade) + tuple(fiber)
    return Form(L, grade, rng.normal(size=shape) + 1j * rng.normal(size=shape))


def _rel(a: Form, b: Form) -> float:
    """Residual of a − b modulo relations, relative to the larger norm."""
    return normal_form(a - b).norm() / max(1.0, a.norm(), b.norm())


def _zero(a: Form) -> float:
    return normal_form(a).norm() / max(1.0, a.norm())


def _finish(name: str, residuals: list[float], tol: float) -> SuiteResult:
    worst = max(residuals, default=0.0)
    return SuiteResult(name, bool(worst <= tol), len(residuals), float(worst), tol)


def suite_d_squared(L, rng, trials=100, tol=TOL) -> SuiteResult:
    res = []
    for t in range(trials):
        omega = random_form(L, t % 3, rng)
        res.append(_zero(d(d(omega))) / max(1.0, omega.norm()))
    return _finish("d_squared", res, tol)


def suite_delta_squared(L, rng, trials=100, tol=TOL) -> SuiteResult:
    De = delta_e(L)
    res = [_zero(Delta(De))]
    for t in range(trials):
        omega = random_form(L, t % 3, rng)
        res.append(_rel(Delta(Delta(omega)), -graded_commutator(De, omega)))
    return _finish("delta_squared", res, tol)


def suite_theta_identity(L, rng=None, trials=1, tol=TOL) -> SuiteResult:
    th = theta(L)
    return _finish("theta_squared", [_rel(th * th - Delta(th), delta_e(L))], tol)


def suite_lie_cartan(L, rng, trials=100, tol=TOL) -> SuiteResult:
    if not is_bicovariant(L):
        return SuiteResult("lie_cartan", True, 0, 0.0, tol, skipped="lattice is not bicovariant")
    res = []
    for t in range(trials):
        X = random_basic(L, rng, differentiable=True)
        omega = random_form(L, 1 + t % 2, rng)
        lhs = lie_derivative(X, omega)
        rhs = contract(X, d(omega)) + d(contract(X, omega))
        res.append(_rel(lhs, rhs))
        if omega.grade > 1:
            res.append(_zero(contract(X, contract(X, omega))))
    return _finish("lie_cartan", res, tol)


def suite_invertibility_conditions(L, rng, trials=100, tol=TOL) -> SuiteResult:
    """The three invertibility conditions agree; residual counts disagreements."""
    res = []
    for _ in range(trials):
        X = random_discrete(L, rng)
        c = invertibility(X).conditions
        res.append(0.0 if len(set(c)) == 1 else 1.0)
    return _finish("invertibility_conditions", res, tol)


def suite_bianchi(L, rng, trials=20, tol=TOL) -> SuiteResult:
    res = []
    for _ in range(trials):
        C = LinearConnection.random(L, rng)
        scale = max(1.0, float(np.abs(C.V).max())) ** 3
        res.append(max(first_bianchi_residual(C, h) for h in L.S) / scale)
        res.append(second_bianchi_residual(C) / scale)
    return _finish("bianchi", res, tol)


def suite_gauge_invariance(L, rng, trials=20, m=2, tol=1e-8) -> SuiteResult:
    res = [yang_mills_action(GaugeField.trivial(L, m))]
    for _ in range(trials):
        Wf = GaugeField.random_unitary(L, m, rng)
        gamma = random_unitary_field(L.n, m, rng)
        psi = rng.normal(size=(L.n, m)) + 1j * rng.normal(size=(L.n, m))
        W2 = gauge_transform(Wf, gamma)
        psi2 = transform_matter(MatterField(psi), gamma).values
        res.append(abs(yang_mills_action(W2) - yang_mills_action(Wf)))
        res.append(abs(matter_action(psi2, W2) - matter_action(psi, Wf)))
        res.append(abs(yang_mills_action(pure_gauge(L, gamma))))
    return _finish("gauge_invariance", res, tol)


SUITES = {
    "d_squared": suite_d_squared,
    "delta_squared": suite_delta_squared,
    "theta_squared": suite_theta_identity,
    "lie_cartan": suite_lie_cartan,
    "invertibility_conditions": suite_invertibility_conditions,
    "bianchi": suite_bianchi,
    "gauge_invariance": suite_gauge_invariance,
}


def run_suites(L: GroupLattice, seed: int, trials: int = 100, m: int = 2,
               names=None) -> list[SuiteResult]:
    """Each suite gets its own generator derived from the seed, so subsets reproduce."""
    out = []
    keys = list(SUITES)
    for name in names or keys:
        rng = np.random.default_rng([seed, keys.index(name)])
        fn = SUITES[name]
        if name == "gauge_invariance":
            out.append(fn(L, rng, trials=min(trials, 20), m=m))
        elif name == "bianchi":
            out.append(fn(L, rng, trials=min(trials, 20)))
        else:
            out.append(fn(L, rng, trials=trials))
    return out
