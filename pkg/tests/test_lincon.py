import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grouplattice.forms import Form, delta_e, forms_equal, theta
from grouplattice.lattice import enumerate_polygons
from grouplattice.lincon import (LinearConnection, SingularTransportError, U_transport,
                                 U_transport_along, contraction_identity_residual, curvature_matrix,
                                 curvature_row, first_bianchi_residual, hat_transport,
                                 inverse_transport, is_discrete, is_torsion_free, nabla_on_vf,
                                 nabla_theta, nabla_theta_expanded, second_bianchi_residual, torsion,
                                 torsion_free_modulo_relations, torsion_report, torsion_via_nabla,
                                 transport_1form, transport_1form_along, transport_invertibility,
                                 transport_vf, transport_vf_along)
from grouplattice.vector_fields import VectorField, constant_field, ell_field

from conftest import A4_S, LATTICE_SPECS, make_lattice

LATTICES = {name: make_lattice(*spec) for name, spec in LATTICE_SPECS.items()}
ALL_LATTICES = dict(LATTICES, a4=make_lattice("A(4)", A4_S), z3z3=make_lattice("Z(3)xZ(3)", ["(0,1)", "(1,0)"]))


def random_vf(L, rng):
    return VectorField(L, rng.normal(size=(L.n, L.k)) + 1j * rng.normal(size=(L.n, L.k)))


def random_1form(L, rng):
    return Form(L, 1, rng.normal(size=(L.n, L.k)) + 1j * rng.normal(size=(L.n, L.k)))


def random_permutation_connection(L, rng):
    perms = np.array([[rng.permutation(L.k) for _ in range(L.k)] for _ in range(L.n)])
    return LinearConnection.from_permutations(L, perms), perms


@pytest.mark.parametrize("name", sorted(ALL_LATTICES))
def test_canonical_connection_is_torsion_free(name):
    C = LinearConnection.canonical(ALL_LATTICES[name])
    report = torsion_report(C)
    assert report.torsion_free
    assert is_torsion_free(C)
    assert torsion_free_modulo_relations(C)


def test_zero_connection_has_torsion_on_s3(s3):
    C = LinearConnection.zero(s3)
    report = torsion_report(C)
    assert not report.torsion_free
    assert not report.biangle_free
    assert not torsion_free_modulo_relations(C)
    G = s3.group
    h = G.index("(12)")
    want = Form.zeros(s3, 2)
    for a in s3.S:
        for b in s3.S:
            coeff = float(a == h) - float(G.mul[a, b] == h)
            if coeff:
                want = want + coeff * (theta(s3, a) * theta(s3, b))
    assert forms_equal(torsion(C, h), want)


def test_report_consistency_on_random_connections(lattice, rng):
    for _ in range(5):
        C = LinearConnection.random(lattice, rng)
        report = torsion_report(C)
        assert report.torsion_free == torsion_free_modulo_relations(C)
        d = report.to_dict(lattice.label)
        assert set(d) >= {"biangle_free", "triangle_free", "quadrangle_free", "torsion_free", "norms"}


def test_report_detects_each_part(z4):
    # Z4 {1,2}: biangle 2+2, triangle 1+1 = 2, quadrangle 1+2 = 2+1 = 3
    C = LinearConnection.canonical(z4)
    V = C.V.copy()
    V[0, 0, 1, 1] += 1.0  # V^1_{2,2} at site 0 touches the biangle 2·2 = 0
    assert not torsion_report(LinearConnection(z4, V)).biangle_free
    V = C.V.copy()
    V[0, 1, 0, 0] += 1.0  # V^2_{1,1} touches the triangle 1·1 = 2
    report = torsion_report(LinearConnection(z4, V))
    assert not report.triangle_free and report.biangle_free


def test_torsion_via_nabla(lattice, rng):
    C = LinearConnection.random(lattice, rng)
    for h in lattice.S:
        assert forms_equal(torsion(C, h), torsion_via_nabla(C, h))


def test_triangle_free_transport(lattice):
    C = LinearConnection.canonical(lattice)
    G = lattice.group
    for h1 in lattice.S:
        for h2 in lattice.S:
            h0 = int(G.mul[h1, h2])
            if not lattice.in_S(h0):
                continue
            got = transport_vf(C, h1, ell_field(lattice, h2))
            want = ell_field(lattice, h0) - ell_field(lattice, h1)
            assert np.allclose(got.components, want.components)


def test_zero_connection_transport(s3, rng):
    C = LinearConnection.zero(s3)
    th = theta(s3)
    for h in s3.S:
        row = nabla_theta(C, h)
        assert np.allclose(row.coeffs, th.coeffs[:, :, None] * (np.arange(s3.k) == s3.positions([h])[0]))
        assert np.allclose(transport_vf(C, h, random_vf(s3, rng)).components, 0)


def test_nabla_theta_expansion(lattice, rng):
    C = LinearConnection.random(lattice, rng)
    for h in lattice.S:
        assert forms_equal(nabla_theta(C, h), nabla_theta_expanded(C, h))


def test_transport_of_theta(s3, rng):
    # V_{ℓ_h'}(θ^h) = Σ (R*_{h'^-1} V^h_{h',h''}) θ^{h''}
    C = LinearConnection.random(s3, rng)
    G = s3.group
    for b, hp in enumerate(s3.S):
        back = G.mul[:, G.inv[hp]]
        for a, h in enumerate(s3.S):
            got = transport_1form(C, hp, theta(s3, h)).coeffs
            assert np.allclose(got, C.V[back, a, b, :])


def test_transport_duality(s3, rng):
    C = LinearConnection.random(s3, rng)
    Y, alpha = random_vf(s3, rng), random_1form(s3, rng)
    for b, h in enumerate(s3.S):
        lhs = transport_vf(C, h, Y).pair(alpha)
        rhs = Y.pair(transport_1form(C, h, alpha))[s3.neighbours[:, b]]
        assert np.allclose(lhs, rhs)


def test_transport_vf_module_rules(s3, rng):
    C = LinearConnection.random(s3, rng)
    Y = random_vf(s3, rng)
    f = rng.normal(size=s3.n)
    G = s3.group
    for b, h in enumerate(s3.S):
        base = transport_vf(C, h, Y).components
        assert np.allclose(transport_vf(C, h, Y.scale(f)).components,
                           f[s3.neighbours[:, b]][:, None] * base)
        for g in range(s3.n):
            e_g = np.zeros(s3.n)
            e_g[g] = 1.0
            target = np.zeros(s3.n)
            target[G.mul[g, G.inv[h]]] = 1.0
            assert np.allclose(transport_vf(C, h, Y.scale(e_g)).components, target[:, None] * base)


def test_transport_along_constant_field(s3, rng):
    C = LinearConnection.random(s3, rng)
    Y, alpha = random_vf(s3, rng), random_1form(s3, rng)
    for h in s3.S:
        X = constant_field(s3, h)
        assert np.allclose(transport_vf_along(C, X, Y).components, transport_vf(C, h, Y).components)
        assert forms_equal(transport_1form_along(C, X, alpha), transport_1form(C, h, alpha))


def test_hat_transport(s3, z4, rng):
    C = LinearConnection.random(s3, rng)
    Y = random_vf(s3, rng)
    for h in s3.S:  # transpositions are involutions
        assert np.allclose(hat_transport(C, h, Y).components, transport_vf(C, h, Y).components)
    a4 = ALL_LATTICES["a4"]
    with pytest.raises(ValueError):
        hat_transport(LinearConnection.random(a4, rng), a4.S[0], random_vf(a4, rng))


def test_U_inverts_tilde_V(lattice, rng):
    C = LinearConnection.random(lattice, rng)
    Y = random_vf(lattice, rng)
    for h in lattice.S:
        assert np.allclose(U_transport(C, h, transport_vf(C, h, Y)).components, Y.components)
        assert np.allclose(transport_vf(C, h, U_transport(C, h, Y)).components, Y.components)


def test_U_preserves_contraction(lattice, rng):
    # <U_{ℓ_h} Y, V_{ℓ_h} α> = R*_{h^-1} <Y, α>
    C = LinearConnection.random(lattice, rng)
    Y, alpha = random_vf(lattice, rng), random_1form(lattice, rng)
    G = lattice.group
    for h in lattice.S:
        lhs = U_transport(C, h, Y).pair(transport_1form(C, h, alpha))
        rhs = Y.pair(alpha)[G.mul[:, G.inv[h]]]
        assert np.allclose(lhs, rhs)
        X = constant_field(lattice, h)
        assert np.allclose(U_transport_along(C, X, Y).components, U_transport(C, h, Y).components)


def test_contraction_identity(lattice, rng):
    C = LinearConnection.random(lattice, rng)
    Y, alpha = random_vf(lattice, rng), random_1form(lattice, rng)
    for h in lattice.S:
        assert contraction_identity_residual(C, h, Y, alpha) < 1e-9


def test_identity_transport(s3, rng):
    V = np.zeros((s3.n, s3.k, s3.k, s3.k))
    for b in range(s3.k):
        V[:, :, b, :] = np.eye(s3.k)
    C = LinearConnection(s3, V)
    assert is_discrete(C)
    assert np.allclose(inverse_transport(C), np.eye(s3.k))
    Y = random_vf(s3, rng)
    G = s3.group
    for h in s3.S:
        back = G.mul[:, G.inv[h]]
        assert np.allclose(nabla_on_vf(C, h, Y).components, Y.components - Y.components[back])


def test_permutation_connection(lattice, rng):
    C, perms = random_permutation_connection(lattice, rng)
    assert is_discrete(C)
    U = inverse_transport(C)
    for b in range(lattice.k):
        for g in range(lattice.n):
            assert np.allclose(U[b, g], C.V[g, :, b, :].T)
    assert not is_discrete(LinearConnection.random(lattice, rng))


def test_singular_canonical_transport_reported(s3):
    C = LinearConnection.canonical(s3)
    report = transport_invertibility(C)
    assert not report
    with pytest.raises(SingularTransportError) as info:
        inverse_transport(C)
    assert info.value.h in s3.S


def test_curvature_row_matches_matrix(lattice, rng):
    C = LinearConnection.random(lattice, rng)
    R = curvature_matrix(C)
    for a, h in enumerate(lattice.S):
        row = Form(lattice, 2, R.coeffs[:, :, a, :])
        assert forms_equal(curvature_row(C, h), row)


def test_zero_connection_curvature(s3):
    R = curvature_matrix(LinearConnection.zero(s3))
    De = delta_e(s3)
    for a in range(s3.k):
        for b in range(s3.k):
            entry = Form(s3, 2, R.coeffs[:, :, a, b])
            assert forms_equal(entry, -De if a == b else 0 * De)


def test_flat_abelian_permutation_connection(z6):
    perms = np.broadcast_to(np.arange(z6.k), (z6.n, z6.k, z6.k)).copy()
    perms[:, :, :] = np.roll(np.arange(z6.k), 1)
    C = LinearConnection.from_permutations(z6, perms)
    assert is_discrete(C)
    assert second_bianchi_residual(C) < 1e-9
    assert all(first_bianchi_residual(C, h) < 1e-9 for h in z6.S)


@settings(max_examples=10, deadline=None)
@given(name=st.sampled_from(sorted(LATTICES)), seed=st.integers(0, 2**32 - 1))
def test_bianchi_identities(name, seed):
    L = LATTICES[name]
    C = LinearConnection.random(L, np.random.default_rng(seed))
    scale = max(1.0, float(np.abs(C.V).max())) ** 3
    for h in L.S:
        assert first_bianchi_residual(C, h) / scale < 1e-9
    assert second_bianchi_residual(C) / scale < 1e-9


def test_bianchi_on_a4(rng):
    L = ALL_LATTICES["a4"]
    C = LinearConnection.random(L, rng)
    assert all(first_bianchi_residual(C, h) < 1e-8 for h in L.S)
    assert second_bianchi_residual(C) < 1e-8


def test_curvature_is_left_linear(s3, rng):
    from grouplattice.lincon import curvature_of
    C = LinearConnection.random(s3, rng)
    alpha = random_1form(s3, rng)
    f = rng.normal(size=s3.n)
    assert forms_equal(curvature_of(C, alpha.lmul(f)), curvature_of(C, alpha).lmul(f))


def test_polygon_counts_drive_report(s3):
    report = torsion_report(LinearConnection.canonical(s3))
    poly = enumerate_polygons(s3)
    assert len(report.quadrangle) >= len(poly.quadrangles) > 0
