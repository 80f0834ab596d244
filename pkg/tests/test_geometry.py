import numpy as np
import pytest

from weylflow import geometry as geo
from weylflow import presets
from weylflow.errors import DegenerateMetricError, DegeneratePlaneError
from weylflow.fields import ConstantField, FourierField, GradientField, RotationalField
from weylflow.metrics import ConformalTorus, ConstantCurvatureChart, FlatTorus, SolGroup
from weylflow.scenario import WeylScenario, product_scenario


def generic_christoffel(scenario, q):
    """Reference assembly straight from the metric derivatives."""
    g = scenario.metric(q)
    dg = scenario.metric_d1(q)
    ginv = np.linalg.inv(g)
    S = 0.5 * (np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg)
    return np.einsum("kl,lij->kij", ginv, S)


def test_flat_torus_christoffel_vanishes():
    sc = WeylScenario(FlatTorus((1, 1)))
    cc = geo.christoffel(sc, [0.3, 0.8])
    assert not cc.gamma.any()


def test_constant_curvature_christoffel_fixture():
    # hand computation for K = -1 at q = (0.3, -0.4):
    # h_i = -2c q_i / (1 + c |q|^2), c = -1/4  =>  h = (4/25, -16/75)
    sc = WeylScenario(ConstantCurvatureChart(-1.0, 2))
    q = np.array([0.3, -0.4])
    h1, h2 = 4.0 / 25.0, -16.0 / 75.0
    gamma = geo.christoffel(sc, q).gamma
    expected = np.array([
        [[h1, h2], [h2, -h1]],
        [[-h2, h1], [h1, h2]],
    ])
    assert np.abs(gamma - expected).max() < 1e-15


def test_closed_form_christoffels_match_generic_assembly():
    scenarios = [
        WeylScenario(ConstantCurvatureChart(-1.0, 3)),
        WeylScenario(SolGroup()),
        WeylScenario(ConformalTorus(FourierField(2, [((1, 0), 0.2, 0.1)]))),
    ]
    rng = np.random.default_rng(0)
    for sc in scenarios:
        for _ in range(10):
            q = sc.sample_point(rng)
            assert np.abs(sc.christoffel(q) - generic_christoffel(sc, q)).max() < 1e-12


def test_conformal_christoffel_against_metric_finite_differences():
    sigma = FourierField(2, [((1, 0), 0.15, 0.0), ((0, 1), 0.0, 0.1)])
    sc = WeylScenario(ConformalTorus(sigma))
    rng = np.random.default_rng(1)
    h = 1e-5
    for _ in range(10):
        q = sc.sample_point(rng)
        dg = np.zeros((2, 2, 2))
        for m in range(2):
            e = np.zeros(2)
            e[m] = h
            dg[m] = (sc.metric(q + e) - sc.metric(q - e)) / (2 * h)
        ginv = np.linalg.inv(sc.metric(q))
        S = 0.5 * (np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg)
        gamma_fd = np.einsum("kl,lij->kij", ginv, S)
        assert np.abs(sc.christoffel(q) - gamma_fd).max() < 1e-6


def test_weyl_connection_zero_field_reduces_bitwise():
    sc = WeylScenario(SolGroup())
    q = np.array([0.2, 0.5, -0.3])
    cc = geo.weyl_connection(sc, q)
    assert np.array_equal(cc.gamma, cc.gamma_weyl)


def test_weyl_correction_flat_torus_formula():
    a = 1.3
    sc = WeylScenario(FlatTorus((1, 1)), ConstantField([a, 0.0]))
    cc = geo.weyl_connection(sc, [0.1, 0.9])
    eye = np.eye(2)
    phi = np.array([a, 0.0])
    expected = (np.einsum("ki,j->kij", eye, phi) + np.einsum("kj,i->kij", eye, phi)
                - np.einsum("ij,k->kij", eye, phi))
    assert np.abs((cc.gamma_weyl - cc.gamma) - expected).max() == 0.0


def test_weyl_connection_symmetric_lower_indices():
    sc = presets.scenario_preset("conformal_gradient")
    rng = np.random.default_rng(2)
    for _ in range(5):
        q = sc.sample_point(rng)
        gh = geo.weyl_connection(sc, q).gamma_weyl
        assert np.array_equal(gh, gh.transpose(0, 2, 1))


def test_compatibility_identity_100_random_samples():
    # finite-difference covariant derivative of g equals -2 phi(X) g
    names = ["example_1_2", "torus3_constant", "hyperbolic_potential",
             "sol_scan", "conformal_gradient"]
    rng = np.random.default_rng(3)
    for name in names:
        sc = presets.scenario_preset(name)
        for _ in range(20):
            q = sc.sample_point(rng)
            X = rng.standard_normal(sc.dim)
            assert geo.compatibility_residual(sc, q, X) < 1e-8


def test_curvature_operator_flat_no_field_vanishes():
    sc = WeylScenario(FlatTorus((1, 1)))
    op = geo.curvature_operator(sc, [0.2, 0.4], [1.0, 0.0], [0.0, 1.0])
    assert not op.any()


def test_curvature_operator_constant_curvature_closed_form():
    for K in (-1.0, 0.7):
        sc = WeylScenario(ConstantCurvatureChart(K, 3))
        rng = np.random.default_rng(4)
        for _ in range(10):
            q = sc.sample_point(rng)
            X, Y, Z = rng.standard_normal((3, 3))
            op = geo.curvature_operator(sc, q, X, Y)
            g = sc.metric(q)
            expected = K * ((Y @ g @ Z) * X - (X @ g @ Z) * Y)
            assert np.abs(op @ Z - expected).max() < 1e-6


def test_curvature_operator_antisymmetric_in_arguments():
    sc = presets.scenario_preset("sol_scan")
    rng = np.random.default_rng(5)
    for _ in range(10):
        q = sc.sample_point(rng)
        X, Y = rng.standard_normal((2, 3))
        a = geo.curvature_operator(sc, q, X, Y)
        b = geo.curvature_operator(sc, q, Y, X)
        assert np.abs(a + b).max() < 1e-10


def test_curvature_operator_rejects_dependent_vectors():
    sc = WeylScenario(FlatTorus((1, 1)))
    with pytest.raises(DegeneratePlaneError):
        geo.curvature_operator(sc, [0.1, 0.1], [1.0, 2.0], [2.0, 4.0])


def test_sectional_weyl_flat3_constant_field():
    a = 0.8
    sc = WeylScenario(FlatTorus((1, 1, 1)), ConstantField([a, 0, 0]))
    q = np.array([0.15, 0.3, 0.7])
    s_in = geo.sectional_weyl(sc, q, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    assert abs(s_in.Khat) < 1e-10                       # plane containing E
    s_perp = geo.sectional_weyl(sc, q, np.array([0, 1.0, 0]), np.array([0, 0, 1.0]))
    assert s_perp.Khat == pytest.approx(-a * a, abs=1e-12)
    assert s_perp.Khat_tensor == pytest.approx(-a * a, abs=1e-12)


def test_sectional_weyl_dimension_two_is_K_minus_divergence():
    sc = presets.scenario_preset("flat2_gradient")
    rng = np.random.default_rng(6)
    for _ in range(10):
        q = sc.sample_point(rng)
        X, Y = geo.sample_plane(sc, q, rng)
        s = geo.sectional_weyl(sc, q, X, Y)
        gamma = sc.christoffel(q)
        dE = sc.field_jac(q)
        E = sc.field(q)
        div = np.trace(dE) + np.einsum("kkj,j->", gamma, E)
        assert s.Khat == pytest.approx(s.K - div, abs=1e-10)
        assert s.E_perp_sq == pytest.approx(0.0, abs=1e-12)


def test_sectional_routes_agree_across_families():
    rng = np.random.default_rng(7)
    for name in ["example_1_2", "torus3_constant", "hyperbolic_geodesic",
                 "hyperbolic_potential", "sol_scan", "conformal_gradient",
                 "product_mixed"]:
        sc = presets.scenario_preset(name)
        for _ in range(25):
            q = sc.sample_point(rng)
            X, Y = geo.sample_plane(sc, q, rng)
            s = geo.sectional_weyl(sc, q, X, Y)
            assert s.route_discrepancy < 1e-6, name


def test_anosov_margin_zero_field_is_K():
    sc = WeylScenario(ConstantCurvatureChart(-1.0, 2))
    rng = np.random.default_rng(8)
    q = sc.sample_point(rng)
    X, Y = geo.sample_plane(sc, q, rng)
    assert geo.anosov_margin(sc, q, X, Y) == pytest.approx(-1.0, abs=1e-10)


def test_anosov_margin_plane_containing_field():
    a = 0.8
    sc = WeylScenario(FlatTorus((1, 1, 1)), ConstantField([a, 0, 0]))
    q = np.array([0.4, 0.1, 0.6])
    m = geo.anosov_margin(sc, q, np.array([1.0, 0, 0]), np.array([0, 0, 1.0]))
    assert m == pytest.approx(0.25 * a * a, abs=1e-12)


def test_anosov_margin_constant_norm_rotational_field():
    # margin = K + |E|^2 / 4 exactly for a divergence-free field in dim 2
    c = 0.6
    sc = WeylScenario(ConstantCurvatureChart(-1.0, 2), RotationalField(c))
    rng = np.random.default_rng(9)
    count = 0
    while count < 20:
        q = sc.sample_point(rng)
        if np.linalg.norm(q) < 0.3:
            continue
        X, Y = geo.sample_plane(sc, q, rng)
        m = geo.anosov_margin(sc, q, X, Y)
        assert m == pytest.approx(-1.0 + c * c / 4.0, abs=1e-9)
        assert m < 0
        count += 1


def test_sign_scan_gradient_field_takes_both_signs():
    sc = presets.scenario_preset("flat2_gradient")
    census = geo.curvature_sign_scan(sc, n_points=60, n_planes=1, seed=11)
    assert census.count_positive > 0
    assert census.count_negative > 0


def test_sign_scan_torus3_constant_field():
    sc = presets.scenario_preset("torus3_constant")
    census = geo.curvature_sign_scan(sc, n_points=40, n_planes=10, seed=12,
                                     include_field_planes=True)
    assert census.count_positive == 0
    assert census.min < 0
    assert census.max == pytest.approx(0.0, abs=1e-9)
    assert census.count_zero >= 40  # one deliberate E-plane per point


def test_sign_scan_sol_distinguished_field():
    sc = presets.scenario_preset("sol_scan")
    census = geo.curvature_sign_scan(sc, n_points=25, n_planes=12, seed=13)
    assert census.count_positive == 0
    assert census.count_negative > 0


def test_sign_scan_deterministic():
    sc = presets.scenario_preset("sol_scan")
    a = geo.curvature_sign_scan(sc, 10, 6, seed=21)
    b = geo.curvature_sign_scan(sc, 10, 6, seed=21)
    assert (a.min, a.max, a.count_negative, a.count_zero, a.count_positive) == \
           (b.min, b.max, b.count_negative, b.count_zero, b.count_positive)


def _mixed_field_plane_curvatures(sc, n=40, seed=14):
    rng = np.random.default_rng(seed)
    vals = []
    n1 = sc.metric_family.n1
    for _ in range(n):
        q = sc.sample_point(rng)
        E = sc.field(q)
        X = np.concatenate([E[:n1], np.zeros(sc.dim - n1)])
        Y = np.concatenate([np.zeros(n1), E[n1:]])
        vals.append(geo.sectional_weyl(sc, q, X, Y).Khat)
    return np.array(vals)


def test_product_constant_fields_mixed_plane_curvature_vanishes():
    sc = presets.scenario_preset("product_constant")
    vals = _mixed_field_plane_curvatures(sc)
    assert np.abs(vals).max() < 1e-10


def test_product_nonconstant_norm_mixed_plane_takes_both_signs():
    sc = presets.scenario_preset("product_mixed")
    vals = _mixed_field_plane_curvatures(sc, n=60)
    assert vals.max() > 1e-3 and vals.min() < -1e-3


def test_product_zero_fields_is_riemannian_product():
    s1 = WeylScenario(FlatTorus((1, 1)))
    s2 = WeylScenario(ConstantCurvatureChart(-1.0, 2))
    sc = product_scenario(s1, s2)
    rng = np.random.default_rng(15)
    q = sc.sample_point(rng)
    X = np.array([1.0, 0.3, 0.0, 0.0])
    Y = np.array([0.0, 0.0, 0.8, -0.1])
    s = geo.sectional_weyl(sc, q, X, Y)
    assert s.Khat == pytest.approx(0.0, abs=1e-10)   # mixed plane of a product
    # a plane inside the hyperbolic factor keeps its curvature
    X2 = np.array([0.0, 0.0, 1.0, 0.0])
    Y2 = np.array([0.0, 0.0, 0.0, 1.0])
    assert geo.sectional_weyl(sc, q, X2, Y2).Khat == pytest.approx(-1.0, abs=1e-9)


def test_chart_boundary_raises_degenerate_metric():
    sc = WeylScenario(ConstantCurvatureChart(-1.0, 2))
    with pytest.raises(DegenerateMetricError):
        geo.christoffel(sc, [2.0, 0.0])


def test_fd_fallback_matches_closed_form_weyl_derivatives():
    sc = presets.scenario_preset("hyperbolic_potential")
    rng = np.random.default_rng(16)
    for _ in range(3):
        q = sc.sample_point(rng)
        fd = geo.christoffel_d1_fd(sc, q, weyl=True)
        assert np.abs(fd - sc.weyl_christoffel_d1(q)).max() < 1e-8
