import numpy as np
import pytest

from weylflow import flows, presets, tangent
from weylflow.fields import ConstantField
from weylflow.flows import PhaseState, involution
from weylflow.metrics import FlatTorus
from weylflow.scenario import WeylScenario, constant_curvature_scenario, flat_torus_scenario
from weylflow.tangent import TangentVector


@pytest.fixture(scope="module")
def hyperbolic():
    return constant_curvature_scenario(-1.0, 2)


@pytest.fixture(scope="module")
def attractor_report():
    sc = flat_torus_scenario((1, 1), ConstantField([1.0, 0.0]))
    st = PhaseState([0.1, 0.3], [np.cos(2.0), np.sin(2.0)])
    return tangent.lyapunov_spectrum(sc, st, T=80.0, dt=2e-3, burn_in=20.0)


@pytest.fixture(scope="module")
def torus3_reports():
    a = 0.8
    sc = flat_torus_scenario((1, 1, 1), ConstantField([a, 0.0, 0.0]))
    fwd = tangent.lyapunov_spectrum(sc, PhaseState([0.1, 0.2, 0.3], [1.0, 0, 0]),
                                    T=40.0, dt=2e-3)
    rev = tangent.lyapunov_spectrum(sc, PhaseState([0.1, 0.2, 0.3], [-1.0, 0, 0]),
                                    T=40.0, dt=2e-3)
    return fwd, rev


@pytest.fixture(scope="module")
def hyperbolic_report(hyperbolic):
    return tangent.lyapunov_spectrum(hyperbolic, PhaseState([0.0, 0.0], [1.0, 0.0]),
                                     T=120.0, dt=5e-3)


def test_transport_frame_flat_no_field_is_constant():
    sc = flat_torus_scenario((1, 1))
    traj = flows.integrate(sc, PhaseState([0.1, 0.2], [np.cos(0.6), np.sin(0.6)]),
                           T=3.0, dt=1e-3)
    run = tangent.transport_frame(sc, traj)
    assert np.abs(run.frames - run.frames[0]).max() < 1e-12
    assert np.abs(run.int_phi).max() < 1e-14


def test_transport_frame_orthonormal_and_dilation():
    # along the field line of Example 1.2 the raw transport contracts like e^{-a t}
    sc = flat_torus_scenario((1, 1), ConstantField([1.0, 0.0]))
    traj = flows.integrate(sc, PhaseState([0.0, 0.0], [1.0, 0.0]), T=4.0, dt=1e-3)
    run = tangent.transport_frame(sc, traj)
    for i in range(0, len(run.times), 400):
        e = run.frames[i]
        v = run.v[i]
        assert abs(e[0] @ e[0] - 1.0) < 1e-8
        assert abs(e[0] @ v) < 1e-8
    assert np.abs(np.exp(-run.int_phi) - np.exp(-run.times)).max() < 1e-8


def test_transport_frame_stays_orthonormal_generic():
    sc = presets.scenario_preset("conformal_gradient")
    rng = np.random.default_rng(0)
    q0 = sc.sample_point(rng)
    v0 = rng.standard_normal(2)
    v0 /= sc.norm(q0, v0)
    traj = flows.integrate(sc, PhaseState(q0, v0), T=4.0, dt=1e-3)
    run = tangent.transport_frame(sc, traj)
    for i in range(0, len(run.times), 200):
        g = sc.metric(run.q[i])
        e = run.frames[i]
        gram = e @ g @ e.T
        assert np.abs(gram - np.eye(1)).max() < 1e-8
        assert abs(float(e[0] @ g @ run.v[i])) < 1e-8


def test_linearized_rhs_flat_free_jacobi():
    sc = flat_torus_scenario((1, 1))
    st = PhaseState([0.2, 0.4], [np.cos(0.8), np.sin(0.8)])
    frame = tangent.MovingFrame(st, tangent.complete_frame(sc, st.q, st.v))
    tv = TangentVector(0.0, np.array([0.7]), np.array([-0.2]))
    dxi0, dxi, dchi = tangent.linearized_rhs(sc, frame, tv)
    assert dxi0 == pytest.approx(0.0, abs=1e-14)
    assert dxi[0] == pytest.approx(-0.2, abs=1e-14)
    assert dchi[0] == pytest.approx(0.0, abs=1e-14)


def test_linearized_rhs_constant_curvature(hyperbolic):
    st = PhaseState([0.0, 0.0], [1.0, 0.0])
    frame = tangent.MovingFrame(st, tangent.complete_frame(hyperbolic, st.q, st.v))
    tv = TangentVector(0.0, np.array([1.0]), np.array([0.0]))
    _, dxi, dchi = tangent.linearized_rhs(hyperbolic, frame, tv)
    assert dxi[0] == pytest.approx(0.0, abs=1e-12)
    assert dchi[0] == pytest.approx(1.0, abs=1e-12)  # -R xi with R = K = -1


def test_linearized_rhs_attractor_constant_coefficients():
    # at v parallel to E the quotient system is [[-a, 1], [0, 0]]
    a = 1.0
    sc = flat_torus_scenario((1, 1), ConstantField([a, 0.0]))
    st = PhaseState([0.3, 0.6], [1.0, 0.0])
    frame = tangent.MovingFrame(st, tangent.complete_frame(sc, st.q, st.v))
    for xi, chi in [(1.0, 0.0), (0.0, 1.0), (0.4, -0.3)]:
        tv = TangentVector(0.0, np.array([xi]), np.array([chi]))
        _, dxi, dchi = tangent.linearized_rhs(sc, frame, tv)
        assert dxi[0] == pytest.approx(-a * xi + chi, abs=1e-12)
        assert dchi[0] == pytest.approx(0.0, abs=1e-12)


def test_linearized_run_matches_closed_form_jacobi(hyperbolic):
    tv = TangentVector(0.0, np.array([1.0]), np.array([-1.0]))
    run = tangent.linearized_run(hyperbolic, PhaseState([0.0, 0.0], [1.0, 0.0]),
                                 tv, T=5.0, dt=1e-3)
    assert np.abs(run.xi[:, 0] - np.exp(-run.times)).max() < 1e-8
    assert np.abs(run.chi[:, 0] + np.exp(-run.times)).max() < 1e-8


def test_jform_trivial_cases():
    assert tangent.jform(np.array([0.4]), np.array([0.0])) == 0.0
    assert tangent.jform(np.array([0.5, 0.1]), np.array([0.2, -0.3])) == \
        pytest.approx(0.5 * 0.2 - 0.1 * 0.3, abs=1e-15)


def test_jform_derivative_identity_closed_form(hyperbolic):
    # stable Jacobi solution: J = -e^{-2t}, dJ/dt = chi^2 - K xi^2 = 2 e^{-2t}
    tv = TangentVector(0.0, np.array([1.0]), np.array([-1.0]))
    run = tangent.linearized_run(hyperbolic, PhaseState([0.0, 0.0], [1.0, 0.0]),
                                 tv, T=5.0, dt=1e-3)
    chk = tangent.jform_derivative_check(run)
    assert chk.max_residual < 1e-8 * chk.scale + 1e-10


def test_jform_separation_probe(hyperbolic):
    # mixed solution crosses J = 0; the right side must be positive there
    tv = TangentVector(0.0, np.array([1.0]), np.array([-0.9]))
    run = tangent.linearized_run(hyperbolic, PhaseState([0.0, 0.0], [1.0, 0.0]),
                                 tv, T=8.0, dt=1e-3)
    chk = tangent.jform_derivative_check(run)
    assert len(chk.crossings) >= 1
    assert all(rhs > 0 for _, rhs in chk.crossings)


def test_lyapunov_flat_torus_integrable():
    sc = flat_torus_scenario((1, 1))
    rep = tangent.lyapunov_spectrum(sc, PhaseState([0.1, 0.2], [np.cos(0.7), np.sin(0.7)]),
                                    T=50.0, dt=2e-3)
    assert np.abs(rep.exponents).max() < 0.01


def test_lyapunov_hyperbolic_geodesic(hyperbolic_report):
    rep = hyperbolic_report
    assert np.abs(rep.exponents - np.array([1.0, -1.0])).max() < 0.03
    assert rep.finite_time
    assert rep.mean_jsep_margin > 0.5


def test_lyapunov_attractor_exponents(attractor_report):
    rep = attractor_report
    assert np.abs(rep.exponents - np.array([0.0, -1.0])).max() < 0.02
    assert rep.sbar == pytest.approx(-1.0, abs=1e-6)


def test_trace_identity_on_runs(attractor_report, torus3_reports):
    for rep in (attractor_report, *torus3_reports):
        assert rep.trace_residual < 0.02


def test_lyapunov_exponent_stability_under_T_doubling(torus3_reports):
    a = 0.8
    sc = flat_torus_scenario((1, 1, 1), ConstantField([a, 0.0, 0.0]))
    st = PhaseState([0.1, 0.2, 0.3], [1.0, 0, 0])
    r1 = tangent.lyapunov_spectrum(sc, st, T=20.0, dt=2e-3)
    assert np.abs(r1.exponents - torus3_reports[0].exponents).max() < 0.01


def test_time_reversal_negates_spectrum(torus3_reports):
    fwd, rev = torus3_reports
    assert np.abs(rev.exponents - (-fwd.exponents[::-1])).max() < 0.02


def test_pairing_check_torus3(torus3_reports):
    fwd, _ = torus3_reports
    assert tangent.pairing_check(fwd) < 0.02
    exps = fwd.exponents
    assert abs((exps[0] + exps[3]) - (exps[1] + exps[2])) < 0.02


def test_pairing_two_dimensional_is_trace_identity(attractor_report):
    rep = attractor_report
    assert tangent.pairing_check(rep) == pytest.approx(rep.trace_residual, abs=1e-12)


def test_pairing_chart_with_small_potential():
    sc = presets.scenario_preset("hyperbolic_potential")
    rep = tangent.lyapunov_spectrum(sc, PhaseState([0.05, -0.1], [1.0, 0.0]),
                                    T=20.0, dt=2e-3)
    assert tangent.pairing_check(rep) < 0.02


def test_splitting_volume_rates(hyperbolic_report, attractor_report):
    rep = hyperbolic_report
    growth, decay = tangent.splitting_volume_rates(rep)
    assert growth == pytest.approx(1.0, abs=0.03)
    assert decay == pytest.approx(-1.0, abs=0.03)
    # on the Example 1.2 attractor the rates are (0, -a): not sign-definite
    g2, d2 = tangent.splitting_volume_rates(attractor_report)
    assert abs(g2) < 0.02
    assert d2 == pytest.approx(-1.0, abs=0.02)


def test_corollary_sign_check_negative_curvature_runs():
    # everywhere-negative sampled curvature forces lambda_max > 0 > lambda_min
    sc = presets.scenario_preset("hyperbolic_potential")
    rep = tangent.lyapunov_spectrum(sc, PhaseState([0.1, 0.05], [0.0, 1.0]),
                                    T=20.0, dt=2e-3)
    assert rep.exponents[0] > 0
    assert rep.exponents[-1] < 0
    growth, decay = tangent.splitting_volume_rates(rep)
    assert growth > 0 > decay
