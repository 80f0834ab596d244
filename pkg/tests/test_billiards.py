import numpy as np
import pytest

from weylflow import billiards as bl
from weylflow import presets
from weylflow.errors import (
    GrazingCollisionError,
    InvalidStateError,
    NoOrbitError,
    UnsupportedConfigurationError,
    ZeroFieldError,
)

J = np.array([[0.0, -1.0], [1.0, 0.0]])


@pytest.fixture(scope="module")
def sinai():
    return presets.sinai_thermostat(re_product=0.0)


@pytest.fixture(scope="module")
def sinai_field():
    return presets.sinai_thermostat(re_product=0.2)


def test_zero_field_flight_matches_ray_circle():
    tb = bl.BilliardTable((1, 1), [((0.5, 0.5), 0.2)], 0.0)
    ev = bl.free_flight(tb, np.array([0.1, 0.5]), np.array([1.0, 0.0]))
    assert ev.time_of_flight == pytest.approx(0.2, abs=1e-12)
    assert np.abs(ev.point - np.array([0.3, 0.5])).max() < 1e-12
    assert np.abs(ev.normal - np.array([-1.0, 0.0])).max() < 1e-12


def test_invariant_line_flight_stays_straight():
    tb = bl.BilliardTable((1, 1), [((0.5, 0.5), 0.2)], 1.0)
    ev = bl.free_flight(tb, np.array([0.05, 0.5]), np.array([1.0, 0.0]))
    assert abs(ev.point[1] - 0.5) < 1e-14
    assert ev.time_of_flight == pytest.approx(0.25, abs=1e-12)


def test_curved_flight_collision_against_dense_rk4():
    # brute-force oracle: RK4 at dt=1e-6 plus interpolation of the crossing
    a = 1.0
    tb = bl.BilliardTable((1, 1), [((0.5, 0.5), 0.2)], a)
    q0 = np.array([0.15, 0.42])
    v0 = np.array([np.cos(0.15), np.sin(0.15)])
    ev = bl.free_flight(tb, q0, v0)
    assert not ev.image_shift.any()           # hits the base circle directly
    assert ev.time_of_flight < 0.3

    E = np.array([a, 0.0])
    dt = 1e-6
    q, v = q0.copy(), v0.copy()
    c = np.array([0.5, 0.5])

    def f(q, v):
        ev_ = E @ v
        return v, E - ev_ * v

    t = 0.0
    t_cross = None
    d_prev = np.linalg.norm(q - c) - 0.2
    for _ in range(400_000):
        k1q, k1v = f(q, v)
        k2q, k2v = f(q + dt / 2 * k1q, v + dt / 2 * k1v)
        k3q, k3v = f(q + dt / 2 * k2q, v + dt / 2 * k2v)
        k4q, k4v = f(q + dt * k3q, v + dt * k3v)
        q = q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
        v = v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        t += dt
        d = np.linalg.norm(q - c) - 0.2
        if d <= 0:
            w = d_prev / (d_prev - d)
            t_cross = t - dt + w * dt
            break
        d_prev = d
    assert t_cross is not None
    assert ev.time_of_flight == pytest.approx(t_cross, abs=1e-8)
    p_or = bl.ThermostatFlight(q0, v0, a).pos(np.array([t_cross]))[0]
    assert np.abs(ev.point - p_or).max() < 1e-8


def test_flight_positions_match_rk4_batch():
    # oracle equivalence invariant over random flights, positions at matched times
    a = 0.6
    tb = bl.BilliardTable((1, 1), [((0.5, 0.5), 0.2)], a)
    rng = np.random.default_rng(2)
    n = 40
    qs = rng.uniform(0, 1, (n, 2))
    ths = rng.uniform(0, 2 * np.pi, n)
    vs = np.stack([np.cos(ths), np.sin(ths)], axis=1)
    E = np.array([a, 0.0])
    dt = 1e-5
    T = 0.4
    q, v = qs.copy(), vs.copy()

    def f(qb, vb):
        ev = vb @ E
        return vb, E[None, :] - ev[:, None] * vb

    for _ in range(int(T / dt)):
        k1q, k1v = f(q, v)
        k2q, k2v = f(q + dt / 2 * k1q, v + dt / 2 * k1v)
        k3q, k3v = f(q + dt / 2 * k2q, v + dt / 2 * k2v)
        k4q, k4v = f(q + dt * k3q, v + dt * k3v)
        q = q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
        v = v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    for i in range(n):
        fl = bl.ThermostatFlight(qs[i], vs[i], a)
        assert np.abs(fl.pos(np.array([T]))[0] - q[i]).max() < 1e-8


def test_reflect_normal_incidence():
    tb = bl.BilliardTable((4, 4), [((2.0, 2.0), 0.5)], 0.0)
    ev = bl.free_flight(tb, np.array([0.5, 2.0]), np.array([1.0, 0.0]))
    _, v_out = bl.reflect(ev)
    assert np.abs(v_out - np.array([-1.0, 0.0])).max() < 1e-12


def test_reflect_45_degrees():
    # spec geometry: impact at the circle's rightmost point with N = (1, 0)
    tb = bl.BilliardTable((8, 8), [((4.0, 4.0), 1.0)], 0.0)
    ev = bl.free_flight(tb, np.array([6.0, 3.0]),
                        np.array([-1 / np.sqrt(2), 1 / np.sqrt(2)]))
    assert np.abs(ev.point - np.array([5.0, 4.0])).max() < 1e-10
    _, v_out = bl.reflect(ev)
    assert np.abs(v_out - np.array([1 / np.sqrt(2), 1 / np.sqrt(2)])).max() < 1e-10
    # specular law: normal component flips, tangential preserved
    assert (ev.v_out @ ev.normal) == pytest.approx(-(ev.v_in @ ev.normal), abs=1e-12)
    tang = np.array([-ev.normal[1], ev.normal[0]])
    assert (ev.v_out @ tang) == pytest.approx(ev.v_in @ tang, abs=1e-12)


def test_flight_from_inside_scatterer_rejected(sinai):
    with pytest.raises(InvalidStateError):
        bl.free_flight(sinai, np.array([0.25, 0.25]), np.array([1.0, 0.0]))


def test_weyl_convexity_margins():
    tb = bl.BilliardTable((1, 1), [((0.5, 0.5), 0.2)], 1.0)
    rep = bl.weyl_convexity(tb)
    assert rep.margin == pytest.approx(4.0, abs=1e-15)
    assert rep.convex

    tb_sharp = bl.BilliardTable((1, 1), [((0.5, 0.5), 0.2)], 5.0)
    rep_sharp = bl.weyl_convexity(tb_sharp)
    assert rep_sharp.margin == 0.0
    assert not rep_sharp.convex
    assert rep_sharp.strict_boundary

    tb0 = bl.BilliardTable((1, 1), [((0.5, 0.5), 0.2)], 0.0)
    assert bl.weyl_convexity(tb0).margin == pytest.approx(5.0, abs=1e-15)


def test_convexity_threshold_sign_flip():
    r = 0.25
    for eps in (-1e-9, 1e-9):
        a = (1.0 + eps) / r
        tb = bl.BilliardTable((2, 2), [((1.0, 1.0), r)], a)
        assert (bl.weyl_convexity(tb).margin < 0) == (eps > 0)


def test_exp_map_straightens_example_curve():
    ys = np.linspace(-1.0, 1.0, 101)
    curve = np.stack([-np.log(np.cos(ys)), ys], axis=-1)
    assert bl.exp_map_check(curve, 1.0) < 1e-9
    # images are (1, tan y)
    w = np.exp(curve[:, 0] + 1j * curve[:, 1])
    assert np.abs(w.real - 1.0).max() < 1e-12


def test_exp_map_straight_flight_maps_to_ray():
    ts = np.linspace(0, 1, 33)
    samples = np.stack([0.3 + ts, np.full_like(ts, 0.2)], axis=-1)
    assert bl.exp_map_check(samples, 0.7) < 1e-12


def test_exp_map_guards():
    with pytest.raises(ZeroFieldError):
        bl.exp_map_check(np.zeros((5, 2)), 0.0)
    with pytest.raises(InvalidStateError):
        bl.exp_map_check(np.zeros((2, 2)), 1.0)


def test_horizon_flags(sinai):
    assert sinai.horizon_finite
    sparse = bl.BilliardTable((1, 1), [((0.5, 0.5), 0.1)], 0.0)
    assert not sparse.horizon_finite


def test_run_billiard_unit_speed_and_determinism(sinai_field):
    q0 = np.array([0.7, 0.25])
    v0 = np.array([np.cos(0.6), np.sin(0.6)])
    run1 = bl.run_billiard(sinai_field, q0, v0, 300)
    run2 = bl.run_billiard(sinai_field, q0, v0, 300)
    for e1, e2 in zip(run1.events, run2.events):
        assert np.array_equal(e1.point, e2.point)
        assert e1.time_of_flight == e2.time_of_flight
    speeds = [np.linalg.norm(e.v_out) for e in run1.events]
    assert np.abs(np.array(speeds) - 1.0).max() < 1e-10
    for ev in run1.events:
        s = sinai_field.scatterers[ev.scatterer]
        center = s.center + ev.image_shift
        assert abs(np.linalg.norm(ev.point - center) - s.radius) < 1e-10
        resid = ev.v_out - (ev.v_in - 2 * (ev.v_in @ ev.normal) * ev.normal)
        assert np.abs(resid).max() < 1e-12


def test_run_billiard_positive_exponent(sinai):
    run = bl.run_billiard(sinai, np.array([0.7, 0.25]),
                          np.array([np.cos(0.6), np.sin(0.6)]),
                          2000, with_tangent=True)
    assert run.lambda1 > 0.5
    assert run.exponents[0] == pytest.approx(-run.exponents[1], abs=1e-9)


def test_run_billiard_small_field_continuity(sinai, sinai_field):
    q0 = np.array([0.7, 0.25])
    v0 = np.array([np.cos(0.6), np.sin(0.6)])
    lam0 = bl.run_billiard(sinai, q0, v0, 2000, with_tangent=True).lambda1
    lamF = bl.run_billiard(sinai_field, q0, v0, 2000, with_tangent=True).lambda1
    assert abs(lamF - lam0) / lam0 < 0.2


def test_run_billiard_retraces_under_reversal(sinai_field):
    # double precision supports ~10 collisions of exact retrace before the
    # positive exponent amplifies the bisection seed past 1e-8
    q0 = np.array([0.7, 0.25])
    v0 = np.array([np.cos(0.6), np.sin(0.6)])
    run = bl.run_billiard(sinai_field, q0, v0, 40)
    last = run.events[-1]
    back = bl.run_billiard(sinai_field, last.point, -last.v_in, 39)
    fwd_pts = [ev.point % 1.0 for ev in run.events[::-1]]
    errs = [np.abs((ev.point % 1.0) - p).max()
            for ev, p in zip(back.events, fwd_pts[1:])]
    assert max(errs[:10]) < 1e-8


def test_tangent_maps_match_finite_difference_oracle():
    # event-synchronized FD of flight + reflection + short flight
    def read_tangent(a, vb, dq, dv, eps):
        e1 = J @ vb
        xi = dq @ e1 / eps
        xi0 = dq @ vb / eps
        eta = dv @ e1 / eps
        E = np.array([a, 0.0])
        chi = eta + (E @ vb) * xi - xi0 * (E @ e1)
        return xi, chi

    for a, q, v in [(0.9, np.array([1.2, 1.75]), np.array([np.cos(0.25), np.sin(0.25)])),
                    (0.0, np.array([1.2, 1.75]), np.array([np.cos(0.25), np.sin(0.25)])),
                    (1.7, np.array([1.0, 2.3]), np.array([np.cos(-0.5), np.sin(-0.5)]))]:
        tb = bl.BilliardTable((4, 4), [((2.0, 2.0), 0.3)], a)
        eps = 1e-7
        e = bl.free_flight(tb, q, v)
        tau = 0.05
        fl = bl.ThermostatFlight(tb.to_aligned(e.point), tb.to_aligned(e.v_out), a)
        qb = tb.from_aligned(fl.pos(np.array([tau]))[0])
        vb = tb.from_aligned(fl.vel(np.array([tau]))[0])
        t_base = e.time_of_flight + tau
        cols = []
        for dxi, dchi in [(1, 0), (0, 1)]:
            e1 = J @ v
            eta = dchi - a * v[0] * dxi
            vp = v + eps * eta * e1
            vp /= np.linalg.norm(vp)
            qp = q + eps * dxi * e1
            ep = bl.free_flight(tb, qp, vp)
            flp = bl.ThermostatFlight(tb.to_aligned(ep.point), tb.to_aligned(ep.v_out), a)
            trem = t_base - ep.time_of_flight
            qpp = tb.from_aligned(flp.pos(np.array([trem]))[0])
            vpp = tb.from_aligned(flp.vel(np.array([trem]))[0])
            cols.append(read_tangent(a, vb, qpp - qb, vpp - vb, eps))
        M_fd = np.array(cols).T
        th0 = np.arctan2(v[1], v[0])
        F = bl.flight_tangent_matrix(a, th0, e.theta_in_aligned, e.time_of_flight)
        R = bl.reflection_tangent_matrix(tb, e)
        flo = bl.ThermostatFlight(tb.to_aligned(e.point), tb.to_aligned(e.v_out), a)
        th_tau = float(flo.theta(np.array([tau]))[0])
        Fpost = bl.flight_tangent_matrix(a, e.theta_out_aligned, th_tau, tau)
        M_impl = Fpost @ R @ F
        rel = np.abs(M_fd - M_impl).max() / np.abs(M_impl).max()
        assert rel < 1e-4, (a, rel)


def test_periodic_orbit_classical_trace():
    r, L = presets.TWO_DISK_RADIUS, presets.TWO_DISK_GAP
    st = bl.periodic_orbit_stability(presets.two_disk_orbit(0.0))
    assert st.trace == pytest.approx(4 * (1 + L / r) ** 2 - 2, abs=1e-10)
    assert st.classification == "hyperbolic"
    assert st.period == pytest.approx(2 * L, abs=1e-12)


def test_periodic_orbit_convex_regime_hyperbolic():
    st = bl.periodic_orbit_stability(presets.two_disk_orbit(0.5))
    assert st.classification == "hyperbolic"
    # determinant 1: the loop integral of phi vanishes on the closed orbit
    assert np.linalg.det(st.monodromy) == pytest.approx(1.0, abs=1e-12)


def test_periodic_orbit_axis_family_stays_hyperbolic_past_threshold():
    for re_val in np.linspace(0.0, 2.0, 9):
        st = bl.periodic_orbit_stability(presets.two_disk_orbit(re_val))
        assert st.classification == "hyperbolic"
        assert st.trace > 2.0


def test_periodic_orbit_requires_axis_parallel_to_field():
    tb = bl.BilliardTable((2, 2), [((0.5, 0.5), 0.2), ((0.5, 1.4), 0.2)],
                          field_magnitude=0.5)
    with pytest.raises(UnsupportedConfigurationError):
        bl.periodic_orbit_stability(tb)


def test_periodic_orbit_blocked_axis():
    tb = bl.BilliardTable((4, 1), [((0.5, 0.5), 0.1), ((2.5, 0.5), 0.1),
                                   ((1.5, 0.5), 0.1)], field_magnitude=0.0)
    with pytest.raises(NoOrbitError):
        bl.periodic_orbit_stability(tb)


def test_first_elliptic_orbit_past_convexity_loss():
    re_first, d, orb, table, _ = bl.find_first_elliptic(0.35, np.linspace(1.05, 2.0, 20))
    assert re_first is not None and re_first > 1.0
    st = orb.stability
    assert st.classification == "elliptic"
    assert abs(st.trace) < 2.0
    assert np.abs(np.abs(st.eigenvalues) - 1.0).max() < 1e-8
    # the composed monodromy agrees with the classical straightened-picture trace
    assert abs(st.trace - orb.image_trace) < 1e-8
    assert orb.normal_residual < 1e-8


def test_grazing_reflection_rejected():
    tb = bl.BilliardTable((1, 1), [((0.5, 0.5), 0.2)], 0.0)
    ev = bl.free_flight(tb, np.array([0.1, 0.5]), np.array([1.0, 0.0]))
    ev.cos_incidence = 1e-12
    with pytest.raises(GrazingCollisionError):
        bl.reflect(ev)
