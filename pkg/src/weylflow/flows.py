"""Thermostat flows, Weyl geodesics and their fixed-step RK4 integrator.

Conventions: all right-hand sides return ordinary coordinate derivatives
(dq/dt, dv/dt); the covariant acceleration is dv/dt + Gamma(v, v).  Phase
points are stored unwrapped (no torus reduction); periodic data is evaluated
periodically by construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .errors import (
    InvalidEnergyLevelError,
    KineticFloorError,
    NonFiniteStateError,
    NotLocallyPotentialError,
    UnsupportedConfigurationError,
)
from .fields import ReducedField

KINETIC_FLOOR = 1e-6


@dataclass
class PhaseState:
    """Point (q, v) of the tangent bundle with elapsed time t."""

    q: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.v = np.asarray(self.v, dtype=float)


def involution(state):
    """I(q, v) = (q, -v); conjugates forward and backward dynamics."""
    return PhaseState(state.q.copy(), -state.v, state.t)


@dataclass
class IsoenergeticSpec:
    """Potential W, external field E and energy level h for H = v^2/2 + W = h."""

    potential: object
    field: object
    h: float
    kinetic_floor: float = KINETIC_FLOOR


@dataclass
class Trajectory:
    times: np.ndarray
    q: np.ndarray
    v: np.ndarray
    phi_v: np.ndarray
    speed_residual: np.ndarray
    energy_residual: np.ndarray
    int_phi: np.ndarray
    arc_length: np.ndarray
    kind: str
    dt: float
    scenario: object
    spec: object = None

    def state(self, i=-1):
        return PhaseState(self.q[i].copy(), self.v[i].copy(), float(self.times[i]))


# -- right-hand sides --------------------------------------------------------

def isokinetic_rhs(scenario, state):
    """Gaussian thermostat on |v| = 1:  Dv/dt = E - <E, v> v.

    Returns (dq/dt, dv/dt) with dv/dt = E - <E,v> v - Gamma(v, v).
    """
    return _isokinetic_rhs(scenario, state.q, state.v)


def _isokinetic_rhs(scenario, q, v):
    E = scenario.field(q)
    if scenario.metric_family.is_flat:
        phi_v = float(E @ v)
        return v, E - phi_v * v
    g = scenario.metric(q)
    phi_v = float(v @ g @ E)
    gamma = scenario.christoffel(q)
    return v, E - phi_v * v - np.einsum("kij,i,j->k", gamma, v, v)


def isoenergetic_rhs(scenario, spec, state):
    """Isoenergetic thermostat:  Dv/dt = -grad W + E - (<E,v>/v^2) v."""
    return _isoenergetic_rhs(scenario, spec, state.q, state.v)


def _isoenergetic_rhs(scenario, spec, q, v):
    E = spec.field.components(q, scenario)
    gw = spec.potential.grad(q)
    if scenario.metric_family.is_flat:
        v2 = float(v @ v)
        if v2 < spec.kinetic_floor:
            raise KineticFloorError(f"kinetic energy {v2:.3e} below floor at q={q}")
        phi_v = float(E @ v)
        return v, -gw + E - (phi_v / v2) * v
    g = scenario.metric(q)
    v2 = float(v @ g @ v)
    if v2 < spec.kinetic_floor:
        raise KineticFloorError(f"kinetic energy {v2:.3e} below floor at q={q}")
    phi_v = float(v @ g @ E)
    grad_w = np.linalg.inv(g) @ gw
    gamma = scenario.christoffel(q)
    return v, -grad_w + E - (phi_v / v2) * v - np.einsum("kij,i,j->k", gamma, v, v)


def weyl_geodesic_rhs(scenario, q, w):
    """Weyl geodesic with its distinguished parameter:  dw/ds = -Ghat(w, w)."""
    w = np.asarray(w, dtype=float)
    if float(w @ w) == 0.0:
        raise UnsupportedConfigurationError("weyl geodesic undefined at w = 0")
    ghat = scenario.weyl_christoffel(q)
    return w, -np.einsum("kij,i,j->k", ghat, w, w)


def covariant_accel(scenario, q, v, dv):
    """Dv/dt = dv/dt + Gamma(v, v)."""
    gamma = scenario.christoffel(q)
    return dv + np.einsum("kij,i,j->k", gamma, v, v)


def reduce_to_wflow(scenario, spec, n_check=64, seed=0):
    """Field E_tilde = (-grad W + E) / (2 (h - W)) whose W-flow matches the
    arc-length-reparametrized isoenergetic flow."""
    rng = np.random.default_rng(seed)
    for _ in range(n_check):
        q = scenario.sample_point(rng)
        if spec.h - spec.potential.value(q) <= 0.0:
            raise InvalidEnergyLevelError(f"h - W <= 0 at q={q}")
    return ReducedField(spec.potential, spec.field, spec.h)


# -- integrator ---------------------------------------------------------------

def integrate(scenario, initial, T, dt, kind="isokinetic", spec=None, renorm=True):
    """Classical fixed-step RK4 with post-step constraint projection.

    kind: 'isokinetic' (project |v|_g = 1), 'isoenergetic' (restore
    H = h via speed rescaling; requires spec), or 'weyl_geodesic' (no
    projection).  Accumulates the line integral of phi by Simpson quadrature
    on the stored samples.
    """
    if dt <= 0 or T < dt:
        raise ValueError("need dt > 0 and T >= dt")
    if kind == "isoenergetic" and spec is None:
        raise ValueError("isoenergetic integration needs an IsoenergeticSpec")

    if kind == "isokinetic":
        rhs = lambda q, v: _isokinetic_rhs(scenario, q, v)
    elif kind == "isoenergetic":
        rhs = lambda q, v: _isoenergetic_rhs(scenario, spec, q, v)
    elif kind == "weyl_geodesic":
        rhs = lambda q, v: weyl_geodesic_rhs(scenario, q, v)
    else:
        raise ValueError(f"unknown kind {kind!r}")

    n_steps = int(round(T / dt))
    q = np.array(initial.q, dtype=float)
    v = np.array(initial.v, dtype=float)
    m = n_steps + 1
    n = scenario.dim
    qs = np.empty((m, n))
    vs = np.empty((m, n))
    qs[0], vs[0] = q, v

    for i in range(n_steps):
        k1q, k1v = rhs(q, v)
        k2q, k2v = rhs(q + 0.5 * dt * k1q, v + 0.5 * dt * k1v)
        k3q, k3v = rhs(q + 0.5 * dt * k2q, v + 0.5 * dt * k2v)
        k4q, k4v = rhs(q + dt * k3q, v + dt * k3v)
        q = q + (dt / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q)
        v = v + (dt / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not (np.isfinite(q).all() and np.isfinite(v).all()):
            raise NonFiniteStateError(f"non-finite state at step {i + 1}")
        if renorm:
            v = _project(scenario, spec, kind, q, v)
        qs[i + 1], vs[i + 1] = q, v

    return _assemble_trajectory(scenario, spec, kind, dt, initial.t, qs, vs)


def _project(scenario, spec, kind, q, v):
    if kind == "weyl_geodesic":
        return v
    speed = scenario.norm(q, v)
    if kind == "isokinetic":
        return v / speed
    kinetic = 2.0 * (spec.h - spec.potential.value(q))
    if kinetic < spec.kinetic_floor:
        raise KineticFloorError(f"kinetic energy {kinetic:.3e} below floor at q={q}")
    return v * (np.sqrt(kinetic) / speed)


def _assemble_trajectory(scenario, spec, kind, dt, t0, qs, vs):
    m = len(qs)
    times = t0 + dt * np.arange(m)
    phi_v = np.empty(m)
    speed = np.empty(m)
    energy_residual = np.zeros(m)
    for i in range(m):
        g = scenario.metric(qs[i])
        speed[i] = np.sqrt(vs[i] @ g @ vs[i])
        if kind == "isoenergetic":
            E = spec.field.components(qs[i], scenario)
            phi_v[i] = vs[i] @ g @ E
            energy_residual[i] = 0.5 * speed[i] ** 2 + spec.potential.value(qs[i]) - spec.h
        else:
            phi_v[i] = vs[i] @ g @ scenario.field(qs[i])
    int_phi = cumulative_simpson(phi_v, x=times, initial=0.0)
    arc_length = cumulative_simpson(speed, x=times, initial=0.0)
    if kind == "isokinetic":
        speed_residual = speed - 1.0
    elif kind == "isoenergetic":
        w_vals = np.array([spec.potential.value(qs[i]) for i in range(m)])
        speed_residual = speed - np.sqrt(np.maximum(2.0 * (spec.h - w_vals), 0.0))
    else:
        speed_residual = speed - np.exp(-int_phi)
    return Trajectory(times=times, q=qs, v=vs, phi_v=phi_v,
                      speed_residual=speed_residual,
                      energy_residual=energy_residual, int_phi=int_phi,
                      arc_length=arc_length, kind=kind, dt=dt,
                      scenario=scenario, spec=spec)


def reparametrize_by_arclength(traj, s_grid):
    """Cubic-interpolated samples q(s) of the trajectory at the given arc lengths."""
    s = traj.arc_length
    spline = CubicSpline(s, traj.q, axis=0)
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid[-1] > s[-1] + 1e-12:
        raise ValueError("requested arc length exceeds trajectory span")
    return spline(np.minimum(s_grid, s[-1]))


# -- Dettmann-Morriss transformed coordinates ---------------------------------

@dataclass
class DettmannMorrissRecord:
    tau: np.ndarray
    q: np.ndarray
    p: np.ndarray
    H: np.ndarray
    H_drift: float
    hamilton_residual: float


def dettmann_morriss(traj, U):
    """Transform an isokinetic trajectory with E = -grad U to hamiltonian form.

    p = e^{-U} v, dt/dtau = e^{U}, H = e^{2U} p^2 / 2.  Returns the resampled
    record together with the max residual of Hamilton's equations evaluated by
    central differences on the resampled path.
    """
    if traj.kind != "isokinetic":
        raise UnsupportedConfigurationError("transform applies to isokinetic runs")
    sc = traj.scenario
    if not sc.metric_family.is_flat:
        raise UnsupportedConfigurationError("transform applies to flat-torus runs")

    # field must be locally potential with the supplied potential along the path
    worst = 0.0
    for i in range(0, len(traj.times), max(1, len(traj.times) // 64)):
        q = traj.q[i]
        resid = np.abs(sc.field(q) + U.grad(q)).max()
        jac = sc.field_jac(q)
        closed = np.abs(jac - jac.T).max()
        worst = max(worst, resid, closed)
    if worst > 1e-8:
        raise NotLocallyPotentialError(
            f"field is not -grad U along the path (residual {worst:.3e})")

    u = np.array([U.value(qi) for qi in traj.q])
    tau = cumulative_simpson(np.exp(-u), x=traj.times, initial=0.0)
    p = np.exp(-u)[:, None] * traj.v
    H = 0.5 * np.exp(2 * u) * np.einsum("ij,ij->i", p, p)

    q_spline = CubicSpline(tau, traj.q, axis=0)
    p_spline = CubicSpline(tau, p, axis=0)
    m = len(tau)
    tau_grid = np.linspace(tau[0], tau[-1], m)
    qr = q_spline(tau_grid)
    pr = p_spline(tau_grid)
    ur = np.array([U.value(qi) for qi in qr])
    gur = np.array([U.grad(qi) for qi in qr])
    Hr = 0.5 * np.exp(2 * ur) * np.einsum("ij,ij->i", pr, pr)

    dtau = tau_grid[1] - tau_grid[0]
    dq = (qr[2:] - qr[:-2]) / (2 * dtau)
    dp = (pr[2:] - pr[:-2]) / (2 * dtau)
    dH_dp = np.exp(2 * ur)[:, None] * pr       # dq/dtau = dH/dp
    dH_dq = (np.exp(2 * ur) * np.einsum("ij,ij->i", pr, pr))[:, None] * gur
    resid_q = np.abs(dq - dH_dp[1:-1]).max()
    resid_p = np.abs(dp + dH_dq[1:-1]).max()

    return DettmannMorrissRecord(
        tau=tau_grid, q=qr, p=pr, H=Hr,
        H_drift=float(np.abs(H - H[0]).max()),
        hamilton_residual=float(max(resid_q, resid_p)),
    )


def omega_form(state, pert1, pert2, U):
    """Evaluate  omega = sum dv ^ dq - dU ^ (sum v dq)  on two tangent vectors.

    Perturbations are (xi, eta) pairs at the state, eta being the ordinary
    velocity perturbation.
    """
    xi1, eta1 = (np.asarray(a, dtype=float) for a in pert1)
    xi2, eta2 = (np.asarray(a, dtype=float) for a in pert2)
    v = state.v
    du = U.grad(state.q)
    pairing = float(eta1 @ xi2 - eta2 @ xi1)
    twist = float((du @ xi1) * (v @ xi2) - (du @ xi2) * (v @ xi1))
    return pairing - twist


@dataclass
class TangentPairRun:
    times: np.ndarray
    q: np.ndarray
    v: np.ndarray
    xi: np.ndarray    # (m, k, n)
    eta: np.ndarray
    int_phi: np.ndarray


def transport_tangent_pairs(scenario, initial, pairs, T, dt):
    """Co-integrate the isokinetic flow with full (xi, eta) linearizations.

    Flat-torus only; used for conformal-rate measurements of the 2-form above.
    """
    if not scenario.metric_family.is_flat:
        raise UnsupportedConfigurationError("tangent-pair transport is flat-torus only")
    n = scenario.dim
    k = len(pairs)
    n_steps = int(round(T / dt))

    def rhs(y):
        q, v = y[0], y[1]
        xi, eta = y[2], y[3]
        E = scenario.field(q)
        A = scenario.field_jac(q)
        ev = float(E @ v)
        dq = v
        dv = E - ev * v
        dxi = eta
        Axi = xi @ A.T
        dEta = (Axi - np.outer(Axi @ v, v) - np.outer(eta @ E, v) - ev * eta)
        return dq, dv, dxi, dEta

    q = np.array(initial.q, dtype=float)
    v = np.array(initial.v, dtype=float)
    xi = np.array([p[0] for p in pairs], dtype=float)
    eta = np.array([p[1] for p in pairs], dtype=float)

    m = n_steps + 1
    qs = np.empty((m, n)); vs = np.empty((m, n))
    xis = np.empty((m, k, n)); etas = np.empty((m, k, n))
    phis = np.empty(m)
    qs[0], vs[0], xis[0], etas[0] = q, v, xi, eta
    phis[0] = float(scenario.field(q) @ v)

    y = (q, v, xi, eta)
    for i in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(tuple(a + 0.5 * dt * b for a, b in zip(y, k1)))
        k3 = rhs(tuple(a + 0.5 * dt * b for a, b in zip(y, k2)))
        k4 = rhs(tuple(a + dt * b for a, b in zip(y, k3)))
        y = tuple(a + (dt / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
                  for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))
        q, v, xi, eta = y
        v = v / np.linalg.norm(v)
        y = (q, v, xi, eta)
        qs[i + 1], vs[i + 1], xis[i + 1], etas[i + 1] = q, v, xi, eta
        phis[i + 1] = float(scenario.field(q) @ v)

    times = initial.t + dt * np.arange(m)
    int_phi = cumulative_simpson(phis, x=times, initial=0.0)
    return TangentPairRun(times=times, q=qs, v=vs, xi=xis, eta=etas, int_phi=int_phi)
