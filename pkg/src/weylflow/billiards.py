"""Thermostatted Lorentz gas on the flat 2-torus with circular scatterers.

Free flight follows the exact thermostat curves (in field-aligned
coordinates the translates of  a x = -ln cos(a y), or the two straight lines
along +-E).  Collisions are located by sign-bracketing the distance to each
candidate circle image on arc subdivisions, then bisection to 1e-12 in time.
The quotient tangent dynamics is propagated in closed form across flights
(curvature vanishes on the 2-torus with constant field) and a curvature kick
at each specular reflection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import root

from .errors import (
    GrazingCollisionError,
    InvalidStateError,
    NoOrbitError,
    UnsupportedConfigurationError,
    ZeroFieldError,
)

GRAZING_TOL = 1e-10
FLIGHT_CAP_FACTOR = 10.0
BISECT_TOL = 1e-12


@dataclass
class Scatterer:
    center: np.ndarray
    radius: float


class BilliardTable:
    """Flat torus with disjoint circular scatterers and a constant field E.

    The field is stored as magnitude and direction angle; flight evaluation
    happens in field-aligned coordinates (rotation recorded in field_angle).
    """

    def __init__(self, periods=(1.0, 1.0), scatterers=(), field_magnitude=0.0,
                 field_angle=0.0):
        self.periods = np.asarray(periods, dtype=float)
        self.scatterers = [Scatterer(np.asarray(c, dtype=float), float(r))
                           for c, r in scatterers]
        self.a = float(field_magnitude)
        self.field_angle = float(field_angle)
        if self.a < 0:
            raise ValueError("field magnitude must be >= 0")
        for s in self.scatterers:
            if s.radius <= 0:
                raise ValueError("scatterer radius must be positive")
        self._check_disjoint()
        ca, sa = np.cos(self.field_angle), np.sin(self.field_angle)
        self._rot = np.array([[ca, sa], [-sa, ca]])      # world -> aligned
        self.horizon_finite = self._compute_horizon()

    @property
    def field(self):
        return self.a * np.array([np.cos(self.field_angle), np.sin(self.field_angle)])

    def to_aligned(self, x):
        return self._rot @ x

    def from_aligned(self, x):
        return self._rot.T @ x

    def wrap(self, q):
        return np.mod(q, self.periods)

    def _check_disjoint(self):
        items = self.scatterers
        for i, s in enumerate(items):
            for j, t in enumerate(items):
                shifts = [np.array([mx * self.periods[0], my * self.periods[1]])
                          for mx in (-1, 0, 1) for my in (-1, 0, 1)]
                for sh in shifts:
                    if i == j and not sh.any():
                        continue
                    gap = np.linalg.norm(t.center + sh - s.center) - s.radius - t.radius
                    if gap < 1e-9:
                        raise InvalidStateError(
                            f"scatterers {i} and {j} (shift {sh}) overlap or touch")

    def _compute_horizon(self, max_index=4):
        """True when every primitive lattice corridor up to |p|,|q| <= max_index is blocked."""
        if not self.scatterers:
            return False
        Lx, Ly = self.periods
        dirs = []
        for p in range(-max_index, max_index + 1):
            for q_ in range(0, max_index + 1):
                if p == 0 and q_ == 0:
                    continue
                if q_ == 0 and p != 1:
                    continue
                if q_ > 0 and np.gcd(abs(p), q_) != 1:
                    continue
                dirs.append((p, q_))
        for p, q_ in dirs:
            w = np.array([p * Lx, q_ * Ly])
            spacing = Lx * Ly / np.linalg.norm(w)
            nhat = np.array([-w[1], w[0]]) / np.linalg.norm(w)
            intervals = []
            for s in self.scatterers:
                tau = float(s.center @ nhat) % spacing
                intervals.append((tau - s.radius, tau + s.radius))
            if not _intervals_cover_circle(intervals, spacing):
                return False
        return True

    def outside(self, q, tol=0.0):
        qw = self.wrap(q)
        for s in self.scatterers:
            for mx in (-1, 0, 1):
                for my in (-1, 0, 1):
                    c = s.center + np.array([mx * self.periods[0], my * self.periods[1]])
                    if np.linalg.norm(qw - c) < s.radius - tol:
                        return False
        return True


def _intervals_cover_circle(intervals, period):
    segs = []
    for lo, hi in intervals:
        if hi - lo >= period:
            return True
        lo_m = lo % period
        hi_m = lo_m + (hi - lo)
        if hi_m <= period:
            segs.append((lo_m, hi_m))
        else:
            segs.append((lo_m, period))
            segs.append((0.0, hi_m - period))
    segs.sort()
    cover = 0.0
    for lo, hi in segs:
        if lo > cover + 1e-12:
            return False
        cover = max(cover, hi)
    return cover >= period - 1e-12


class ThermostatFlight:
    """Closed-form thermostat trajectory in field-aligned coordinates.

    Unit speed; arc length equals elapsed time.  theta is the velocity angle
    measured from the field direction and obeys  dtheta/dt = -a sin(theta).
    """

    def __init__(self, q0, v0, a):
        self.q0 = np.asarray(q0, dtype=float)
        self.a = float(a)
        self.theta0 = float(np.arctan2(v0[1], v0[0]))
        self.straight = self.a == 0.0 or abs(np.sin(self.theta0)) < 1e-12
        self.v0 = np.asarray(v0, dtype=float)
        if not self.straight:
            self.T0 = np.tan(0.5 * self.theta0)

    def tanhalf(self, t):
        return self.T0 * np.exp(-self.a * np.asarray(t, dtype=float))

    def theta(self, t):
        if self.straight:
            return np.full_like(np.asarray(t, dtype=float), self.theta0)
        return 2.0 * np.arctan(self.tanhalf(t))

    def vel(self, t):
        t = np.asarray(t, dtype=float)
        if self.straight:
            return np.broadcast_to(self.v0, t.shape + (2,)).copy()
        T = self.tanhalf(t)
        den = 1.0 + T * T
        return np.stack([(1.0 - T * T) / den, 2.0 * T / den], axis=-1)

    def pos(self, t):
        t = np.asarray(t, dtype=float)
        if self.straight:
            return self.q0 + t[..., None] * self.v0
        T = self.tanhalf(t)
        th = 2.0 * np.arctan(T)
        x = self.q0[0] + t + np.log((1.0 + T * T) / (1.0 + self.T0**2)) / self.a
        y = self.q0[1] + (self.theta0 - th) / self.a
        return np.stack([x, y], axis=-1)

    def pos_vel_scalar(self, t):
        """Scalar fast path for root refinement."""
        if self.straight:
            return (self.q0[0] + t * self.v0[0], self.q0[1] + t * self.v0[1],
                    self.v0[0], self.v0[1])
        T = self.T0 * math.exp(-self.a * t)
        den = 1.0 + T * T
        th = 2.0 * math.atan(T)
        x = self.q0[0] + t + math.log(den / (1.0 + self.T0**2)) / self.a
        y = self.q0[1] + (self.theta0 - th) / self.a
        return x, y, (1.0 - T * T) / den, 2.0 * T / den

    def int_phi(self, t):
        """Line integral of phi along the flight: a * (x(t) - x(0))."""
        if self.a == 0.0:
            return 0.0 * np.asarray(t, dtype=float)
        return self.a * (self.pos(t)[..., 0] - self.q0[0])


@dataclass
class CollisionEvent:
    time_of_flight: float
    scatterer: int
    point: np.ndarray           # impact point, same (unwrapped) frame as the flight
    normal: np.ndarray          # outward unit normal of the hit image circle
    v_in: np.ndarray
    v_out: np.ndarray
    impact_angle: float         # angle between -v_in and the normal
    cos_incidence: float
    image_shift: np.ndarray
    grazing: bool
    theta_in_aligned: float
    theta_out_aligned: float


@dataclass
class OpenFlight:
    time_of_flight: float
    end_q: np.ndarray
    end_v: np.ndarray


def free_flight(table, q, v, t_cap=None):
    """Advance along the exact thermostat curve to the first scatterer crossing.

    Returns a CollisionEvent (v_out filled with the specular image) or an
    OpenFlight capped at ``FLIGHT_CAP_FACTOR * max(periods)``.  The search
    runs in stages of increasing span so short flights stay cheap.
    """
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    if not table.outside(q, tol=1e-12):
        raise InvalidStateError(f"flight starts inside a scatterer at q={q}")
    if t_cap is None:
        t_cap = FLIGHT_CAP_FACTOR * float(table.periods.max())

    qa = table.to_aligned(q)
    va = table.to_aligned(v)
    flight = ThermostatFlight(qa, va, table.a)

    span = float(table.periods.max())
    t_lo = 0.0
    best = None
    for t_hi in _stages(span, t_cap):
        best = _search_window(flight, table, t_lo, t_hi)
        if best is not None:
            break
        t_lo = t_hi
    if best is None:
        end_a = flight.pos(np.array([t_cap]))[0]
        end_va = flight.vel(np.array([t_cap]))[0]
        return OpenFlight(t_cap, table.from_aligned(end_a), table.from_aligned(end_va))

    t_star, idx, c, shift = best
    p = table.from_aligned(flight.pos(np.array([t_star]))[0])
    v_in = table.from_aligned(flight.vel(np.array([t_star]))[0])
    N = (p - c) / np.linalg.norm(p - c)
    cos_in = float(-(v_in @ N))
    grazing = abs(cos_in) < GRAZING_TOL
    v_out = v_in - 2.0 * (v_in @ N) * N
    va_in = table.to_aligned(v_in)
    va_out = table.to_aligned(v_out)
    return CollisionEvent(
        time_of_flight=float(t_star), scatterer=idx, point=p, normal=N,
        v_in=v_in, v_out=v_out,
        impact_angle=float(np.arccos(np.clip(cos_in, -1.0, 1.0))),
        cos_incidence=cos_in, image_shift=shift, grazing=grazing,
        theta_in_aligned=float(np.arctan2(va_in[1], va_in[0])),
        theta_out_aligned=float(np.arctan2(va_out[1], va_out[0])),
    )


def _stages(span, t_cap):
    out = []
    t = min(1.5 * span, t_cap)
    while True:
        out.append(t)
        if t >= t_cap:
            return out
        t = min(4.0 * t, t_cap)


def _search_window(flight, table, t_lo, t_hi):
    """Earliest crossing in [t_lo, t_hi] over all candidate circle images."""
    r_min = min(s.radius for s in table.scatterers)
    h = r_min / 4.0
    if table.a > 0:
        h = min(h, 0.25 / table.a)
    n_seg = max(2, int(np.ceil((t_hi - t_lo) / h)))
    t_grid = np.linspace(t_lo, t_hi, n_seg + 1)
    pos_w = flight.pos(t_grid) @ table._rot
    vel_w = flight.vel(t_grid) @ table._rot
    lo = pos_w.min(axis=0)
    hi = pos_w.max(axis=0)

    best = None
    for idx, s in enumerate(table.scatterers):
        pad = s.radius + 2 * h
        mx_lo = int(np.floor((lo[0] - s.center[0] - pad) / table.periods[0]))
        mx_hi = int(np.ceil((hi[0] - s.center[0] + pad) / table.periods[0]))
        my_lo = int(np.floor((lo[1] - s.center[1] - pad) / table.periods[1]))
        my_hi = int(np.ceil((hi[1] - s.center[1] + pad) / table.periods[1]))
        for mx in range(mx_lo, mx_hi + 1):
            for my in range(my_lo, my_hi + 1):
                shift = np.array([mx * table.periods[0], my * table.periods[1]])
                c = s.center + shift
                t_star = _first_crossing(flight, table, c, s.radius, t_grid,
                                         pos_w, vel_w,
                                         t_best=None if best is None else best[0])
                if t_star is not None and (best is None or t_star < best[0]):
                    best = (t_star, idx, c, shift)
    return best


def _first_crossing(flight, table, c, r, t_grid, pos_w, vel_w, t_best=None):
    dx = pos_w[:, 0] - c[0]
    dy = pos_w[:, 1] - c[1]
    d = np.hypot(dx, dy) - r
    if d.min() > (t_grid[1] - t_grid[0]) + 1e-9:
        return None
    radial = dx * vel_w[:, 0] + dy * vel_w[:, 1]

    rot = table._rot

    def f(t):
        x, y, _, _ = flight.pos_vel_scalar(t)
        px = rot[0, 0] * x + rot[1, 0] * y
        py = rot[0, 1] * x + rot[1, 1] * y
        return math.hypot(px - c[0], py - c[1]) - r

    def g(t):
        x, y, vx, vy = flight.pos_vel_scalar(t)
        px = rot[0, 0] * x + rot[1, 0] * y
        py = rot[0, 1] * x + rot[1, 1] * y
        wx = rot[0, 0] * vx + rot[1, 0] * vy
        wy = rot[0, 1] * vx + rot[1, 1] * vy
        return (px - c[0]) * wx + (py - c[1]) * wy

    outside = d > BISECT_TOL
    crossing = outside[:-1] & (d[1:] <= BISECT_TOL)
    dip = outside[:-1] & outside[1:] & (radial[:-1] < 0.0) & (radial[1:] > 0.0)
    candidates = np.nonzero(crossing | dip)[0]
    for j in candidates:
        if t_best is not None and t_grid[j] > t_best:
            return None
        if crossing[j]:
            return _bisect(f, t_grid[j], t_grid[j + 1])
        t_min = _bisect_root(g, t_grid[j], t_grid[j + 1])
        if f(t_min) <= -BISECT_TOL:
            return _bisect(f, t_grid[j], t_min)
    return None


def _bisect(f, lo, hi):
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < BISECT_TOL:
            break
    return 0.5 * (lo + hi)


def _bisect_root(g, lo, hi):
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < BISECT_TOL:
            break
    return 0.5 * (lo + hi)


def reflect(event):
    """Specular reflection v' = v - 2 <v, N> N; grazing events are rejected."""
    if abs(event.cos_incidence) < GRAZING_TOL:
        raise GrazingCollisionError(
            f"tangential collision at {event.point} (cos={event.cos_incidence:.2e})")
    return event.point.copy(), event.v_out.copy()


@dataclass
class ConvexityReport:
    convex: bool
    margin: float
    per_scatterer: list
    strict_boundary: bool  # margin == 0: the sharp case r|E| = 1


def weyl_convexity(table):
    """Weyl convexity margin  min over the boundary of (1/r + <N, E>) = 1/r - |E|.

    Positive margin (r|E| < 1) keeps every scatterer image strictly convex.
    """
    per = [1.0 / s.radius - table.a for s in table.scatterers]
    margin = min(per) if per else float("inf")
    return ConvexityReport(convex=margin > 0, margin=margin, per_scatterer=per,
                           strict_boundary=margin == 0.0)


def exp_map_check(samples_aligned, field_magnitude):
    """Map flight samples through F(z) = e^{|E| z} and measure collinearity.

    Returns the max perpendicular deviation of interior image points from the
    line through the first and last image.
    """
    if field_magnitude == 0.0:
        raise ZeroFieldError("exponential straightening needs a nonzero field")
    samples = np.asarray(samples_aligned, dtype=float)
    if samples.ndim != 2 or len(samples) < 3:
        raise InvalidStateError("need at least 3 flight samples")
    z = samples[:, 0] + 1j * samples[:, 1]
    w = np.exp(field_magnitude * z)
    chord = w[-1] - w[0]
    chord = chord / abs(chord)
    dev = np.imag(np.conj(chord) * (w - w[0]))
    return float(np.abs(dev[1:-1]).max())


# -- tangent propagation -------------------------------------------------------

def flight_tangent_matrix(a, theta0, theta1, tof):
    """Quotient tangent map of a flight in the (xi, chi) frame coordinates.

    From the linearized system  xi' = -a cos(theta) xi + chi, chi' = 0
    (zero Weyl curvature on the flat 2-torus with constant field).
    """
    if a == 0.0:
        return np.array([[1.0, tof], [0.0, 1.0]])
    s0, s1 = np.sin(theta0), np.sin(theta1)
    if abs(s0) < 1e-12:  # straight flight along +-E
        sign = 1.0 if abs(theta0) < np.pi / 2 else -1.0
        decay = np.exp(-sign * a * tof)
        return np.array([[decay, (1.0 - decay) / (sign * a)], [0.0, 1.0]])
    shear = (1.0 / a) * (np.cos(theta1) - s1 * np.cos(theta0) / s0)
    return np.array([[s1 / s0, shear], [0.0, 1.0]])


def reflection_tangent_matrix(table, event):
    """Tangent map across a specular reflection in the (xi, chi) frame.

    First-order analysis of the event-synchronized reflection (perturbed
    impact time, perturbed normal, thermostat force on both sides) collapses
    to a single kick by the projected Weyl shape operator:

        chi+ = -(chi- + 2 (kappa + <N, E>) / cos(theta) * xi-),  xi+ = -xi-.
    """
    if abs(event.cos_incidence) < GRAZING_TOL:
        raise GrazingCollisionError("tangent map undefined at grazing incidence")
    r = table.scatterers[event.scatterer].radius
    kick = 2.0 * (1.0 / r + float(table.field @ event.normal)) / event.cos_incidence
    return -np.array([[1.0, 0.0], [kick, 1.0]])


@dataclass
class BilliardRun:
    events: list
    total_time: float
    grazing_count: int
    open_count: int
    lambda1: float = None
    exponents: np.ndarray = None
    collision_times: np.ndarray = None


def run_billiard(table, q0, v0, n_collisions, with_tangent=False,
                 max_consecutive_caps=100):
    """Iterate free flight + specular reflection for n_collisions events.

    With tangent propagation, the 2x2 quotient map is accumulated per
    collision with QR renormalization and the top exponent is reported per
    unit time.  Grazing collisions are skipped (counted) by restarting the
    flight just past the impact.
    """
    q = np.asarray(q0, dtype=float)
    v = np.asarray(v0, dtype=float)
    v = v / np.linalg.norm(v)
    events = []
    t_total = 0.0
    grazing = 0
    open_count = 0
    consecutive_caps = 0
    M = np.eye(2)
    lsum = np.zeros(2)
    times = []

    while len(events) < n_collisions:
        ev = free_flight(table, q, v)
        if isinstance(ev, OpenFlight):
            open_count += 1
            consecutive_caps += 1
            if consecutive_caps > max_consecutive_caps:
                raise InvalidStateError("infinite-horizon abort: too many capped flights")
            if with_tangent:
                fm = flight_tangent_matrix(
                    table.a,
                    float(np.arctan2(table.to_aligned(v)[1], table.to_aligned(v)[0])),
                    float(np.arctan2(table.to_aligned(ev.end_v)[1],
                                     table.to_aligned(ev.end_v)[0])),
                    ev.time_of_flight)
                M = fm @ M
            q, v = ev.end_q, ev.end_v
            t_total += ev.time_of_flight
            continue
        consecutive_caps = 0
        t_total += ev.time_of_flight
        if ev.grazing:
            grazing += 1
            # restart just past the tangency, keeping the incoming direction
            qa = table.to_aligned(q)
            fl = ThermostatFlight(qa, table.to_aligned(v), table.a)
            t_skip = ev.time_of_flight + 1e-9
            q = table.from_aligned(fl.pos(np.array([t_skip]))[0])
            v = table.from_aligned(fl.vel(np.array([t_skip]))[0])
            continue
        if with_tangent:
            th0 = float(np.arctan2(table.to_aligned(v)[1], table.to_aligned(v)[0]))
            fm = flight_tangent_matrix(table.a, th0, ev.theta_in_aligned,
                                       ev.time_of_flight)
            rm = reflection_tangent_matrix(table, ev)
            M = rm @ fm @ M
            Q, R = np.linalg.qr(M)
            lsum += np.log(np.abs(np.diag(R)))
            M = Q * np.where(np.diag(R) >= 0, 1.0, -1.0)
        q, v = reflect(ev)
        events.append(ev)
        times.append(t_total)

    exps = np.sort(lsum / t_total)[::-1] if with_tangent else None
    return BilliardRun(events=events, total_time=t_total, grazing_count=grazing,
                       open_count=open_count,
                       lambda1=float(exps[0]) if with_tangent else None,
                       exponents=exps,
                       collision_times=np.array(times))


# -- periodic orbits -----------------------------------------------------------

@dataclass
class OrbitStability:
    monodromy: np.ndarray
    trace: float
    eigenvalues: np.ndarray
    classification: str      # 'hyperbolic' | 'elliptic' | 'parabolic'
    period: float
    points: list
    normals: list
    re_product: float        # r |E| of the smaller scatterer involved


def _classify(trace, tol=1e-9):
    if abs(trace) < 2.0 - tol:
        return "elliptic"
    if abs(trace) > 2.0 + tol:
        return "hyperbolic"
    return "parabolic"


def periodic_orbit_stability(table):
    """Monodromy of the period-2 bouncing orbit between two scatterers whose
    axis is parallel to E (on-axis flights are the invariant straight lines)."""
    if len(table.scatterers) < 2:
        raise UnsupportedConfigurationError("need two scatterers")
    s1, s2 = table.scatterers[0], table.scatterers[1]
    delta = s2.center - s1.center
    dist = np.linalg.norm(delta)
    dhat = delta / dist
    Ehat = np.array([np.cos(table.field_angle), np.sin(table.field_angle)])
    cross = abs(dhat[0] * Ehat[1] - dhat[1] * Ehat[0])
    if table.a > 0 and cross > 1e-9:
        raise UnsupportedConfigurationError("scatterer axis not parallel to E")
    L = dist - s1.radius - s2.radius
    if L <= 0:
        raise NoOrbitError("scatterers too close for a bouncing orbit")
    p1 = s1.center + s1.radius * dhat
    p2 = s2.center - s2.radius * dhat
    for k, s in enumerate(table.scatterers[2:], start=2):
        t = np.clip((s.center - p1) @ dhat, 0.0, L)
        if np.linalg.norm(p1 + t * dhat - s.center) < s.radius + 1e-12:
            raise NoOrbitError(f"axis segment blocked by scatterer {k}")

    sign = 1.0 if dhat @ Ehat >= 0 else -1.0
    th_fwd = 0.0 if sign > 0 else np.pi
    th_bwd = np.pi if sign > 0 else 0.0
    F_fwd = flight_tangent_matrix(table.a, th_fwd, th_fwd, L)
    F_bwd = flight_tangent_matrix(table.a, th_bwd, th_bwd, L)
    N2 = -dhat
    N1 = dhat
    k2 = 2.0 / s2.radius + 2.0 * float(table.field @ N2)
    k1 = 2.0 / s1.radius + 2.0 * float(table.field @ N1)
    R2 = -np.array([[1.0, 0.0], [k2, 1.0]])
    R1 = -np.array([[1.0, 0.0], [k1, 1.0]])
    M = R1 @ F_bwd @ R2 @ F_fwd
    tr = float(np.trace(M))
    return OrbitStability(
        monodromy=M, trace=tr, eigenvalues=np.linalg.eigvals(M),
        classification=_classify(tr), period=2.0 * L,
        points=[p1, p2], normals=[N1, N2],
        re_product=min(s1.radius, s2.radius) * table.a,
    )


@dataclass
class PeriodTwoOrbit:
    psi: tuple                # boundary angles on the two circles (aligned frame)
    points: list              # impact points (world frame, unwrapped images)
    normals: list
    stability: OrbitStability
    image_trace: float        # classical trace in the straightened picture
    flight_time: float
    normal_residual: float


def _image_data(table, center_w, radius, psi):
    """Aligned-frame boundary point, outward normal angle and exp-image data."""
    c_a = table.to_aligned(center_w)
    z = c_a + radius * np.array([np.cos(psi), np.sin(psi)])
    a = table.a
    w = np.exp(a * (z[0] + 1j * z[1]))
    n_im_angle = psi + a * z[1]
    kappa_im = (1.0 / radius + a * np.cos(psi)) / (a * np.exp(a * z[0]))
    return z, w, n_im_angle, kappa_im


def find_period_two_orbit(table, pair, seed_psis, image_shift=(0, 0)):
    """Locate a period-2 orbit hitting both circles normally.

    Solved in the exponential-straightened picture: the image chord must be
    parallel to both image normals.  Validated by shooting the actual flight;
    stability is the composed thermostat monodromy, cross-checked against the
    classical two-mirror trace computed from image curvatures.
    """
    if table.a <= 0:
        raise ZeroFieldError("period-2 search in the image picture needs a > 0")
    i, j = pair
    s1, s2 = table.scatterers[i], table.scatterers[j]
    shift = np.array([image_shift[0] * table.periods[0],
                      image_shift[1] * table.periods[1]])
    c2_w = s2.center + shift

    def eqs(x):
        psi1, psi2 = x
        _, w1, n1, _ = _image_data(table, s1.center, s1.radius, psi1)
        _, w2, n2, _ = _image_data(table, c2_w, s2.radius, psi2)
        ch = w2 - w1
        return [np.imag(np.conj(ch) * np.exp(1j * n1)),
                np.imag(np.conj(ch) * np.exp(1j * n2))]

    sol = root(eqs, list(seed_psis), tol=1e-13)
    if not sol.success:
        raise NoOrbitError("period-2 root solve failed")
    psi1, psi2 = sol.x
    z1, w1, n1, kim1 = _image_data(table, s1.center, s1.radius, psi1)
    z2, w2, n2, kim2 = _image_data(table, c2_w, s2.radius, psi2)
    ch = w2 - w1
    # orientation: leave circle 1 along its outward normal, arrive against 2's
    if np.real(np.conj(ch) * np.exp(1j * n1)) < 0:
        raise NoOrbitError("chord leaves circle 1 inward")
    if np.real(np.conj(ch) * np.exp(1j * n2)) > 0:
        raise NoOrbitError("chord arrives along circle 2's outward normal")

    p1_w = table.from_aligned(z1)
    N1_w = table.from_aligned(np.array([np.cos(psi1), np.sin(psi1)]))
    ev = free_flight(table, p1_w + 1e-12 * N1_w, N1_w)
    if isinstance(ev, OpenFlight):
        raise NoOrbitError("flight from circle 1 does not return to a scatterer")
    p2_expected = table.from_aligned(z2)
    miss = np.linalg.norm(ev.point - p2_expected)
    if ev.scatterer != j or miss > 1e-6:
        raise NoOrbitError(f"flight misses the partner impact point by {miss:.2e}")
    normal_residual = abs(abs(ev.cos_incidence) - 1.0)
    if normal_residual > 1e-6:
        raise NoOrbitError(f"incidence not normal (residual {normal_residual:.2e})")

    th_out1 = psi1                      # departure velocity = N1 in aligned frame
    th_in2 = ev.theta_in_aligned
    tof = ev.time_of_flight
    F12 = flight_tangent_matrix(table.a, th_out1, th_in2, tof)
    th_out2 = np.arctan2(-np.sin(th_in2), -np.cos(th_in2))
    th_in1 = np.arctan2(-np.sin(th_out1), -np.cos(th_out1))
    F21 = flight_tangent_matrix(table.a, th_out2, th_in1, tof)
    k1 = 2.0 / s1.radius + 2.0 * float(table.field @ N1_w)
    N2_w = table.from_aligned(np.array([np.cos(psi2), np.sin(psi2)]))
    k2 = 2.0 / s2.radius + 2.0 * float(table.field @ N2_w)
    R1 = -np.array([[1.0, 0.0], [k1, 1.0]])
    R2 = -np.array([[1.0, 0.0], [k2, 1.0]])
    M = R1 @ F21 @ R2 @ F12
    tr = float(np.trace(M))

    D = abs(ch)
    pt, qt = 2.0 * kim2, 2.0 * kim1
    tr_image = 2.0 + 2.0 * pt * D + 2.0 * qt * D + pt * qt * D * D

    stab = OrbitStability(
        monodromy=M, trace=tr, eigenvalues=np.linalg.eigvals(M),
        classification=_classify(tr), period=2.0 * tof,
        points=[p1_w, ev.point], normals=[N1_w, ev.normal],
        re_product=min(s1.radius, s2.radius) * table.a,
    )
    return PeriodTwoOrbit(psi=(float(psi1), float(psi2)),
                          points=[p1_w, ev.point], normals=[N1_w, ev.normal],
                          stability=stab, image_trace=tr_image,
                          flight_time=tof, normal_residual=normal_residual)


def find_first_elliptic(radius, re_values, phase_grid=None, seed_grid=12):
    """Scan r|E| values for an elliptic period-2 orbit between a scatterer and
    its perpendicular translate (separation perpendicular to E, spacing chosen
    so the concave image arcs face each other)."""
    if phase_grid is None:
        phase_grid = np.linspace(2.7, 3.6, 7)
    records = []
    for re in re_values:
        if re <= 1.0:
            continue
        a = re / radius
        found = None
        for phase in phase_grid:
            d = phase / a
            if d < 2 * radius + 0.05:
                continue
            periods = (max(1.0, 4 * radius), max(1.0, d + 2 * radius + 0.5))
            table = BilliardTable(periods, [((0.3, 0.3), radius),
                                            ((0.3, 0.3 + d), radius)],
                                  field_magnitude=a)
            psis = np.linspace(0, 2 * np.pi, seed_grid, endpoint=False)
            for ps1 in psis:
                for ps2 in psis:
                    try:
                        orb = find_period_two_orbit(table, (0, 1), (ps1, ps2))
                    except (NoOrbitError, GrazingCollisionError, InvalidStateError):
                        continue
                    if orb.stability.classification == "elliptic":
                        found = (d, orb, table)
                        break
                if found:
                    break
            if found:
                break
        records.append((float(re), found))
        if found:
            return float(re), found[0], found[1], found[2], records
    return None, None, None, None, records
