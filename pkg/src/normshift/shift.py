"""The normal-shift construction.

A curve is launched along trajectories by the Cauchy data r(0, s) = r(s),
v(0, s) = nu(s) n(s).  The shift is normal exactly when the deviation
function phi(t, s) = <dr/ds, N> vanishes on the grid; phi(0, s) = 0 holds by
construction and phi'(0, s) = 0 is equivalent to the initial-speed ODE

    d nu / ds = -<r'(s), M> B(r(s), nu n(s)) / nu,

which reduces to the classical form -B/nu for an arclength parameterization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from . import dynamics, odesolve
from .errors import NuBlowup, SingularCurve
from .forces import ForceField, ab_decompose
from .geometry import ConformalMetric, frame
from .dynamics import DeviationState, IntegratorConfig, PhaseState, integrate

_REGULARITY_EPS = 1e-12


@dataclass(frozen=True)
class Curve:
    """Regular parametric curve with first and second derivative evaluators.

    ``normal`` selects which unit normal the shift launches along: "left" is
    the tangent rotated by +90 degrees, "right" by -90 degrees.
    """

    r: Callable[[float], np.ndarray]
    dr: Callable[[float], np.ndarray]
    ddr: Callable[[float], np.ndarray]
    s_range: tuple[float, float]
    normal: str = "left"

    def __post_init__(self):
        if self.normal not in ("left", "right"):
            raise ValueError("normal must be 'left' or 'right'")

    def point(self, s: float) -> np.ndarray:
        return np.asarray(self.r(s), float)

    def velocity(self, s: float) -> np.ndarray:
        return np.asarray(self.dr(s), float)

    def acceleration(self, s: float) -> np.ndarray:
        return np.asarray(self.ddr(s), float)


def line_segment(p0, p1, *, normal: str = "left") -> Curve:
    """Straight segment from p0 to p1, unit-speed with s in [0, |p1 - p0|]."""
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    length = float(np.hypot(*(p1 - p0)))
    if length < _REGULARITY_EPS:
        raise SingularCurve("degenerate segment")
    direction = (p1 - p0) / length
    return Curve(r=lambda s: p0 + s * direction,
                 dr=lambda s: direction.copy(),
                 ddr=lambda s: np.zeros(2),
                 s_range=(0.0, length), normal=normal)


def segment_on_axis(s_min: float = -1.0, s_max: float = 1.0, *,
                    normal: str = "right") -> Curve:
    """The horizontal segment r(s) = (s, 0); the right normal points down."""
    return Curve(r=lambda s: np.array([s, 0.0]),
                 dr=lambda s: np.array([1.0, 0.0]),
                 ddr=lambda s: np.zeros(2),
                 s_range=(float(s_min), float(s_max)), normal=normal)


def tilted_line(s_min: float = -1.0, s_max: float = 1.0, *,
                normal: str = "left") -> Curve:
    """The 45-degree line r(s) = s/sqrt(2) (1, 1), arclength parameterized."""
    d = np.array([1.0, 1.0]) / math.sqrt(2.0)
    return Curve(r=lambda s: s * d, dr=lambda s: d.copy(),
                 ddr=lambda s: np.zeros(2),
                 s_range=(float(s_min), float(s_max)), normal=normal)


def circle_arc(center, radius: float, s_range=(0.0, math.pi), *,
               normal: str = "left") -> Curve:
    """Arclength-parameterized arc of a circle; s is arclength, angle = s/R."""
    c = np.asarray(center, float)
    radius = float(radius)
    if radius <= 0:
        raise SingularCurve("circle radius must be positive")

    def r(s):
        a = s / radius
        return c + radius * np.array([math.cos(a), math.sin(a)])

    def dr(s):
        a = s / radius
        return np.array([-math.sin(a), math.cos(a)])

    def ddr(s):
        a = s / radius
        return -np.array([math.cos(a), math.sin(a)]) / radius

    return Curve(r=r, dr=dr, ddr=ddr, s_range=(float(s_range[0]), float(s_range[1])),
                 normal=normal)


def spline_through(points, *, normal: str = "left") -> Curve:
    """Natural cubic spline through the given points, s in [0, 1]."""
    pts = np.asarray(points, float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise SingularCurve("need at least three planar points")
    s_nodes = np.linspace(0.0, 1.0, len(pts))
    sx = CubicSpline(s_nodes, pts[:, 0])
    sy = CubicSpline(s_nodes, pts[:, 1])
    dx, dy = sx.derivative(), sy.derivative()
    ddx, ddy = sx.derivative(2), sy.derivative(2)
    return Curve(r=lambda s: np.array([float(sx(s)), float(sy(s))]),
                 dr=lambda s: np.array([float(dx(s)), float(dy(s))]),
                 ddr=lambda s: np.array([float(ddx(s)), float(ddy(s))]),
                 s_range=(0.0, 1.0), normal=normal)


def frenet(curve: Curve, s: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Unit tangent, the chosen unit normal, and the signed curvature at s.

    The curvature sign follows the chosen normal: k = <dT/ds, n>/|r'|, so the
    Frenet relations read T' = |r'| k n and n' = -|r'| k T.
    """
    d = curve.velocity(s)
    speed = float(np.hypot(d[0], d[1]))
    if speed < _REGULARITY_EPS:
        raise SingularCurve(f"|r'({s})| = {speed:.3e}; curve not regular")
    tangent = d / speed
    n = np.array([-tangent[1], tangent[0]])
    if curve.normal == "right":
        n = -n
    dd = curve.acceleration(s)
    k = float(dd @ n) / speed**2
    return tangent, n, k


@dataclass
class NuSolution:
    """Initial-speed profile nu(s) on the reached sub-interval.

    ``truncated`` marks that integration stopped before covering the full
    requested range (nu approached zero or the ODE blew up); queries outside
    the reached interval raise NuBlowup.
    """

    s_lo: float
    s_hi: float
    truncated: bool
    _eval: Callable[[float], float]
    _deriv: Callable[[float], float]

    def __call__(self, s: float) -> float:
        if not (self.s_lo - 1e-12 <= s <= self.s_hi + 1e-12):
            raise NuBlowup(f"nu(s) only reached [{self.s_lo:.6g}, {self.s_hi:.6g}]; "
                           f"queried s={s:.6g}")
        return self._eval(s)

    def deriv(self, s: float) -> float:
        self(s)
        return self._deriv(s)


def _nu_rhs(curve: Curve, field: ForceField):
    def rhs_scalar(s: float, nu: float) -> float:
        _, n, _ = frenet(curve, s)
        v = nu * n
        fr = frame(v)
        b = ab_decompose(field, curve.point(s), v).B
        tangent_component = float(curve.velocity(s) @ fr.M)
        return -tangent_component * b / nu

    return rhs_scalar


def solve_nu(curve: Curve, field: ForceField, s0: float, nu0: float,
             s_range=None, *, nu_floor_ratio: float = 1e-3,
             abs_tol: float = 1e-12, rel_tol: float = 1e-12) -> NuSolution:
    """Solve the initial-speed ODE with nu(s0) = nu0 over s_range.

    Integration proceeds from s0 toward both endpoints and stops early if
    |nu| falls below ``nu_floor_ratio * |nu0|`` (the right side is singular
    at nu = 0); in that case the returned profile is marked truncated.
    """
    if nu0 == 0.0:
        raise ValueError("nu0 must be nonzero")
    lo, hi = curve.s_range if s_range is None else (float(s_range[0]), float(s_range[1]))
    if not (lo <= s0 <= hi):
        raise ValueError(f"s0={s0} outside [{lo}, {hi}]")
    rhs_scalar = _nu_rhs(curve, field)
    floor = abs(nu0) * nu_floor_ratio

    def rhs(s, y):
        return np.array([rhs_scalar(s, float(y[0]))])

    branches = {}
    truncated = False
    reached = [s0, s0]
    for idx, target in enumerate((lo, hi)):
        if target == s0:
            continue
        # march in fixed sub-steps so an approach to nu = 0 is caught early
        n_sub = 64
        grid = np.linspace(s0, target, n_sub + 1)
        ts_all = [np.array([s0])]
        ys_all = [np.array([[nu0]])]
        fs_all = [np.array([rhs(s0, [nu0])])]
        y = np.array([float(nu0)])
        stop = s0
        for a, b in zip(grid[:-1], grid[1:]):
            try:
                sol = odesolve.solve_dopri(rhs, a, y, b, abs_tol=abs_tol,
                                           rel_tol=rel_tol)
            except Exception:
                truncated = True
                break
            if not np.all(np.isfinite(sol.ys)) or np.min(np.abs(sol.ys)) < floor:
                truncated = True
                break
            ts_all.append(sol.ts[1:])
            ys_all.append(sol.ys[1:])
            fs_all.append(sol.fs[1:])
            y = sol.ys[-1]
            stop = b
        branches[idx] = odesolve.OdeSolution(np.concatenate(ts_all),
                                             np.vstack(ys_all),
                                             np.vstack(fs_all))
        reached[idx] = stop

    s_lo = min(reached[0], s0) if 0 in branches else s0
    s_hi = max(reached[1], s0) if 1 in branches else s0

    def evaluate(s: float) -> float:
        if s == s0 or (0 in branches and 1 in branches and abs(s - s0) < 1e-15):
            return float(nu0)
        branch = branches.get(0 if s < s0 else 1)
        if branch is None:
            return float(nu0)
        return float(branch(s)[0])

    def derivative(s: float) -> float:
        return rhs_scalar(s, evaluate(s))

    return NuSolution(s_lo=s_lo, s_hi=s_hi, truncated=truncated,
                      _eval=evaluate, _deriv=derivative)


def constant_nu(value: float) -> Callable[[float], float]:
    return lambda s: float(value)


@dataclass
class ShiftGrid:
    """States, deviation data and nu over the (t, s) grid of a shift."""

    s_nodes: np.ndarray
    t_nodes: np.ndarray
    states: list[list[PhaseState]]        # states[i][j] at (t_i, s_j)
    nu: np.ndarray                        # nu per s-node
    phi: np.ndarray                       # shape (n_t, n_s)
    psi: np.ndarray
    tau: np.ndarray                       # shape (n_t, n_s, 2)

    def max_abs_phi(self) -> float:
        return float(np.max(np.abs(self.phi)))

    def max_tau_norm(self) -> float:
        return float(np.max(np.hypot(self.tau[..., 0], self.tau[..., 1])))

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,s,x,y,vx,vy,phi,psi,nu\n")
            for i, t in enumerate(self.t_nodes):
                for j, s in enumerate(self.s_nodes):
                    st = self.states[i][j]
                    row = [t, s, st.r[0], st.r[1], st.v[0], st.v[1],
                           self.phi[i, j], self.psi[i, j], self.nu[j]]
                    fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def normal_shift(curve: Curve, field: ForceField, metric: ConformalMetric | None,
                 nu, t_span, n_s: int = 64, n_t: int = 100,
                 cfg: IntegratorConfig | None = None,
                 s_range=None) -> ShiftGrid:
    """Populate the (t, s) grid of the shift launched from the curve.

    ``nu`` is either a NuSolution or any callable s -> speed.  Deviations use
    tau(0) = r'(s) and tau'(0) = nu' n + nu n', with nu' taken from the
    initial-speed ODE when available (differentiating a NuSolution) and from
    central differences otherwise.
    """
    cfg = cfg or IntegratorConfig()
    lo, hi = curve.s_range if s_range is None else (float(s_range[0]), float(s_range[1]))
    if isinstance(nu, NuSolution):
        lo = max(lo, nu.s_lo)
        hi = min(hi, nu.s_hi)
    s_nodes = np.linspace(lo, hi, n_s)
    t_nodes = np.linspace(float(t_span[0]), float(t_span[1]), n_t)

    n_cols: list[list[PhaseState]] = [[None] * n_s for _ in range(n_t)]
    phi = np.zeros((n_t, n_s))
    psi = np.zeros((n_t, n_s))
    tau = np.zeros((n_t, n_s, 2))
    nu_vals = np.zeros(n_s)

    rhs_scalar = _nu_rhs(curve, field)
    for j, s in enumerate(s_nodes):
        tangent, n, k = frenet(curve, s)
        nu_s = nu(s)
        nu_vals[j] = nu_s
        if isinstance(nu, NuSolution):
            dnu = nu.deriv(s)
        else:
            h = 1e-6 * max(1.0, abs(s))
            if s - h < lo or s + h > hi:
                dnu = rhs_scalar(s, nu_s) if abs(nu_s) > 1e-12 else 0.0
            else:
                dnu = (nu(s + h) - nu(s - h)) / (2 * h)
        speed_param = float(np.hypot(*curve.velocity(s)))
        n_prime = -k * speed_param * tangent
        init = PhaseState(curve.point(s), nu_s * n)
        tau0 = curve.velocity(s)
        tau_dot0 = dnu * n + nu_s * n_prime
        try:
            if metric is None:
                # one combined integration yields the trajectory and deviations
                sol, y0 = dynamics._combined_solution(field, init, tau0, tau_dot0,
                                                      t_span, cfg)
                samples = np.array([sol(t) if t != t_nodes[0] else y0
                                    for t in t_nodes])
                states_j = [PhaseState(y[:2], y[2:4]) for y in samples]
                devs = dynamics._deviations_from_samples(t_nodes, sol, y0)
            else:
                base = integrate(field, metric, init, t_span, cfg, t_eval=t_nodes)
                states_j = base.states
                devs = _deviation_by_differencing(curve, field, metric, nu, s,
                                                  t_span, t_nodes, cfg)
        except Exception as exc:
            raise type(exc)(f"{exc} (at s={s:.6g})") from exc
        for i in range(n_t):
            n_cols[i][j] = states_j[i]
            phi[i, j] = devs[i].phi
            psi[i, j] = devs[i].psi
            tau[i, j] = devs[i].tau
    return ShiftGrid(s_nodes=s_nodes, t_nodes=t_nodes, states=n_cols,
                     nu=nu_vals, phi=phi, psi=psi, tau=tau)


def _deviation_by_differencing(curve, field, metric, nu, s, t_span, t_nodes, cfg,
                               delta: float = 1e-5):
    """Deviation data for the metric case: central differences of two
    neighboring shifted trajectories in s."""
    trajs = []
    for ss in (s + delta, s - delta):
        _, n, _ = frenet(curve, ss)
        init = PhaseState(curve.point(ss), nu(ss) * n)
        trajs.append(integrate(field, metric, init, t_span, cfg, t_eval=t_nodes))
    out = []
    for i in range(len(t_nodes)):
        plus, minus = trajs[0].states[i], trajs[1].states[i]
        tau = (plus.r - minus.r) / (2 * delta)
        tau_dot = (plus.v - minus.v) / (2 * delta)
        mid_v = (plus.v + minus.v) / 2.0
        fr = frame(mid_v)
        out.append(DeviationState(tau=tau, tau_dot=tau_dot,
                                  phi=float(tau @ fr.N), psi=float(tau @ fr.M)))
    return out


@dataclass
class NormalityReport:
    """Verdict and extrema of the deviation data over a shift grid."""

    max_abs_phi: float
    max_angle_dev_deg: float
    max_tau_norm: float
    phi_tol: float
    normal: bool
    nu: list[float]

    def to_dict(self) -> dict:
        return {
            "verdict": "normal" if self.normal else "not normal",
            "max_abs_phi": self.max_abs_phi,
            "max_angle_deviation_deg": self.max_angle_dev_deg,
            "max_tau_norm": self.max_tau_norm,
            "phi_tol": self.phi_tol,
            "nu_per_s_node": self.nu,
        }


def normality_report(grid: ShiftGrid, phi_tol: float | None = None) -> NormalityReport:
    """Summarize a shift grid: max |phi|, worst angle between dr/ds and v.

    The default tolerance scales with the deviation magnitude,
    phi_tol = 1e-6 (1 + max |tau|), separating integrator-level phi from
    order-one failures.
    """
    max_tau = grid.max_tau_norm()
    tol = phi_tol if phi_tol is not None else 1e-6 * (1.0 + max_tau)
    max_phi = grid.max_abs_phi()

    worst = 0.0
    for i in range(len(grid.t_nodes)):
        for j in range(len(grid.s_nodes)):
            tau = grid.tau[i, j]
            v = grid.states[i][j].v
            nt, nv = np.hypot(*tau), np.hypot(*v)
            if nt < 1e-14 or nv < 1e-14:
                continue
            cosang = abs(float(tau @ v)) / (nt * nv)
            worst = max(worst, math.degrees(abs(math.asin(min(1.0, cosang)))))
    return NormalityReport(max_abs_phi=max_phi, max_angle_dev_deg=worst,
                           max_tau_norm=max_tau, phi_tol=tol,
                           normal=max_phi < tol, nu=[float(x) for x in grid.nu])
