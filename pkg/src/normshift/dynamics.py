"""Phase-flow integration and deviation (variation-vector) equations.

The flow is r' = v, v' = F(r, v) - Gamma(r) v v, the connection term being
zero for the Euclidean metric.  The variation vector tau of a one-parameter
family of trajectories satisfies the linearized equations

    tau''_k = sum_i dF_k/dr^i tau_i + sum_i dF_k/dv^i tau'_i,

and its frame components phi = <tau, N>, psi = <tau, M> satisfy a pair of
second-order ODEs whose coefficients are the alpha/beta gradient components
of A and B.  Both linearizations are integrated together with the base flow
as one combined system, never against a stored interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import numdiff, odesolve
from .errors import StepFailure
from .forces import ForceField, ab_decompose
from .geometry import ConformalMetric, christoffel, frame
from .normality import ab_gradients


@dataclass(frozen=True)
class PhaseState:
    """Point of the phase space: position r and velocity v."""

    r: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, float).reshape(2))
        object.__setattr__(self, "v", np.asarray(self.v, float).reshape(2))
        if not (np.all(np.isfinite(self.r)) and np.all(np.isfinite(self.v))):
            raise ValueError("phase state has non-finite coordinates")

    def packed(self) -> np.ndarray:
        return np.concatenate([self.r, self.v])


@dataclass
class IntegratorConfig:
    """Integrator selection: adaptive 5(4) pair (default) or fixed-step RK4."""

    method: str = "dopri-adaptive"
    step: float | None = None
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.method not in ("dopri-adaptive", "rk4-fixed"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.method == "rk4-fixed" and (self.step is None or self.step <= 0):
            raise ValueError("rk4-fixed requires a positive step")


@dataclass(frozen=True)
class DeviationState:
    """Variation vector tau, its rate, and frame components phi, psi."""

    tau: np.ndarray
    tau_dot: np.ndarray
    phi: float
    psi: float


class Trajectory:
    """Integrated trajectory: output nodes plus a dense-output interpolant.

    The interpolant is cubic Hermite on the accepted steps and reproduces the
    stored states at the nodes exactly.
    """

    def __init__(self, times: np.ndarray, sol: odesolve.OdeSolution,
                 metric: ConformalMetric | None = None):
        self.times = np.asarray(times, float)
        self._sol = sol
        self.metric = metric
        ys = sol.sample(self.times) if len(self.times) != len(sol.ts) or \
            not np.allclose(self.times, sol.ts) else sol.ys
        self._ys = np.asarray(ys)

    @property
    def states(self) -> list[PhaseState]:
        return [PhaseState(y[:2], y[2:4]) for y in self._ys]

    def positions(self) -> np.ndarray:
        return self._ys[:, :2]

    def velocities(self) -> np.ndarray:
        return self._ys[:, 2:4]

    def state_at(self, t: float) -> PhaseState:
        y = self._sol(t)
        return PhaseState(y[:2], y[2:4])

    @property
    def initial(self) -> PhaseState:
        return PhaseState(self._ys[0, :2], self._ys[0, 2:4])

    def write_csv(self, path, deviations: Sequence[DeviationState] | None = None):
        header = "t,x,y,vx,vy"
        if deviations is not None:
            header += ",phi,psi"
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for i, t in enumerate(self.times):
                row = [t, *self._ys[i, :4]]
                if deviations is not None:
                    row += [deviations[i].phi, deviations[i].psi]
                fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def _flow_rhs(field: ForceField, metric: ConformalMetric | None):
    if metric is None:
        def rhs(t, y):
            return np.concatenate([y[2:4], field.force(y[:2], y[2:4])])
        return rhs

    def rhs(t, y):
        r, v = y[:2], y[2:4]
        gamma = christoffel(metric, r)
        acc = field.force(r, v) - np.einsum("kij,i,j->k", gamma, v, v)
        return np.concatenate([v, acc])

    return rhs


def _run(rhs, t0, y0, t1, cfg: IntegratorConfig, t_stops):
    if cfg.method == "rk4-fixed":
        return odesolve.solve_rk4(rhs, t0, y0, t1, step=cfg.step,
                                  max_steps=cfg.max_steps, t_stops=t_stops)
    return odesolve.solve_dopri(rhs, t0, y0, t1, abs_tol=cfg.abs_tol,
                                rel_tol=cfg.rel_tol, max_steps=cfg.max_steps,
                                t_stops=t_stops)


def integrate(field: ForceField, metric: ConformalMetric | None,
              init: PhaseState, t_span, cfg: IntegratorConfig | None = None,
              t_eval=None, exact_nodes: bool = False) -> Trajectory:
    """Integrate the phase flow over t_span (which may run backward).

    Requested output times are sampled from the dense interpolant; with
    ``exact_nodes`` the stepper lands on each of them instead (useful when a
    test differentiates the output with a stencil finer than a step).
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (math.isfinite(t0) and math.isfinite(t1)):
        raise ValueError("t_span must be finite")
    stops = list(np.asarray(t_eval, float)) if (t_eval is not None and exact_nodes) else None
    sol = _run(_flow_rhs(field, metric), t0, init.packed(), t1, cfg, stops)
    if not np.all(np.isfinite(sol.ys)):
        raise StepFailure("trajectory left the finite domain")
    times = sol.ts if t_eval is None else np.asarray(t_eval, float)
    return Trajectory(times, sol, metric=metric)


def _tau_acceleration(field: ForceField, r, v, tau, tau_dot) -> np.ndarray:
    """Right side of the linearized equations, tau'' = J_r^T tau + J_v^T tau'.

    With analytic Jacobians they are contracted directly; otherwise the two
    directional derivatives are Richardson-extrapolated central differences
    of the force along tau and tau_dot.
    """
    if field.spatial_jacobian is not None and field.velocity_jacobian is not None:
        return field.jac_spatial(r, v).T @ tau + field.jac_velocity(r, v).T @ tau_dot

    acc = np.zeros(2)
    nt = float(np.hypot(tau[0], tau[1]))
    if nt > 0.0:
        h = numdiff.H1_RICH * max(1.0, float(np.hypot(r[0], r[1]))) / nt
        d1 = (field.force(r + h * tau, v) - field.force(r - h * tau, v)) / (2 * h)
        d2 = (field.force(r + h / 2 * tau, v) - field.force(r - h / 2 * tau, v)) / h
        acc += (4.0 * d2 - d1) / 3.0
    nd = float(np.hypot(tau_dot[0], tau_dot[1]))
    if nd > 0.0:
        h = numdiff.H1_RICH * max(1.0, float(np.hypot(v[0], v[1]))) / nd
        d1 = (field.force(r, v + h * tau_dot) - field.force(r, v - h * tau_dot)) / (2 * h)
        d2 = (field.force(r, v + h / 2 * tau_dot) - field.force(r, v - h / 2 * tau_dot)) / h
        acc += (4.0 * d2 - d1) / 3.0
    return acc


def _combined_solution(field: ForceField, init: PhaseState, tau0, tau_dot0,
                       t_span, cfg: IntegratorConfig):
    """One integration of the 8-dimensional system (r, v, tau, tau')."""

    def rhs(t, y):
        r, v, tau, tau_dot = y[:2], y[2:4], y[4:6], y[6:8]
        return np.concatenate([v, field.force(r, v), tau_dot,
                               _tau_acceleration(field, r, v, tau, tau_dot)])

    y0 = np.concatenate([init.packed(),
                         np.asarray(tau0, float), np.asarray(tau_dot0, float)])
    return _run(rhs, float(t_span[0]), y0, float(t_span[1]), cfg, None), y0


def _deviations_from_samples(times, sol, y0) -> list[DeviationState]:
    out = []
    for t in times:
        y = sol(t) if t != times[0] else y0
        fr = frame(y[2:4])
        tau = y[4:6]
        out.append(DeviationState(tau=tau.copy(), tau_dot=y[6:8].copy(),
                                  phi=float(tau @ fr.N), psi=float(tau @ fr.M)))
    return out


def integrate_variational(field: ForceField, base: Trajectory, tau0, tau_dot0,
                          cfg: IntegratorConfig | None = None) -> list[DeviationState]:
    """Integrate the variation vector along the base trajectory.

    The combined 8-dimensional system (r, v, tau, tau') is re-integrated from
    the base initial state; results are reported at the base output times.
    Euclidean metric only.
    """
    if base.metric is not None:
        raise ValueError("variational equations are implemented for the flat metric only")
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(base.times[0]), float(base.times[-1])
    sol, y0 = _combined_solution(field, base.initial, tau0, tau_dot0, (t0, t1), cfg)
    return _deviations_from_samples(base.times, sol, y0)


def phi_psi_initial_from_tau(field: ForceField, init: PhaseState,
                             tau0, tau_dot0) -> tuple[float, float, float, float]:
    """Initial data (phi, phi', psi, psi') matching a variational initial pair.

    phi' = <tau', N> + (B/v) psi and psi' = <tau', M> - (B/v) phi, because the
    frame itself rotates at rate B/|v| along the flow.
    """
    fr = frame(init.v)
    speed = float(np.hypot(init.v[0], init.v[1]))
    b = ab_decompose(field, init.r, init.v).B
    tau0 = np.asarray(tau0, float)
    tau_dot0 = np.asarray(tau_dot0, float)
    phi0 = float(tau0 @ fr.N)
    psi0 = float(tau0 @ fr.M)
    phi_dot0 = float(tau_dot0 @ fr.N) + b / speed * psi0
    psi_dot0 = float(tau_dot0 @ fr.M) - b / speed * phi0
    return phi0, phi_dot0, psi0, psi_dot0


def integrate_phi_psi(field: ForceField, base: Trajectory,
                      phi0: float, phi_dot0: float, psi0: float, psi_dot0: float,
                      cfg: IntegratorConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the projected deviation ODEs along the base trajectory.

    phi'' = a3 phi' + (a1 + a4 B/v) phi + (a4 + B/v) psi'
            + (a2 + b1 + b3 A/v + b4 B/v - a3 B/v - A B/v^2) psi
    psi'' = (b3 - 2B/v) phi' + (b4 + A/v) psi' + (2AB/v^2 - b3 A/v) phi
            + (b2 - b3 B/v + B^2/v^2) psi

    (a_i = alpha_i, b_i = beta_i).  The base flow is integrated alongside as
    one combined system.  Returns (phi, psi) sampled at the base times.
    """
    if base.metric is not None:
        raise ValueError("phi/psi equations are implemented for the flat metric only")
    cfg = cfg or IntegratorConfig()

    def rhs(t, y):
        r, v = y[:2], y[2:4]
        phi, phi_dot, psi, psi_dot = y[4], y[5], y[6], y[7]
        ab = ab_decompose(field, r, v)
        g = ab_gradients(field, r, v)
        speed = float(np.hypot(v[0], v[1]))
        a, b = ab.A, ab.B
        phi_acc = (g.alpha3 * phi_dot
                   + (g.alpha1 + g.alpha4 * b / speed) * phi
                   + (g.alpha4 + b / speed) * psi_dot
                   + (g.alpha2 + g.beta1 + g.beta3 * a / speed + g.beta4 * b / speed
                      - g.alpha3 * b / speed - a * b / speed**2) * psi)
        psi_acc = ((g.beta3 - 2.0 * b / speed) * phi_dot
                   + (g.beta4 + a / speed) * psi_dot
                   + (2.0 * a * b / speed**2 - g.beta3 * a / speed) * phi
                   + (g.beta2 - g.beta3 * b / speed + (b / speed) ** 2) * psi)
        return np.concatenate([v, field.force(r, v),
                               [phi_dot, phi_acc, psi_dot, psi_acc]])

    t0, t1 = float(base.times[0]), float(base.times[-1])
    y0 = np.concatenate([base.initial.packed(), [phi0, phi_dot0, psi0, psi_dot0]])
    sol = _run(rhs, t0, y0, t1, cfg, None)
    samples = np.array([sol(t) if t != t0 else y0 for t in base.times])
    return samples[:, 4], samples[:, 6]


def speed_derivative(field: ForceField, state: PhaseState) -> float:
    """Rate of change of the speed along the flow: d|v|/dt = A = <F, N>."""
    return ab_decompose(field, state.r, state.v).A
