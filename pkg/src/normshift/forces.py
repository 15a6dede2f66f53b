"""Force fields of planar Newtonian systems and their constructors.

A force field F(r, v) is expanded in the velocity frame as
F = A * N + B * M.  The scalar ansatz builds F from a single generator
A(x, y, v, theta) via F = A * N - A_theta * M, which is the parameterization
used by all built-in fields that admit the normal shift of curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numdiff
from .errors import DegenerateVelocity, InvalidParams, MissingPartial, UnknownCatalogueEntry
from .geometry import ConformalMetric, christoffel, frame, polar_from_cartesian


@dataclass(frozen=True)
class Profile:
    """Smooth function of one variable with a derivative evaluator."""

    fn: Callable[[float], float]
    deriv: Callable[[float], float] | None = None

    def __call__(self, x: float) -> float:
        return float(self.fn(x))

    def d(self, x: float) -> float:
        if self.deriv is not None:
            return float(self.deriv(x))
        return numdiff.richardson(self.fn, x)

    @staticmethod
    def constant(c: float) -> "Profile":
        return Profile(fn=lambda x: c, deriv=lambda x: 0.0)

    @staticmethod
    def polynomial(coeffs) -> "Profile":
        c = [float(a) for a in coeffs]
        dc = [i * c[i] for i in range(1, len(c))]

        def fn(x: float) -> float:
            return sum(a * x**i for i, a in enumerate(c))

        def deriv(x: float) -> float:
            return sum(a * x**i for i, a in enumerate(dc))

        return Profile(fn=fn, deriv=deriv)


@dataclass(frozen=True)
class ForceField:
    """Evaluator F(r, v) with optional analytic Jacobians.

    Jacobian convention: spatial_jacobian(r, v)[i, j] = dF_j / dr^i and
    velocity_jacobian(r, v)[i, j] = dF_j / dv^i.  When absent, Jacobians are
    computed by Richardson-extrapolated central differences.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    spatial_jacobian: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    velocity_jacobian: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    claims_normality: bool = False
    label: str = ""

    def force(self, r, v) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(r, float), np.asarray(v, float)), dtype=float)

    def jac_spatial(self, r, v) -> np.ndarray:
        r = np.asarray(r, float)
        v = np.asarray(v, float)
        if self.spatial_jacobian is not None:
            return np.asarray(self.spatial_jacobian(r, v), dtype=float)
        jac = np.zeros((2, 2))
        for i in range(2):
            def f_of_ri(t: float, i=i) -> np.ndarray:
                rp = r.copy()
                rp[i] = t
                return self.force(rp, v)

            col = _richardson_vec(f_of_ri, r[i])
            jac[i, :] = col
        return jac

    def jac_velocity(self, r, v) -> np.ndarray:
        r = np.asarray(r, float)
        v = np.asarray(v, float)
        if self.velocity_jacobian is not None:
            return np.asarray(self.velocity_jacobian(r, v), dtype=float)
        jac = np.zeros((2, 2))
        for i in range(2):
            def f_of_vi(t: float, i=i) -> np.ndarray:
                vp = v.copy()
                vp[i] = t
                return self.force(r, vp)

            col = _richardson_vec(f_of_vi, v[i])
            jac[i, :] = col
        return jac


def _richardson_vec(f: Callable[[float], np.ndarray], x: float) -> np.ndarray:
    h = numdiff._step(x, numdiff.H1_RICH)
    d1 = (f(x + h) - f(x - h)) / (2.0 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


@dataclass(frozen=True)
class ABDecomposition:
    """Components of the force along N (A) and along M (B)."""

    A: float
    B: float


def ab_decompose(field: ForceField, r, v) -> ABDecomposition:
    """Project F(r, v) on the velocity frame: A = <F, N>, B = <F, M>."""
    fr = frame(v)
    f = field.force(r, v)
    return ABDecomposition(A=float(f @ fr.N), B=float(f @ fr.M))


# ---------------------------------------------------------------------------
# Scalar generator A(x, y, v, theta) and the ansatz F = A N - A_theta M.
# ---------------------------------------------------------------------------

_PARTIAL_NAMES = ("a_x", "a_y", "a_v", "a_theta", "a_theta_theta",
                  "a_theta_v", "a_theta_x", "a_theta_y")


class ScalarFieldA:
    """Scalar generator A(x, y, v, theta) with the partials the residual needs.

    theta is measured against the fixed direction (1, 0).  Analytic partial
    closures may be supplied with the same signature as ``fn``; missing ones
    fall back to Richardson-extrapolated central differences of ``fn``
    (plain first-order steps for first partials, wider steps for the
    second-order ones).
    """

    def __init__(self, fn, *, a_x=None, a_y=None, a_v=None, a_theta=None,
                 a_theta_theta=None, a_theta_v=None, a_theta_x=None,
                 a_theta_y=None, allow_fd: bool = True, label: str = ""):
        self.fn = fn
        self.label = label
        self.allow_fd = allow_fd
        self._analytic = {
            "a_x": a_x, "a_y": a_y, "a_v": a_v, "a_theta": a_theta,
            "a_theta_theta": a_theta_theta, "a_theta_v": a_theta_v,
            "a_theta_x": a_theta_x, "a_theta_y": a_theta_y,
        }

    def __call__(self, x, y, v, theta) -> float:
        return float(self.fn(x, y, v, theta))

    def has_analytic_partials(self) -> bool:
        return all(self._analytic[name] is not None for name in _PARTIAL_NAMES)

    def _get(self, name: str):
        fn = self._analytic[name]
        if fn is None and not self.allow_fd:
            raise MissingPartial(f"partial {name} not supplied and fallback disabled")
        return fn

    def a_x(self, x, y, v, theta) -> float:
        fn = self._get("a_x")
        if fn is not None:
            return float(fn(x, y, v, theta))
        return numdiff.richardson(lambda t: self.fn(t, y, v, theta), x)

    def a_y(self, x, y, v, theta) -> float:
        fn = self._get("a_y")
        if fn is not None:
            return float(fn(x, y, v, theta))
        return numdiff.richardson(lambda t: self.fn(x, t, v, theta), y)

    def a_v(self, x, y, v, theta) -> float:
        fn = self._get("a_v")
        if fn is not None:
            return float(fn(x, y, v, theta))
        return numdiff.richardson(lambda t: self.fn(x, y, t, theta), v)

    def a_theta(self, x, y, v, theta) -> float:
        fn = self._get("a_theta")
        if fn is not None:
            return float(fn(x, y, v, theta))
        return numdiff.richardson(lambda t: self.fn(x, y, v, t), theta)

    def a_theta_theta(self, x, y, v, theta) -> float:
        fn = self._get("a_theta_theta")
        if fn is not None:
            return float(fn(x, y, v, theta))
        return numdiff.richardson2(lambda t: self.fn(x, y, v, t), theta)

    def a_theta_v(self, x, y, v, theta) -> float:
        fn = self._get("a_theta_v")
        if fn is not None:
            return float(fn(x, y, v, theta))
        return numdiff.richardson_mixed(lambda t, u: self.fn(x, y, u, t), theta, v)

    def a_theta_x(self, x, y, v, theta) -> float:
        fn = self._get("a_theta_x")
        if fn is not None:
            return float(fn(x, y, v, theta))
        return numdiff.richardson_mixed(lambda t, u: self.fn(u, y, v, t), theta, x)

    def a_theta_y(self, x, y, v, theta) -> float:
        fn = self._get("a_theta_y")
        if fn is not None:
            return float(fn(x, y, v, theta))
        return numdiff.richardson_mixed(lambda t, u: self.fn(x, u, v, t), theta, y)

    def cartesian(self, x, y, v1, v2) -> float:
        """A evaluated with the velocity in Cartesian components."""
        speed = math.hypot(v1, v2)
        if speed < 1e-300:
            raise DegenerateVelocity("scalar generator undefined at v = 0")
        return float(self.fn(x, y, speed, math.atan2(v2, v1)))


def speed_profile_ansatz(profile: Profile) -> ScalarFieldA:
    """Generator A = a(v): force along the velocity, all angle partials zero."""
    zero = lambda x, y, v, t: 0.0
    return ScalarFieldA(lambda x, y, v, t: profile(v),
                        a_x=zero, a_y=zero,
                        a_v=lambda x, y, v, t: profile.d(v),
                        a_theta=zero, a_theta_theta=zero, a_theta_v=zero,
                        a_theta_x=zero, a_theta_y=zero, label="speed-profile")


def cos_profile_ansatz(profile: Profile) -> ScalarFieldA:
    """Generator A = a(v) cos(theta) of the homogeneous anisotropic family."""
    zero = lambda x, y, v, t: 0.0
    return ScalarFieldA(
        lambda x, y, v, t: profile(v) * math.cos(t),
        a_x=zero, a_y=zero,
        a_v=lambda x, y, v, t: profile.d(v) * math.cos(t),
        a_theta=lambda x, y, v, t: -profile(v) * math.sin(t),
        a_theta_theta=lambda x, y, v, t: -profile(v) * math.cos(t),
        a_theta_v=lambda x, y, v, t: -profile.d(v) * math.sin(t),
        a_theta_x=zero, a_theta_y=zero, label="cos-profile")


def from_scalar_ansatz(a: ScalarFieldA, *, claims_normality: bool = False) -> ForceField:
    """Force field F = A N - A_theta M generated by a scalar field A.

    Such fields satisfy the first of the two normality constraints
    identically; they admit the normal shift exactly when A also solves the
    reduced normality equation.
    """

    def fn(r: np.ndarray, v: np.ndarray) -> np.ndarray:
        p = polar_from_cartesian(v)
        fr = frame(v)
        a_val = a(r[0], r[1], p.v, p.theta)
        b_val = -a.a_theta(r[0], r[1], p.v, p.theta)
        return a_val * fr.N + b_val * fr.M

    return ForceField(fn=fn, claims_normality=claims_normality,
                      label=a.label or "scalar-ansatz")


def complex_force(a: ScalarFieldA, z: complex, w: complex) -> complex:
    """Complex form of the scalar ansatz: F = (w/|w|)(A + w A_w - wbar A_wbar).

    Position and velocity are packed as z = x + iy, w = v1 + iv2.  The
    Wirtinger derivatives are taken numerically on the Cartesian-velocity
    representation of A, so this path is independent of the polar partial
    closures that ``from_scalar_ansatz`` uses.
    """
    speed = abs(w)
    if speed < 1e-300:
        raise DegenerateVelocity("complex ansatz undefined at w = 0")
    x, y = z.real, z.imag
    v1, v2 = w.real, w.imag
    a_val = a.cartesian(x, y, v1, v2)
    a_v1 = numdiff.richardson(lambda t: a.cartesian(x, y, t, v2), v1)
    a_v2 = numdiff.richardson(lambda t: a.cartesian(x, y, v1, t), v2)
    a_w = 0.5 * (a_v1 - 1j * a_v2)
    a_wbar = 0.5 * (a_v1 + 1j * a_v2)
    return (w / speed) * (a_val + w * a_w - w.conjugate() * a_wbar)


# ---------------------------------------------------------------------------
# Conformal transport between metric representations.
# ---------------------------------------------------------------------------

def _gamma_vv(metric: ConformalMetric, r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Quadratic connection term (Gamma v v)^k = sum_ij gamma[k,i,j] v^i v^j."""
    gamma = christoffel(metric, r)
    return np.einsum("kij,i,j->k", gamma, v, v)


def conformal_transport(a_prime: ScalarFieldA, metric: ConformalMetric,
                        *, inverse: bool = False) -> ScalarFieldA:
    """Map the flat-metric generator A' to the conformal-metric generator A.

    A = A' exp(-f) + <Gamma v v, N_cov>, where N_cov are the covariant
    components of the metric-unit vector along v (exp(-f) v / |v|).  With
    ``inverse=True`` the map is inverted, recovering A' from A.  Partials of
    the returned field use the finite-difference fallback.
    """

    def fn(x: float, y: float, v: float, theta: float) -> float:
        r = np.array([x, y])
        vvec = np.array([v * math.cos(theta), v * math.sin(theta)])
        ef = math.exp(-metric.value(r))
        gvv = _gamma_vv(metric, r, vvec)
        n_cov = ef * np.array([math.cos(theta), math.sin(theta)])
        term = float(gvv @ n_cov)
        if inverse:
            return (a_prime(x, y, v, theta) - term) / ef
        return a_prime(x, y, v, theta) * ef + term

    suffix = "<-metric" if inverse else "->metric"
    return ScalarFieldA(fn, label=(a_prime.label or "A") + suffix)


def flat_from_covariant(field: ForceField, metric: ConformalMetric) -> ForceField:
    """Euclidean-side field F' = F - Gamma v v of a covariant-side field F.

    The two systems (covariant dynamics of F in the metric, flat dynamics of
    F') trace identical trajectories.  The connection term here uses the
    closed-form conformal contraction Gamma v v = |v|^2 grad f - 2 <grad f, v> v
    rather than the component sum, so agreement of the two integrations also
    cross-checks the Christoffel components.
    """

    def fn(r: np.ndarray, v: np.ndarray) -> np.ndarray:
        g = metric.gradient(r)
        return field.force(r, v) - (float(v @ v) * g - 2.0 * float(g @ v) * v)

    return ForceField(fn=fn, claims_normality=field.claims_normality,
                      label=(field.label or "field") + "-flat")


def covariant_from_flat(field: ForceField, metric: ConformalMetric) -> ForceField:
    """Covariant-side field F = F' + Gamma v v of a Euclidean-side field F'."""

    def fn(r: np.ndarray, v: np.ndarray) -> np.ndarray:
        return field.force(r, v) + _gamma_vv(metric, r, v)

    return ForceField(fn=fn, claims_normality=field.claims_normality,
                      label=(field.label or "field") + "-covariant")


# ---------------------------------------------------------------------------
# Built-in field families.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MDTypeParams:
    """Data of a multidimensional-type field.

    W(x, y, v) must satisfy W_v != 0 on the working domain; h is a function
    of one variable applied to W.  grad_w returns (W_x, W_y); grad_w_v its
    v-derivative (W_xv, W_yv); w_vv is optional and only used by closed-form
    coefficient checks.
    """

    w: Callable[[float, float, float], float]
    w_v: Callable[[float, float, float], float]
    grad_w: Callable[[float, float, float], tuple[float, float]]
    h: Profile
    w_vv: Callable[[float, float, float], float] | None = None
    grad_w_v: Callable[[float, float, float], tuple[float, float]] | None = None

    @staticmethod
    def from_conformal(f: ConformalMetric, h: Profile) -> "MDTypeParams":
        """W = v exp(-f(x, y)): the metrizable sub-family."""

        def w(x, y, v):
            return v * math.exp(-f.f(x, y))

        def w_v(x, y, v):
            return math.exp(-f.f(x, y))

        def grad_w(x, y, v):
            g = f.gradient((x, y))
            e = math.exp(-f.f(x, y))
            return (-v * e * g[0], -v * e * g[1])

        def w_vv(x, y, v):
            return 0.0

        def grad_w_v(x, y, v):
            g = f.gradient((x, y))
            e = math.exp(-f.f(x, y))
            return (-e * g[0], -e * g[1])

        return MDTypeParams(w=w, w_v=w_v, grad_w=grad_w, h=h,
                            w_vv=w_vv, grad_w_v=grad_w_v)


def mdtype_field(params: MDTypeParams, *, label: str = "mdtype") -> ForceField:
    """Multidimensional-type field F = h(W) N / W_v - |v| (2<gW,N>N - gW)/W_v."""

    def fn(r: np.ndarray, v: np.ndarray) -> np.ndarray:
        fr = frame(v)
        speed = float(np.hypot(v[0], v[1]))
        x, y = float(r[0]), float(r[1])
        wv = params.w_v(x, y, speed)
        if abs(wv) < 1e-12:
            raise InvalidParams(f"W_v vanishes at ({x:.3g}, {y:.3g}, v={speed:.3g})")
        gw = np.array(params.grad_w(x, y, speed))
        wval = params.w(x, y, speed)
        return (params.h(wval) * fr.N - speed * (2.0 * float(gw @ fr.N) * fr.N - gw)) / wv

    return ForceField(fn=fn, claims_normality=True, label=label)


def gravity_field(magnitude: float = 1.0) -> ForceField:
    const = np.array([0.0, -float(magnitude)])
    zero = np.zeros((2, 2))
    return ForceField(fn=lambda r, v: const.copy(),
                      spatial_jacobian=lambda r, v: zero.copy(),
                      velocity_jacobian=lambda r, v: zero.copy(),
                      claims_normality=False, label="gravity")


def oscillator_field(omega: float) -> ForceField:
    om2 = float(omega) ** 2
    jr = np.array([[0.0, 0.0], [0.0, -om2]])
    zero = np.zeros((2, 2))
    return ForceField(fn=lambda r, v: np.array([0.0, -om2 * r[1]]),
                      spatial_jacobian=lambda r, v: jr.copy(),
                      velocity_jacobian=lambda r, v: zero.copy(),
                      claims_normality=False, label="oscillator")


def anisotropic_field(profile: Profile, m=(1.0, 0.0)) -> ForceField:
    """Spatially homogeneous anisotropic field F = A(|v|)(2 <N, m> N - m)."""
    mv = np.asarray(m, float)
    norm = float(np.hypot(mv[0], mv[1]))
    if norm < 1e-12:
        raise InvalidParams("anisotropy direction must be nonzero")
    mv = mv / norm

    def fn(r: np.ndarray, v: np.ndarray) -> np.ndarray:
        fr = frame(v)
        return profile(float(np.hypot(v[0], v[1]))) * (2.0 * float(fr.N @ mv) * fr.N - mv)

    return ForceField(fn=fn, claims_normality=True, label="anisotropic")


def marked_point_field(profile: Profile, center=(0.0, 0.0)) -> ForceField:
    """Marked-point field F = A(|v|)(2 <N, r> N - r)/|r|^2, r relative to the center."""
    c = np.asarray(center, float)

    def fn(r: np.ndarray, v: np.ndarray) -> np.ndarray:
        rr = np.asarray(r, float) - c
        rho2 = float(rr @ rr)
        if rho2 < 1e-24:
            raise InvalidParams("marked-point field is singular at its center")
        fr = frame(v)
        return profile(float(np.hypot(v[0], v[1]))) * (2.0 * float(fr.N @ rr) * fr.N - rr) / rho2

    return ForceField(fn=fn, claims_normality=True, label="marked_point")


def geodesic_field(metric: ConformalMetric) -> ForceField:
    """Geodesic flow of the conformal metric, as a flat-space field.

    F = -|v|^2 grad f + 2 <grad f, v> v; equal to -(Gamma v v).
    """

    def fn(r: np.ndarray, v: np.ndarray) -> np.ndarray:
        g = metric.gradient(r)
        v2 = float(v @ v)
        return -v2 * g + 2.0 * float(g @ v) * v

    return ForceField(fn=fn, claims_normality=True, label="geodesic")


def metrizable_field(metric: ConformalMetric, h: Profile) -> ForceField:
    """Geodesic-flow field plus a speed-dependent drive along the velocity.

    F = -|v|^2 grad f + 2 <grad f, v> v + (v/|v|) H(|v| exp(-f)) exp(f).
    """

    def fn(r: np.ndarray, v: np.ndarray) -> np.ndarray:
        fr = frame(v)
        g = metric.gradient(r)
        speed = float(np.hypot(v[0], v[1]))
        v2 = speed * speed
        ef = math.exp(metric.value(r))
        return -v2 * g + 2.0 * float(g @ v) * v + fr.N * h(speed / ef) * ef

    return ForceField(fn=fn, claims_normality=True, label="metrizable")


def disc_invariant_ansatz(radius: float, profile: Profile) -> ScalarFieldA:
    """Invariant solution on a disc of the given radius.

    A = -2 v^2 (x cos th + y sin th) / Q + v f(v / Q) with Q = R^2 - x^2 - y^2.
    Defined strictly inside the disc; a small margin keeps evaluations away
    from the singular boundary circle.
    """
    if float(radius) <= 0.0:
        raise InvalidParams("disc radius must be positive")
    r2 = float(radius) ** 2
    margin = 1e-6 * r2

    def q_of(x: float, y: float) -> float:
        q = r2 - x * x - y * y
        if q <= margin:
            raise InvalidParams("evaluation point too close to the disc boundary")
        return q

    def fn(x, y, v, th):
        q = q_of(x, y)
        return -2.0 * v * v * (x * math.cos(th) + y * math.sin(th)) / q + v * profile(v / q)

    def a_theta(x, y, v, th):
        q = q_of(x, y)
        return -2.0 * v * v * (-x * math.sin(th) + y * math.cos(th)) / q

    def a_theta_theta(x, y, v, th):
        q = q_of(x, y)
        return 2.0 * v * v * (x * math.cos(th) + y * math.sin(th)) / q

    def a_theta_v(x, y, v, th):
        q = q_of(x, y)
        return -4.0 * v * (-x * math.sin(th) + y * math.cos(th)) / q

    def a_theta_x(x, y, v, th):
        q = q_of(x, y)
        core = -x * math.sin(th) + y * math.cos(th)
        return 2.0 * v * v * math.sin(th) / q - 4.0 * x * v * v * core / (q * q)

    def a_theta_y(x, y, v, th):
        q = q_of(x, y)
        core = -x * math.sin(th) + y * math.cos(th)
        return -2.0 * v * v * math.cos(th) / q - 4.0 * y * v * v * core / (q * q)

    def a_x(x, y, v, th):
        q = q_of(x, y)
        core = x * math.cos(th) + y * math.sin(th)
        return (-2.0 * v * v * math.cos(th) / q - 4.0 * x * v * v * core / (q * q)
                + 2.0 * x * v * v * profile.d(v / q) / (q * q))

    def a_y(x, y, v, th):
        q = q_of(x, y)
        core = x * math.cos(th) + y * math.sin(th)
        return (-2.0 * v * v * math.sin(th) / q - 4.0 * y * v * v * core / (q * q)
                + 2.0 * y * v * v * profile.d(v / q) / (q * q))

    def a_v(x, y, v, th):
        q = q_of(x, y)
        core = x * math.cos(th) + y * math.sin(th)
        return -4.0 * v * core / q + profile(v / q) + v * profile.d(v / q) / q

    return ScalarFieldA(fn, a_x=a_x, a_y=a_y, a_v=a_v, a_theta=a_theta,
                        a_theta_theta=a_theta_theta, a_theta_v=a_theta_v,
                        a_theta_x=a_theta_x, a_theta_y=a_theta_y,
                        label="disc_invariant")


def disc_invariant_field(radius: float, profile: Profile) -> ForceField:
    f = from_scalar_ansatz(disc_invariant_ansatz(radius, profile), claims_normality=True)
    return ForceField(fn=f.fn, claims_normality=True, label="disc_invariant")


# ---------------------------------------------------------------------------
# Catalogue: string-addressable entries with JSON-style parameter objects.
# ---------------------------------------------------------------------------

def _profile_from_params(p, default=None) -> Profile:
    if p is None:
        if default is not None:
            return default
        raise InvalidParams("missing profile parameter")
    if isinstance(p, Profile):
        return p
    if isinstance(p, (int, float)):
        return Profile.constant(float(p))
    if isinstance(p, dict):
        kind = p.get("kind")
        if kind == "constant":
            return Profile.constant(float(p["value"]))
        if kind == "poly":
            return Profile.polynomial(p["coeffs"])
        raise InvalidParams(f"unknown profile kind {kind!r}")
    raise InvalidParams(f"cannot build a profile from {type(p).__name__}")


def _metric_from_params(p) -> ConformalMetric:
    if isinstance(p, ConformalMetric):
        return p
    if p is None or p == {} or p.get("kind") in (None, "zero", "euclidean"):
        return ConformalMetric.euclidean()
    kind = p.get("kind")
    if kind == "constant":
        return ConformalMetric.constant(float(p["value"]))
    if kind == "sin_cos":
        amp = float(p.get("amplitude", 1.0))
        return ConformalMetric(
            f=lambda x, y: amp * math.sin(x) * math.cos(y),
            grad_f=lambda x, y: (amp * math.cos(x) * math.cos(y),
                                 -amp * math.sin(x) * math.sin(y)),
        )
    if kind == "linear":
        ax, ay = float(p.get("ax", 1.0)), float(p.get("ay", 0.0))
        return ConformalMetric(f=lambda x, y: ax * x + ay * y,
                               grad_f=lambda x, y: (ax, ay))
    raise InvalidParams(f"unknown metric kind {kind!r}")


def _build_gravity(params: dict) -> ForceField:
    return gravity_field(float(params.get("magnitude", 1.0)))


def _build_oscillator(params: dict) -> ForceField:
    if "omega" not in params:
        raise InvalidParams("oscillator requires parameter 'omega'")
    return oscillator_field(float(params["omega"]))


def _build_anisotropic(params: dict) -> ForceField:
    prof = _profile_from_params(params.get("profile"))
    return anisotropic_field(prof, m=params.get("m", (1.0, 0.0)))


def _build_marked_point(params: dict) -> ForceField:
    prof = _profile_from_params(params.get("profile"))
    return marked_point_field(prof, center=params.get("center", (0.0, 0.0)))


def _build_geodesic(params: dict) -> ForceField:
    return geodesic_field(_metric_from_params(params.get("f")))


def _build_metrizable(params: dict) -> ForceField:
    metric = _metric_from_params(params.get("f"))
    prof = _profile_from_params(params.get("H"), default=Profile.constant(0.0))
    return metrizable_field(metric, prof)


def _build_mdtype(params: dict) -> ForceField:
    if isinstance(params.get("W"), MDTypeParams):
        md = params["W"]
    else:
        metric = _metric_from_params(params.get("f"))
        prof = _profile_from_params(params.get("h"), default=Profile.constant(0.0))
        md = MDTypeParams.from_conformal(metric, prof)
    field = mdtype_field(md)
    for x, y, v in ((0.0, 0.0, 1.0), (1.0, -1.0, 2.0), (-0.5, 0.5, 0.7)):
        if abs(md.w_v(x, y, v)) < 1e-12:
            raise InvalidParams("W_v vanishes at a probe point")
    return field


def _build_disc_invariant(params: dict) -> ForceField:
    radius = float(params.get("R", 0.0))
    prof = _profile_from_params(params.get("profile"), default=Profile.constant(1.0))
    return disc_invariant_field(radius, prof)


CATALOGUE = {
    "gravity": {
        "build": _build_gravity,
        "claims_normality": False,
        "params": {"magnitude": "optional, default 1.0"},
        "description": "Homogeneous downward field F = (0, -magnitude).",
    },
    "oscillator": {
        "build": _build_oscillator,
        "claims_normality": False,
        "params": {"omega": "required frequency"},
        "description": "Harmonic restoring force F = (0, -omega^2 y).",
    },
    "anisotropic": {
        "build": _build_anisotropic,
        "claims_normality": True,
        "params": {"profile": "A(v) profile", "m": "optional unit direction, default (1,0)"},
        "description": "Homogeneous field F = A(|v|)(2<N,m>N - m); force at angle 2*theta to m.",
    },
    "marked_point": {
        "build": _build_marked_point,
        "claims_normality": True,
        "params": {"profile": "A(v) profile", "center": "optional, default origin"},
        "description": "Field F = A(|v|)(2<N,r>N - r)/|r|^2 with a marked center.",
    },
    "geodesic": {
        "build": _build_geodesic,
        "claims_normality": True,
        "params": {"f": "conformal factor spec"},
        "description": "Geodesic flow of g = exp(-2f) delta as a flat-space field.",
    },
    "metrizable": {
        "build": _build_metrizable,
        "claims_normality": True,
        "params": {"f": "conformal factor spec", "H": "speed profile"},
        "description": "Geodesic field plus tangential drive H(|v| exp(-f)) exp(f).",
    },
    "mdtype": {
        "build": _build_mdtype,
        "claims_normality": True,
        "params": {"f": "conformal factor spec", "h": "profile applied to W",
                   "W": "alternatively, programmatic MDTypeParams"},
        "description": "Multidimensional-type field built from W(x,y,v) with W_v != 0.",
    },
    "disc_invariant": {
        "build": _build_disc_invariant,
        "claims_normality": True,
        "params": {"R": "disc radius", "profile": "f(u) profile"},
        "description": "Scalar-ansatz field from the disc-invariant generator, |r| < R.",
    },
}


def catalogue(name: str, params: dict | None = None) -> ForceField:
    """Build a built-in force field by name with a JSON-style parameter dict."""
    entry = CATALOGUE.get(name)
    if entry is None:
        raise UnknownCatalogueEntry(f"no catalogue field named {name!r}")
    return entry["build"](dict(params or {}))


def catalogue_listing() -> list[dict]:
    """Stable machine-readable description of the built-in fields."""
    rows = []
    for name in sorted(CATALOGUE):
        entry = CATALOGUE[name]
        rows.append({
            "name": name,
            "claims_normality": entry["claims_normality"],
            "params": entry["params"],
            "description": entry["description"],
        })
    return rows
