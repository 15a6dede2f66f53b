"""Shared construction helpers for the test suite.

Random fields are built from small closed families with hand-coded
derivatives so that residual checks run in the analytic-partials regime;
finite-difference fallbacks are exercised separately.
"""

import math

import numpy as np

from normshift.forces import MDTypeParams, Profile, ScalarFieldA
from normshift.geometry import ConformalMetric

# (f, df) pairs for speed factors
_SPEED_BASIS = [
    (lambda v: 1.0, lambda v: 0.0),
    (lambda v: v, lambda v: 1.0),
    (lambda v: v * v, lambda v: 2.0 * v),
    (lambda v: math.sin(v), lambda v: math.cos(v)),
]

# (g, dg, ddg) for angle factors
_ANGLE_BASIS = [
    (lambda t: 1.0, lambda t: 0.0, lambda t: 0.0),
    (lambda t: math.cos(t), lambda t: -math.sin(t), lambda t: -math.cos(t)),
    (lambda t: math.sin(t), lambda t: math.cos(t), lambda t: -math.sin(t)),
    (lambda t: math.cos(2 * t), lambda t: -2 * math.sin(2 * t), lambda t: -4 * math.cos(2 * t)),
]

# (h, hx, hy) for position factors
_XY_BASIS = [
    (lambda x, y: 1.0, lambda x, y: 0.0, lambda x, y: 0.0),
    (lambda x, y: math.sin(x), lambda x, y: math.cos(x), lambda x, y: 0.0),
    (lambda x, y: math.cos(y), lambda x, y: 0.0, lambda x, y: -math.sin(y)),
    (lambda x, y: 0.25 * x * y, lambda x, y: 0.25 * y, lambda x, y: 0.25 * x),
]


def random_ansatz(rng, n_terms=3, label="random-ansatz") -> ScalarFieldA:
    """Random smooth generator A(x, y, v, theta) with analytic partials."""
    terms = []
    for _ in range(n_terms):
        c = float(rng.uniform(0.3, 1.0)) * float(rng.choice([-1.0, 1.0]))
        fv = _SPEED_BASIS[rng.integers(len(_SPEED_BASIS))]
        gt = _ANGLE_BASIS[rng.integers(len(_ANGLE_BASIS))]
        hxy = _XY_BASIS[rng.integers(len(_XY_BASIS))]
        terms.append((c, fv, gt, hxy))

    def total(part):
        def fn(x, y, v, t):
            return sum(part(c, fv, gt, hxy, x, y, v, t) for c, fv, gt, hxy in terms)
        return fn

    return ScalarFieldA(
        total(lambda c, fv, gt, hxy, x, y, v, t: c * fv[0](v) * gt[0](t) * hxy[0](x, y)),
        a_x=total(lambda c, fv, gt, hxy, x, y, v, t: c * fv[0](v) * gt[0](t) * hxy[1](x, y)),
        a_y=total(lambda c, fv, gt, hxy, x, y, v, t: c * fv[0](v) * gt[0](t) * hxy[2](x, y)),
        a_v=total(lambda c, fv, gt, hxy, x, y, v, t: c * fv[1](v) * gt[0](t) * hxy[0](x, y)),
        a_theta=total(lambda c, fv, gt, hxy, x, y, v, t: c * fv[0](v) * gt[1](t) * hxy[0](x, y)),
        a_theta_theta=total(lambda c, fv, gt, hxy, x, y, v, t: c * fv[0](v) * gt[2](t) * hxy[0](x, y)),
        a_theta_v=total(lambda c, fv, gt, hxy, x, y, v, t: c * fv[1](v) * gt[1](t) * hxy[0](x, y)),
        a_theta_x=total(lambda c, fv, gt, hxy, x, y, v, t: c * fv[0](v) * gt[1](t) * hxy[1](x, y)),
        a_theta_y=total(lambda c, fv, gt, hxy, x, y, v, t: c * fv[0](v) * gt[1](t) * hxy[2](x, y)),
        label=label)


def random_metric(rng, scale=0.3) -> ConformalMetric:
    a, b, c = rng.uniform(-scale, scale, 3)
    return ConformalMetric(
        f=lambda x, y: a * math.sin(x) + b * math.cos(y) + 0.1 * c * x * y,
        grad_f=lambda x, y: (a * math.cos(x) + 0.1 * c * y,
                             -b * math.sin(y) + 0.1 * c * x))


def perturbed_mdtype(rng) -> MDTypeParams:
    """W = v exp(-f) + eps g(x, y) sin(v) with W_v bounded away from zero."""
    m = random_metric(rng)
    eps = float(rng.uniform(0.05, 0.15))
    p, q = rng.uniform(-0.5, 0.5, 2)
    h = Profile.polynomial(rng.uniform(-0.5, 0.5, 3))

    def g(x, y):
        return p * math.sin(x) + q * math.cos(y)

    def gx(x, y):
        return p * math.cos(x)

    def gy(x, y):
        return -q * math.sin(y)

    def ef(x, y):
        return math.exp(-m.f(x, y))

    def w(x, y, v):
        return v * ef(x, y) + eps * g(x, y) * math.sin(v)

    def w_v(x, y, v):
        return ef(x, y) + eps * g(x, y) * math.cos(v)

    def w_vv(x, y, v):
        return -eps * g(x, y) * math.sin(v)

    def grad_w(x, y, v):
        fx, fy = m.gradient((x, y))
        e = ef(x, y)
        return (-v * e * fx + eps * gx(x, y) * math.sin(v),
                -v * e * fy + eps * gy(x, y) * math.sin(v))

    def grad_w_v(x, y, v):
        fx, fy = m.gradient((x, y))
        e = ef(x, y)
        return (-e * fx + eps * gx(x, y) * math.cos(v),
                -e * fy + eps * gy(x, y) * math.cos(v))

    return MDTypeParams(w=w, w_v=w_v, grad_w=grad_w, h=h,
                        w_vv=w_vv, grad_w_v=grad_w_v)


def random_spline_points(rng, n=5, box=1.2) -> np.ndarray:
    """Well-separated random points for a regular test spline."""
    while True:
        pts = rng.uniform(-box, box, (n, 2))
        steps = np.diff(pts, axis=0)
        if np.min(np.hypot(steps[:, 0], steps[:, 1])) > 0.3:
            return pts
