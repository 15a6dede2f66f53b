import math

import numpy as np
import pytest

from helpers import perturbed_mdtype, random_ansatz, random_metric

from normshift.errors import DegenerateVelocity, InvalidParams, UnknownCatalogueEntry
from normshift.forces import (MDTypeParams, Profile, ScalarFieldA, ab_decompose,
                              anisotropic_field, catalogue, catalogue_listing,
                              complex_force, conformal_transport, cos_profile_ansatz,
                              covariant_from_flat, disc_invariant_ansatz,
                              flat_from_covariant, from_scalar_ansatz, geodesic_field,
                              gravity_field, marked_point_field, mdtype_field,
                              metrizable_field, oscillator_field, speed_profile_ansatz)
from normshift.geometry import ConformalMetric, christoffel, frame, polar_from_cartesian
from normshift import numdiff


def test_ab_decompose_examples():
    g = gravity_field()
    ab = ab_decompose(g, (0, 0), (0, -1))
    assert ab.A == pytest.approx(1) and ab.B == pytest.approx(0)
    ab = ab_decompose(g, (0, 0), (1, 0))
    assert ab.A == pytest.approx(0) and ab.B == pytest.approx(-1)
    zero = gravity_field(0.0)
    ab = ab_decompose(zero, (1, 2), (0.3, 0.4))
    assert ab.A == 0 and ab.B == 0


def test_ab_decompose_reconstructs_force():
    rng = np.random.default_rng(0)
    f = oscillator_field(1.3)
    for _ in range(30):
        r, v = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
        if np.hypot(*v) < 1e-3:
            continue
        fr = frame(v)
        ab = ab_decompose(f, r, v)
        assert np.max(np.abs(ab.A * fr.N + ab.B * fr.M - f.force(r, v))) < 1e-12


def test_analytic_jacobians_match_finite_differences():
    rng = np.random.default_rng(1)
    for field in (gravity_field(), oscillator_field(2.1)):
        bare = type(field)(fn=field.fn, label=field.label)  # FD-only copy
        for _ in range(10):
            r, v = rng.uniform(-2, 2, 2), rng.uniform(0.5, 2, 2)
            assert np.max(np.abs(field.jac_spatial(r, v) - bare.jac_spatial(r, v))) < 1e-5
            assert np.max(np.abs(field.jac_velocity(r, v) - bare.jac_velocity(r, v))) < 1e-5


def test_ab_decompose_rejects_rest_points():
    with pytest.raises(DegenerateVelocity):
        ab_decompose(gravity_field(), (0, 0), (0, 0))


def test_scalar_ansatz_projections():
    rng = np.random.default_rng(2)
    for k in range(10):
        a = random_ansatz(rng)
        f = from_scalar_ansatz(a)
        r, v = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
        if np.hypot(*v) < 0.3:
            continue
        p = polar_from_cartesian(v)
        ab = ab_decompose(f, r, v)
        assert ab.A == pytest.approx(a(r[0], r[1], p.v, p.theta), abs=1e-9)
        assert ab.B == pytest.approx(-a.a_theta(r[0], r[1], p.v, p.theta), abs=1e-9)


def test_speed_profile_ansatz_force_along_velocity():
    prof = Profile.polynomial([0.5, 0.2])
    f = from_scalar_ansatz(speed_profile_ansatz(prof))
    v = np.array([1.2, -0.9])
    force = f.force(np.zeros(2), v)
    speed = np.hypot(*v)
    assert np.max(np.abs(force - prof(speed) * v / speed)) < 1e-12


def test_cos_profile_ansatz_matches_anisotropic_form():
    prof = Profile.polynomial([0.7, 0.1])
    f = from_scalar_ansatz(cos_profile_ansatz(prof))
    g = anisotropic_field(prof)
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = rng.uniform(-2, 2, 2)
        if np.hypot(*v) < 0.3:
            continue
        assert np.max(np.abs(f.force(np.zeros(2), v) - g.force(np.zeros(2), v))) < 1e-12


def test_zero_ansatz_gives_zero_force():
    a = ScalarFieldA(lambda x, y, v, t: 0.0)
    f = from_scalar_ansatz(a)
    assert np.max(np.abs(f.force(np.ones(2), np.array([0.4, 0.8])))) < 1e-12


def test_complex_force_radial_symmetry():
    a = speed_profile_ansatz(Profile.polynomial([0.3, 0.5]))
    w = complex(0.6, -0.8)
    val = complex_force(a, complex(0, 0), w)
    expected = (w / abs(w)) * (0.3 + 0.5 * abs(w))
    assert abs(val - expected) < 1e-9
    azero = ScalarFieldA(lambda x, y, v, t: 0.0)
    assert abs(complex_force(azero, complex(1, 1), w)) < 1e-12


def test_complex_force_matches_real_ansatz():
    rng = np.random.default_rng(4)
    for _ in range(100):
        a = random_ansatz(rng, n_terms=2)
        f = from_scalar_ansatz(a)
        for _ in range(10):
            z = complex(*rng.uniform(-2, 2, 2))
            v = rng.uniform(-2, 2, 2)
            if np.hypot(*v) < 0.3:
                continue
            fc = complex_force(a, z, complex(v[0], v[1]))
            fr = f.force(np.array([z.real, z.imag]), v)
            assert abs(fc - complex(fr[0], fr[1])) < 1e-9


def test_complex_force_rejects_small_w():
    a = ScalarFieldA(lambda x, y, v, t: v)
    with pytest.raises(DegenerateVelocity):
        complex_force(a, 0j, 0j)


def test_conformal_transport_flat_is_identity():
    rng = np.random.default_rng(5)
    a = random_ansatz(rng)
    at = conformal_transport(a, ConformalMetric.euclidean())
    for x, y, v, t in [(-1, 0.5, 1.2, 0.3), (0.4, 0.4, 2.0, -1.0)]:
        assert at(x, y, v, t) == pytest.approx(a(x, y, v, t), abs=1e-12)


def test_conformal_transport_constant_factor_scales():
    rng = np.random.default_rng(6)
    a = random_ansatz(rng)
    c = 0.7
    at = conformal_transport(a, ConformalMetric.constant(c))
    assert at(0.3, 0.2, 1.1, 0.4) == pytest.approx(a(0.3, 0.2, 1.1, 0.4) * math.exp(-c))


def test_conformal_transport_connection_term():
    # zero flat-side generator leaves only the connection contraction
    zero = ScalarFieldA(lambda x, y, v, t: 0.0)
    m = ConformalMetric(f=lambda x, y: x, grad_f=lambda x, y: (1.0, 0.0))
    at = conformal_transport(zero, m)
    x, y, v, th = 0.5, -0.3, 1.2, 0.8
    gamma = christoffel(m, (x, y))
    vvec = np.array([v * math.cos(th), v * math.sin(th)])
    gvv = np.einsum("kij,i,j->k", gamma, vvec, vvec)
    n_cov = math.exp(-x) * vvec / np.hypot(*vvec)
    assert at(x, y, v, th) == pytest.approx(float(gvv @ n_cov), abs=1e-12)
    # and equals the hand contraction -exp(-f) v^2 <grad f, N>
    assert at(x, y, v, th) == pytest.approx(-math.exp(-x) * v * v * math.cos(th), abs=1e-12)


def test_conformal_transport_round_trip():
    rng = np.random.default_rng(7)
    a = random_ansatz(rng)
    m = random_metric(rng)
    back = conformal_transport(conformal_transport(a, m), m, inverse=True)
    for _ in range(10):
        x, y = rng.uniform(-2, 2, 2)
        v = rng.uniform(0.5, 3)
        t = rng.uniform(-math.pi, math.pi)
        assert back(x, y, v, t) == pytest.approx(a(x, y, v, t), abs=1e-10)


def test_transport_consistent_with_force_relation():
    # metric-side generator equals exp(-f) <F' + Gamma v v, v>/|v|
    rng = np.random.default_rng(8)
    a = random_ansatz(rng)
    m = random_metric(rng)
    fp = from_scalar_ansatz(a)
    fc = covariant_from_flat(fp, m)
    at = conformal_transport(a, m)
    for _ in range(10):
        x, y = rng.uniform(-1, 1, 2)
        v = rng.uniform(0.5, 2)
        th = rng.uniform(-math.pi, math.pi)
        vvec = np.array([v * math.cos(th), v * math.sin(th)])
        lhs = at(x, y, v, th)
        rhs = math.exp(-m.f(x, y)) * float(fc.force(np.array([x, y]), vvec) @ vvec) / v
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_flat_covariant_round_trip():
    rng = np.random.default_rng(9)
    m = random_metric(rng)
    f = oscillator_field(1.1)
    g = flat_from_covariant(covariant_from_flat(f, m), m)
    for _ in range(10):
        r, v = rng.uniform(-1, 1, 2), rng.uniform(0.5, 2, 2)
        assert np.max(np.abs(g.force(r, v) - f.force(r, v))) < 1e-12


def test_catalogue_gravity_and_oscillator():
    g = catalogue("gravity", {})
    assert np.allclose(g.force(np.array([3.0, 4.0]), np.array([1.0, 1.0])), [0, -1])
    assert not g.claims_normality
    o = catalogue("oscillator", {"omega": 2.0})
    assert np.allclose(o.force(np.array([0.0, 0.5]), np.array([1.0, 0.0])), [0, -2.0])
    assert not o.claims_normality


def test_catalogue_mdtype_reduces_to_metrizable_and_geodesic():
    m = ConformalMetric(f=lambda x, y: 0.2 * math.sin(x) + 0.1 * y,
                        grad_f=lambda x, y: (0.2 * math.cos(x), 0.1))
    h = Profile.polynomial([0.3, 0.2])
    md = mdtype_field(MDTypeParams.from_conformal(m, h))
    metr = metrizable_field(m, h)
    geo = geodesic_field(m)
    md0 = mdtype_field(MDTypeParams.from_conformal(m, Profile.constant(0.0)))
    rng = np.random.default_rng(10)
    for _ in range(20):
        r, v = rng.uniform(-1, 1, 2), rng.uniform(0.5, 2, 2)
        assert np.max(np.abs(md.force(r, v) - metr.force(r, v))) < 1e-12
        assert np.max(np.abs(md0.force(r, v) - geo.force(r, v))) < 1e-12


def test_mdtype_ab_closed_forms():
    rng = np.random.default_rng(11)
    md = perturbed_mdtype(rng)
    f = mdtype_field(md)
    for _ in range(20):
        r, v = rng.uniform(-1, 1, 2), rng.uniform(0.5, 2, 2)
        fr = frame(v)
        speed = float(np.hypot(*v))
        gw = np.array(md.grad_w(r[0], r[1], speed))
        wv = md.w_v(r[0], r[1], speed)
        ab = ab_decompose(f, r, v)
        assert ab.A == pytest.approx((md.h(md.w(r[0], r[1], speed)) - float(gw @ v)) / wv, abs=1e-9)
        assert ab.B == pytest.approx(speed * float(gw @ fr.M) / wv, abs=1e-9)


def test_catalogue_errors():
    with pytest.raises(UnknownCatalogueEntry):
        catalogue("does_not_exist")
    with pytest.raises(InvalidParams):
        catalogue("oscillator", {})
    # W_v vanishing at a probe point
    bad = MDTypeParams(w=lambda x, y, v: 0.5 * (v - 1.0) ** 2,
                       w_v=lambda x, y, v: v - 1.0,
                       grad_w=lambda x, y, v: (0.0, 0.0),
                       h=Profile.constant(0.0))
    with pytest.raises(InvalidParams):
        catalogue("mdtype", {"W": bad})


def test_disc_invariant_domain_guard():
    a = disc_invariant_ansatz(2.0, Profile.constant(1.0))
    a(0.5, 0.5, 1.0, 0.3)
    with pytest.raises(InvalidParams):
        a(2.0, 0.0, 1.0, 0.3)
    with pytest.raises(InvalidParams):
        disc_invariant_ansatz(-1.0, Profile.constant(1.0))


def test_disc_invariant_partials_match_fd():
    a = disc_invariant_ansatz(2.0, Profile.polynomial([1.0, 0.3]))
    fd = ScalarFieldA(a.fn)
    x, y, v, t = 0.4, -0.3, 1.2, 0.7
    for name in ("a_x", "a_y", "a_v", "a_theta", "a_theta_theta",
                 "a_theta_v", "a_theta_x", "a_theta_y"):
        have = getattr(a, name)(x, y, v, t)
        want = getattr(fd, name)(x, y, v, t)
        assert have == pytest.approx(want, abs=1e-6), name


def test_marked_point_singular_at_center():
    f = marked_point_field(Profile.constant(1.0))
    with pytest.raises(InvalidParams):
        f.force(np.zeros(2), np.array([1.0, 0.0]))


def test_mixed_partial_symmetry_of_fd_fallback():
    rng = np.random.default_rng(12)
    a = random_ansatz(rng)
    bare = ScalarFieldA(a.fn)  # force the FD fallback
    x, y, v, t = 0.3, -0.8, 1.4, 0.5
    # d/dtheta then d/dx vs d/dx then d/dtheta, both by differences
    tx = numdiff.richardson(lambda u: numdiff.richardson(
        lambda s: bare.fn(u, y, v, s), t), x)
    xt = numdiff.richardson(lambda s: numdiff.richardson(
        lambda u: bare.fn(u, y, v, s), x), t)
    assert tx == pytest.approx(xt, abs=1e-5)
    assert bare.a_theta_x(x, y, v, t) == pytest.approx(tx, abs=1e-5)


def test_missing_partial_when_fallback_disabled():
    from normshift.errors import MissingPartial
    a = ScalarFieldA(lambda x, y, v, t: v, allow_fd=False)
    with pytest.raises(MissingPartial):
        a.a_theta(0, 0, 1, 0)
    full = speed_profile_ansatz(Profile.constant(1.0))
    full.a_theta(0, 0, 1, 0)  # analytic closures work with fallback disabled


def test_catalogue_listing_is_stable():
    rows = catalogue_listing()
    names = [r["name"] for r in rows]
    assert names == sorted(names)
    for required in ("gravity", "oscillator", "mdtype", "disc_invariant"):
        assert required in names
