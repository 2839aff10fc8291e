import math

import numpy as np
import pytest

from quarterball.errors import DomainError, SingularPointError
from quarterball.geometry import Parameters, Point3
from quarterball.greens import (
    dG_dn_sphere,
    g_green,
    g_weighted_neumann_limit,
    kernel_g_star,
    kernel_g_star_limit,
    kernel_g_star_star,
    make_kernel_context,
    normalization_k,
    q_fundamental,
    q_gradient,
)

CTX_SYM = make_kernel_context(Parameters(alpha=0.25, beta=0.25, R=1.0))
CTX_ASYM = make_kernel_context(Parameters(alpha=0.1, beta=0.4, R=1.0))
M0 = Point3(0.3, 0.25, 0.1)


def sphere_point(rng, R=1.0):
    v = np.abs(rng.normal(size=3))
    v[2] *= np.sign(rng.normal())
    return Point3(*(v / np.linalg.norm(v) * R))


def test_normalization_frozen_values():
    # a = b = 1/4 collapses to sqrt(2)/pi; the asymmetric value is a
    # gamma-product reference computed with mpmath at 30 digits
    assert normalization_k(CTX_SYM.params) == pytest.approx(
        math.sqrt(2.0) / math.pi, rel=1e-14)
    assert normalization_k(CTX_ASYM.params) == pytest.approx(
        0.55420970144004826321, rel=1e-13)


def test_context_rejects_unknown_inversion_sign():
    with pytest.raises(DomainError):
        make_kernel_context(CTX_SYM.params, inversion_sign="mirror")


class TestFundamental:
    def test_frozen_value(self):
        got = q_fundamental(CTX_SYM, Point3(0.5, 0.5, 0.0),
                            Point3(0.4, 0.3, 0.1))
        assert got == pytest.approx(0.75331833169592290046, rel=1e-12)

    def test_symmetric_in_the_two_points(self):
        a, b = Point3(0.5, 0.2, 0.1), Point3(0.3, 0.4, -0.2)
        assert q_fundamental(CTX_ASYM, a, b) == pytest.approx(
            q_fundamental(CTX_ASYM, b, a), rel=1e-12)

    def test_vanishes_on_the_singular_plane(self):
        assert q_fundamental(CTX_SYM, Point3(0.0, 0.4, 0.1),
                             Point3(0.3, 0.3, 0.0)) == 0.0

    def test_coincident_points_raise(self):
        m = Point3(0.3, 0.3, 0.0)
        with pytest.raises(SingularPointError):
            q_fundamental(CTX_SYM, m, m)

    def test_rejects_negative_quadrant(self):
        with pytest.raises(DomainError):
            q_fundamental(CTX_SYM, Point3(-0.2, 0.3, 0.0),
                          Point3(0.3, 0.3, 0.0))

    def test_gradient_matches_finite_differences(self):
        m = Point3(0.45, 0.3, -0.15)
        m0 = Point3(0.2, 0.35, 0.1)
        gx, gy, gz = q_gradient(CTX_ASYM, m, m0)
        h = 1e-5
        for axis, got in zip(range(3), (gx, gy, gz)):
            e = np.zeros(3)
            e[axis] = h
            up = q_fundamental(CTX_ASYM, Point3(*(m.as_array() + e)), m0)
            dn = q_fundamental(CTX_ASYM, Point3(*(m.as_array() - e)), m0)
            assert got == pytest.approx((up - dn) / (2.0 * h), rel=1e-6)


class TestGreen:
    @pytest.mark.parametrize("ctx", [CTX_SYM, CTX_ASYM],
                             ids=["symmetric", "asymmetric"])
    def test_vanishes_on_the_sphere(self, ctx):
        rng = np.random.default_rng(5)
        for _ in range(10):
            m = sphere_point(rng)
            g = g_green(ctx, m, M0)
            scale = abs(q_fundamental(ctx, m, M0))
            assert abs(g) <= 1e-9 * max(1.0, scale)

    def test_vanishes_identically_on_the_flat_dirichlet_face(self):
        assert g_green(CTX_ASYM, Point3(0.0, 0.3, 0.2), M0) == 0.0

    def test_weighted_derivative_vanishes_on_the_neumann_face(self):
        for x, z in ((0.3, 0.1), (0.5, -0.2), (0.15, 0.4)):
            assert abs(g_weighted_neumann_limit(CTX_ASYM, x, z, M0)) <= 1e-6

    def test_symmetric_in_source_and_target(self):
        a, b = Point3(0.5, 0.2, 0.1), Point3(0.25, 0.4, -0.2)
        ga = g_green(CTX_ASYM, a, b)
        gb = g_green(CTX_ASYM, b, a)
        assert abs(ga - gb) <= 1e-9 * (1.0 + abs(ga))

    @pytest.mark.parametrize("ctx", [CTX_SYM, CTX_ASYM],
                             ids=["symmetric", "asymmetric"])
    def test_nonnegative_inside_the_domain(self, ctx):
        rng = np.random.default_rng(7)
        for _ in range(100):
            m = Point3(*rng.uniform([0.02, 0.02, -0.6], [0.6, 0.6, 0.6]))
            if m.norm() > 0.95 or np.linalg.norm(
                    m.as_array() - M0.as_array()) < 1e-2:
                continue
            assert g_green(ctx, m, M0) >= 0.0

    def test_rejects_source_outside_the_open_domain(self):
        with pytest.raises(DomainError):
            g_green(CTX_SYM, Point3(0.3, 0.3, 0.0), Point3(0.8, 0.8, 0.0))

    def test_rejects_target_outside_the_closed_domain(self):
        with pytest.raises(DomainError):
            g_green(CTX_SYM, Point3(1.2, 0.3, 0.0), M0)

    def test_printed_inversion_variant_breaks_sphere_vanishing(self):
        """The diagnostic image map negates coordinates, which drives the
        fundamental solution's fractional powers off their real branch."""
        ctx = make_kernel_context(CTX_SYM.params, inversion_sign="paper")
        g = g_green(ctx, Point3(0.6, 0.64, 0.48), M0)
        assert math.isnan(g) or abs(g) > 1e-9


class TestSphereDerivative:
    def test_rejects_point_off_the_sphere(self):
        with pytest.raises(DomainError):
            dG_dn_sphere(CTX_SYM, Point3(0.5, 0.5, 0.0), M0)

    def test_matches_a_radial_difference_quotient(self):
        sp = np.array([0.5, 0.6, 0.2])
        sp /= np.linalg.norm(sp)
        d = dG_dn_sphere(CTX_SYM, Point3(*sp), M0)
        eps = 1e-6
        inner = g_green(CTX_SYM, Point3(*(sp * (1.0 - eps))), M0)
        assert d == pytest.approx(-inner / eps, rel=1e-4)

    def test_mirror_symmetry_in_z(self):
        sp = np.array([0.5, 0.6, 0.2])
        sp /= np.linalg.norm(sp)
        d = dG_dn_sphere(CTX_SYM, Point3(*sp), M0)
        dm = dG_dn_sphere(CTX_SYM, Point3(sp[0], sp[1], -sp[2]),
                          Point3(M0.x, M0.y, -M0.z))
        assert d == pytest.approx(dm, rel=1e-13)

    def test_outward_derivative_is_nonpositive(self):
        # G >= 0 inside and G = 0 on the sphere force this sign
        rng = np.random.default_rng(9)
        for _ in range(20):
            assert dG_dn_sphere(CTX_ASYM, sphere_point(rng), M0) <= 0.0


class TestFlatKernels:
    def test_first_kernel_rejects_rim_and_negative_coordinate(self):
        with pytest.raises(DomainError):
            kernel_g_star(CTX_SYM, 0.6, 0.8, M0)
        with pytest.raises(DomainError):
            kernel_g_star(CTX_SYM, -0.1, 0.2, M0)

    def test_first_kernel_matches_its_defining_limit(self):
        # run at distinct a and b: the two weight exponents disagree
        # there, so only the correct one can reproduce the closed form
        closed = kernel_g_star(CTX_ASYM, 0.25, 0.2, M0)
        limit = kernel_g_star_limit(CTX_ASYM, 0.25, 0.2, M0)
        assert closed == pytest.approx(limit, rel=1e-8)

    def test_second_kernel_is_the_green_function_trace(self):
        for x, z in ((0.3, 0.1), (0.12, -0.35), (0.55, 0.2)):
            closed = kernel_g_star_star(CTX_ASYM, x, z, M0)
            trace = g_green(CTX_ASYM, Point3(x, 0.0, z), M0)
            assert closed == pytest.approx(trace, rel=1e-12)
