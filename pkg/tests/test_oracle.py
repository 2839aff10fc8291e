import dataclasses
import math

import numpy as np
import pytest

from quarterball.errors import DomainError
from quarterball.geometry import Parameters, Point3
from quarterball.greens import make_kernel_context, q_fundamental
from quarterball.oracle import (
    FluxProbe,
    f2_bruteforce,
    fd_residual,
    hyp2f1_series,
    manufactured_case,
    small_sphere_flux,
)
from quarterball.specfun import F2Params


def test_hyp2f1_series_matches_closed_form():
    assert hyp2f1_series(1.0, 1.0, 2.0, 0.5) == pytest.approx(
        2.0 * math.log(2.0), rel=1e-14)


def test_hyp2f1_series_rejects_unit_disk_boundary():
    with pytest.raises(DomainError):
        hyp2f1_series(1.0, 1.0, 2.0, 1.0)


class TestBruteforce:
    P = F2Params(a=1.25, b1=0.75, b2=0.25, c1=1.5, c2=0.5)
    PN = F2Params(a=1.5, b1=0.75, b2=0.25, c1=1.5, c2=0.5)

    def test_inside_simplex(self):
        assert f2_bruteforce(self.P, 0.3, 0.2) == pytest.approx(
            1.4933009460972415106, rel=1e-13)

    def test_negative_arguments(self):
        assert f2_bruteforce(self.PN, -4.0, -4.0) == pytest.approx(
            0.14907119849998597976, rel=1e-12)

    def test_rejects_unreachable_region(self):
        with pytest.raises(DomainError):
            f2_bruteforce(self.P, 0.7, 0.6)

    def test_precision_parameter_is_consistent(self):
        lo = f2_bruteforce(self.PN, -1.0, -0.5, precision_digits=10)
        hi = f2_bruteforce(self.PN, -1.0, -0.5, precision_digits=18)
        assert lo == pytest.approx(hi, rel=1e-10)


class TestStencil:
    P = Parameters(alpha=0.25, beta=0.25, R=1.0)

    def test_quadratic_is_differenced_exactly(self):
        # central differences are exact on x^2, so the residual is the
        # operator value 2 + 4a with no truncation term
        got = fd_residual(self.P, lambda m: m.x ** 2, Point3(0.3, 0.3, 0.0),
                          1e-2)
        assert got == pytest.approx(2.0 + 4.0 * self.P.alpha, rel=1e-10)

    def test_rejects_nonpositive_step(self):
        with pytest.raises(DomainError):
            fd_residual(self.P, lambda m: 0.0, Point3(0.3, 0.3, 0.0), 0.0)

    def test_rejects_stencil_near_singular_plane(self):
        with pytest.raises(DomainError):
            fd_residual(self.P, lambda m: 0.0, Point3(0.01, 0.3, 0.0), 1e-2)

    def test_rejects_stencil_leaving_the_ball(self):
        with pytest.raises(DomainError):
            fd_residual(self.P, lambda m: 0.0, Point3(0.7, 0.7, 0.1), 1e-2)


class TestFlux:
    def test_probe_validation(self):
        with pytest.raises(DomainError):
            FluxProbe(m0=Point3(0.3, 0.3, 0.0), rho=0.0)
        with pytest.raises(DomainError):
            FluxProbe(m0=Point3(0.3, 0.3, 0.0), rho=0.01, n_theta=1)

    def test_unit_flux_at_small_radius(self):
        ctx = make_kernel_context(Parameters(alpha=0.1, beta=0.4, R=1.0))
        probe = FluxProbe(m0=Point3(0.35, 0.3, 0.05), rho=0.01)
        assert small_sphere_flux(ctx, probe) == pytest.approx(1.0, abs=1e-3)

    def test_flux_is_linear_in_the_normalization(self):
        ctx = make_kernel_context(Parameters(alpha=0.25, beta=0.25, R=1.0))
        probe = FluxProbe(m0=Point3(0.3, 0.25, -0.1), rho=0.02)
        base = small_sphere_flux(ctx, probe)
        doubled = small_sphere_flux(dataclasses.replace(ctx, k=2.0 * ctx.k),
                                    probe)
        assert doubled == pytest.approx(2.0 * base, rel=1e-13)


class TestManufactured:
    CTX = make_kernel_context(Parameters(alpha=0.25, beta=0.25, R=1.0))

    def test_rejects_interior_pole(self):
        with pytest.raises(DomainError):
            manufactured_case(self.CTX, Point3(0.3, 0.3, 0.0))

    def test_rejects_pole_off_the_open_quadrant(self):
        with pytest.raises(DomainError):
            manufactured_case(self.CTX, Point3(-0.5, 0.5, 1.5))

    def test_flat_trace_is_zero_and_rim_matches(self):
        data, _ = manufactured_case(self.CTX, Point3(0.5, 0.5, 1.5))
        assert data.rim_mismatch == 0.0
        np.testing.assert_array_equal(
            data.tau1(np.array([0.3, 0.5]), np.array([0.1, -0.2])), 0.0)

    def test_sphere_trace_samples_the_exact_field(self):
        data, exact = manufactured_case(self.CTX, Point3(0.5, 0.5, 1.5))
        pt = np.array([0.6, 0.64, 0.48])
        pt *= 1.0 / np.linalg.norm(pt)
        got = data.phi(pt[0], pt[1], pt[2])
        assert float(got) == pytest.approx(exact(Point3(*pt)), rel=1e-13)

    def test_weighted_derivative_data_vanishes(self):
        # the exact field is even in y about y=0 up to terms the
        # extraction removes, so the weighted limit is numerically zero
        data, _ = manufactured_case(self.CTX, Point3(0.5, 0.5, 1.5))
        got = data.nu2(0.3, 0.1)
        assert abs(got) <= 1e-10


def test_exact_field_matches_direct_kernel_call():
    ctx = make_kernel_context(Parameters(alpha=0.1, beta=0.4, R=1.0))
    _, exact = manufactured_case(ctx, Point3(0.4, 0.6, 1.4))
    m = Point3(0.25, 0.3, -0.2)
    assert exact(m) == pytest.approx(
        q_fundamental(ctx, m, Point3(0.4, 0.6, 1.4)), rel=1e-15)
