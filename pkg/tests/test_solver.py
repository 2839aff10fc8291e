import math

import numpy as np
import pytest

from quarterball.errors import DomainError, ExtractionError
from quarterball.geometry import Parameters, Point3
from quarterball.greens import make_kernel_context, q_fundamental
from quarterball.oracle import manufactured_case
from quarterball.solver import (
    BoundaryData,
    solve_at,
    solve_grid,
    weighted_neumann_levels,
    weighted_neumann_sample,
)

CTX = make_kernel_context(Parameters(alpha=0.25, beta=0.25, R=1.0))


def constant_data(c=1.0):
    return BoundaryData(tau1=lambda y, z: np.full_like(np.asarray(y, float), c),
                        nu2=lambda x, z: np.zeros_like(np.asarray(x, float)),
                        phi=lambda x, y, z: np.full_like(np.asarray(x, float), c))


class TestBoundaryData:
    def test_matching_gap_zero_when_traces_agree(self):
        assert constant_data().matching_gap(1.0) == 0.0

    def test_matching_gap_sees_a_rim_jump(self):
        data = BoundaryData(tau1=lambda y, z: np.ones_like(np.asarray(y, float)),
                            nu2=lambda x, z: np.zeros_like(np.asarray(x, float)),
                            phi=lambda x, y, z: np.zeros_like(np.asarray(x, float)))
        assert data.matching_gap(1.0) == pytest.approx(1.0)


class TestSolveAt:
    def test_constant_data_reproduces_the_constant(self):
        rep = solve_at(CTX, constant_data(), Point3(0.3, 0.3, 0.0), 64)
        assert rep.value == pytest.approx(1.0, abs=1e-3)
        assert rep.est_error <= 1e-3
        assert rep.kernel_evals > 0
        assert rep.error is None

    def test_value_is_the_sum_of_face_contributions(self):
        rep = solve_at(CTX, constant_data(), Point3(0.25, 0.35, 0.1), 32)
        assert rep.value == sum(rep.face_contributions)

    def test_contributions_follow_the_data(self):
        sphere_only = BoundaryData(
            tau1=lambda y, z: np.zeros_like(np.asarray(y, float)),
            nu2=lambda x, z: np.zeros_like(np.asarray(x, float)),
            phi=lambda x, y, z: np.ones_like(np.asarray(x, float)))
        rep = solve_at(CTX, sphere_only, Point3(0.3, 0.3, 0.0), 32)
        assert rep.face_contributions[0] == 0.0
        assert rep.face_contributions[1] == 0.0
        assert rep.face_contributions[2] == rep.value

    def test_solution_is_linear_in_the_data(self):
        m0 = Point3(0.3, 0.2, -0.1)
        one = solve_at(CTX, constant_data(1.0), m0, 16)
        three = solve_at(CTX, constant_data(3.0), m0, 16)
        assert three.value == pytest.approx(3.0 * one.value, rel=1e-14)

    def test_rejects_low_resolution(self):
        with pytest.raises(DomainError):
            solve_at(CTX, constant_data(), Point3(0.3, 0.3, 0.0), 7)

    def test_rejects_exterior_point(self):
        with pytest.raises(DomainError):
            solve_at(CTX, constant_data(), Point3(0.8, 0.8, 0.0), 16)

    def test_rejects_point_hugging_a_face(self):
        with pytest.raises(DomainError):
            solve_at(CTX, constant_data(), Point3(1e-4, 0.3, 0.0), 16)


class TestSolveGrid:
    def test_singleton_grid_matches_solve_at(self):
        m0 = Point3(0.3, 0.3, 0.0)
        direct = solve_at(CTX, constant_data(), m0, 16)
        [gridded] = solve_grid(CTX, constant_data(), [m0], 16)
        assert gridded.value == direct.value

    def test_order_of_points_is_preserved(self):
        pts = [Point3(0.2, 0.3, 0.0), Point3(0.35, 0.2, 0.1)]
        fwd = solve_grid(CTX, constant_data(), pts, 16)
        rev = solve_grid(CTX, constant_data(), pts[::-1], 16)
        assert fwd[0].value == rev[1].value
        assert fwd[1].value == rev[0].value

    def test_bad_point_reports_instead_of_aborting(self):
        pts = [Point3(0.3, 0.3, 0.0), Point3(0.9, 0.9, 0.0)]
        good, bad = solve_grid(CTX, constant_data(), pts, 16)
        assert good.error is None
        assert math.isnan(bad.value)
        assert bad.error is not None and "0.9" in bad.error


class TestManufacturedSolve:
    def test_reproduces_the_exact_field_at_an_off_axis_point(self):
        data, exact = manufactured_case(CTX, Point3(0.5, 0.5, 1.5))
        m0 = Point3(0.2, 0.25, 0.1)
        rep = solve_at(CTX, data, m0, 32)
        want = exact(m0)
        assert rep.value == pytest.approx(want, rel=1e-3)

    def test_flat_faces_contribute_nothing_for_this_field(self):
        # tau1 is identically zero and the weighted y-derivative of the
        # exact field vanishes at y = 0, so the sphere term carries it all
        data, _ = manufactured_case(CTX, Point3(0.5, 0.5, 1.5))
        rep = solve_at(CTX, data, Point3(0.3, 0.3, 0.0), 16)
        assert rep.face_contributions[0] == 0.0
        assert abs(rep.face_contributions[1]) <= 1e-10 * abs(rep.value)


class TestWeightedNeumannSample:
    def test_constant_field_gives_zero(self):
        assert weighted_neumann_sample(lambda x, y, z: 1.0, 0.3, 0.0,
                                       beta=0.25) == 0.0

    def test_exact_on_the_singular_mode(self):
        beta = 0.25
        got = weighted_neumann_sample(lambda x, y, z: y ** (1.0 - 2.0 * beta),
                                      0.3, 0.0, beta=beta)
        assert got == pytest.approx(1.0 - 2.0 * beta, rel=1e-12)

    def test_smooth_field_from_the_kernel(self):
        pole = Point3(0.5, 0.5, 1.5)
        def u(x, y, z):
            return q_fundamental(CTX, Point3(x, y, z), pole)
        got = weighted_neumann_sample(u, 0.3, 0.1, beta=0.25)
        assert abs(got) <= 1e-10

    def test_result_is_stable_under_a_level_shift(self):
        pole = Point3(0.5, 0.5, 1.5)
        def u(x, y, z):
            return q_fundamental(CTX, Point3(x, y, z), pole)
        a = weighted_neumann_sample(u, 0.3, 0.1, beta=0.25)
        shifted = [lv * 0.7 for lv in weighted_neumann_levels()]
        b = weighted_neumann_sample(u, 0.3, 0.1, beta=0.25, levels=shifted)
        assert a == pytest.approx(b, abs=1e-10)

    def test_divergent_field_raises(self):
        with pytest.raises(ExtractionError):
            weighted_neumann_sample(lambda x, y, z: 1.0 / y, 0.3, 0.0,
                                    beta=0.25)

    def test_accepts_a_point_style_field(self):
        def u(m):
            return m.y ** 0.5
        got = weighted_neumann_sample(u, 0.3, 0.0, beta=0.25)
        assert got == pytest.approx(0.5, rel=1e-12)

    def test_rejects_bad_beta_and_levels(self):
        with pytest.raises(DomainError):
            weighted_neumann_sample(lambda x, y, z: 0.0, 0.3, 0.0, beta=0.5)
        with pytest.raises(DomainError):
            weighted_neumann_sample(lambda x, y, z: 0.0, 0.3, 0.0, beta=0.25,
                                    levels=[1e-3, -1e-4, 1e-5, 1e-6])
