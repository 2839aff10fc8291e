import numpy as np
import pytest

from quarterball.errors import DomainError, SingularPointError
from quarterball.geometry import (
    Face,
    FaceQuadrature,
    Parameters,
    Point3,
    Region,
    distance_bundle,
    domain_membership,
    face_quadrature,
    invert_point,
    weighted_face_measure,
)

P = Parameters(alpha=0.1, beta=0.4, R=1.0)


class TestParameters:
    def test_accepts_open_interval(self):
        Parameters(alpha=0.05, beta=0.49, R=2.5)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 0.6, -0.1])
    def test_rejects_alpha_outside_half_interval(self, alpha):
        with pytest.raises(DomainError, match="alpha"):
            Parameters(alpha=alpha, beta=0.25, R=1.0)

    @pytest.mark.parametrize("beta", [0.0, 0.5, 0.7])
    def test_rejects_beta_outside_half_interval(self, beta):
        with pytest.raises(DomainError, match="beta"):
            Parameters(alpha=0.25, beta=beta, R=1.0)

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(DomainError, match="R"):
            Parameters(alpha=0.25, beta=0.25, R=0.0)


class TestInversion:
    def test_is_an_involution(self):
        m0 = Point3(0.3, 0.2, -0.4)
        img, r0 = invert_point(m0, 1.0)
        back, _ = invert_point(img, 1.0)
        assert r0 == pytest.approx(m0.norm(), rel=1e-15)
        np.testing.assert_allclose(back.as_array(), m0.as_array(), atol=1e-15)

    def test_image_lies_on_the_same_ray(self):
        m0 = Point3(0.2, 0.5, 0.1)
        img, r0 = invert_point(m0, 1.3)
        # image = (R/r0)^2 m0, so the cross terms vanish and the norms multiply to R^2
        np.testing.assert_allclose(img.as_array() * r0 ** 2,
                                   m0.as_array() * 1.3 ** 2, rtol=1e-14)
        assert img.norm() * r0 == pytest.approx(1.3 ** 2, rel=1e-14)

    def test_rejects_origin(self):
        with pytest.raises(DomainError):
            invert_point(Point3(0.0, 0.0, 0.0), 1.0)

    def test_sphere_points_see_proportional_distances(self):
        """On |m| = R the distances to m0 and to its image differ by r0/R."""
        rng = np.random.default_rng(3)
        m0 = Point3(0.25, 0.4, -0.3)
        img, r0 = invert_point(m0, 1.0)
        for _ in range(25):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            m = Point3(*v)
            b_direct = distance_bundle(m, m0)
            b_image = distance_bundle(m, img)
            assert np.sqrt(b_image.r2) * r0 == pytest.approx(
                np.sqrt(b_direct.r2), rel=1e-12)


class TestDistanceBundle:
    def test_arguments_swap_with_the_points(self):
        m = Point3(0.5, 0.2, 0.1)
        m0 = Point3(0.3, 0.4, -0.2)
        b = distance_bundle(m, m0)
        bs = distance_bundle(m0, m)
        assert b.r2 == pytest.approx(bs.r2, rel=1e-15)
        assert b.xi == pytest.approx(bs.xi, rel=1e-15)
        assert b.eta == pytest.approx(bs.eta, rel=1e-15)

    def test_arguments_are_nonpositive_in_the_quarter_ball(self):
        b = distance_bundle(Point3(0.5, 0.2, 0.1), Point3(0.3, 0.4, -0.2))
        assert b.xi < 0.0 and b.eta < 0.0

    def test_coincident_points_raise(self):
        m = Point3(0.3, 0.3, 0.0)
        with pytest.raises(SingularPointError):
            distance_bundle(m, m)


class TestMembership:
    @pytest.mark.parametrize("pt,region", [
        (Point3(0.3, 0.3, 0.0), Region.INTERIOR),
        (Point3(0.0, 0.3, 0.1), Region.FACE_OMEGA1),
        (Point3(0.3, 0.0, 0.1), Region.FACE_OMEGA2),
        (Point3(0.6, 0.8, 0.0), Region.SPHERE_FACE),
        (Point3(2.0, 0.3, 0.0), Region.OUTSIDE),
        (Point3(-0.1, 0.3, 0.0), Region.OUTSIDE),
        (Point3(0.3, -0.2, 0.0), Region.OUTSIDE),
    ])
    def test_classification(self, pt, region):
        assert domain_membership(pt, 1.0) is region

    def test_edges_win_over_faces(self):
        # rim of the x=0 half disk and the quarter-circle edge both count as EDGE
        assert domain_membership(Point3(0.0, 0.6, 0.8), 1.0) is Region.EDGE
        assert domain_membership(Point3(0.0, 0.0, 0.5), 1.0) is Region.EDGE

    def test_tolerance_absorbs_roundoff(self):
        assert domain_membership(Point3(1e-13, 0.3, 0.1), 1.0) is Region.FACE_OMEGA1
        v = np.array([0.6, 0.8, 0.0]) * (1.0 + 1e-13)
        assert domain_membership(Point3(*v), 1.0) is Region.SPHERE_FACE


class TestFaceQuadrature:
    def test_rejects_tiny_resolution(self):
        with pytest.raises(DomainError):
            face_quadrature(Face.OMEGA1, P, 1)

    def test_weights_positive_and_points_on_face(self):
        q = face_quadrature(Face.OMEGA1, P, 12)
        assert np.all(q.weights > 0.0)
        assert np.all(q.nodes[:, 0] == 0.0)
        assert np.all(q.nodes[:, 1] > 0.0)
        radii = np.hypot(q.nodes[:, 1], q.nodes[:, 2])
        assert np.all(radii < P.R)

    def test_sphere_points_have_unit_radius(self):
        q = face_quadrature(Face.SPHERE, P, 12)
        np.testing.assert_allclose(np.linalg.norm(q.nodes, axis=1), P.R,
                                   rtol=1e-13)
        assert np.all(q.nodes[:, 0] > 0.0)
        assert np.all(q.nodes[:, 1] > 0.0)

    @pytest.mark.parametrize("face", list(Face))
    @pytest.mark.parametrize("res", [16, 32, 64])
    def test_weight_sums_match_closed_form_measures(self, face, res):
        # product Jacobi rules integrate their own weight exactly, so the
        # agreement should be at roundoff for every resolution
        closed = weighted_face_measure(face, P)
        total = float(np.sum(face_quadrature(face, P, res).weights))
        assert total == pytest.approx(closed, rel=1e-12)

    def test_measures_scale_with_radius(self):
        p2 = Parameters(alpha=P.alpha, beta=P.beta, R=2.0)
        e = 2.0 + 2.0 * P.beta
        assert weighted_face_measure(Face.OMEGA1, p2) == pytest.approx(
            weighted_face_measure(Face.OMEGA1, P) * 2.0 ** e, rel=1e-13)
        es = 2.0 + 2.0 * P.alpha + 2.0 * P.beta
        assert weighted_face_measure(Face.SPHERE, p2) == pytest.approx(
            weighted_face_measure(Face.SPHERE, P) * 2.0 ** es, rel=1e-13)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DomainError):
            FaceQuadrature(face=Face.OMEGA1,
                           nodes=np.zeros((4, 3)),
                           weights=np.ones(5),
                           resolution=4)
