"""Quarter-ball domain: parameter set, point classification, the sphere
inversion map, the squared-distance bundle feeding the kernel arguments, and
Gauss quadrature rules for the three boundary faces.

The face rules absorb every singular weight factor analytically through
Gauss-Jacobi nodes, so integrands seen by callers are smooth.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .errors import DomainError, SingularPointError

__all__ = [
    "Parameters",
    "Point3",
    "DistanceBundle",
    "Face",
    "Region",
    "FaceQuadrature",
    "invert_point",
    "distance_bundle",
    "domain_membership",
    "face_quadrature",
    "weighted_face_measure",
]

_CLASSIFY_TOL = 1e-12


@dataclass(frozen=True)
class Parameters:
    """Singular-coefficient strengths and ball radius.

    Constraint 0 < 2*alpha < 1 and 0 < 2*beta < 1 keeps every gamma argument
    in the kernel normalization positive and both boundary weights integrable.
    """

    alpha: float
    beta: float
    R: float = 1.0

    def __post_init__(self):
        if not 0.0 < 2.0 * self.alpha < 1.0:
            raise DomainError(f"alpha={self.alpha} violates 0 < 2*alpha < 1")
        if not 0.0 < 2.0 * self.beta < 1.0:
            raise DomainError(f"beta={self.beta} violates 0 < 2*beta < 1")
        if not self.R > 0.0:
            raise DomainError(f"R={self.R} must be positive")


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


@dataclass(frozen=True)
class DistanceBundle:
    """r2 is the squared source distance; r1_2 and r2_2 flip the sign of the
    x and y offsets respectively; xi and eta are the kernel arguments."""

    r2: float
    r1_2: float
    r2_2: float
    xi: float
    eta: float


class Face(enum.Enum):
    OMEGA1 = "omega1"
    OMEGA2 = "omega2"
    SPHERE = "sphere"


class Region(enum.Enum):
    INTERIOR = "interior"
    FACE_OMEGA1 = "face_omega1"
    FACE_OMEGA2 = "face_omega2"
    SPHERE_FACE = "sphere_face"
    EDGE = "edge"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class FaceQuadrature:
    """Nodes on one boundary face with weights that already contain the
    area element and the face's power weight (y^2b, x^2a, or x^2a y^2b)."""

    face: Face
    nodes: np.ndarray
    weights: np.ndarray
    resolution: int

    def __post_init__(self):
        if self.nodes.shape != (self.weights.shape[0], 3):
            raise DomainError("nodes must be (n, 3) matching weights")


def invert_point(m0: Point3, R: float,
                 inversion_sign: str = "kelvin") -> tuple[Point3, float]:
    """Image of m0 under inversion in the sphere of radius R.

    The default is the positive Kelvin map (R^2/|m0|^2) m0, which fixes the
    sphere pointwise.  inversion_sign="paper" negates the image, reproducing
    a printed variant kept only as a diagnostic; it sends the image into
    x < 0, y < 0 and is expected to fail the sphere-vanishing checks.
    """
    if inversion_sign not in ("kelvin", "paper"):
        raise DomainError(f"unknown inversion_sign {inversion_sign!r}")
    r0 = m0.norm()
    if r0 == 0.0:
        raise DomainError("cannot invert the origin (image at infinity)")
    s = R * R / (r0 * r0)
    if inversion_sign == "paper":
        s = -s
    return Point3(s * m0.x, s * m0.y, s * m0.z), r0


def distance_bundle(m: Point3, m0: Point3) -> DistanceBundle:
    """Squared distances r2, r1_2, r2_2 and the arguments xi, eta.

    xi is computed as -4 x x0 / r2, the cancellation-free algebraic form of
    1 - r1_2/r2 (r1_2 = r2 + 4 x x0 identically); likewise eta.
    """
    dx = m.x - m0.x
    dy = m.y - m0.y
    dz = m.z - m0.z
    r2 = dx * dx + dy * dy + dz * dz
    if r2 == 0.0:
        raise SingularPointError("coincident points have no distance bundle")
    sx = m.x + m0.x
    sy = m.y + m0.y
    r1_2 = sx * sx + dy * dy + dz * dz
    r2_2 = dx * dx + sy * sy + dz * dz
    xi = -4.0 * m.x * m0.x / r2
    eta = -4.0 * m.y * m0.y / r2
    return DistanceBundle(r2=r2, r1_2=r1_2, r2_2=r2_2, xi=xi, eta=eta)


def domain_membership(m: Point3, R: float) -> Region:
    """Classify a point against the closed quarter ball with tolerance 1e-12.

    Membership in two boundary pieces at once is an edge, and the edge takes
    priority over either face label.
    """
    if not R > 0.0:
        raise DomainError(f"R={R} must be positive")
    tol = _CLASSIFY_TOL
    on_x = abs(m.x) <= tol
    on_y = abs(m.y) <= tol
    dist = m.norm()
    on_s = abs(dist - R) <= tol
    if m.x < -tol or m.y < -tol or dist > R + tol:
        return Region.OUTSIDE
    n_pieces = int(on_x) + int(on_y) + int(on_s)
    if n_pieces >= 2:
        return Region.EDGE
    if on_x:
        return Region.FACE_OMEGA1
    if on_y:
        return Region.FACE_OMEGA2
    if on_s:
        return Region.SPHERE_FACE
    return Region.INTERIOR


def _jacobi_mapped(n: int, p: float, q: float, lo: float, hi: float):
    """Nodes/weights for int_lo^hi (hi-t)^p (t-lo)^q f(t) dt."""
    x, w = roots_jacobi(n, p, q)
    half = (hi - lo) / 2.0
    t = lo + half * (x + 1.0)
    return t, w * half ** (p + q + 1.0)


def face_quadrature(face: Face, params: Parameters,
                    resolution: int) -> FaceQuadrature:
    """Tensor quadrature on one face with the singular weight absorbed.

    Flat faces use polar coordinates (rho, t) with the radial power
    rho^(2b+1) and angular power cos^(2b) t taken into Gauss-Jacobi weights;
    the sphere uses (theta, psi) with u = cos theta and s = cos 2psi
    substitutions so all three power factors become Jacobi weights.
    """
    if resolution < 2:
        raise DomainError(f"resolution must be >= 2, got {resolution}")
    if not isinstance(face, Face):
        raise DomainError(f"unknown face {face!r}")
    al, be, R = params.alpha, params.beta, params.R
    n = resolution
    if face in (Face.OMEGA1, Face.OMEGA2):
        # weight exponent: y^2b on Omega1 (x=0), x^2a on Omega2 (y=0)
        e = 2.0 * be if face is Face.OMEGA1 else 2.0 * al
        rho, wr = _jacobi_mapped(n, 0.0, e + 1.0, 0.0, R)
        s, ws = roots_jacobi(n, (e - 1.0) / 2.0, (e - 1.0) / 2.0)
        t = np.arcsin(s)
        U = np.outer(rho, np.cos(t)).ravel()
        V = np.outer(rho, np.sin(t)).ravel()
        W = np.outer(wr, ws).ravel()
        zeros = np.zeros_like(U)
        if face is Face.OMEGA1:
            nodes = np.column_stack([zeros, U, V])
        else:
            nodes = np.column_stack([U, zeros, V])
        return FaceQuadrature(face, nodes, W, resolution)
    # sphere: x = R sin(th)cos(ps), y = R sin(th)sin(ps), z = R cos(th)
    u, wu = roots_jacobi(n, al + be, al + be)
    s, ws = roots_jacobi(n, be - 0.5, al - 0.5)
    psi = np.arccos(s) / 2.0
    st = np.sqrt(1.0 - u * u)
    X = R * np.outer(st, np.cos(psi)).ravel()
    Y = R * np.outer(st, np.sin(psi)).ravel()
    Z = R * np.outer(u, np.ones_like(psi)).ravel()
    scale = R ** (2.0 + 2.0 * al + 2.0 * be) * 2.0 ** (-al - be - 1.0)
    W = scale * np.outer(wu, ws).ravel()
    return FaceQuadrature(Face.SPHERE, np.column_stack([X, Y, Z]), W,
                          resolution)


def weighted_face_measure(face: Face, params: Parameters) -> float:
    """Closed-form integral of the constant field 1 against each face's
    weight; the quadrature convergence reference."""
    al, be, R = params.alpha, params.beta, params.R
    if face in (Face.OMEGA1, Face.OMEGA2):
        e = 2.0 * be if face is Face.OMEGA1 else 2.0 * al
        radial = R ** (e + 2.0) / (e + 2.0)
        angular = math.sqrt(math.pi) * math.gamma((e + 1.0) / 2.0) \
            / math.gamma(e / 2.0 + 1.0)
        return radial * angular
    theta_part = math.sqrt(math.pi) * math.gamma(1.0 + al + be) \
        / math.gamma(1.5 + al + be)
    psi_part = math.gamma(al + 0.5) * math.gamma(be + 0.5) \
        / (2.0 * math.gamma(al + be + 1.0))
    return R ** (2.0 + 2.0 * al + 2.0 * be) * theta_part * psi_part
