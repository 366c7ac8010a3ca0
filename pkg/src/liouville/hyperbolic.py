"""Upper half-plane primitives: boundary points, Mobius maps, geodesics.

Boundary points of H^2 are projective pairs (p:q) with q = 0 for infinity.
Numerical work on the boundary is done in the Cayley angle coordinate

    theta = pi + 2 arctan(x),    x in R,   theta(infinity) = 0 = 2 pi,

which is the polar angle of the boundary point in the disk model centred
at i.  In that coordinate a point (p:q) normalised to the unit circle is
(sin b, cos b) with theta = pi + 2 b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
PROJ_TOL = 1e-12
GEOM_TOL = 1e-9


def _det(u, v):
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """Point of R u {inf}, stored as a unit projective pair."""

    p: float
    q: float

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        n = math.hypot(p, q)
        if n == 0.0:
            raise ValueError("(0, 0) is not a projective point")
        p, q = p / n, q / n
        if p < 0.0 or (p == 0.0 and q < 0.0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def real(cls, x: float) -> "BoundaryPoint":
        if math.isinf(x):
            return cls(1.0, 0.0)
        return cls(x, 1.0)

    @classmethod
    def infinity(cls) -> "BoundaryPoint":
        return cls(1.0, 0.0)

    @classmethod
    def from_angle(cls, theta: float) -> "BoundaryPoint":
        b = 0.5 * (theta - math.pi)
        return cls(math.sin(b), math.cos(b))

    @property
    def is_infinite(self) -> bool:
        return abs(self.q) < PROJ_TOL

    @property
    def x(self) -> float:
        """Real coordinate (inf for the point at infinity)."""
        if self.q == 0.0:
            return math.inf
        return self.p / self.q

    @property
    def angle(self) -> float:
        """Cayley angle in [0, 2 pi)."""
        return (math.pi + 2.0 * math.atan2(self.p, self.q)) % TWO_PI

    def __eq__(self, other):
        if not isinstance(other, BoundaryPoint):
            return NotImplemented
        return abs(self.p * other.q - self.q * other.p) < PROJ_TOL

    __hash__ = None

    def __repr__(self):
        return f"BoundaryPoint({self.x:.12g})"


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0.0:
            raise ValueError(f"HPoint needs y > 0, got {self.y}")

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


BASE_I = HPoint(0.0, 1.0)


@dataclass(frozen=True)
class MobiusMap:
    """z -> (a z + b) / (c z + d), stored with ad - bc = 1."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0.0:
            raise ValueError(f"Mobius map needs positive determinant, got {det}")
        s = 1.0 / math.sqrt(det)
        for name in "abcd":
            object.__setattr__(self, name, getattr(self, name) * s)

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, m) -> "MobiusMap":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        return MobiusMap.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def __call__(self, pt):
        if isinstance(pt, BoundaryPoint):
            return mobius_apply(self, pt)
        if isinstance(pt, HPoint):
            return HPoint.from_complex(self.apply_complex(pt.z))
        if isinstance(pt, Geodesic):
            return Geodesic(self(pt.start), self(pt.end))
        raise TypeError(f"cannot apply Mobius map to {type(pt).__name__}")

    def apply_complex(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_angles(self, theta):
        """Boundary action in the Cayley angle; returns (theta', dtheta'/dtheta)."""
        b = 0.5 * (np.asarray(theta, dtype=float) - math.pi)
        p, q = np.sin(b), np.cos(b)
        p2 = self.a * p + self.b * q
        q2 = self.c * p + self.d * q
        n2 = p2 * p2 + q2 * q2
        out = (math.pi + 2.0 * np.arctan2(p2, q2)) % TWO_PI
        return out, 1.0 / n2


def mobius_apply(m: MobiusMap, pt: BoundaryPoint) -> BoundaryPoint:
    return BoundaryPoint(m.a * pt.p + m.b * pt.q, m.c * pt.p + m.d * pt.q)


@dataclass(frozen=True)
class Geodesic:
    """Oriented geodesic from ``start`` to ``end``."""

    start: BoundaryPoint
    end: BoundaryPoint

    def __post_init__(self):
        if self.start == self.end:
            raise ValueError("geodesic endpoints must differ")

    @classmethod
    def between(cls, x: float, y: float) -> "Geodesic":
        return cls(BoundaryPoint.real(x), BoundaryPoint.real(y))

    def reversed(self) -> "Geodesic":
        return Geodesic(self.end, self.start)

    @property
    def angles(self) -> tuple[float, float]:
        return self.start.angle, self.end.angle

    def __repr__(self):
        return f"Geodesic({self.start.x:.6g} -> {self.end.x:.6g})"


def hyperbolic_distance(z: complex | HPoint, w: complex | HPoint) -> float:
    z = z.z if isinstance(z, HPoint) else z
    w = w.z if isinstance(w, HPoint) else w
    arg = 1.0 + abs(z - w) ** 2 / (2.0 * z.imag * w.imag)
    return math.acosh(max(arg, 1.0))


def _normalizing_entries(g: Geodesic, z: complex):
    """Entries of the normalizing map as plain floats (hot path)."""
    a, b = g.start.q, -g.start.p
    c, d = g.end.q, -g.end.p
    if a * d - b * c < 0.0:
        a, b = -a, -b
    w = (a * z + b) / (c * z + d)
    lam = 1.0 / math.sqrt(abs(w))
    a, b, c, d = a * lam, b * lam, c / lam, d / lam
    if (a if a != 0.0 else b) < 0.0:
        a, b, c, d = -a, -b, -c, -d
    return a, b, c, d


def normalizing_map(g: Geodesic, base: HPoint = BASE_I) -> MobiusMap:
    """Orientation-preserving M with M(g.start) = 0, M(g.end) = inf and |M(base)| = 1."""
    return MobiusMap(*_normalizing_entries(g, base.z))


def side_of(g: Geodesic, pt: HPoint) -> int:
    """+1 if ``pt`` is to the left of the oriented geodesic, -1 right, 0 on it."""
    a, b, c, d = _normalizing_entries(g, 1j)
    z = pt.z
    w = (a * z + b) / (c * z + d)
    if abs(w.real) <= GEOM_TOL * abs(w):
        return 0
    return 1 if w.real < 0.0 else -1


def dist_to_geodesic(pt: HPoint, g: Geodesic) -> tuple[float, HPoint]:
    m = normalizing_map(g)
    w = m.apply_complex(pt.z)
    d = math.asinh(abs(w.real) / w.imag)
    foot = m.inverse().apply_complex(complex(0.0, abs(w)))
    return d, HPoint.from_complex(foot)


def _normalized_coords(g: Geodesic, h: Geodesic):
    m = normalizing_map(g)
    return mobius_apply(m, h.start), mobius_apply(m, h.end)


def crosses(g: Geodesic, h: Geodesic) -> bool:
    """Transverse intersection in H^2; shared endpoints do not count."""
    x, y = _normalized_coords(g, h)
    sx = x.p * x.q
    sy = y.p * y.q
    if abs(sx) < PROJ_TOL or abs(sy) < PROJ_TOL:
        return False
    return (sx > 0.0) != (sy > 0.0)


def angle_cosine(g: Geodesic, h: Geodesic) -> float:
    """Cosine of the angle between the oriented tangents of g and h at g ∩ h.

    With g sent to 0 -> inf and h to x -> y this is (-x-y)/(x-y); it is 0
    when the geodesics are disjoint or share an endpoint.
    """
    if not crosses(g, h):
        return 0.0
    x, y = _normalized_coords(g, h)
    # (-x-y)/(x-y) in projective form
    num = -(x.p * y.q + y.p * x.q)
    den = x.p * y.q - y.p * x.q
    return max(-1.0, min(1.0, num / den))


def cross_ratio(a: BoundaryPoint, b: BoundaryPoint, c: BoundaryPoint, d: BoundaryPoint) -> float:
    """Image of d under the Mobius map sending a, b, c to 0, 1, inf.

    Equals (d-a)(b-c) / ((b-a)(d-c)), so cross_ratio(0, 1, inf, x) = x.
    """
    pts = [(z.p, z.q) for z in (a, b, c, d)]
    for i in range(4):
        for j in range(i + 1, 4):
            if abs(_det(pts[i], pts[j])) < PROJ_TOL:
                raise ValueError("cross ratio needs four distinct points")
    a, b, c, d = pts
    return _det(d, a) * _det(b, c) / (_det(b, a) * _det(d, c))


# -- model conversion -------------------------------------------------------

def to_disk(z):
    """Cayley transform H^2 -> D sending i to 0; accepts complex, HPoint or BoundaryPoint."""
    if isinstance(z, BoundaryPoint):
        return complex(math.cos(z.angle), math.sin(z.angle))
    if isinstance(z, HPoint):
        z = z.z
    return (z - 1j) / (z + 1j)


def from_disk(w: complex, boundary: bool = False):
    """Inverse Cayley transform; boundary points |w| = 1 give a BoundaryPoint."""
    if boundary:
        return BoundaryPoint.from_angle(math.atan2(w.imag, w.real) % TWO_PI)
    return HPoint.from_complex(1j * (1 + w) / (1 - w))


def convert_model(pt, direction: str):
    if direction == "halfplane->disk":
        return to_disk(pt)
    if direction == "disk->halfplane":
        return from_disk(pt, boundary=abs(abs(pt) - 1.0) < PROJ_TOL)
    raise ValueError(f"unknown direction {direction!r}")


def angle_from_real(x):
    return (math.pi + 2.0 * np.arctan(x)) % TWO_PI


def real_from_angle(theta):
    return np.tan(0.5 * (np.asarray(theta) - math.pi))


# -- vectorised boundary helpers used by the quadrature ----------------------

def arc_coordinates(theta, start: float, end: float):
    """Projective coordinates (n, d) of points after sending start -> 0, end -> inf.

    ``n/d`` is a positive multiple of the normalised real coordinate, so
    points on the counterclockwise arc start -> end have d > 0.
    """
    half = 0.5 * ((np.asarray(theta) - start) % TWO_PI)
    length = 0.5 * ((end - start) % TWO_PI)
    return np.sin(half), np.sin(length - half)


def crossing_cosine(start: float, end: float, theta1, theta2, left: bool = True):
    """Unoriented crossing kernel for the leaf start -> end, vectorised in h = (theta1, theta2).

    For a leaf with the base point on its left this is (-x-y)/(x-y) with
    x > 0 > y the normalised endpoints of h, whatever the orientation of h;
    it vanishes when h does not cross the leaf.
    """
    n1, d1 = arc_coordinates(theta1, start, end)
    n2, d2 = arc_coordinates(theta2, start, end)
    cross = (d1 * d2) < 0.0
    num = n1 * d2 + n2 * d1
    den = np.abs(n1 * d2 - n2 * d1)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(cross, num / np.where(cross, den, 1.0), 0.0)
    return val if left else -val


def oriented_cosine(start: float, end: float, theta1, theta2):
    """Vectorised angle_cosine(g, h) with g = start -> end and h = theta1 -> theta2."""
    n1, d1 = arc_coordinates(theta1, start, end)
    n2, d2 = arc_coordinates(theta2, start, end)
    cross = (d1 * d2) < 0.0
    num = -(n1 * d2 + n2 * d1)
    den = n1 * d2 - n2 * d1
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(cross, num / np.where(cross, den, 1.0), 0.0)


def liouville_density(theta1, theta2):
    """Liouville density in Cayley angles: (1/2) / sin^2((theta1 - theta2)/2)."""
    s = np.sin(0.5 * (np.asarray(theta1) - np.asarray(theta2)))
    return 0.5 / (s * s)


def geodesic_distance_from_angles(theta1, theta2, base: HPoint = BASE_I):
    """Distance from ``base`` to each geodesic with the given endpoint angles.

    Uses sinh d = |Re((q1 z - p1)(q2 conj(z) - p2))| / (|p1 q2 - p2 q1| Im z),
    the projective form of the semicircle formula.
    """
    b1 = 0.5 * (np.asarray(theta1, dtype=float) - math.pi)
    b2 = 0.5 * (np.asarray(theta2, dtype=float) - math.pi)
    p1, q1, p2, q2 = np.sin(b1), np.cos(b1), np.sin(b2), np.cos(b2)
    z = base.z
    num = np.abs(((q1 * z - p1) * (q2 * np.conj(z) - p2)).real)
    den = np.abs(p1 * q2 - p2 * q1) * z.imag
    return np.arcsinh(num / den)
