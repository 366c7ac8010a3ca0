"""Earthquake maps of the circle at infinity.

An EarthquakeMap is a composition, written left to right and applied
right to left, of elementary earthquakes E_g^a (identity on the side of g
containing the base point, translation by a along g on the far side) and
triangle factors E_T^a = E_{g3}^a o E_{g1}^-a o E_{g2}^-a.  Everything is
evaluated in the Cayley angle, where each elementary piece is a Moebius
map restricted to the far arc of its leaf.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .farey import OMEGA, IdealTriangle, Leaf, SpanningFamily, label_value
from .hyperbolic import TWO_PI, BoundaryPoint, Geodesic, HPoint, side_of
from .cocycle import TransverseCocycle, alpha_map


@dataclass(frozen=True)
class Factor:
    kind: str  # "leaf" or "triangle"
    support: Geodesic | IdealTriangle
    amount: float


@dataclass(frozen=True)
class _Piece:
    start: float  # far arc is (start, start + length) counterclockwise
    length: float
    a: float
    b: float
    c: float
    d: float


def _translation_piece(g: Geodesic, amount: float, base: HPoint) -> _Piece:
    s = side_of(g, base)
    if s == 0:
        raise ValueError(f"base point lies on {g}")
    # P diag(e, 1/e) P^-1 with P = [end | start]: translation by ``amount`` towards g.end
    p1, q1 = g.end.p, g.end.q
    p0, q0 = g.start.p, g.start.q
    e = math.exp(0.5 * amount)
    delta = p1 * q0 - p0 * q1
    sh = (e - 1.0 / e) / delta
    a = (p1 * q0 * e - p0 * q1 / e) / delta
    d = (p1 * q0 / e - p0 * q1 * e) / delta
    t0, t1 = g.angles
    if s < 0:
        t0, t1 = t1, t0
    length = (t1 - t0) % TWO_PI
    return _Piece(t0, length, a, -p0 * p1 * sh, q0 * q1 * sh, d)


@dataclass(frozen=True)
class EarthquakeMap:
    factors: tuple[Factor, ...] = ()
    base_point: HPoint = OMEGA
    _pieces: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        pieces = []
        for f in self.factors:
            if f.amount == 0.0:
                continue
            if f.kind == "leaf":
                pieces.append(_translation_piece(f.support, f.amount, self.base_point))
            elif f.kind == "triangle":
                g1, g2, g3 = f.support.sides
                pieces += [_translation_piece(g3, f.amount, self.base_point),
                           _translation_piece(g1, -f.amount, self.base_point),
                           _translation_piece(g2, -f.amount, self.base_point)]
            else:
                raise ValueError(f"unknown factor kind {f.kind!r}")
        object.__setattr__(self, "_pieces", tuple(pieces))

    def __matmul__(self, other: "EarthquakeMap") -> "EarthquakeMap":
        return EarthquakeMap(self.factors + other.factors, self.base_point)

    def inverse(self) -> "EarthquakeMap":
        leaves = []
        for f in self.factors:
            if f.kind == "leaf":
                leaves.append(Factor("leaf", f.support, f.amount))
            else:
                g1, g2, g3 = f.support.sides
                leaves += [Factor("leaf", g3, f.amount), Factor("leaf", g1, -f.amount),
                           Factor("leaf", g2, -f.amount)]
        inv = tuple(Factor("leaf", f.support, -f.amount) for f in reversed(leaves))
        return EarthquakeMap(inv, self.base_point)

    @property
    def breakpoints(self) -> np.ndarray:
        """Cayley angles of all factor endpoints; E is smooth between them in the source."""
        pts = set()
        for p in self._pieces:
            pts.add(p.start % TWO_PI)
            pts.add((p.start + p.length) % TWO_PI)
        return np.array(sorted(pts))

    def evaluate(self, theta, derivative: bool = False):
        """Image angles in [0, 2 pi) (and dE/dtheta if requested)."""
        th = np.array(theta, dtype=float, copy=True) % TWO_PI
        shape = th.shape
        th = th.ravel()
        der = np.ones_like(th)
        for p in reversed(self._pieces):
            rel = (th - p.start) % TWO_PI
            idx = np.nonzero((rel > 0.0) & (rel < p.length))[0]
            if idx.size == 0:
                continue
            b = 0.5 * (th[idx] - math.pi)
            x, y = np.sin(b), np.cos(b)
            x2 = p.a * x + p.b * y
            y2 = p.c * x + p.d * y
            n2 = x2 * x2 + y2 * y2
            new = math.pi + 2.0 * np.arctan2(x2, y2)
            # stay inside the far arc, which the piece preserves
            th[idx] = p.start + (new - p.start) % TWO_PI
            der[idx] *= 1.0 / n2
        th %= TWO_PI
        if derivative:
            return th.reshape(shape), der.reshape(shape)
        return th.reshape(shape)

    def __call__(self, x):
        if isinstance(x, BoundaryPoint):
            if not self._pieces:
                return x
            return BoundaryPoint.from_angle(float(self.evaluate(x.angle)))
        if isinstance(x, Geodesic):
            return apply_to_geodesic(self, x)
        return self.evaluate(x)

    def is_monotone(self, samples: int = 512) -> bool:
        """Strictly increasing in the circular order on a uniform sample."""
        th = (np.arange(samples) + 0.5) * TWO_PI / samples
        img = self.evaluate(th)
        steps = np.diff(np.concatenate([img, img[:1]])) % TWO_PI
        return bool(np.all(steps > 0.0) and abs(steps.sum() - TWO_PI) < 1e-9)

    def write_boundary_graph(self, path, samples: int = 512) -> None:
        th = (np.arange(samples) + 0.5) * TWO_PI / samples
        img = self.evaluate(th)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "E_theta"])
            for a, b in zip(th, img):
                w.writerow([f"{a:.15g}", f"{b:.15g}"])


def identity_map(base: HPoint = OMEGA) -> EarthquakeMap:
    return EarthquakeMap((), base)


def elementary(g: Geodesic | Leaf, a: float, base: HPoint = OMEGA) -> EarthquakeMap:
    g = g.geodesic if isinstance(g, Leaf) else g
    if side_of(g, base) == 0:
        raise ValueError(f"base point lies on {g}")
    return EarthquakeMap((Factor("leaf", g, float(a)),), base)


def triangle_factor(T: IdealTriangle, a: float, base: HPoint = OMEGA) -> EarthquakeMap:
    if T.tree_depth == 0:
        raise ValueError("the base triangle has no triangle factor")
    return EarthquakeMap((Factor("triangle", T, float(a)),), base)


def _lex_key(U: IdealTriangle):
    return (label_value(U.lo), label_value(U.hi))


def truncated_shear(c: TransverseCocycle, family: SpanningFamily, scale: float = 1.0,
                    base: HPoint = OMEGA, alphas: dict | None = None) -> EarthquakeMap:
    """E_U^alpha: triangle factors over T < U in order, then E_{g3^U} for U in U."""
    below = family.below()
    members = sorted(family.members, key=_lex_key)
    if alphas is None:
        alphas = alpha_map(c, below + members)
    factors = [Factor("triangle", T, scale * alphas[T.key]) for T in below]
    factors += [Factor("leaf", U.sides[2], scale * alphas[U.key]) for U in members]
    return EarthquakeMap(tuple(factors), base)


def apply_to_geodesic(E: EarthquakeMap, h: Geodesic) -> Geodesic:
    return Geodesic(E(h.start), E(h.end))


def sup_angle_distance(E1: EarthquakeMap, E2: EarthquakeMap, samples: int = 512) -> float:
    th = (np.arange(samples) + 0.5) * TWO_PI / samples
    d = np.abs(E1.evaluate(th) - E2.evaluate(th)) % TWO_PI
    return float(np.max(np.minimum(d, TWO_PI - d)))
