"""The Farey tessellation as a maximal lamination of H^2.

Vertices are integer pairs (p, q) read as p/q.  Infinity appears twice,
as (-1, 0) when it is the left end of an arc and (1, 0) when it is the
right end, so every far arc (lo, hi) is an honest interval of the Cayley
angle with 0 <= theta(lo) < theta(hi) <= 2 pi and mediants stay correct.

The base triangle T_O is (0, 1, inf).  Every other triangle T has a
facing side g3 = lo -> hi, with the base point O on its left, and two
outer sides g1 = lo -> mid, g2 = mid -> hi, where mid is the mediant.
T < T' (T separates O from T') is strict ancestry in the dual tree.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .hyperbolic import (
    GEOM_TOL,
    TWO_PI,
    BoundaryPoint,
    Geodesic,
    HPoint,
    MobiusMap,
    dist_to_geodesic,
    hyperbolic_distance,
    normalizing_map,
)

OMEGA = HPoint(0.5, 0.5 * math.sqrt(3.0))
HALF_LOG3 = 0.5 * math.log(3.0)
EST_OT_BOUND = HALF_LOG3 + math.log(2.0)

NEG_INF = (-1, 0)
POS_INF = (1, 0)
Label = tuple[int, int]


def label_value(v: Label):
    """Exact value of a vertex label; infinities as floats."""
    p, q = v
    if q == 0:
        return -math.inf if p < 0 else math.inf
    return Fraction(p, q)


def label_angle(v: Label) -> float:
    p, q = v
    if q == 0:
        return 0.0 if p < 0 else TWO_PI
    return math.pi + 2.0 * math.atan2(p, q)


def label_point(v: Label) -> BoundaryPoint:
    return BoundaryPoint(float(v[0]), float(v[1]))


def label_str(v: Label) -> str:
    p, q = v
    if q == 0:
        return "-inf" if p < 0 else "inf"
    return f"{p}/{q}"


def farey_neighbours(u: Label, v: Label) -> bool:
    return abs(u[0] * v[1] - u[1] * v[0]) == 1


@dataclass(frozen=True)
class Leaf:
    """Unoriented Farey leaf, stored as its far arc lo -> hi (O on the left)."""

    lo: Label
    hi: Label
    depth: int = field(default=0, compare=False)

    @property
    def geodesic(self) -> Geodesic:
        return Geodesic(label_point(self.lo), label_point(self.hi))

    @property
    def arc(self) -> tuple[float, float]:
        return label_angle(self.lo), label_angle(self.hi)

    @property
    def key(self) -> tuple[Label, Label]:
        return canonical_leaf_key(self.lo, self.hi)

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        if not isinstance(other, Leaf):
            return NotImplemented
        return self.key == other.key

    def __repr__(self):
        return f"Leaf({label_str(self.lo)}, {label_str(self.hi)})"


def canonical_leaf_key(u: Label, v: Label) -> tuple[Label, Label]:
    """Orientation-free key; both infinities collapse to (1, 0)."""
    u = POS_INF if u[1] == 0 else u
    v = POS_INF if v[1] == 0 else v
    return (u, v) if label_value(u) <= label_value(v) else (v, u)


@dataclass(frozen=True, eq=False)
class IdealTriangle:
    lo: Label
    mid: Label
    hi: Label
    tree_depth: int
    parent: "IdealTriangle | None" = field(repr=False)
    D: float = field(repr=False)
    u: float = field(repr=False)
    xT: HPoint = field(repr=False)
    yT: HPoint = field(repr=False)
    center: HPoint = field(repr=False)
    center_dist: float = field(repr=False)

    @property
    def key(self) -> tuple[Label, Label, Label]:
        return (self.lo, self.mid, self.hi)

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        if not isinstance(other, IdealTriangle):
            return NotImplemented
        return self.key == other.key

    @property
    def vertices(self) -> tuple[BoundaryPoint, BoundaryPoint, BoundaryPoint]:
        return label_point(self.lo), label_point(self.mid), label_point(self.hi)

    @property
    def angles(self) -> tuple[float, float, float]:
        return label_angle(self.lo), label_angle(self.mid), label_angle(self.hi)

    @property
    def leaves(self) -> tuple[Leaf, Leaf, Leaf]:
        d = self.tree_depth
        return Leaf(self.lo, self.mid, d), Leaf(self.mid, self.hi, d), Leaf(self.lo, self.hi, d - 1)

    @property
    def sides(self) -> tuple[Geodesic, Geodesic, Geodesic]:
        return tuple(leaf.geodesic for leaf in self.leaves)

    @property
    def facing_leaf(self) -> Leaf:
        return self.leaves[2]

    def ancestors(self):
        """Strict ancestors other than T_O, nearest first."""
        t = self.parent
        while t is not None:
            yield t
            t = t.parent

    def __repr__(self):
        return f"IdealTriangle({label_str(self.lo)}, {label_str(self.mid)}, {label_str(self.hi)})"


def side_labels(T: IdealTriangle) -> tuple[Geodesic, Geodesic, Geodesic]:
    if T is None or T.tree_depth == 0:
        raise ValueError("the base triangle has no facing side")
    return T.sides


def separates(T: IdealTriangle, T2: IdealTriangle) -> bool:
    """True iff T separates O from T2, by containment of T2 in T's far arc."""
    if T == T2:
        return False
    lo, hi = label_value(T.lo), label_value(T.hi)
    return all(lo <= label_value(v) <= hi for v in T2.key)


def _moebius_from_labels(lo: Label, hi: Label) -> MobiusMap:
    # sends 0, 1, inf to lo, mediant, hi
    (a, b), (c, d) = lo, hi
    return MobiusMap(float(c), float(a), float(d), float(b))


@dataclass(frozen=True)
class SpanningFamily:
    members: tuple[IdealTriangle, ...]
    radius: float

    def below(self) -> list[IdealTriangle]:
        """All T < some member, in an order compatible with <."""
        seen = {}
        for U in self.members:
            for T in U.ancestors():
                seen.setdefault(T.key, T)
        return sorted(seen.values(), key=_topo_key)

    def __len__(self):
        return len(self.members)


def _topo_key(T: IdealTriangle):
    return (T.tree_depth, label_angle(T.mid))


class FareyLamination:
    """Farey tessellation seen from a base point inside T_O."""

    def __init__(self, base: HPoint = OMEGA):
        z = base.z
        # strictly inside (0, 1, inf): 0 < x < 1 and |z - 1/2| > 1/2
        if not (GEOM_TOL < z.real < 1.0 - GEOM_TOL and abs(z - 0.5) > 0.5 + GEOM_TOL):
            raise ValueError(f"base point {z} must lie strictly inside the triangle (0, 1, inf)")
        self.base = base
        self._roots = [(NEG_INF, (0, 1)), ((0, 1), (1, 1)), ((1, 1), POS_INF)]
        self._arena: dict = {}
        self._arena_radius = -1.0

    def leaf_distance(self, lo: Label, hi: Label) -> float:
        return dist_to_geodesic(self.base, Geodesic(label_point(lo), label_point(hi)))[0]

    def clearance(self) -> float:
        """r with B(O, r) disjoint from the lamination: the nearest side of T_O."""
        return min(self.leaf_distance(lo, hi) for lo, hi in self._roots)

    def make_triangle(self, lo: Label, hi: Label, depth: int, parent=None) -> IdealTriangle:
        # N(z) = (a - b z) / (d z - c) sends lo = a/b to 0, hi = c/d to inf and the
        # mediant to 1, so u = -log|N(O)| and every foot is read off N^-1.
        (a, b), (c, d) = lo, hi
        z = self.base.z
        w = (a - b * z) / (d * z - c)
        r = abs(w)
        ninv = lambda s: (c * s + a) / (d * s + b)  # noqa: E731
        center = ninv(OMEGA.z)
        return IdealTriangle(
            lo, (a + c, b + d), hi, depth, parent,
            D=math.asinh(abs(w.real) / w.imag), u=-math.log(r),
            xT=HPoint.from_complex(ninv(1j * r)), yT=HPoint.from_complex(ninv(1j)),
            center=HPoint.from_complex(center),
            center_dist=hyperbolic_distance(z, center),
        )

    def _explore(self, radius: float):
        """All triangles with D_T <= radius + 1/2 log 3, which contain V_radius.

        Every triangle beyond a leaf g has its centre at distance at least
        1/2 log 3 from g inside the far half-plane, hence at least
        d(O, g) + 1/2 log 3 from O; subtrees are cut on that bound.
        """
        if radius <= self._arena_radius:
            return
        arena = {}
        stack = [(lo, hi, 1, None) for lo, hi in self._roots]
        while stack:
            lo, hi, depth, parent = stack.pop()
            key = (lo, (lo[0] + hi[0], lo[1] + hi[1]), hi)
            T = self._arena.get(key)
            if T is None or T.parent is not parent:
                T = self.make_triangle(lo, hi, depth, parent)
            if T.D + HALF_LOG3 > radius:
                continue
            arena[key] = T
            stack.append((lo, T.mid, depth + 1, T))
            stack.append((T.mid, hi, depth + 1, T))
        self._arena = arena
        self._arena_radius = radius

    def enumerate(self, radius: float) -> list[IdealTriangle]:
        """Triangles T != T_O with d(O, O_T) <= radius, ancestors first."""
        if radius < 0:
            raise ValueError("radius must be non-negative")
        self._explore(radius)
        out = [T for T in self._arena.values() if T.center_dist <= radius]
        return sorted(out, key=_topo_key)

    def spanning_family(self, n: float) -> SpanningFamily:
        V = self.enumerate(n)
        covered = set()
        for T in V:
            for A in T.ancestors():
                if A.key in covered:
                    break
                covered.add(A.key)
        members = tuple(T for T in V if T.key not in covered)
        return SpanningFamily(members, n)

    def children(self, T: IdealTriangle | None) -> list[IdealTriangle]:
        if T is None:
            return [self.make_triangle(lo, hi, 1) for lo, hi in self._roots]
        return [self.make_triangle(T.lo, T.mid, T.tree_depth + 1, T),
                self.make_triangle(T.mid, T.hi, T.tree_depth + 1, T)]

    def triangle(self, a, b) -> IdealTriangle:
        """Triangle whose facing side joins the Farey neighbours a and b (fractions or inf)."""
        target = canonical_leaf_key(_to_label(a), _to_label(b))
        lo_t, hi_t = target
        if not farey_neighbours(lo_t, hi_t):
            raise ValueError(f"{a} and {b} are not Farey neighbours")
        T = None
        for _ in range(10_000):
            kids = self.children(T)
            for K in kids:
                if canonical_leaf_key(K.lo, K.hi) == target:
                    return K
            T = next((K for K in kids if _arc_contains(K, lo_t, hi_t)), None)
            if T is None:
                break
        raise ValueError(f"leaf ({a}, {b}) is a side of the base triangle")

    def leaf(self, a, b) -> Leaf:
        try:
            return self.triangle(a, b).facing_leaf
        except ValueError:
            lo, hi = canonical_leaf_key(_to_label(a), _to_label(b))
            for r_lo, r_hi in self._roots:
                if canonical_leaf_key(r_lo, r_hi) == (lo, hi):
                    return Leaf(r_lo, r_hi, 0)
            raise

    def mirror(self, T: IdealTriangle) -> IdealTriangle:
        """Image of T under z -> 1 - conj(z), which preserves the tessellation."""
        def refl(v):
            return (v[1] - v[0], v[1])
        return self.make_triangle(refl(T.hi), refl(T.lo), T.tree_depth)

    def symmetry_defect(self, radius: float) -> float:
        """max |D - D'| + |u + u'| over mirror pairs; zero when O sits on Re z = 1/2."""
        worst = 0.0
        for T in self.enumerate(radius):
            M = self.mirror(T)
            worst = max(worst, abs(T.D - M.D) + abs(T.u + M.u))
        return worst


def _to_label(a) -> Label:
    if isinstance(a, tuple):
        return a
    if a == math.inf or a == "inf":
        return POS_INF
    if a == -math.inf or a == "-inf":
        return NEG_INF
    f = Fraction(a)
    return (f.numerator, f.denominator)


def _arc_contains(T: IdealTriangle, a: Label, b: Label) -> bool:
    lo, hi = label_value(T.lo), label_value(T.hi)

    def inside(v):
        if v[1] == 0:
            return T.lo[1] == 0 or T.hi[1] == 0
        return lo <= label_value(v) <= hi
    return inside(a) and inside(b)


def write_triangles_csv(triangles, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lo", "mid", "hi", "tree_depth", "D", "u", "center_dist"])
        for T in triangles:
            w.writerow([label_str(T.lo), label_str(T.mid), label_str(T.hi), T.tree_depth,
                        f"{T.D:.12g}", f"{T.u:.12g}", f"{T.center_dist:.12g}"])


def estimate_table(triangles) -> np.ndarray:
    """Rows (D, |u|, d(O, O_T), d(O, O_T) - D - |u|) for the EstO_T diagnostic."""
    return np.array([(T.D, abs(T.u), T.center_dist, T.center_dist - T.D - abs(T.u))
                     for T in triangles]).reshape(-1, 4)
