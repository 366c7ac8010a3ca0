"""Compactly supported test functions on the space of oriented geodesics.

A geodesic is the ordered pair (theta1, theta2) of Cayley angles of its
endpoints.  Supports are unions of angle rectangles kept away from the
diagonal, so the Liouville density stays bounded on them.  The Hoelder
norm uses the metric max(|dtheta1|, |dtheta2|) (circular differences).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .farey import OMEGA
from .hyperbolic import TWO_PI, Geodesic, HPoint, MobiusMap, geodesic_distance_from_angles

DIAGONAL_GAP = 0.2


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # not a pytest class

    fn: Callable = field(repr=False)
    rects: tuple  # ((a1, b1, a2, b2), ...) with a < b; angles may exceed 2 pi
    nu: float
    holder_norm_bound: float
    support_radius: float
    balanced: bool = False
    name: str = "phi"
    singular: tuple = ((), ())  # grading points per axis

    def __call__(self, theta1, theta2):
        return self.fn(np.asarray(theta1, dtype=float), np.asarray(theta2, dtype=float))

    def eval(self, g: Geodesic) -> float:
        a, b = g.angles
        return float(self(np.array([a]), np.array([b]))[0])

    def __add__(self, other):
        return linear_combination([(1.0, self), (1.0, other)])

    def scaled(self, s: float):
        return linear_combination([(s, self)])


def _circ(d):
    d = np.abs(d) % TWO_PI
    return np.minimum(d, TWO_PI - d)


def _in_interval(t, a, b):
    rel = (t - a) % TWO_PI
    return rel <= (b - a)


def bump_1d(t, a: float, b: float):
    """C-infinity bump on the arc [a, b], equal to 1 at its midpoint."""
    rel = (np.asarray(t, dtype=float) - a) % TWO_PI
    u = 2.0 * rel / (b - a) - 1.0
    out = np.zeros_like(u)
    m = np.abs(u) < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - u[m] ** 2))
    return out


def smooth_step(t):
    """C-infinity step from 0 (t <= -1/2) to 1 (t >= 1/2) with S(t) + S(-t) = 1."""
    t = np.asarray(t, dtype=float)
    f = lambda x: np.where(x > 0.0, np.exp(-1.0 / np.where(x > 0.0, x, 1.0)), 0.0)  # noqa: E731
    left, right = f(0.5 + t), f(0.5 - t)
    return left / (left + right)


# -- supports --------------------------------------------------------------

def _unwrap(a: float, b: float):
    a0 = a % TWO_PI
    b0 = a0 + (b - a)
    if b0 <= TWO_PI + 1e-12:
        return [(a0, min(b0, TWO_PI))]
    return [(a0, TWO_PI), (0.0, b0 - TWO_PI)]


def _overlap(r, s) -> bool:
    return r[0] < s[1] and s[0] < r[1] and r[2] < s[3] and s[2] < r[3]


def disjoint_rects(rects) -> tuple:
    """Non-overlapping rectangles in [0, 2 pi]^2 covering the union of ``rects``.

    Quadrature sums over rectangles, so an overlap would count twice.
    """
    pieces = []
    for a1, b1, a2, b2 in rects:
        for x in _unwrap(a1, b1):
            for y in _unwrap(a2, b2):
                if x[1] > x[0] and y[1] > y[0]:
                    pieces.append((*x, *y))
    pieces = list(dict.fromkeys(pieces))
    if not any(_overlap(r, s) for i, r in enumerate(pieces) for s in pieces[i + 1:]):
        return tuple(pieces)
    xs = sorted({v for r in pieces for v in r[:2]})
    ys = sorted({v for r in pieces for v in r[2:]})
    out = []
    for x0, x1 in zip(xs[:-1], xs[1:]):
        run = None
        for y0, y1 in zip(ys[:-1], ys[1:]):
            inside = any(r[0] <= x0 and x1 <= r[1] and r[2] <= y0 and y1 <= r[3] for r in pieces)
            if inside and run is not None and run[3] == y0:
                run = (x0, x1, run[2], y1)
            elif inside:
                if run is not None:
                    out.append(run)
                run = (x0, x1, y0, y1)
        if run is not None:
            out.append(run)
    return tuple(out)


# -- certification ---------------------------------------------------------

def _grid(rect, n):
    a1, b1, a2, b2 = rect
    t1 = np.linspace(a1, b1, n)
    t2 = np.linspace(a2, b2, n)
    return np.meshgrid(t1, t2, indexing="ij")


def check_diagonal(fn, rects, n: int = 161) -> None:
    for r in rects:
        g1, g2 = _grid(r, n)
        close = _circ(g1 - g2) < DIAGONAL_GAP
        if close.any():
            with np.errstate(all="ignore"):
                vals = fn(g1[close], g2[close])
            if np.any(vals != 0.0):
                raise ValueError("test function support comes within 0.2 of the diagonal")


def certify_radius(fn, rects, base: HPoint = OMEGA, n: int = 161) -> float:
    """Max distance from ``base`` to a sampled geodesic in the support, plus grid slack."""
    best = 0.0
    for r in rects:
        g1, g2 = _grid(r, n)
        with np.errstate(all="ignore"):
            vals = fn(g1, g2)
        m = vals != 0.0
        if not m.any():
            continue
        d = geodesic_distance_from_angles(g1[m], g2[m], base)
        best = max(best, float(d.max()))
    # neighbouring grid points are within one cell; distance is 1-Lipschitz in
    # the angle at this scale up to the factor absorbed by the slack
    cell = max(max(r[1] - r[0], r[3] - r[2]) for r in rects) / (n - 1)
    return best + 4.0 * cell


def estimate_holder_norm(fn, rects, nu: float, samples: int = 40000, seed: int = 0,
                         safety: float = 1.25) -> float:
    """Sampled sup|phi| + Hoelder constant, inflated by ``safety``."""
    rng = np.random.default_rng(seed)
    sup, hol = 0.0, 0.0
    for r in rects:
        a1, b1, a2, b2 = r
        t1 = rng.uniform(a1, b1, samples)
        t2 = rng.uniform(a2, b2, samples)
        scale = np.exp(rng.uniform(math.log(1e-5), math.log(0.5), samples))
        d1 = scale * rng.uniform(-1, 1, samples)
        d2 = scale * rng.uniform(-1, 1, samples)
        with np.errstate(all="ignore"):
            v0 = fn(t1, t2)
            v1 = fn(t1 + d1, t2 + d2)
        dist = np.maximum(np.abs(d1), np.abs(d2))
        sup = max(sup, float(np.max(np.abs(v0))))
        ok = dist > 0
        hol = max(hol, float(np.max(np.abs(v1 - v0)[ok] / dist[ok] ** nu)))
    return safety * (sup + hol)


def make_test_function(fn, rects, nu, name, balanced=False, singular=((), ()),
                       base: HPoint = OMEGA, holder_norm_bound=None) -> TestFunction:
    rects = tuple(tuple(float(x) for x in r) for r in rects)
    for a1, b1, a2, b2 in rects:
        if not (b1 > a1 and b2 > a2):
            raise ValueError(f"degenerate rectangle {(a1, b1, a2, b2)}")
    rects = disjoint_rects(rects)
    check_diagonal(fn, rects)
    R = certify_radius(fn, rects, base)
    if holder_norm_bound is None:
        holder_norm_bound = estimate_holder_norm(fn, rects, nu)
    return TestFunction(fn, rects, float(nu), float(holder_norm_bound), R, balanced, name,
                        (tuple(singular[0]), tuple(singular[1])))


# -- constructors --------------------------------------------------------------

DEFAULT_I1 = (3.6, 4.6)  # endpoints in (0.23, 0.89): inside the Farey arc (0, 1)
DEFAULT_I2 = (0.6, 2.0)  # endpoints in (-3.2, -0.64)


def bump(I1=DEFAULT_I1, I2=DEFAULT_I2, base: HPoint = OMEGA) -> TestFunction:
    """Smooth product bump on I1 x I2 (Lipschitz, nu = 1)."""
    (a1, b1), (a2, b2) = I1, I2

    def fn(t1, t2):
        return bump_1d(t1, a1, b1) * bump_1d(t2, a2, b2)
    return make_test_function(fn, [(a1, b1, a2, b2)], 1.0, "bump", base=base)


def holder_bump(nu: float, I1=DEFAULT_I1, I2=DEFAULT_I2, theta0: float | None = None,
                base: HPoint = OMEGA) -> TestFunction:
    """bump * (|theta1 - theta0| / w)^nu: genuinely nu-Hoelder across theta1 = theta0."""
    if not 0.0 < nu <= 1.0:
        raise ValueError("nu must lie in (0, 1]")
    (a1, b1), (a2, b2) = I1, I2
    th0 = 0.5 * (a1 + b1) if theta0 is None else theta0
    w = 0.5 * (b1 - a1)

    def fn(t1, t2):
        rel = a1 + (np.asarray(t1) - a1) % TWO_PI
        return bump_1d(t1, a1, b1) * bump_1d(t2, a2, b2) * (np.abs(rel - th0) / w) ** nu
    return make_test_function(fn, [(a1, b1, a2, b2)], nu, f"holder{nu:g}",
                              singular=((th0,), ()), base=base)


def symmetrized(phi: TestFunction, base: HPoint = OMEGA) -> TestFunction:
    """(phi(g) + phi(r g)) / 2, invariant under orientation reversal."""
    f = phi.fn

    def fn(t1, t2):
        return 0.5 * (f(t1, t2) + f(t2, t1))
    rects = list(phi.rects) + [(r[2], r[3], r[0], r[1]) for r in phi.rects]
    sing = tuple(sorted(set(phi.singular[0]) | set(phi.singular[1])))
    return make_test_function(fn, rects, phi.nu, f"sym({phi.name})", balanced=True,
                              singular=(sing, sing), base=base,
                              holder_norm_bound=phi.holder_norm_bound)


def linear_combination(terms) -> TestFunction:
    terms = [(float(a), p) for a, p in terms]

    def fn(t1, t2):
        out = 0.0
        for a, p in terms:
            out = out + a * p.fn(t1, t2)
        return out
    rects = disjoint_rects([r for _, p in terms for r in p.rects])
    s1 = tuple(sorted({x for _, p in terms for x in p.singular[0]}))
    s2 = tuple(sorted({x for _, p in terms for x in p.singular[1]}))
    return TestFunction(fn, rects, min(p.nu for _, p in terms),
                        sum(abs(a) * p.holder_norm_bound for a, p in terms),
                        max(p.support_radius for _, p in terms),
                        all(p.balanced for _, p in terms),
                        " + ".join(f"{a:g}*{p.name}" for a, p in terms), (s1, s2))


def transformed(phi: TestFunction, M: MobiusMap, base: HPoint = OMEGA) -> TestFunction:
    """phi o M^-1, supported on the M-image of phi's rectangles."""
    minv = M.inverse()
    f = phi.fn

    def fn(t1, t2):
        return f(minv.apply_angles(t1)[0], minv.apply_angles(t2)[0])

    def image(a, b):
        ia = float(M.apply_angles(a)[0])
        ib = float(M.apply_angles(b)[0])
        if ib <= ia:
            ib += TWO_PI
        return ia, ib
    rects = []
    for a1, b1, a2, b2 in phi.rects:
        rects.append((*image(a1, b1), *image(a2, b2)))
    sing = tuple(tuple(float(M.apply_angles(s)[0]) for s in axis) for axis in phi.singular)
    return make_test_function(fn, rects, phi.nu, f"{phi.name}oM^-1", phi.balanced, sing, base)


def crossing_mass(ell: float, eps: float, base: HPoint = OMEGA) -> TestFunction:
    """Mollified indicator of oriented geodesics crossing the segment [i, e^ell i].

    A geodesic with endpoints x > 0 > y meets the imaginary axis at height
    sqrt(-xy); with s = log sqrt(-xy) the function is chi(s) with
    chi = S(s/eps) - S((s - ell)/eps).  The symmetric ramps make
    int chi ds = ell, so the Liouville mass is exactly 4 ell.
    """
    if not (ell > 0 and eps > 0):
        raise ValueError("ell and eps must be positive")

    def fn(t1, t2):
        b1 = 0.5 * (np.asarray(t1) - math.pi)
        b2 = 0.5 * (np.asarray(t2) - math.pi)
        num = np.sin(b1) * np.sin(b2)
        den = np.cos(b1) * np.cos(b2)
        cross = num * den < 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            s = 0.5 * (np.log(np.abs(num)) - np.log(np.abs(den)))
            val = smooth_step(s / eps) - smooth_step((s - ell) / eps)
        return np.where(cross & np.isfinite(s), val, 0.0)
    pi = math.pi
    rects = [(pi, 2 * pi, 0.0, pi), (0.0, pi, pi, 2 * pi)]
    sing = (0.0, pi, 2 * pi)
    return make_test_function(fn, rects, 1.0, f"crossing_mass({ell:g},{eps:g})",
                              balanced=True, singular=(sing, sing), base=base)


def builtin_test_functions(base: HPoint = OMEGA) -> list[TestFunction]:
    b = bump(base=base)
    h5 = holder_bump(0.5, base=base)
    h8 = holder_bump(0.8, base=base)
    return [b, h5, h8, symmetrized(b, base), symmetrized(h5, base), symmetrized(h8, base)]


def test_function_from_spec(spec, base: HPoint = OMEGA) -> TestFunction:
    """{"kind": "bump"|"holder"|"crossing-mass", ...} or a short name."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind", "bump")
    sym = spec.get("symmetrize", False)
    I1 = tuple(spec.get("I1", DEFAULT_I1))
    I2 = tuple(spec.get("I2", DEFAULT_I2))
    if kind == "bump":
        phi = bump(I1, I2, base)
    elif kind == "holder":
        phi = holder_bump(float(spec.get("nu", 0.5)), I1, I2, spec.get("theta0"), base)
    elif kind == "crossing-mass":
        return crossing_mass(float(spec.get("ell", 1.0)), float(spec.get("eps", 0.05)), base)
    else:
        raise ValueError(f"unknown test function kind {kind!r}")
    return symmetrized(phi, base) if sym else phi


def with_base(phi: TestFunction, base: HPoint) -> TestFunction:
    return replace(phi, support_radius=certify_radius(phi.fn, phi.rects, base))
