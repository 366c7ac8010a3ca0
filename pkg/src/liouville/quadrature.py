"""Liouville-measure quadrature on the space of geodesics.

Integrals are taken over rectangles in the Cayley angles (theta1, theta2)
of the endpoints, where the Liouville measure has density
(1/2) / sin^2((theta1 - theta2) / 2).  Each axis is cut at breakpoints
(earthquake vertices, kernel discontinuities), split into panels, graded
geometrically towards declared singular points, and covered by
Gauss-Legendre rules.  Levels halve every panel until two successive
estimates agree to ``refinement_tol``.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .earthquake import EarthquakeMap, elementary, triangle_factor
from .farey import OMEGA, IdealTriangle
from .functions import TestFunction
from .hyperbolic import TWO_PI, Geodesic, HPoint, arc_coordinates, liouville_density, side_of

BLOCK = 1_500_000  # max integrand points evaluated at once


class ConvergenceError(ArithmeticError):
    def __init__(self, message, estimates):
        super().__init__(f"{message}; last estimates {estimates[-2:]}")
        self.estimates = estimates


class FDLadderWarning(UserWarning):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    base_grid: int = 16  # panels per pi of arc at level 0
    refinement_tol: float = 1e-10
    max_levels: int = 6
    order: int = 8
    abs_tol: float = 1e-15
    grading_ratio: float = 0.2
    grading_layers: int = 8

    def __post_init__(self):
        if self.base_grid < 8:
            raise ValueError("base_grid must be at least 8")
        if not self.refinement_tol > 0:
            raise ValueError("refinement_tol must be positive")
        if self.max_levels < 1:
            raise ValueError("max_levels must be at least 1")


@dataclass
class QuadratureReport:
    value: float
    estimates: list
    levels: int
    nodes: int
    converged: bool = True

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@lru_cache(maxsize=None)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _in_range(points, a, b):
    """Points (angles mod 2 pi) placed inside [a, b], which may exceed 2 pi."""
    out = []
    for p in points:
        for k in (-1, 0, 1, 2):
            x = p + k * TWO_PI
            if a - 1e-14 <= x <= b + 1e-14:
                out.append(min(max(x, a), b))
    return out


def _refine(pts, sub):
    """Split each interval of the increasing list ``pts`` into ``sub`` equal parts."""
    if sub == 1:
        return list(pts)
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        out.extend(np.linspace(a, b, sub + 1)[1:])
    return out


def axis_nodes(a: float, b: float, breaks, singular, level: int, q: QuadratureSpec):
    """Composite Gauss nodes and weights on [a, b]."""
    cuts = sorted(set([a, b] + _in_range(breaks, a, b) + _in_range(singular, a, b)))
    sing = _in_range(singular, a, b)
    tol = 1e-13 * max(1.0, abs(b))
    edges = []
    for s, e in zip(cuts[:-1], cuts[1:]):
        if e - s <= tol:
            continue
        m = max(1, math.ceil(q.base_grid * (e - s) / math.pi)) * 2 ** level
        pts = list(np.linspace(s, e, m + 1))
        layers = q.grading_layers + level
        sub = 2 ** level
        if any(abs(s - x) <= tol for x in sing):
            h = pts[1] - s
            inner = _refine([s + h * q.grading_ratio ** j for j in range(layers, -1, -1)], sub)
            pts = [s] + inner + pts[2:]
        if any(abs(e - x) <= tol for x in sing):
            h = e - pts[-2]
            inner = _refine([e - h * q.grading_ratio ** j for j in range(0, layers + 1)], sub)
            pts = pts[:-2] + inner + [e]
        edges.extend(pts if not edges else pts[1:])
    edges = np.array(edges)
    x, w = _gauss(q.order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


class Integrand:
    """Tensor-structured integrand: per-axis data, then a block of values."""

    def axis(self, theta):
        return {"theta": theta}

    def values(self, A, B):
        raise NotImplementedError


def _block_sum(integrand: Integrand, n1, w1, n2, w2) -> float:
    A = integrand.axis(n1)
    B = integrand.axis(n2)
    B = {k: v[None, :] for k, v in B.items()}
    step = max(1, BLOCK // max(1, n2.size))
    parts = []
    for i in range(0, n1.size, step):
        sl = slice(i, i + step)
        Ai = {k: v[sl, None] for k, v in A.items()}
        vals = integrand.values(Ai, B)
        parts.append(np.sum((w1[sl, None] * vals) * w2[None, :]))
    return float(np.sum(parts))


def integrate_rects(integrand: Integrand, rects, breaks, singular, q: QuadratureSpec,
                    level: int | None = None) -> QuadratureReport:
    """Adaptive (or fixed-level) tensor Gauss quadrature over a list of rectangles."""
    rects = [r for r in rects if r[1] > r[0] and r[3] > r[2]]
    if not rects:
        return QuadratureReport(0.0, [0.0], 0, 0)

    def estimate(k):
        total, count = [], 0
        for a1, b1, a2, b2 in rects:
            n1, w1 = axis_nodes(a1, b1, breaks[0], singular[0], k, q)
            n2, w2 = axis_nodes(a2, b2, breaks[1], singular[1], k, q)
            total.append(_block_sum(integrand, n1, w1, n2, w2))
            count += n1.size * n2.size
        return float(np.sum(total)), count

    if level is not None:
        v, count = estimate(level)
        return QuadratureReport(v, [v], level, count)
    estimates = []
    prev = None
    for k in range(q.max_levels + 1):
        v, count = estimate(k)
        estimates.append(v)
        if prev is not None and abs(v - prev) <= max(q.refinement_tol * abs(v), q.abs_tol):
            return QuadratureReport(v, estimates, k, count)
        prev = v
    raise ConvergenceError("quadrature did not converge", estimates)


# -- integrands -------------------------------------------------------------

def _masked_density(phi_vals, t1, t2):
    nz = phi_vals != 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = liouville_density(t1, t2)
    return np.where(nz, phi_vals * np.where(nz, rho, 0.0), 0.0)


class LiouvilleIntegrand(Integrand):
    def __init__(self, phi: TestFunction):
        self.phi = phi

    def values(self, A, B):
        return _masked_density(self.phi.fn(A["theta"], B["theta"]), A["theta"], B["theta"])


class SourcePullbackIntegrand(Integrand):
    """phi(h) dL(E h): the pullback integral written on the source side."""

    def __init__(self, phi: TestFunction, E: EarthquakeMap):
        self.phi, self.E = phi, E

    def axis(self, theta):
        e, de = self.E.evaluate(theta, derivative=True)
        return {"theta": theta, "e": e, "de": de}

    def values(self, A, B):
        v = self.phi.fn(A["theta"], B["theta"])
        return _masked_density(v, A["e"], B["e"]) * A["de"] * B["de"]


class DirectPullbackIntegrand(Integrand):
    """phi(E^-1 h) dL(h) on the image side."""

    def __init__(self, phi: TestFunction, E: EarthquakeMap):
        self.phi, self.Einv = phi, E.inverse()

    def axis(self, theta):
        return {"theta": theta, "src": self.Einv.evaluate(theta)}

    def values(self, A, B):
        v = self.phi.fn(A["src"], B["src"])
        return _masked_density(v, A["theta"], B["theta"])


def _crossing(n1, d1, n2, d2):
    cross = (d1 * d2) < 0.0
    num = n1 * d2 + n2 * d1
    den = np.abs(n1 * d2 - n2 * d1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(cross, num / np.where(cross, den, 1.0), 0.0)


class KernelIntegrand(Integrand):
    """phi(h) * sum_j c_j X_j(h) dL(h), X_j the crossing cosine of leaf j.

    Each leaf is given by its far arc (start, end) counterclockwise, i.e.
    oriented with the base point on its left.
    """

    def __init__(self, phi: TestFunction, arcs, coeffs):
        self.phi, self.arcs, self.coeffs = phi, list(arcs), list(coeffs)

    def axis(self, theta):
        out = {"theta": theta}
        for j, (s, e) in enumerate(self.arcs):
            out[f"n{j}"], out[f"d{j}"] = arc_coordinates(theta, s, e)
        return out

    def values(self, A, B):
        v = self.phi.fn(A["theta"], B["theta"])
        k = 0.0
        for j, c in enumerate(self.coeffs):
            k = k + c * _crossing(A[f"n{j}"], A[f"d{j}"], B[f"n{j}"], B[f"d{j}"])
        return _masked_density(v, A["theta"], B["theta"]) * k


# -- regions -------------------------------------------------------------------

def _intersect(a, b, s, e):
    """Pieces of [a, b] inside the arc (s, e) taken mod 2 pi."""
    length = (e - s) % TWO_PI or TWO_PI
    out = []
    for k in (-2, -1, 0, 1, 2):
        lo, hi = max(a, s + k * TWO_PI), min(b, s + length + k * TWO_PI)
        if hi > lo:
            out.append((lo, hi))
    return out


def _subtract(a, b, pieces):
    out, cur = [], a
    for lo, hi in sorted(pieces):
        if lo > cur:
            out.append((cur, lo))
        cur = max(cur, hi)
    if b > cur:
        out.append((cur, b))
    return out


def arc_regions(rects, s, e):
    """Sub-rectangles of the support where at least one endpoint lies in the arc (s, e)."""
    out = []
    for a1, b1, a2, b2 in rects:
        in1 = _intersect(a1, b1, s, e)
        for lo, hi in in1:
            out.append((lo, hi, a2, b2))
        for lo, hi in _subtract(a1, b1, in1):
            for lo2, hi2 in _intersect(a2, b2, s, e):
                out.append((lo, hi, lo2, hi2))
    return out


def _breaks_for(phi, extra=()):
    b = tuple(extra)
    return (b + tuple(phi.singular[0]), b + tuple(phi.singular[1]))


# -- public operations ----------------------------------------------------------

def liouville_integral(phi: TestFunction, q: QuadratureSpec = QuadratureSpec(),
                       report: bool = False):
    r = integrate_rects(LiouvilleIntegrand(phi), phi.rects, _breaks_for(phi), phi.singular, q)
    return r if report else r.value


def pullback_integral(phi: TestFunction, E: EarthquakeMap, q: QuadratureSpec = QuadratureSpec(),
                      route: str = "source", level: int | None = None, report: bool = False):
    """int phi o E^-1 dL.

    ``source`` integrates phi(h) dL(E h) over phi's support, where E is smooth
    between its vertices; ``direct`` integrates phi(E^-1 h) dL(h) over the
    image rectangles.
    """
    bp = tuple(E.breakpoints)
    if route == "source":
        r = integrate_rects(SourcePullbackIntegrand(phi, E), phi.rects, _breaks_for(phi, bp),
                            phi.singular, q, level)
    elif route == "direct":
        def image(a, b):
            ia, ib = (float(x) for x in E.evaluate(np.array([a, b])))
            while ib <= ia:
                ib += TWO_PI
            return ia, ib
        rects = [(*image(r[0], r[1]), *image(r[2], r[3])) for r in phi.rects]
        ibp = tuple(E.evaluate(np.array(bp))) if bp else ()
        sing = tuple(tuple(E.evaluate(np.array(s))) if s else () for s in phi.singular)
        r = integrate_rects(DirectPullbackIntegrand(phi, E), rects,
                            (ibp + sing[0], ibp + sing[1]), sing, q, level)
    else:
        raise ValueError(f"unknown route {route!r}")
    return r if report else r.value


def leaf_arc(g: Geodesic, base: HPoint = OMEGA) -> tuple[float, float, float]:
    """(start, end, sign): the far arc of g and +1 if base is left of g, else -1."""
    s = side_of(g, base)
    if s == 0:
        raise ValueError(f"base point lies on {g}")
    t0, t1 = g.angles
    return (t0, t1, 1.0) if s > 0 else (t1, t0, -1.0)


def kernel_geodesic(phi: TestFunction, g: Geodesic, q: QuadratureSpec = QuadratureSpec(),
                    base: HPoint = OMEGA, report: bool = False):
    """C0(phi, g) = int phi(h) cos(g, h) dL(h), the derivative of the E_g^a pullback."""
    s, e, sign = leaf_arc(g, base)
    integrand = KernelIntegrand(phi, [(s, e)], [sign])
    r = integrate_rects(integrand, arc_regions(phi.rects, s, e), _breaks_for(phi, (s, e)),
                        phi.singular, q)
    return r if report else r.value


def kernel_triangle(phi: TestFunction, T: IdealTriangle, q: QuadratureSpec = QuadratureSpec(),
                    report: bool = False):
    """C0(phi, T) with kernel cos(g3, h) - cos(g1, h) - cos(g2, h), one quadrature."""
    if T.tree_depth == 0:
        raise ValueError("the base triangle has no kernel")
    lo, mid, hi = T.angles
    integrand = KernelIntegrand(phi, [(lo, hi), (lo, mid), (mid, hi)], [1.0, -1.0, -1.0])
    r = integrate_rects(integrand, arc_regions(phi.rects, lo, hi),
                        _breaks_for(phi, (lo, mid, hi)), phi.singular, q)
    return r if report else r.value


def kernel_triangle_split(phi, T, q=QuadratureSpec(), base=OMEGA) -> float:
    """Same quantity as three separate leaf kernels (independent check)."""
    g1, g2, g3 = T.sides
    return (kernel_geodesic(phi, g3, q, base) - kernel_geodesic(phi, g1, q, base)
            - kernel_geodesic(phi, g2, q, base))


# -- finite differences --------------------------------------------------------

def fd_derivative(f, t0: float, steps) -> tuple[float, float]:
    """Central differences on a step ladder, Richardson-extrapolated in h^2."""
    steps = sorted((float(h) for h in steps), reverse=True)
    if not steps or min(steps) <= 0:
        raise ValueError("steps must be positive")
    row = [(f(t0 + h) - f(t0 - h)) / (2 * h) for h in steps]
    table = [row]
    for j in range(1, len(steps)):
        prev = table[-1]
        new = []
        for i in range(len(prev) - 1):
            r = (steps[i] / steps[i + j]) ** 2
            new.append(prev[i + 1] + (prev[i + 1] - prev[i]) / (r - 1.0))
        table.append(new)
    value = table[-1][-1]
    if len(steps) == 1:
        return value, float("nan")
    if len(steps) >= 3:
        diffs = [abs(b - a) for a, b in zip(row[:-1], row[1:])]
        if any(d2 > d1 * 1.0000001 and d1 > 1e-14 * abs(value) for d1, d2 in zip(diffs, diffs[1:])):
            warnings.warn("finite-difference ladder is not converging", FDLadderWarning)
    err = abs(table[-1][-1] - table[-2][-1])
    return value, err


def pullback_fd(phi: TestFunction, make_map, steps=(0.02, 0.01, 0.005),
                q: QuadratureSpec = QuadratureSpec(), fd_tol: float = 1e-8,
                route: str = "source") -> tuple[float, float]:
    """d/dt at 0 of int phi o E_t^-1 dL on a frozen mesh.

    The factor supports, hence the breakpoints, do not depend on t; the
    mesh level is fixed by refining until the central difference at the
    largest step settles, and every step is then evaluated on that mesh.
    """
    h = max(steps)
    prev = None
    level = q.max_levels
    for k in range(q.max_levels + 1):
        d = (pullback_integral(phi, make_map(h), q, route, level=k)
             - pullback_integral(phi, make_map(-h), q, route, level=k)) / (2 * h)
        if prev is not None and abs(d - prev) <= max(fd_tol * abs(d), q.abs_tol / h):
            level = k
            break
        prev = d
    else:
        raise ConvergenceError("finite-difference mesh did not settle", [prev, d])
    return fd_derivative(lambda t: pullback_integral(phi, make_map(t), q, route, level=level),
                         0.0, steps)


def elementary_fd(phi, g, q=QuadratureSpec(), base=OMEGA, steps=(0.02, 0.01, 0.005)):
    return pullback_fd(phi, lambda a: elementary(g, a, base), steps, q)


def triangle_fd(phi, T, q=QuadratureSpec(), base=OMEGA, steps=(0.02, 0.01, 0.005)):
    return pullback_fd(phi, lambda a: triangle_factor(T, a, base), steps, q)


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("LIOUVILLE_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """map over items, threaded up to LIOUVILLE_THREADS; order of results is preserved."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


__all__ = [
    "ConvergenceError", "FDLadderWarning", "QuadratureReport", "QuadratureSpec",
    "elementary_fd", "fd_derivative", "kernel_geodesic", "kernel_triangle",
    "kernel_triangle_split", "liouville_integral", "parallel_map", "pullback_fd",
    "pullback_integral", "triangle_fd",
]
