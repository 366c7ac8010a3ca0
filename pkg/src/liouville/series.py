"""Tangent-map series for the first variation of the Liouville current.

For a cocycle direction sdot the derivative of t -> int phi d(E^{t sdot})_* L
is the series sum_T sdot(T) C0(phi, T) over all triangles T != T_O.  This
module evaluates its partial sums over V_n = {T : d(O, O_T) <= n}, the
boundary terms of the truncations E_{U_n}, and compares both against
finite differences of the truncated pullback integrals.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .cocycle import TransverseCocycle, alpha_map
from .earthquake import truncated_shear
from .farey import FareyLamination, IdealTriangle, SpanningFamily
from .functions import TestFunction
from .hyperbolic import HPoint, hyperbolic_distance
from .quadrature import (
    KernelIntegrand,
    QuadratureSpec,
    _breaks_for,
    arc_regions,
    integrate_rects,
    kernel_triangle,
    parallel_map,
    pullback_fd,
)

TAIL_SAFETY = 4.0
AGREEMENT_FLOOR = 1e-12
DEFAULT_STEPS = (0.02, 0.01, 0.005)


class SeriesError(ArithmeticError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass
class DerivativeReport:
    partial_sums: list = field(default_factory=list)  # (n, S_n)
    boundary_terms: list = field(default_factory=list)  # (n, B_n)
    tail_bound: float = float("nan")
    fd_value: float = float("nan")
    fd_error: float = float("nan")
    series_value: float = float("nan")
    agreement: float = float("nan")
    decay_table: list = field(default_factory=list)
    extrapolation: float = 0.0
    interior_sum: float = float("nan")
    tail_bounds: dict = field(default_factory=dict)
    decay_constant: float = float("nan")
    lamination_gap: float = float("nan")
    clearance: float = float("nan")  # r with B(O, r) off the lamination
    label: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tail_bounds"] = {str(k): v for k, v in self.tail_bounds.items()}
        return d

    def to_json(self, path=None) -> str:
        s = json.dumps(self.to_dict(), indent=2, sort_keys=True, default=float)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(s + "\n")
        return s

    def write_csv(self, decay_path=None, sums_path=None) -> None:
        if decay_path is not None:
            with open(decay_path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["triangle", "D", "abs_u", "sdot", "C0", "ratio"])
                for row in self.decay_table:
                    w.writerow([row["triangle"], row["D"], row["abs_u"], row["sdot"],
                                row["C0"], row["ratio"]])
        if sums_path is not None:
            with open(sums_path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["n", "partial_sum", "boundary_term"])
                bmap = dict(self.boundary_terms)
                for n, s in self.partial_sums:
                    w.writerow([n, s, bmap.get(n, "")])


class KernelCache:
    """Memoised C0(phi, T) and C0(phi, g3^U) for one (phi, quadrature) pair."""

    def __init__(self, phi: TestFunction, q: QuadratureSpec):
        self.phi, self.q = phi, q
        self.tri: dict = {}
        self.leaf: dict = {}

    def touches(self, T: IdealTriangle) -> bool:
        lo, _, hi = T.angles
        return bool(arc_regions(self.phi.rects, lo, hi))

    def triangle(self, T: IdealTriangle) -> float:
        v = self.tri.get(T.key)
        if v is None:
            v = kernel_triangle(self.phi, T, self.q) if self.touches(T) else 0.0
            self.tri[T.key] = v
        return v

    def facing(self, U: IdealTriangle) -> float:
        """C0(phi, g3^U) with g3 oriented so that O is on its left."""
        v = self.leaf.get(U.key)
        if v is None:
            lo, _, hi = U.angles
            regions = arc_regions(self.phi.rects, lo, hi)
            if regions:
                integrand = KernelIntegrand(self.phi, [(lo, hi)], [1.0])
                v = integrate_rects(integrand, regions, _breaks_for(self.phi, (lo, hi)),
                                    self.phi.singular, self.q).value
            else:
                v = 0.0
            self.leaf[U.key] = v
        return v

    def fill(self, triangles) -> None:
        todo = [T for T in triangles if T.key not in self.tri]
        for T, v in zip(todo, parallel_map(self.triangle, todo)):
            self.tri[T.key] = v


_CACHES: dict = {}


def kernel_cache(phi: TestFunction, q: QuadratureSpec) -> KernelCache:
    key = (id(phi), q)
    hit = _CACHES.get(key)
    if hit is None or hit.phi is not phi:
        hit = _CACHES[key] = KernelCache(phi, q)
    return hit


def _pairwise(values) -> float:
    return float(np.sum(np.asarray(values, dtype=float))) if len(values) else 0.0


def _ladder(n_max: float, ladder=None):
    if ladder is None:
        ladder = [n for n in range(2, int(math.floor(n_max)) + 1, 2)]
        if not ladder or ladder[-1] != n_max:
            ladder.append(n_max)
    return sorted(ladder)


def decay_ratio(phi: TestFunction, T: IdealTriangle, value: float) -> float:
    return abs(value) * math.exp((1 + phi.nu) * T.D + abs(T.u)) / phi.holder_norm_bound


def decay_weight(phi: TestFunction, T: IdealTriangle, sdot: float) -> float:
    return phi.holder_norm_bound * abs(sdot) * math.exp(-(1 + phi.nu) * T.D - abs(T.u))


def tangent_series_value(phi: TestFunction, sdot: TransverseCocycle, n_max: float,
                         q: QuadratureSpec = QuadratureSpec(),
                         lamination: FareyLamination | None = None, ladder=None,
                         tail: bool = True, strict: bool = False) -> DerivativeReport:
    """Partial sums S_n = sum over V_n of sdot(T) C0(phi, T), in topological order."""
    lam = lamination or FareyLamination()
    cache = kernel_cache(phi, q)
    ladder = _ladder(n_max, ladder)
    V = lam.enumerate(max(ladder))
    amap = alpha_map(sdot, V)
    active = [T for T in V if amap[T.key] != 0.0 and cache.touches(T)]
    cache.fill(active)
    terms = {T.key: amap[T.key] * cache.triangle(T) for T in active}
    rep = DerivativeReport(label=f"{phi.name} / {sdot.label}", clearance=lam.clearance())
    for n in ladder:
        rep.partial_sums.append((n, _pairwise([terms[T.key] for T in active if T.center_dist <= n])))
    rep.decay_table = [
        {"triangle": repr(T), "D": T.D, "abs_u": abs(T.u), "sdot": amap[T.key],
         "C0": cache.triangle(T), "ratio": decay_ratio(phi, T, cache.triangle(T))}
        for T in active
    ]
    sums = [s for _, s in rep.partial_sums]
    rep.series_value = sums[-1]
    if len(sums) >= 3:
        d1, d2 = sums[-2] - sums[-3], sums[-1] - sums[-2]
        if d1 != 0.0 and 0.0 < d2 / d1 < 1.0:
            r = d2 / d1
            rep.extrapolation = d2 * r / (1.0 - r)
            rep.series_value = sums[-1] + rep.extrapolation
    if tail and len(ladder) >= 2:
        _attach_tail_bounds(rep, phi, sdot, lam, ladder, cache, V, amap)
        if strict:
            for (n0, s0), (n1, s1) in zip(rep.partial_sums[:-1], rep.partial_sums[1:]):
                if n0 >= 6 and abs(s1 - s0) > rep.tail_bounds.get(n0, math.inf):
                    raise SeriesError(f"partial sums not Cauchy at n={n0}", rep)
    return rep


def _attach_tail_bounds(rep, phi, sdot, lam, ladder, cache, V, amap):
    """tail_bound(n) = safety * K * (weighted shells beyond n, continued geometrically).

    K is the largest decay ratio |C0| e^{(1+nu)D + |u|} / |phi|_nu seen on the
    outermost computed shell; the shell weights |sdot(T)| |phi|_nu e^{-(1+nu)D-|u|}
    only need the geometry of V_{n+4}, not further kernels.
    """
    n_top = ladder[-1]
    lo_shell = ladder[-2]
    ratios = [decay_ratio(phi, T, cache.triangle(T)) for T in V
              if lo_shell < T.center_dist <= n_top and T.key in cache.tri]
    K = max(ratios) if ratios else max((r["ratio"] for r in rep.decay_table), default=0.0)
    rep.decay_constant = K
    W = lam.enumerate(ladder[-2] + 4)
    amap_w = alpha_map(sdot, W)
    for n in ladder[:-1]:
        s_a = sum(decay_weight(phi, T, amap_w[T.key]) for T in W
                  if n < T.center_dist <= n + 2 and cache.touches(T))
        s_b = sum(decay_weight(phi, T, amap_w[T.key]) for T in W
                  if n + 2 < T.center_dist <= n + 4 and cache.touches(T))
        r = s_b / s_a if s_a > 0 else 0.0
        tail = s_a + (s_b / (1.0 - r) if r < 1.0 else math.inf)
        rep.tail_bounds[n] = TAIL_SAFETY * K * tail
    rep.tail_bound = rep.tail_bounds[ladder[-2]]


def boundary_term(phi: TestFunction, sdot: TransverseCocycle, n: float,
                  q: QuadratureSpec = QuadratureSpec(),
                  lamination: FareyLamination | None = None,
                  family: SpanningFamily | None = None) -> float:
    """B_n = sum over U in U_n of sdot(U) C0(phi, g3^U)."""
    lam = lamination or FareyLamination()
    fam = family or lam.spanning_family(n)
    cache = kernel_cache(phi, q)
    amap = alpha_map(sdot, list(fam.members) + fam.below())
    members = sorted(fam.members, key=lambda U: (U.tree_depth, U.angles[1]))
    return _pairwise([amap[U.key] * cache.facing(U) for U in members
                      if amap[U.key] != 0.0 and cache.touches(U)])


def _interior_sum(phi, sdot, family, q):
    cache = kernel_cache(phi, q)
    below = family.below()
    amap = alpha_map(sdot, below + list(family.members))
    active = [T for T in below if amap[T.key] != 0.0 and cache.touches(T)]
    cache.fill(active)
    return _pairwise([amap[T.key] * cache.triangle(T) for T in active]), amap


def truncated_pullback_fd(phi, sdot, family, t_steps=DEFAULT_STEPS, q=QuadratureSpec(),
                          base: HPoint | None = None, amap=None):
    """d/dt at 0 of int phi o (E_U^{t sdot})^-1 dL by frozen-mesh finite differences."""
    kw = {} if base is None else {"base": base}
    if amap is None:
        amap = alpha_map(sdot, family.below() + list(family.members))
    return pullback_fd(phi, lambda t: truncated_shear(sdot, family, t, alphas=amap, **kw),
                       t_steps, q)


def verify_finite_truncation(phi: TestFunction, sdot: TransverseCocycle, family: SpanningFamily,
                             t_steps=DEFAULT_STEPS, q: QuadratureSpec = QuadratureSpec(),
                             lamination: FareyLamination | None = None) -> DerivativeReport:
    """FD of the U-truncated pullback against sum_{T<U} sdot C0(T) + boundary term."""
    lam = lamination or FareyLamination()
    interior, amap = _interior_sum(phi, sdot, family, q)
    B = boundary_term(phi, sdot, family.radius, q, lam, family)
    fd, err = truncated_pullback_fd(phi, sdot, family, t_steps, q, lam.base, amap)
    rep = DerivativeReport(label=f"{phi.name} / {sdot.label} / U_{family.radius:g}",
                           clearance=lam.clearance())
    rep.boundary_terms = [(family.radius, B)]
    rep.interior_sum = interior
    rep.series_value = interior
    rep.fd_value, rep.fd_error = fd, err
    rep.agreement = abs(interior + B - fd) / max(abs(fd), AGREEMENT_FLOOR)
    return rep


def verify_main_theorem(phi: TestFunction, sdot: TransverseCocycle, n: float,
                        t_steps=DEFAULT_STEPS, q: QuadratureSpec = QuadratureSpec(),
                        lamination: FareyLamination | None = None, ladder=None,
                        boundary_ladder=None) -> DerivativeReport:
    """End-to-end check at truncation U_n.

    agreement compares S_n + B_n with the finite difference; the exact
    finite identity (interior sum over T < U_n plus B_n) is reported as
    lamination_gap, and the boundary terms along ``boundary_ladder`` show
    the decay that removes B_n in the limit.
    """
    if n < 4:
        raise ValueError("verify_main_theorem needs n >= 4")
    lam = lamination or FareyLamination()
    rep = tangent_series_value(phi, sdot, n, q, lam, ladder)
    fam = lam.spanning_family(n)
    interior, amap = _interior_sum(phi, sdot, fam, q)
    for m in boundary_ladder or [n]:
        rep.boundary_terms.append((m, boundary_term(phi, sdot, m, q, lam)))
    B = dict(rep.boundary_terms)[n]
    fd, err = truncated_pullback_fd(phi, sdot, fam, t_steps, q, lam.base, amap)
    S_n = dict(rep.partial_sums)[n]
    rep.fd_value, rep.fd_error = fd, err
    rep.interior_sum = interior
    rep.agreement = abs(S_n + B - fd) / max(abs(fd), AGREEMENT_FLOOR)
    rep.lamination_gap = abs(interior + B - fd) / max(abs(fd), AGREEMENT_FLOOR)
    return rep


def boundary_decay_slope(terms) -> float:
    """Least-squares slope of log|B_n| against n."""
    n = np.array([t[0] for t in terms], dtype=float)
    b = np.log(np.abs([t[1] for t in terms]))
    return float(np.polyfit(n, b, 1)[0])


def linearity_gap(phi, sdot1, sdot2, a, b, n, q=QuadratureSpec(), lamination=None) -> float:
    """|S_n(a s1 + b s2) - a S_n(s1) - b S_n(s2)| at fixed truncation."""
    from .cocycle import combine
    lam = lamination or FareyLamination()
    s = lambda c: tangent_series_value(phi, c, n, q, lam, [n], tail=False).partial_sums[-1][1]  # noqa: E731
    return abs(s(combine([(a, sdot1), (b, sdot2)])) - a * s(sdot1) - b * s(sdot2))


def move_point(p: HPoint, eps: float, direction: float = 0.0) -> HPoint:
    """Point at hyperbolic distance eps from p in the given direction."""
    # geodesic through p with unit speed: i e^s moved by the isometry z -> y z + x
    w = complex(math.tanh(eps / 2) * math.cos(direction), math.tanh(eps / 2) * math.sin(direction))
    z = 1j * (1 + w) / (1 - w)  # disk point w around i, pulled back to H
    return HPoint(p.x + p.y * z.real, p.y * z.imag)


def base_point_continuity(phi, sdot, n, eps=0.01, q=QuadratureSpec(), direction=0.7):
    """(ratio |S_n(O') - S_n(O)| / eps, S_n(O), S_n(O')) with d(O, O') = eps."""
    lam0 = FareyLamination()
    O2 = move_point(lam0.base, eps, direction)
    d = hyperbolic_distance(lam0.base, O2)
    lam1 = FareyLamination(O2)
    s0 = tangent_series_value(phi, sdot, n, q, lam0, [n], tail=False).partial_sums[-1][1]
    s1 = tangent_series_value(phi, sdot, n, q, lam1, [n], tail=False).partial_sums[-1][1]
    return abs(s1 - s0) / d, s0, s1
