"""Transverse cocycles on the Farey lamination as per-leaf weights."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .farey import FareyLamination, IdealTriangle, Leaf, canonical_leaf_key, label_str


@dataclass(frozen=True)
class TransverseCocycle:
    """Signed weights on Farey leaves; ``bound`` is the declared sup |weight|."""

    weight_fn: Callable[[Leaf], float] = field(repr=False)
    bound: float
    label: str = "cocycle"
    spec: dict = field(default_factory=dict, compare=False, repr=False)

    def weight(self, leaf: Leaf) -> float:
        w = float(self.weight_fn(leaf))
        if abs(w) > self.bound * (1 + 1e-12):
            raise ValueError(f"{self.label}: weight {w} on {leaf} exceeds bound {self.bound}")
        return w

    def __add__(self, other: "TransverseCocycle") -> "TransverseCocycle":
        return combine([(1.0, self), (1.0, other)])

    def scaled(self, s: float) -> "TransverseCocycle":
        return combine([(s, self)])


def combine(terms) -> TransverseCocycle:
    """Linear combination sum_i a_i c_i."""
    terms = [(float(a), c) for a, c in terms]

    def w(leaf):
        return sum(a * c.weight_fn(leaf) for a, c in terms)
    bound = sum(abs(a) * c.bound for a, c in terms)
    label = " + ".join(f"{a:g}*{c.label}" for a, c in terms)
    return TransverseCocycle(w, bound, label)


def zero_cocycle() -> TransverseCocycle:
    return TransverseCocycle(lambda leaf: 0.0, 0.0, "zero", {"kind": "zero"})


def constant_cocycle(value: float = 1.0) -> TransverseCocycle:
    return TransverseCocycle(lambda leaf: value, abs(value), f"constant({value:g})",
                             {"kind": "constant", "value": value})


def make_dirac(g: Leaf) -> TransverseCocycle:
    key = g.key

    def w(leaf):
        return 1.0 if leaf.key == key else 0.0
    name = f"dirac({label_str(key[0])},{label_str(key[1])})"
    return TransverseCocycle(w, 1.0, name, {"kind": "dirac", "leaf": [label_str(k) for k in key]})


def make_depth_decay(base: float, ratio: float) -> TransverseCocycle:
    """weight = base * ratio**depth, the sides of T_O having depth 0."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")

    def w(leaf):
        return base * ratio ** leaf.depth
    return TransverseCocycle(w, abs(base), f"depth_decay({base:g},{ratio:g})",
                             {"kind": "depth_decay", "base": base, "ratio": ratio})


def _unit_hash(seed: int, key) -> float:
    msg = f"{seed}:{key[0][0]}/{key[0][1]}:{key[1][0]}/{key[1][1]}".encode()
    h = hashlib.blake2b(msg, digest_size=8).digest()
    return int.from_bytes(h, "little") / 2.0**64


def make_seeded_bounded(seed: int, bound: float) -> TransverseCocycle:
    """Deterministic pseudo-random weights in [-bound, bound] keyed by the leaf's fractions."""
    if not bound > 0.0:
        raise ValueError(f"bound must be positive, got {bound}")

    def w(leaf):
        return bound * (2.0 * _unit_hash(seed, leaf.key) - 1.0)
    return TransverseCocycle(w, bound, f"seeded({seed},{bound:g})",
                             {"kind": "seeded", "seed": seed, "bound": bound})


def alpha(c: TransverseCocycle, T: IdealTriangle) -> float:
    """Sum of weights of the leaves separating O from T (root side first)."""
    chain = [T, *T.ancestors()]
    total = 0.0
    for S in reversed(chain):
        total = total + c.weight(S.facing_leaf)
    return total


def alpha_map(c: TransverseCocycle, triangles) -> dict:
    """alpha for a collection closed under ancestors, by path recursion."""
    out = {}
    for T in sorted(triangles, key=lambda S: S.tree_depth):
        base = 0.0 if T.parent is None else out.get(T.parent.key)
        if base is None:
            base = alpha(c, T.parent)
        out[T.key] = base + c.weight(T.facing_leaf)
    return out


@dataclass
class GrowthReport:
    rows: list  # (triangle, alpha, tree_depth, D)
    slope: float
    max_ratio: float
    bound: float

    @property
    def linear(self) -> bool:
        return self.max_ratio <= self.bound * (1 + 1e-12)


def alpha_growth_report(c: TransverseCocycle, radius: float,
                        lamination: FareyLamination | None = None) -> GrowthReport:
    lam = lamination or FareyLamination()
    V = lam.enumerate(radius)
    amap = alpha_map(c, V)
    rows = [(T, amap[T.key], T.tree_depth, T.D) for T in V]
    if not rows:
        return GrowthReport([], 0.0, 0.0, c.bound)
    depth = np.array([r[2] for r in rows], dtype=float)
    mag = np.abs([r[1] for r in rows])
    slope = float(np.polyfit(depth, mag, 1)[0]) if np.ptp(depth) > 0 else 0.0
    return GrowthReport(rows, slope, float(np.max(mag / (1.0 + depth))), c.bound)


def _parse_fraction(s: str):
    s = s.strip()
    if s in ("inf", "oo", "1/0"):
        return math.inf
    if s == "-inf":
        return -math.inf
    from fractions import Fraction
    return Fraction(s)


def cocycle_from_spec(spec, lamination: FareyLamination | None = None) -> TransverseCocycle:
    """Build a cocycle from a JSON-like dict or the short form ``kind:args``.

    dict forms: {"kind": "dirac", "leaf": ["0/1", "1/1"]},
    {"kind": "depth_decay", "base": 1, "ratio": 0.5},
    {"kind": "seeded", "seed": 7, "bound": 0.3}, {"kind": "zero"},
    {"kind": "constant", "value": 1}.  Short forms: ``dirac:0/1,1/1``,
    ``depth_decay:1,0.5``, ``seeded:7,0.3``.
    """
    if isinstance(spec, str):
        spec = spec.strip()
        if spec.startswith("{"):
            spec = json.loads(spec)
        else:
            kind, _, args = spec.partition(":")
            parts = [a for a in args.split(",") if a]
            if kind == "dirac":
                spec = {"kind": kind, "leaf": parts}
            elif kind == "depth_decay":
                spec = {"kind": kind, "base": float(parts[0]), "ratio": float(parts[1])}
            elif kind == "seeded":
                spec = {"kind": kind, "seed": int(parts[0]), "bound": float(parts[1])}
            elif kind == "constant":
                spec = {"kind": kind, "value": float(parts[0]) if parts else 1.0}
            else:
                spec = {"kind": kind}
    kind = spec.get("kind")
    if kind == "dirac":
        lam = lamination or FareyLamination()
        a, b = (_parse_fraction(s) for s in spec["leaf"])
        return make_dirac(lam.leaf(a, b))
    if kind == "depth_decay":
        return make_depth_decay(float(spec.get("base", 1.0)), float(spec.get("ratio", 0.5)))
    if kind == "seeded":
        return make_seeded_bounded(int(spec.get("seed", 0)), float(spec.get("bound", 1.0)))
    if kind == "zero":
        return zero_cocycle()
    if kind == "constant":
        return constant_cocycle(float(spec.get("value", 1.0)))
    raise ValueError(f"unknown cocycle kind {kind!r}")


__all__ = [
    "TransverseCocycle", "alpha", "alpha_map", "alpha_growth_report", "canonical_leaf_key",
    "cocycle_from_spec", "combine", "constant_cocycle", "make_depth_decay", "make_dirac",
    "make_seeded_bounded", "zero_cocycle",
]
