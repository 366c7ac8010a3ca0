"""Command-line front end.

    liouville integrate --phi crossing-mass --ell 1
    liouville kernel --phi bump --leaf 0,inf --fd
    liouville series --cocycle dirac:0/1,1/1 --n 10
    liouville verify-lemma --lemma elemshear
    liouville verify-theorem --cocycle depth_decay:1,0.5 --n 8
    liouville decay-scan --radius 8
    liouville boundary-scan --cocycle depth_decay:1,0.5

Every run writes <output>/<command>.json (config, config hash, timestamp,
results and tolerance checks) plus CSV tables and a plotting script.
Exit status: 0 success, 1 usage or config error, 2 tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

from .cocycle import cocycle_from_spec
from .farey import FareyLamination, HALF_LOG3
from .functions import test_function_from_spec
from .quadrature import (
    QuadratureSpec,
    elementary_fd,
    kernel_geodesic,
    kernel_triangle,
    liouville_integral,
    triangle_fd,
)
from . import series as ts

COMMANDS = ("integrate", "kernel", "series", "verify-lemma", "verify-theorem",
            "decay-scan", "boundary-scan")
LEMMAS = ("elemshear", "triangle", "dercomshear")
CROSSING_MASS_TOL = 1e-7


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    test_function: object = "bump"
    cocycle: object = "depth_decay:1,0.5"
    n: float = 6.0
    radius: float = 8.0
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    fd_steps: list = field(default_factory=lambda: list(ts.DEFAULT_STEPS))
    output_path: str = "runs"
    seed: int = 0
    lemma: str = "elemshear"
    leaf: str = "0,inf"
    triangle: str = "0,1"
    ell: float | None = None
    eps: float | None = None
    fd: bool = False
    tolerance: float | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown command {self.command!r}")
        if self.lemma not in LEMMAS:
            raise ConfigError(f"lemma: expected one of {LEMMAS}, got {self.lemma!r}")
        for name in ("n", "radius", "ell", "eps", "tolerance"):
            v = getattr(self, name)
            if v is None and name not in ("n", "radius"):
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{name}: expected a finite number, got {v!r}")
            if v < 0 or (v == 0 and name in ("ell", "eps", "tolerance")):
                raise ConfigError(f"{name}: out of range ({v!r})")
        steps = self.fd_steps
        try:
            ok = (len(steps) > 0 and all(0 < float(h) < 1 for h in steps)
                  and all(a > b for a, b in zip(steps, steps[1:])))
        except (TypeError, ValueError):
            ok = False
        if not ok:
            raise ConfigError("fd_steps: need a strictly decreasing list of steps in (0, 1)")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed: expected an integer, got {self.seed!r}")
        try:
            self.phi()
        except (ValueError, KeyError, TypeError) as e:
            raise ConfigError(f"test_function: {e}") from e
        try:
            self.sdot()
        except (ValueError, KeyError, TypeError, IndexError) as e:
            raise ConfigError(f"cocycle: {e}") from e
        try:
            os.makedirs(self.output_path, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"output_path: {e}") from e
        if not os.access(self.output_path, os.W_OK):
            raise ConfigError(f"output_path: {self.output_path} is not writable")

    def phi(self):
        spec = self.test_function
        if isinstance(spec, str) and spec.strip().startswith("{"):
            spec = json.loads(spec)
        if isinstance(spec, str):
            spec = {"kind": spec}
        spec = dict(spec)
        if self.ell is not None:
            spec["ell"] = self.ell
        if self.eps is not None:
            spec["eps"] = self.eps
        return test_function_from_spec(spec)

    def sdot(self):
        spec = self.cocycle
        if isinstance(spec, dict) and spec.get("kind") == "seeded" and "seed" not in spec:
            spec = {**spec, "seed": self.seed}
        return cocycle_from_spec(spec)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["quadrature"] = asdict(self.quadrature)
        return d

    def config_hash(self) -> str:
        d = self.to_dict()
        d.pop("output_path")
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _fraction_pair(text: str, what: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"{what}: expected two endpoints 'a,b', got {text!r}")
    return parts


@dataclass
class Check:
    name: str
    measured: float
    bound: float
    passed: bool


class Run:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.results: dict = {}
        self.checks: list[Check] = []
        self.tables: dict = {}  # name -> (header, rows)

    def check(self, name, measured, bound, passed=None):
        measured = float(measured)
        if passed is None:
            passed = measured <= bound
        self.checks.append(Check(name, measured, float(bound), bool(passed)))

    def write(self) -> dict:
        cfg = self.cfg
        report = {
            "command": cfg.command,
            "config": cfg.to_dict(),
            "config_hash": cfg.config_hash(),
            "results": self.results,
            "checks": [asdict(c) for c in self.checks],
            "status": "pass" if all(c.passed for c in self.checks) else "fail",
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        stem = os.path.join(cfg.output_path, cfg.command)
        with open(stem + ".json", "w") as fh:
            json.dump(_clean(report), fh, indent=2, sort_keys=True, default=_jsonable,
                      allow_nan=False)
            fh.write("\n")
        for name, (header, rows) in self.tables.items():
            path = f"{stem}_{name}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(rows)
            with open(f"{stem}_{name}_plot.py", "w") as fh:
                fh.write(_PLOT_SCRIPT.format(csv=os.path.basename(path), x=header[0],
                                             y=header[-1]))
        return report


def _jsonable(x):
    return str(x)


def _clean(x):
    """Strict JSON: non-finite floats become null."""
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


_PLOT_SCRIPT = """# plot {csv}: run with python3 next to the CSV (needs matplotlib)
import csv
import matplotlib.pyplot as plt

with open("{csv}") as fh:
    rows = list(csv.DictReader(fh))
x = [float(r["{x}"]) for r in rows]
y = [abs(float(r["{y}"])) for r in rows]
plt.semilogy(x, y, "o")
plt.xlabel("{x}")
plt.ylabel("|{y}|")
plt.savefig("{csv}".replace(".csv", ".png"), dpi=120)
"""


def _tol(cfg, default):
    return default if cfg.tolerance is None else cfg.tolerance


def cmd_integrate(run: Run) -> None:
    cfg = run.cfg
    phi = cfg.phi()
    q = cfg.quadrature
    if phi.name.startswith("crossing_mass") and q == QuadratureSpec():
        # the steep ramp makes 1e-10 self-consistency needlessly expensive
        q = dataclasses.replace(q, refinement_tol=CROSSING_MASS_TOL)
        run.results["refinement_tol"] = q.refinement_tol
    r = liouville_integral(phi, q, report=True)
    run.results.update(value=r.value, levels=r.levels, nodes=r.nodes, phi=phi.name)
    if phi.name.startswith("crossing_mass"):
        spec = cfg.test_function if isinstance(cfg.test_function, dict) else {}
        ell = cfg.ell if cfg.ell is not None else float(spec.get("ell", 1.0))
        expected = 4.0 * ell
        run.results["expected"] = expected
        run.check("crossing mass vs 4 ell", abs(r.value - expected) / expected, _tol(cfg, 1e-4))


def cmd_kernel(run: Run) -> None:
    cfg = run.cfg
    phi, lam, q = cfg.phi(), FareyLamination(), cfg.quadrature
    if cfg.triangle and cfg.leaf == "":
        a, b = _fraction_pair(cfg.triangle, "triangle")
        T = lam.triangle(a, b)
        val = kernel_triangle(phi, T, q)
        run.results.update(triangle=repr(T), D=T.D, u=T.u, value=val)
        if cfg.fd:
            fd, err = triangle_fd(phi, T, q, lam.base, tuple(cfg.fd_steps))
            _fd_check(run, val, fd, err, "kernel_triangle vs FD")
        return
    a, b = _fraction_pair(cfg.leaf, "leaf")
    g = lam.leaf(a, b).geodesic
    val = kernel_geodesic(phi, g, q, lam.base)
    run.results.update(leaf=[a, b], value=val)
    if cfg.fd:
        fd, err = elementary_fd(phi, g, q, lam.base, tuple(cfg.fd_steps))
        _fd_check(run, val, fd, err, "kernel_geodesic vs FD")


def _fd_check(run, val, fd, err, name, default=1e-4):
    gap = abs(val - fd) / max(abs(fd), ts.AGREEMENT_FLOOR)
    run.results.update(fd_value=fd, fd_error=err, agreement=gap)
    run.check(name, gap, _tol(run.cfg, default))


def _series_tables(run: Run, rep) -> None:
    run.tables["partial_sums"] = (
        ["n", "partial_sum", "boundary_term"],
        [[n, s, dict(rep.boundary_terms).get(n, "")] for n, s in rep.partial_sums])
    run.tables["decay"] = (
        ["D", "abs_u", "sdot", "C0", "ratio"],
        [[r["D"], r["abs_u"], r["sdot"], r["C0"], r["ratio"]] for r in rep.decay_table])


def _report_fields(rep) -> dict:
    d = rep.to_dict()
    d.pop("decay_table")
    return d


def cmd_series(run: Run) -> None:
    cfg = run.cfg
    phi, sdot, lam = cfg.phi(), cfg.sdot(), FareyLamination()
    rep = ts.tangent_series_value(phi, sdot, cfg.n, cfg.quadrature, lam)
    run.results.update(_report_fields(rep))
    _series_tables(run, rep)
    for (n0, s0), (_, s1) in zip(rep.partial_sums[:-1], rep.partial_sums[1:]):
        if n0 >= 4 and n0 in rep.tail_bounds:
            run.check(f"Cauchy |S_{{n+2}} - S_n| at n={n0:g}", abs(s1 - s0), rep.tail_bounds[n0])
    spec = sdot.spec
    if spec.get("kind") == "dirac":
        a, b = spec["leaf"]
        g = lam.leaf(a, b).geodesic
        kg = kernel_geodesic(phi, g, cfg.quadrature, lam.base)
        s_n = rep.partial_sums[-1][1]
        gap = abs(s_n - kg) / max(abs(kg), ts.AGREEMENT_FLOOR)
        run.results.update(kernel_geodesic=kg, telescoping_gap=gap)
        run.check("telescoping S_n vs kernel_geodesic", gap, _tol(cfg, 1e-3))


def cmd_verify_lemma(run: Run) -> None:
    cfg = run.cfg
    if cfg.lemma == "elemshear":
        cfg.fd = True
        cfg.triangle = ""
        cmd_kernel(run)
    elif cfg.lemma == "triangle":
        cfg.fd = True
        cfg.leaf = ""
        cmd_kernel(run)
    else:
        lam = FareyLamination()
        fam = lam.spanning_family(cfg.n)
        rep = ts.verify_finite_truncation(cfg.phi(), cfg.sdot(), fam, tuple(cfg.fd_steps),
                                          cfg.quadrature, lam)
        run.results.update(_report_fields(rep), family_size=len(fam.members))
        run.check("finite truncation identity", rep.agreement, _tol(cfg, 1e-3))


def cmd_verify_theorem(run: Run) -> None:
    cfg = run.cfg
    if cfg.n < 4:
        raise ConfigError("n: verify-theorem needs n >= 4")
    ladder = sorted({m for m in (4.0, 6.0, 8.0) if m <= cfg.n} | {float(cfg.n)})
    rep = ts.verify_main_theorem(cfg.phi(), cfg.sdot(), cfg.n, tuple(cfg.fd_steps),
                                 cfg.quadrature, FareyLamination(), boundary_ladder=ladder)
    run.results.update(_report_fields(rep))
    _series_tables(run, rep)
    B = dict(rep.boundary_terms)[cfg.n]
    run.check("FD vs S_n + B_n", rep.agreement, _tol(cfg, 1e-3))
    run.check("|B_n| / |FD|", abs(B) / max(abs(rep.fd_value), ts.AGREEMENT_FLOOR), 0.1)
    sums = dict(rep.partial_sums)
    n0 = cfg.n - 2
    if n0 in sums and n0 in rep.tail_bounds:
        run.check(f"Cauchy |S_n - S_{{n-2}}| at n={cfg.n:g}", abs(sums[cfg.n] - sums[n0]),
                  rep.tail_bounds[n0])


def cmd_decay_scan(run: Run) -> None:
    cfg = run.cfg
    phi, lam = cfg.phi(), FareyLamination()
    cache = ts.kernel_cache(phi, cfg.quadrature)
    V = [T for T in lam.enumerate(cfg.radius) if cache.touches(T)]
    cache.fill(V)
    rows = [[T.D, abs(T.u), T.center_dist, cache.triangle(T),
             ts.decay_ratio(phi, T, cache.triangle(T))] for T in V]
    run.tables["decay"] = (["D", "abs_u", "center_dist", "C0", "ratio"], rows)
    half = cfg.radius / 2
    inner = max((r[4] for r in rows if r[0] < half), default=0.0)
    outer = max((r[4] for r in rows if r[0] >= half), default=0.0)
    est = [abs(T.center_dist - T.D - abs(T.u)) for T in lam.enumerate(cfg.radius)]
    run.results.update(triangles=len(V), inner_max=inner, outer_max=outer,
                       shell_ratio=outer / inner if inner else math.inf,
                       max_center_defect=max(est, default=0.0), nu=phi.nu)
    run.check("outer/inner decay ratio", outer / inner if inner else math.inf, 10.0)
    run.check("|d(O,O_T) - D_T - |u_T||", max(est, default=0.0), HALF_LOG3 + math.log(2.0))


def cmd_boundary_scan(run: Run) -> None:
    cfg = run.cfg
    phi, sdot, lam = cfg.phi(), cfg.sdot(), FareyLamination()
    ns = [4.0, 6.0, 8.0]
    terms = [(n, ts.boundary_term(phi, sdot, n, cfg.quadrature, lam)) for n in ns]
    run.tables["boundary"] = (["n", "B_n"], [list(t) for t in terms])
    mags = [abs(b) for _, b in terms]
    decreasing = all(x > y for x, y in zip(mags, mags[1:]))
    slope = ts.boundary_decay_slope(terms) if all(mags) else -math.inf
    run.results.update(boundary_terms=terms, log_slope=slope, nu=phi.nu)
    run.check("boundary terms strictly decreasing", float(not decreasing), 0.0, decreasing)
    run.check("log-slope of |B_n|", slope, -0.5 * phi.nu)


HANDLERS = {
    "integrate": cmd_integrate, "kernel": cmd_kernel, "series": cmd_series,
    "verify-lemma": cmd_verify_lemma, "verify-theorem": cmd_verify_theorem,
    "decay-scan": cmd_decay_scan, "boundary-scan": cmd_boundary_scan,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="liouville", description="Liouville current under shear: experiments")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with RunConfig fields")
        s.add_argument("--phi", dest="test_function", help="test function name or JSON spec")
        s.add_argument("--cocycle", help="cocycle spec, e.g. dirac:0/1,1/1 or depth_decay:1,0.5")
        s.add_argument("--n", type=float)
        s.add_argument("--radius", type=float)
        s.add_argument("--ell", type=float)
        s.add_argument("--eps", type=float)
        s.add_argument("--leaf", help="leaf endpoints, e.g. 0,inf")
        s.add_argument("--triangle", help="facing-side endpoints of a triangle, e.g. 0,1")
        s.add_argument("--lemma", choices=LEMMAS)
        s.add_argument("--fd", action="store_true", default=None)
        s.add_argument("--fd-steps", dest="fd_steps", type=float, nargs="+")
        s.add_argument("--seed", type=int)
        s.add_argument("--tolerance", type=float)
        s.add_argument("--output", dest="output_path")
        s.add_argument("--refinement-tol", dest="refinement_tol", type=float)
    return p


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}
_QFIELDS = {f.name for f in dataclasses.fields(QuadratureSpec)}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"config: cannot read {args.config}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
    for k in data:
        if k not in _FIELDS:
            raise ConfigError(f"{k}: unknown config field")
    qdata = data.pop("quadrature", {}) or {}
    for k in qdata:
        if k not in _QFIELDS:
            raise ConfigError(f"quadrature.{k}: unknown quadrature field")
    if args.refinement_tol is not None:
        qdata["refinement_tol"] = args.refinement_tol
    try:
        q = QuadratureSpec(**qdata)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"quadrature: {e}") from e
    data["command"] = args.command
    for k, v in vars(args).items():
        if k in _FIELDS and k != "command" and v is not None:
            data[k] = v
    try:
        cfg = RunConfig(quadrature=q, **data)
    except TypeError as e:
        raise ConfigError(f"config: {e}") from e
    if cfg.command == "integrate" and cfg.test_function == "bump" and cfg.ell is not None:
        cfg.test_function = "crossing-mass"
    if cfg.command == "kernel" and args.triangle is not None and args.leaf is None:
        cfg.leaf = ""
    return cfg


def run(cfg: RunConfig) -> int:
    cfg.validate()
    r = Run(cfg)
    HANDLERS[cfg.command](r)
    report = r.write()
    for c in r.checks:
        mark = "ok  " if c.passed else "FAIL"
        print(f"{mark} {c.name}: measured {c.measured:.3e}, bound {c.bound:.3e}"
              f" [config {report['config_hash']}]")
    print(json.dumps(_clean({k: v for k, v in r.results.items()
                             if not isinstance(v, (list, dict))}),
                     sort_keys=True, default=_jsonable))
    return 0 if report["status"] == "pass" else 2


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run(cfg)
    except ConfigError as e:
        print(f"liouville: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
