"""Command-line runner: one command per estimator or check, CSV or JSON-lines out.

Exit status: 0 success, 1 usage or parameter error, 2 runtime failure,
3 a bound or oracle check came back false.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Callable, Optional, Sequence

import mpmath

from . import __version__
from .errors import ContractError, ParameterRangeError, ResourceError

log = logging.getLogger("lcsfluct")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_CHECK = 0, 1, 2, 3
SEED_ENV, WORKERS_ENV = "LCSFLUCT_SEED", "LCSFLUCT_WORKERS"


class UsageError(Exception):
    pass


@dataclass
class ExperimentSpec:
    command: str
    params: dict = field(default_factory=dict)


@dataclass
class Result:
    rows: list[dict]
    failed: bool = False
    text: Optional[str] = None


# -- formatting -------------------------------------------------------------

def fmt(value) -> object:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}" if value.denominator != 1 else str(value.numerator)
    if isinstance(value, (tuple, list)):
        return json.dumps([fmt(v) for v in value])
    if value is None:
        return ""
    if isinstance(value, mpmath.mpf):
        return mpmath.nstr(value, 17)
    return value


def _json_value(value):
    # finite floats stay JSON numbers: their repr already round-trips exactly
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, float) and math.isfinite(value):
        return value
    return fmt(value)


def render(rows: Sequence[dict], fmt_name: str) -> str:
    buf = io.StringIO()
    if fmt_name == "jsonl":
        for r in rows:
            buf.write(json.dumps({k: _json_value(v) for k, v in r.items()}) + "\n")
        return buf.getvalue()
    cols: list[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: fmt(v) for k, v in r.items()})
    return buf.getvalue()


# -- validation -------------------------------------------------------------

def _need(cond: bool, name: str, legal: str, value) -> None:
    if not cond:
        raise ParameterRangeError(f"--{name} must be {legal}, got {value}")


def _check_n(n: int) -> None:
    _need(n >= 1, "n", "a positive integer", n)


def _check_eps(eps: float, open_left: bool = False) -> None:
    if open_left:
        _need(0 < eps <= 0.5, "eps", "in (0, 0.5]", eps)
    else:
        _need(0 <= eps <= 0.5, "eps", "in [0, 0.5]", eps)


def _check_replicas(r: int, least: int) -> None:
    _need(r >= least, "replicas", f">= {least}", r)


# -- commands ---------------------------------------------------------------

def _report_row(rep) -> dict:
    row = {"n": rep.n, "eps": rep.eps, "replicas": rep.replicas, "seed": rep.master_seed,
           "estimate": rep.estimate, "stderr": rep.stderr, "ci95_low": rep.ci95[0], "ci95_high": rep.ci95[1]}
    row.update(rep.extra)
    return row


def cmd_gamma(a) -> Result:
    from .mc_estimators import estimate_gamma
    _check_n(a.n), _check_eps(a.eps), _check_replicas(a.replicas, 2)
    return Result([_report_row(estimate_gamma(a.n, a.eps, a.replicas, a.seed, a.workers))])


def cmd_variance(a) -> Result:
    from .mc_estimators import estimate_variance
    _check_n(a.n), _check_eps(a.eps), _check_replicas(a.replicas, 30)
    return Result([_report_row(estimate_variance(a.n, a.eps, a.replicas, a.seed, a.workers))])


def cmd_variance_scan(a) -> Result:
    from .mc_estimators import variance_scan
    for n in a.ns:
        _check_n(n)
    _check_eps(a.eps), _check_replicas(a.replicas, 30)
    rows = []
    for rep in variance_scan(a.ns, a.eps, a.replicas, a.seed, a.workers):
        row = _report_row(rep)
        row["variance_over_n"] = rep.estimate / rep.n
        rows.append(row)
    return Result(rows)


def cmd_drift(a) -> Result:
    from .mc_estimators import drift_fixed_pair, estimate_drift
    if a.x is not None or a.y is not None:
        if a.x is None or a.y is None:
            raise ParameterRangeError("--x and --y must be given together")
        rep = drift_fixed_pair(a.x, a.y)
    else:
        _check_n(a.n), _check_eps(a.eps, open_left=True), _check_replicas(a.replicas, 1)
        rep = estimate_drift(a.n, a.eps, a.replicas, a.seed, a.workers)
    row = {k: getattr(rep, k) for k in ("n", "eps", "replicas", "excluded", "master_seed", "p_plus", "p_zero",
                                        "p_minus", "stderr_plus", "stderr_zero", "stderr_minus", "difference",
                                        "stderr_difference", "z_score")}
    row.update({"p_plus_exact": rep.exact[0], "p_zero_exact": rep.exact[1], "p_minus_exact": rep.exact[2]})
    return Result([row])


def cmd_chain(a) -> Result:
    from .perturbation import build_chain
    _check_n(a.n)
    ch = build_chain(a.n, a.seed, store_pairs=False)
    return Result([{"k": k, "L": ch.l_traj[k],
                    "flip_side": ch.flips[k][0] if ch.flips[k] else None,
                    "flip_pos": ch.flips[k][1] if ch.flips[k] else None}
                   for k in range(2 * a.n, -1, -1)])


def cmd_slope(a) -> Result:
    from .mc_estimators import slope_scan
    _check_n(a.n), _check_eps(a.eps, open_left=True), _check_replicas(a.replicas, 1)
    out = slope_scan(a.n, a.eps, a.replicas, a.seed, a.workers)
    rows = []
    for r, rep in enumerate(out["reports"]):
        rows.append({"replica": r, "n": rep.n, "eps": rep.eps, "interval_low": rep.interval[0],
                     "interval_high": rep.interval[1], "gap": rep.gap, "degenerate": rep.degenerate,
                     "min_decrease_slope": rep.min_decrease_slope, "mean_increment": rep.mean_increment,
                     "increments": json.dumps({str(k): v for k, v in rep.increments.items()})})
    return Result(rows)


def cmd_events(a) -> Result:
    from .mc_estimators import EventConfig, event_frequencies
    _check_n(a.n), _check_eps(a.eps), _check_replicas(a.replicas, 1)
    cfg = EventConfig(a.alpha1, a.alpha2)
    out = event_frequencies(a.n, a.eps, cfg, a.replicas, a.seed, a.mode, a.workers)
    out["alpha3"] = cfg.alpha3
    out["slope_gap"] = cfg.slope_gap(a.n)
    return Result([out])


def cmd_breakability(a) -> Result:
    from .mc_estimators import breakability_frequency
    _check_eps(a.eps, open_left=True)
    _need(a.samples >= 1, "samples", "a positive integer", a.samples)
    rep = breakability_frequency(a.eps, a.samples, a.seed, a.workers)
    row = _report_row(rep)
    row.pop("n")
    row["samples"] = row.pop("replicas")
    held = rep.estimate >= rep.extra["q_bound"] - 3 * rep.stderr
    row["holds"] = held
    return Result([row], failed=not held)


def _bound_rows(checks) -> list[dict]:
    rows = []
    for c in checks:
        row = {"name": c.name}
        row.update({f"param_{k}": v for k, v in c.parameters.items()})
        row.update({"exact_value": c.exact_value, "relation": c.relation, "bound_value": c.bound_value,
                    "secondary_bound": c.secondary_bound, "holds": c.holds})
        rows.append(row)
    return rows


def cmd_bounds(a) -> Result:
    from . import bounds_lab as bl
    if a.grid != "default":
        raise ParameterRangeError(f"--grid must be 'default', got {a.grid}")
    names = list(bl.SUITES) if a.suite == "all" else [a.suite]
    checks = []
    for name in names:
        checks += bl.slope_lemma_suite(seed=a.seed) if name == "slope" else bl.SUITES[name]()
    return Result(_bound_rows(checks), failed=not all(c.holds for c in checks))


def cmd_counts(a) -> Result:
    from .bounds_lab import count_V, count_V1pct_complement, count_V1pct_complement_closed
    _need(a.k_max >= 0, "k-max", ">= 0", a.k_max)
    rows = []
    for k in range(a.k_max + 1):
        c, c1 = count_V(k, a.enumeration_bound), count_V1pct_complement(k, a.enumeration_bound)
        rows.append({"k": k, "V_exact": c.exact, "V_bound_2k_C3k": c.bound, "V_bound_16k": c.bound_coarse,
                     "V1pct_complement_exact": c1.exact,
                     "V1pct_complement_closed_form": count_V1pct_complement_closed(k),
                     "V1pct_complement_bound": c1.bound, "enumerated": c.enumerated})
    return Result(rows)


def cmd_oracle(a) -> Result:
    from .bitstrings import BinaryString
    from .cell_model import max_cell_score
    from .lcs_engine import lcs_length_dp
    _need(0 <= a.max_n <= 8, "max-n", "in 0..8", a.max_n)
    strs = [BinaryString(p, n) for n in range(a.max_n + 1) for p in range(1 << n)]
    checked = 0
    for x, y in product(strs, strs):
        checked += 1
        s, d = max_cell_score(x, y), lcs_length_dp(str(x), str(y))
        if s != d:
            return Result([{"x": str(x), "y": str(y), "cell_score": s, "dp": d}], failed=True,
                          text=f"counterexample x={x} y={y} cell_score={s} dp={d}\n")
    log.info("oracle: %d pairs agree", checked)
    return Result([{"max_n": a.max_n, "pairs": checked, "status": "ok"}], text="ok\n")


COMMANDS: dict[str, Callable] = {
    "gamma": cmd_gamma, "variance": cmd_variance, "variance-scan": cmd_variance_scan, "drift": cmd_drift,
    "chain": cmd_chain, "slope": cmd_slope, "events": cmd_events, "breakability": cmd_breakability,
    "bounds": cmd_bounds, "counts": cmd_counts, "oracle": cmd_oracle,
}


# -- parser -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"environment variable {name} must be an integer, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lcsfluct", description="LCS fluctuation experiments")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, n=True, eps=True, replicas=True):
        if n:
            sp.add_argument("--n", type=int, default=1000)
        if eps:
            sp.add_argument("--eps", type=float, default=0.5)
        if replicas:
            sp.add_argument("--replicas", type=int, default=100)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--format", choices=("csv", "jsonl"), default="csv")
        sp.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
        sp.add_argument("--manifest", type=Path, default=None, help="manifest path (default: <out>.manifest.json)")
        sp.add_argument("-v", "--verbose", action="store_true")
        return sp

    common(sub.add_parser("gamma", help="estimate E L_n / n"))
    common(sub.add_parser("variance", help="sample variance of L_n"))
    sp = common(sub.add_parser("variance-scan", help="variance / n over several n"), n=False)
    sp.add_argument("--ns", type=int, nargs="+", default=[1000, 2000, 4000])
    sp = common(sub.add_parser("drift", help="exact flip drift averaged over random pairs"))
    sp.add_argument("--x", default=None)
    sp.add_argument("--y", default=None)
    common(sub.add_parser("chain", help="L along one coupling chain"), eps=False, replicas=False)
    common(sub.add_parser("slope", help="slope statistics of coupling chains"))
    sp = common(sub.add_parser("events", help="frequencies of E, E2, E4, A_n"))
    sp.add_argument("--alpha1", type=float, default=0.3)
    sp.add_argument("--alpha2", type=float, default=0.1)
    sp.add_argument("--mode", choices=("auto", "exact", "heuristic"), default="auto")
    sp = common(sub.add_parser("breakability", help="0-cell breakability frequency"), n=False, replicas=False)
    sp.add_argument("--samples", type=int, default=100_000)
    sp = common(sub.add_parser("bounds", help="tail-bound and counting checks"), n=False, eps=False, replicas=False)
    sp.add_argument("--suite", choices=("all", "appendix", "binomial", "counting", "slope"), default="all")
    sp.add_argument("--grid", default="default")
    sp = common(sub.add_parser("counts", help="sizes of V(k) and its sparse part"), n=False, eps=False, replicas=False)
    sp.add_argument("--k-max", type=int, default=6)
    sp.add_argument("--enumeration-bound", type=int, default=6)
    sp = common(sub.add_parser("oracle", help="cell-vector score versus DP, exhaustively"),
                n=False, eps=False, replicas=False)
    sp.add_argument("--max-n", type=int, default=6)
    return p


def _manifest(a, argv: Sequence[str], out_path: Optional[Path]) -> dict:
    params = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(a).items() if k not in ("verbose",)}
    return {"tool": "lcsfluct", "version": __version__, "command": a.command, "argv": list(argv),
            "master_seed": a.seed, "params": params, "output": str(out_path) if out_path else None,
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat()}


def run(spec: ExperimentSpec) -> int:
    """Execute a spec given as command plus parameter map (argv-style keys)."""
    argv = [spec.command]
    for k, v in spec.params.items():
        flag = "--" + k.replace("_", "-")
        if isinstance(v, bool):
            if v:
                argv.append(flag)
        elif isinstance(v, (list, tuple)):
            argv += [flag, *map(str, v)]
        else:
            argv += [flag, str(v)]
    return main(argv)


def rerun_manifest(path: Path | str) -> int:
    """Re-execute the command recorded in a manifest."""
    return main(json.loads(Path(path).read_text())["argv"])


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        a = build_parser().parse_args(argv)
        if a.seed is None:
            a.seed = _env_int(SEED_ENV, 0)
        if a.workers is None:
            a.workers = _env_int(WORKERS_ENV, os.cpu_count() or 1)
        if a.workers < 1:
            raise ParameterRangeError(f"--workers must be >= 1, got {a.workers}")
    except UsageError as e:
        print(f"lcsfluct: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterRangeError as e:
        print(f"lcsfluct: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)

    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        log.info("running %s", a.command)
        res = COMMANDS[a.command](a)
        data = res.text if (res.text is not None and a.out is None) else render(res.rows, a.format)
        if a.out is None:
            sys.stdout.write(data)
        else:
            a.out.parent.mkdir(parents=True, exist_ok=True)
            a.out.write_text(data)
        man_path = a.manifest or (Path(str(a.out) + ".manifest.json") if a.out else None)
        if man_path is not None:
            man_path.write_text(json.dumps(_manifest(a, argv, a.out), indent=2, sort_keys=True) + "\n")
    except (ParameterRangeError, ContractError) as e:
        print(f"lcsfluct: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceError, OSError, RuntimeError) as e:
        print(f"lcsfluct: runtime failure: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    if res.failed:
        print(f"lcsfluct: {a.command}: check failed", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
