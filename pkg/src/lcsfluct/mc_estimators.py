"""Monte Carlo estimators with per-replica substreams and exact small-n event checks.

Replica ``r`` of a run with master seed ``s`` draws from ``make_rng(s, r)``,
so results do not depend on the worker count: replicas are computed in any
order and reduced in replica order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from itertools import product
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .bitstrings import BinaryString, gen_pair, make_rng
from .bounds_lab import breakability_lower_bound, greedy_lower_bound_score
from .cell_model import (
    as_fraction,
    decompose,
    enumerate_admissible_vectors,
    is_breakable,
    lighter_side_ones,
    nonzero_cells,
    score,
    vn_membership,
)
from .errors import ContractError, ParameterRangeError, ResourceError
from .lcs_engine import induced_cell_vector, lcs_backtrace, lcs_length
from .perturbation import build_chain, drift_probabilities_exact, slope_levels, slope_statistics

EXACT_EVENT_MAX_N = 10


# -- reports and configs ----------------------------------------------------

@dataclass(frozen=True)
class EstimateReport:
    estimate: float
    stderr: float
    ci95: tuple[float, float]
    replicas: int
    n: Optional[int]
    eps: float
    master_seed: int
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, samples: Sequence[float], n, eps, seed, **extra) -> "EstimateReport":
        a = np.asarray(samples, dtype=float)
        est = float(a.mean())
        se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else math.nan
        return cls(est, se, (est - 1.96 * se, est + 1.96 * se), int(a.size), n, eps, seed, extra)


@dataclass(frozen=True)
class EventConfig:
    alpha1: float
    alpha2: float

    def __post_init__(self):
        if not self.alpha1 > self.alpha2 > 0:
            raise ParameterRangeError(f"need alpha1 > alpha2 > 0, got {self.alpha1}, {self.alpha2}")

    @property
    def alpha3(self) -> float:
        return (self.alpha1 - self.alpha2) / 2

    @staticmethod
    def slope_gap(n: int) -> int:
        from .perturbation import slope_gap
        return slope_gap(n)


def default_workers() -> int:
    env = os.environ.get("LCSFLUCT_WORKERS")
    return int(env) if env else (os.cpu_count() or 1)


def _check_eps(eps, lo_open: bool = False) -> None:
    if not (0 < eps <= 0.5 if lo_open else 0 <= eps <= 0.5):
        raise ParameterRangeError(f"eps must lie in {'(0' if lo_open else '[0'}, 0.5], got {eps}")


def map_replicas(fn: Callable[[int], object], replicas: int, workers: int = 1) -> list:
    """``[fn(0), ..., fn(replicas - 1)]``, optionally across processes; order is preserved."""
    if workers <= 1 or replicas < 2:
        return [fn(r) for r in range(replicas)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(replicas), chunksize=max(1, replicas // (4 * workers))))


# -- gamma and variance -----------------------------------------------------

def _lcs_replica(r: int, n: int, eps: float, seed: int) -> int:
    x, y = gen_pair(n, eps, make_rng(seed, r))
    return lcs_length(x, y)


def lcs_samples(n: int, eps: float, replicas: int, seed: int, workers: int = 1) -> np.ndarray:
    _check_eps(eps)
    return np.asarray(map_replicas(partial(_lcs_replica, n=n, eps=eps, seed=seed), replicas, workers))


def estimate_gamma(n: int, eps: float, replicas: int, seed: int, workers: int = 1) -> EstimateReport:
    """Mean of ``L_n / n`` over independent pairs."""
    if replicas < 2:
        raise ContractError("estimate_gamma needs at least 2 replicas")
    return EstimateReport.from_samples(lcs_samples(n, eps, replicas, seed, workers) / n, n, eps, seed)


def estimate_variance(n: int, eps: float, replicas: int, seed: int, workers: int = 1) -> EstimateReport:
    """Unbiased sample variance of ``L_n``, with the ceiling ``2 eps (1 - eps) n`` alongside.

    The standard error uses the fourth central moment:
    ``Var(s^2) ~ (m4 - (R - 3)/(R - 1) s^4) / R``.
    """
    if replicas < 30:
        raise ContractError("estimate_variance needs at least 30 replicas")
    a = lcs_samples(n, eps, replicas, seed, workers).astype(float)
    var = float(a.var(ddof=1))
    m4 = float(((a - a.mean()) ** 4).mean())
    se = math.sqrt(max(0.0, (m4 - (replicas - 3) / (replicas - 1) * var ** 2) / replicas))
    return EstimateReport(var, se, (var - 1.96 * se, var + 1.96 * se), replicas, n, eps, seed,
                          {"steele_ceiling": 2 * eps * (1 - eps) * n, "mean": float(a.mean())})


def variance_scan(ns: Iterable[int], eps: float, replicas: int, seed: int, workers: int = 1) -> list[EstimateReport]:
    """Variance at each ``n``; substreams are keyed by ``n`` so the runs are independent."""
    return [estimate_variance(n, eps, replicas, seed * 1_000_003 + n, workers) for n in ns]


# -- drift ------------------------------------------------------------------

@dataclass(frozen=True)
class DriftReport:
    p_plus: float
    p_zero: float
    p_minus: float
    stderr_plus: float
    stderr_zero: float
    stderr_minus: float
    difference: float
    stderr_difference: float
    z_score: float
    replicas: int
    excluded: int
    n: int
    eps: float
    master_seed: int
    exact: tuple[Fraction, Fraction, Fraction]


def _drift_replica(r: int, n: int, eps: float, seed: int):
    x, y = gen_pair(n, eps, make_rng(seed, r))
    if x.n1 + y.n1 == 0:
        return None
    return drift_probabilities_exact(x, y)


def summarize_drift(triples: Sequence[Optional[tuple[Fraction, Fraction, Fraction]]], n: int, eps: float,
                    seed: int) -> DriftReport:
    kept = [t for t in triples if t is not None]
    excluded = len(triples) - len(kept)
    if not kept:
        raise ContractError("every replica was degenerate (no ones in either text)")
    R = len(kept)
    exact = tuple(sum((t[i] for t in kept), Fraction(0)) / R for i in range(3))
    arr = np.array([[float(v) for v in t] for t in kept])
    diff = arr[:, 0] - arr[:, 2]
    sd = arr.std(axis=0, ddof=1) / math.sqrt(R) if R > 1 else np.full(3, math.nan)
    sdd = float(diff.std(ddof=1) / math.sqrt(R)) if R > 1 else math.nan
    d = float(exact[0] - exact[2])
    z = d / sdd if sdd and sdd > 0 else (math.inf if d > 0 else (-math.inf if d < 0 else 0.0))
    return DriftReport(float(exact[0]), float(exact[1]), float(exact[2]), float(sd[0]), float(sd[1]), float(sd[2]),
                       d, sdd, z, R, excluded, n, eps, seed, exact)


def estimate_drift(n: int, eps: float, replicas: int, seed: int, workers: int = 1) -> DriftReport:
    """Average of the exact per-pair flip triples over random pairs."""
    if not eps > 0:
        raise ParameterRangeError("drift needs eps > 0")
    _check_eps(eps)
    triples = map_replicas(partial(_drift_replica, n=n, eps=eps, seed=seed), replicas, workers)
    return summarize_drift(triples, n, eps, seed)


def drift_fixed_pair(x: BinaryString | str, y: BinaryString | str) -> DriftReport:
    x, y = BinaryString.coerce(x), BinaryString.coerce(y)
    return summarize_drift([drift_probabilities_exact(x, y)], x.n, math.nan, 0)


# -- coupling chain slope ---------------------------------------------------

def _slope_replica(r: int, n: int, eps: float, seed: int):
    chain = build_chain(n, int(make_rng(seed, r).integers(2 ** 63)), levels=slope_levels(n, eps), store_pairs=False)
    return slope_statistics(chain, eps)


def slope_scan(n: int, eps: float, replicas: int, seed: int, workers: int = 1) -> dict:
    """Slope reports of independent chains, summarised by mean and minimum slope."""
    reps = map_replicas(partial(_slope_replica, n=n, eps=eps, seed=seed), replicas, workers)
    good = [r for r in reps if not r.degenerate]
    slopes = [r.min_decrease_slope for r in good]
    means = [r.mean_increment for r in good if r.mean_increment is not None]
    return {
        "n": n, "eps": eps, "replicas": replicas, "degenerate": len(reps) - len(good),
        "gap": reps[0].gap if reps else None, "interval": reps[0].interval if reps else None,
        "mean_min_slope": float(np.mean(slopes)) if slopes else math.nan,
        "min_min_slope": float(np.min(slopes)) if slopes else math.nan,
        "mean_increment": float(np.mean(means)) if means else math.nan,
        "reports": reps,
    }


# -- events -----------------------------------------------------------------

def lcs_threshold_E(n: int, eps) -> Fraction:
    e = as_fraction(eps)
    return ((1 - e) + Fraction(9, 10) * e ** 2) * n


def event_E(x: BinaryString, y: BinaryString, eps, L: int | None = None) -> bool:
    L = lcs_length(x, y) if L is None else L
    return L >= lcs_threshold_E(x.n, eps)


def event_E2(x: BinaryString, y: BinaryString, eps, delta=None) -> bool:
    """Both one counts within ``delta * eps * n`` of ``eps * n`` (``delta = 0.8 eps`` by default)."""
    e = as_fraction(eps)
    d = Fraction(4, 5) * e if delta is None else as_fraction(delta)
    n = x.n
    return all(abs(s.n1 - e * n) <= d * e * n for s in (x, y))


def premise_zero_surplus(x: BinaryString, y: BinaryString, eps, L: int | None = None) -> bool:
    """``N_0 / 2 + 0.1 eps^2 n <= L_n``."""
    L = lcs_length(x, y) if L is None else L
    e = as_fraction(eps)
    return Fraction(x.n0 + y.n0, 2) + Fraction(1, 10) * e ** 2 * x.n <= L


@dataclass(frozen=True)
class VectorFacts:
    """Everything the event definitions need about one admissible vector."""

    v: tuple
    score: int
    optimal: bool
    lighter: int
    n1v: int
    rv: int
    breakable_zero_cells: int


def vector_facts(x: BinaryString, y: BinaryString, max_len: int = EXACT_EVENT_MAX_N) -> list[VectorFacts]:
    if x.n > max_len or y.n > max_len:
        raise ResourceError(f"exact event evaluation limited to n <= {max_len}")
    L = lcs_length(x, y)
    out = []
    for v in sorted(enumerate_admissible_vectors(x, y, max_len)):
        d = decompose(x, y, v)
        s = score(d)
        brk = sum(1 for i, u in enumerate(v, 1) if u == 0 and is_breakable(x, y, d, i) is not None)
        out.append(VectorFacts(v, s, s == L, lighter_side_ones(d), d.n1v, d.rv, brk))
    return out


def _in_1pct(v) -> bool:
    return 100 * nonzero_cells(v) >= len(v)


@dataclass(frozen=True)
class EventValues:
    E4: bool
    D: bool
    F: bool
    G: bool
    K: bool
    A: bool


@dataclass(frozen=True)
class _Partition:
    opt: tuple
    poor_ok: bool
    rich: tuple
    e4: bool
    k: bool


def _partition(facts: Sequence[VectorFacts], n: int, eps) -> _Partition:
    opt = tuple(f for f in facts if f.optimal)
    vn = [f for f in facts if vn_membership(f.v, n, eps)]
    rich = tuple(f for f in vn if _in_1pct(f.v))
    return _Partition(
        opt,
        all(100 * f.breakable_zero_cells >= len(f.v) for f in vn if not _in_1pct(f.v)),
        rich,
        all(vn_membership(f.v, n, eps) for f in opt),
        any(f.rv <= f.n1v for f in opt),
    )


def _events(part: _Partition, N1: int, alpha1, alpha2) -> EventValues:
    a1, a2 = as_fraction(alpha1), as_fraction(alpha2)
    return EventValues(
        E4=part.e4,
        D=part.poor_ok,
        F=all(f.lighter >= 2 * a1 * f.n1v for f in part.rich),
        G=all(2 * len(f.v) <= a2 * f.n1v for f in part.rich),
        K=part.k,
        A=any(f.lighter >= a1 * N1 and 2 * len(f.v) <= a2 * N1 for f in part.opt),
    )


def events_exact(x: BinaryString, y: BinaryString, n: int, eps, cfg: EventConfig,
                 facts: list[VectorFacts] | None = None) -> EventValues:
    """E4, D, F, G, K and A_n evaluated by definition over every admissible vector."""
    facts = vector_facts(x, y) if facts is None else facts
    return _events(_partition(facts, n, eps), x.n1 + y.n1, cfg.alpha1, cfg.alpha2)


def events_heuristic(x: BinaryString, y: BinaryString, n: int, eps, cfg: EventConfig) -> EventValues:
    """Same events restricted to the single backtraced optimum (large ``n``)."""
    v = induced_cell_vector(x, y, lcs_backtrace(x, y))
    d = decompose(x, y, v)
    a1, a2 = as_fraction(cfg.alpha1), as_fraction(cfg.alpha2)
    N1 = x.n1 + y.n1
    lighter = lighter_side_ones(d)
    in_vn = vn_membership(v, n, eps)
    rich = in_vn and _in_1pct(v)
    brk = sum(1 for i, u in enumerate(v, 1) if u == 0 and is_breakable(x, y, d, i) is not None)
    return EventValues(
        E4=in_vn,
        D=rich or not in_vn or 100 * brk >= len(v),
        F=not rich or lighter >= 2 * a1 * d.n1v,
        G=not rich or 2 * len(v) <= a2 * d.n1v,
        K=d.rv <= d.n1v,
        A=lighter >= a1 * N1 and 2 * len(v) <= a2 * N1,
    )


def _event_replica(r: int, n: int, eps: float, seed: int, cfg: EventConfig, exact: bool):
    x, y = gen_pair(n, eps, make_rng(seed, r))
    L = lcs_length(x, y)
    ev = events_exact(x, y, n, eps, cfg) if exact else events_heuristic(x, y, n, eps, cfg)
    return (event_E(x, y, eps, L), event_E2(x, y, eps), ev.E4, ev.A)


def event_frequencies(n: int, eps: float, cfg: EventConfig, replicas: int, seed: int,
                      mode: str = "auto", workers: int = 1) -> dict:
    """Empirical frequencies of E, E2 (delta = 0.8 eps), E4 and A_n."""
    _check_eps(eps)
    if mode == "auto":
        mode = "exact" if n <= EXACT_EVENT_MAX_N else "heuristic"
    if mode == "exact" and n > EXACT_EVENT_MAX_N:
        raise ResourceError(f"exact event mode limited to n <= {EXACT_EVENT_MAX_N}, got {n}")
    if mode not in ("exact", "heuristic"):
        raise ContractError(f"unknown mode {mode!r}")
    rows = map_replicas(partial(_event_replica, n=n, eps=eps, seed=seed, cfg=cfg, exact=mode == "exact"),
                        replicas, workers)
    counts = np.asarray(rows, dtype=int).sum(axis=0) if rows else np.zeros(4, dtype=int)
    out = {"n": n, "eps": eps, "replicas": replicas, "mode": mode, "alpha1": cfg.alpha1, "alpha2": cfg.alpha2}
    for name, c in zip(("E", "E2", "E4", "A_n"), counts):
        p = c / replicas
        out[name] = Fraction(int(c), replicas)
        out[name + "_stderr"] = math.sqrt(p * (1 - p) / replicas)
    return out


def all_pairs(n: int) -> Iterable[tuple[BinaryString, BinaryString]]:
    strs = [BinaryString(p, n) for p in range(1 << n)]
    return product(strs, strs)


EPS_GRID_SMALL = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
ALPHA_PAIRS = tuple((a1, a2) for a1 in (0.1, 0.2, 0.3, 0.5, 0.8) for a2 in (0.05, 0.1, 0.3, 0.6) if a1 > a2)
# the inclusion argument never uses alpha1 > alpha2; this grid reaches non-vacuous cases at tiny n
ALPHA_PAIRS_RELAXED = tuple(product((0.02, 0.05, 0.1, 0.25), (0.5, 1.0, 2.0)))


@dataclass
class ImplicationResult:
    checked: int = 0
    premise_held: int = 0
    counterexamples: list = field(default_factory=list)


def check_zero_surplus_implication(max_n: int = 6, eps_grid: Sequence[float] = EPS_GRID_SMALL) -> ImplicationResult:
    """Premise ``N0/2 + 0.1 eps^2 n <= L`` forces every optimal vector into ``V_n``."""
    res = ImplicationResult()
    for n in range(1, max_n + 1):
        for x, y in all_pairs(n):
            L = lcs_length(x, y)
            live = [e for e in eps_grid if premise_zero_surplus(x, y, e, L)]
            res.checked += len(eps_grid)
            if not live:
                continue
            opt = [f.v for f in vector_facts(x, y) if f.optimal]
            for e in live:
                res.premise_held += 1
                bad = [v for v in opt if not vn_membership(v, n, e)]
                if bad:
                    res.counterexamples.append((str(x), str(y), e, bad[0]))
    return res


def check_event_inclusion(max_n: int = 6, eps_grid: Sequence[float] = EPS_GRID_SMALL,
                            alpha_pairs: Sequence[tuple[float, float]] = ALPHA_PAIRS) -> ImplicationResult:
    """``E4 & D & F & G & K`` implies ``A_n``, for every pair of equal-length texts up to ``max_n``.

    ``alpha_pairs`` are taken as given (no ``alpha1 > alpha2`` check), so a
    relaxed grid can be passed.
    """
    res = ImplicationResult()
    for n in range(1, max_n + 1):
        for x, y in all_pairs(n):
            facts = vector_facts(x, y)
            N1 = x.n1 + y.n1
            for e in eps_grid:
                part = _partition(facts, n, e)
                if not (part.e4 and part.poor_ok and part.k):
                    res.checked += len(alpha_pairs)
                    continue
                for a1, a2 in alpha_pairs:
                    ev = _events(part, N1, a1, a2)
                    res.checked += 1
                    if ev.F and ev.G:
                        res.premise_held += 1
                        if not ev.A:
                            res.counterexamples.append((str(x), str(y), e, (a1, a2)))
    return res


# -- breakability of a random 0-cell ----------------------------------------

def zero_cell_breakable(a: Sequence[bool], b: Sequence[bool]) -> bool:
    """Breakability of the 0-cell built from gap indicators ``a_i = [xi_i > 0]``, ``b_i = [eta_i > 0]``.

    The cell closes at the first slot ``T`` where both are set; it is
    breakable iff some ``2 <= i < T`` has ``a_{i-1} & b_i`` or ``b_{i-1} & a_i``.
    """
    for i in range(len(a)):
        if a[i] and b[i]:
            return False
        if i and ((a[i - 1] and b[i]) or (b[i - 1] and a[i])):
            return True
    raise ContractError("indicator sequences end before the cell closes")


def breakability_exact(eps) -> Fraction:
    """Exact probability that a random 0-cell is breakable (three-state Markov chain)."""
    e = as_fraction(eps)
    if not 0 < e < 1:
        raise ParameterRangeError("eps must lie in (0, 1)")
    q = 1 - e
    # h0: last slot had no ones; hx: only x had ones; hy: only y had ones.
    # h0 = q^2 h0 + eq hx + qe hy ; hx = qe + q^2 h0 + eq hx ; hy by symmetry equals hx
    # => hx = qe + q^2 h0 + eq hx  and  h0 = q^2 h0 + 2 eq hx
    # solve: h0 (1 - q^2) = 2 e q hx ; hx (1 - e q) = q e + q^2 h0
    a, b = 1 - q * q, 2 * e * q
    hx = q * e / ((1 - e * q) - q * q * b / a)
    return b * hx / a


def _breakability_block(r: int, eps: float, samples: int, seed: int, window: int = 64) -> int:
    """Breakable count among ``samples`` cells, drawn slot by slot in windows."""
    rng = make_rng(seed, r)
    prev_a = np.zeros(samples, dtype=bool)
    prev_b = np.zeros(samples, dtype=bool)
    hits = 0
    open_ = samples
    while open_:
        a = rng.random((open_, window)) < eps
        b = rng.random((open_, window)) < eps
        pa = np.concatenate((prev_a[:, None], a[:, :-1]), axis=1)
        pb = np.concatenate((prev_b[:, None], b[:, :-1]), axis=1)
        close = a & b
        brk = ((pa & b) | (pb & a)) & ~close
        first_close = np.where(close.any(axis=1), close.argmax(axis=1), window)
        first_brk = np.where(brk.any(axis=1), brk.argmax(axis=1), window)
        hits += int((first_brk < first_close).sum())
        still = (first_brk == window) & (first_close == window)
        prev_a, prev_b = a[still, -1], b[still, -1]
        open_ = int(still.sum())
    return hits


BREAKABILITY_BLOCK = 10_000


def breakability_frequency(eps: float, samples: int, seed: int, workers: int = 1) -> EstimateReport:
    """Fraction of simulated 0-cells that can be broken up."""
    _check_eps(eps, lo_open=True)
    blocks = [BREAKABILITY_BLOCK] * (samples // BREAKABILITY_BLOCK)
    if samples % BREAKABILITY_BLOCK:
        blocks.append(samples % BREAKABILITY_BLOCK)
    hits = map_replicas(partial(_block_dispatch, eps=eps, blocks=tuple(blocks), seed=seed), len(blocks), workers)
    h = sum(hits)
    p = h / samples
    se = math.sqrt(p * (1 - p) / samples)
    return EstimateReport(p, se, (p - 1.96 * se, p + 1.96 * se), samples, None, eps, seed,
                          {"hits": h, "q_bound": float(breakability_lower_bound(eps)),
                           "exact": float(breakability_exact(eps))})


def _block_dispatch(r: int, eps: float, blocks: tuple, seed: int) -> int:
    return _breakability_block(r, eps, blocks[r], seed)


# -- constructive lower bound -----------------------------------------------

def _greedy_replica(r: int, n: int, eps: float, seed: int, with_dp: bool):
    x, y = gen_pair(n, eps, make_rng(seed, r))
    g = greedy_lower_bound_score(x, y)
    return g, (lcs_length(x, y) if with_dp else None)


def greedy_bound_report(n: int, eps: float, replicas: int, seed: int, with_dp: bool = True,
                        workers: int = 1) -> EstimateReport:
    """Mean of ``greedy / n``; counts replicas where the greedy score beats the DP (must be zero)."""
    _check_eps(eps)
    rows = map_replicas(partial(_greedy_replica, n=n, eps=eps, seed=seed, with_dp=with_dp), replicas, workers)
    g = np.array([r[0] for r in rows], dtype=float)
    extra = {"target": 1 / (1 + eps)}
    if with_dp:
        L = np.array([r[1] for r in rows], dtype=float)
        extra["violations"] = int((g > L).sum())
        extra["E_frequency"] = float((L >= float(lcs_threshold_E(n, eps))).mean())
        extra["dp_mean"] = float(L.mean() / n)
    return EstimateReport.from_samples(g / n, n, eps, seed, **extra)
