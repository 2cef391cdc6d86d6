"""Acceptance criteria, one test per criterion, each reporting a PASS/FAIL line."""

import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from lcsfluct import bounds_lab as bl
from lcsfluct.bitstrings import BinaryString, gen_pair, make_rng
from lcsfluct.cell_model import break_up, decompose, enumerate_admissible_vectors, is_breakable, max_cell_score, score
from lcsfluct.lcs_engine import induced_cell_vector, lcs_backtrace, lcs_length, lcs_length_dp, matching_from_alignment, strip_gaps
from lcsfluct.mc_estimators import (
    ALPHA_PAIRS,
    ALPHA_PAIRS_RELAXED,
    breakability_frequency,
    check_zero_surplus_implication,
    check_event_inclusion,
    drift_fixed_pair,
    estimate_drift,
    estimate_gamma,
    estimate_variance,
    greedy_bound_report,
    variance_scan,
)
from lcsfluct.perturbation import chain_law_exact, conditional_law_exact


def report(num: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {num}: {'PASS' if ok else 'FAIL'} {title}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail


def test_criterion_01_cell_score_oracle():
    strs = [BinaryString(p, n) for n in range(7) for p in range(1 << n)]
    bad, pairs = [], 0
    for x in strs:
        for y in strs:
            pairs += 1
            if max_cell_score(x, y) != lcs_length_dp(str(x), str(y)):
                bad.append((str(x), str(y)))
    report(1, "max cell-vector score equals DP LCS", not bad and pairs == 127 ** 2,
           f"{pairs} pairs (all lengths 0..6), {len(bad)} mismatches")


def test_criterion_02_worked_examples():
    parts = {}
    parts["lcs(1000001,1001)=4"] = lcs_length("1000001", "1001") == 4
    m = matching_from_alignment("101010-101", "1-10100-01")
    x, y = strip_gaps("101010-101"), strip_gaps("1-10100-01")
    assert (x, y) == ("101010101", "11010001")
    parts["lcs=7 and v=(0,1,0,-1)"] = (lcs_length(x, y) == 7 == len(m)
                                       and induced_cell_vector(x, y, m) == (0, 1, 0, -1))
    triple = drift_fixed_pair("0001000001", "1000010101").exact
    parts[f"drift triple {tuple(str(t) for t in triple)} == (2/6, 3/6, 1/6)"] = \
        triple == (Fraction(2, 6), Fraction(3, 6), Fraction(1, 6))
    bx, by = "01001001001001", "01010000010101"
    d = decompose(bx, by, (0, 0, 0))
    w = break_up(bx, by, (0, 0, 0), 2, (5, 4))
    parts["witness (5,4) preserves score"] = (is_breakable(bx, by, d, 2) == (5, 4)
                                              and score(decompose(bx, by, w)) == score(d) == 12)
    parts["word example = 8"] = lcs_length("fanthastic", "fantastique") == 8
    detail = "; ".join(f"{k}: {'ok' if v else 'FAILED'}" for k, v in parts.items())
    report(2, "worked examples", all(parts.values()), detail)


def test_criterion_03_gamma():
    t0 = time.perf_counter()
    r = estimate_gamma(2000, 0.5, 200, seed=20_003)
    dt = time.perf_counter() - t0
    report(3, "gamma at eps=0.5", 0.79 <= r.estimate <= 0.83 and dt < 120,
           f"estimate {r.estimate:.5f} +- {r.stderr:.5f} in [0.79, 0.83]; runtime {dt:.1f}s < 120s")


def test_criterion_04_steele_ceiling():
    out, ok = [], True
    for eps in (0.1, 0.5):
        r = estimate_variance(1000, eps, 500, seed=40_004)
        ceiling = 2 * eps * (1 - eps) * 1000
        ok &= r.estimate <= ceiling + 3 * r.stderr
        out.append(f"eps={eps}: var {r.estimate:.2f} (se {r.stderr:.2f}) <= {ceiling:.0f} + 3se")
    report(4, "Steele variance ceiling", ok, "; ".join(out))


def test_criterion_05_variance_linearity():
    reps = variance_scan((1000, 2000, 4000), 0.1, 500, seed=50_005)
    ratios = [r.estimate / r.n for r in reps]
    spread = max(ratios) / min(ratios)
    report(5, "variance/n linearity", spread <= 2,
           "var/n = " + ", ".join(f"{v:.4f}" for v in ratios) + f"; max/min {spread:.3f} <= 2")


def test_criterion_06_drift_sign():
    r = estimate_drift(2000, 0.05, 2000, seed=60_006)
    ok = r.difference > 0 and r.z_score > 3
    report(6, "drift sign", ok, f"p+ {r.p_plus:.4f}, p0 {r.p_zero:.4f}, p- {r.p_minus:.4f}, "
                                f"p+ - p- {r.difference:.4f}, z {r.z_score:.1f} > 3, excluded {r.excluded}")


def test_criterion_07_chain_law():
    chain, cond = chain_law_exact(2), conditional_law_exact(2)
    ok = all(chain[k] == cond[k] for k in range(5))
    report(7, "coupling chain law at n=2", ok, "exact equality for k = 0..4" if ok else "mismatch")


def _breakable_instances(target: int, seed: int):
    rng = make_rng(seed)
    while True:
        n = int(rng.integers(8, 40))
        eps = float(rng.choice([0.2, 0.3, 0.4, 0.5]))
        x, y = gen_pair(n, eps, rng)
        vs = [induced_cell_vector(x, y, lcs_backtrace(x, y))]
        if n <= 10:
            pool = sorted(enumerate_admissible_vectors(x, y))
            vs += [pool[int(i)] for i in rng.integers(0, len(pool), 3)]
        for v in vs:
            d = decompose(x, y, v)
            for i, u in enumerate(v, 1):
                if u == 0:
                    w = is_breakable(x, y, d, i)
                    if w is not None:
                        yield x, y, v, i, w
                        target -= 1
                        if target == 0:
                            return


def test_criterion_08_break_up_conservation():
    count, bad = 0, 0
    for x, y, v, i, w in _breakable_instances(10_000, seed=80_008):
        v2 = break_up(x, y, v, i, w)
        count += 1
        if not (score(decompose(x, y, v2)) == score(decompose(x, y, v)) and len(v2) == len(v) + 1):
            bad += 1
    report(8, "break-up conservation", count == 10_000 and bad == 0, f"{count} instances, {bad} violations")


def test_criterion_09_bounds_suite():
    checks = bl.appendix_suite() + bl.binomial_suite() + bl.counting_suite() + bl.slope_lemma_suite(1000, seed=90_009)
    fails = [c for c in checks if not c.holds]
    v1, v2 = bl.count_V(1).exact, bl.count_V(2).exact
    ok = not fails and (v1, v2) == (5, 41)
    report(9, "bounds suite", ok, f"{len(checks)} checks, {len(fails)} failures; |V(1)|={v1}, |V(2)|={v2}")


def test_criterion_10_breakability():
    q_half = bl.breakability_lower_bound(Fraction(1, 2))
    out, ok = [f"q(1/2) = {q_half}"], q_half == Fraction(2, 9)
    for eps in (0.3, 0.5):
        r = breakability_frequency(eps, 100_000, seed=100_010)
        q = bl.breakability_lower_bound(eps)
        ok &= r.estimate >= q - 3 * r.stderr
        out.append(f"eps={eps}: {r.estimate:.4f} (se {r.stderr:.4f}) >= q={q:.4f} - 3se")
    report(10, "0-cell breakability", ok, "; ".join(out))


def test_criterion_11_constructive_bound():
    r = greedy_bound_report(10_000, 0.1, 200, seed=110_011)
    ok = abs(r.estimate - 1 / 1.1) <= 0.005 and r.extra["violations"] == 0
    report(11, "constructive lower bound", ok,
           f"greedy/n {r.estimate:.5f} vs 1/1.1 = {1 / 1.1:.5f} (tol 0.005); greedy > DP on "
           f"{r.extra['violations']} of 200; event E frequency {r.extra['E_frequency']:.3f} (reported only)")


def test_criterion_12_exhaustive_implications():
    surplus = check_zero_surplus_implication(max_n=6)
    strict = check_event_inclusion(max_n=6, alpha_pairs=ALPHA_PAIRS)
    relaxed = check_event_inclusion(max_n=6, alpha_pairs=ALPHA_PAIRS_RELAXED)
    ok = not (surplus.counterexamples or strict.counterexamples or relaxed.counterexamples)
    report(12, "exhaustive implications n<=6", ok,
           f"zero-surplus premise held {surplus.premise_held}/{surplus.checked}, {len(surplus.counterexamples)} counterexamples; "
           f"inclusion premise held {strict.premise_held}/{strict.checked} (alpha1>alpha2 grid) and "
           f"{relaxed.premise_held}/{relaxed.checked} (relaxed grid), "
           f"{len(strict.counterexamples) + len(relaxed.counterexamples)} counterexamples")
