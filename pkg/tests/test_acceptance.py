"""Acceptance criteria 1-9, each at its stated tolerance and time budget.

Every criterion prints one PASS/FAIL line (collected into the pytest
terminal summary; run this file directly to see them on stdout).
"""

import json
import time
from fractions import Fraction as F

import pytest

from conftest import SWEEP
from semistatic.blocks import BlockModel, build_block, conditional_signal, up_probability, in_A_tilde
from semistatic.continuous import ContinuousBlockParams, mc_verify
from semistatic.decompose import (
    decomposition_dual_value,
    max_u_correlation,
    max_u_correlation_witness,
    max_v_correlation,
    min_l1_decomposition,
)
from semistatic.market import evaluate_static, stochastic_integral, verify_martingale
from semistatic.pasting import (
    PastedModel,
    closed_form_tail,
    default_schedule,
    divergence_check,
    g_partial_decomposition,
    paste,
)
from semistatic.probspace import FiniteFilteredSpace, RandomVariable, cond_expectation, moment

RESULTS = {}
SCHED = default_schedule()


def record(k, title, ok, elapsed, budget, detail=""):
    within = budget is None or elapsed < budget
    passed = bool(ok and within)
    limit = f" (budget {budget:g}s)" if budget else ""
    line = f"criterion {k}: {'PASS' if passed else 'FAIL'}  {title}  [{elapsed:.2f}s{limit}]"
    if detail:
        line += f"  {detail}"
    RESULTS[k] = line
    print(line)
    return passed


def test_criterion_1_moment_identity():
    t0 = time.perf_counter()
    ok = True
    for p in SWEEP:
        f = build_block(p).f
        ok &= all(moment(f, k) == p.M**k * p.epsilon / 2 for k in (1, 2, 3, 4))
    assert record(1, "E|f|^p = M^p eps/2, p=1..4, 36 blocks", ok, time.perf_counter() - t0, 1.0)


def test_criterion_2_conditional_probabilities():
    t0 = time.perf_counter()
    ok = True
    for p in SWEEP:
        blk = build_block(p)
        for lv in (p.a, p.b):
            hit = RandomVariable.indicator(blk.space, blk.S.terminal.level_set(lv))
            ce = cond_expectation(hit, 1)
            for atom in blk.space.atoms:
                own = (lv == p.a) == in_A_tilde(atom)
                ok &= ce[atom] == ((lv + atom[0]) / (2 * lv) if own else 0)
        up = RandomVariable.indicator(blk.space, blk.space.event(lambda a: a[2] == 1))
        ce_up = cond_expectation(up, 1)
        ok &= all(ce_up[a] == up_probability(p, a[0], in_A_tilde(a)) for a in blk.space.atoms)
    assert record(2, "P(S_2 = +L | F_1) = (L + S_1)/(2L) on every cell", ok, time.perf_counter() - t0, 1.0)


def test_criterion_3_orthogonality():
    t0 = time.perf_counter()
    ok = True
    worst_u = worst_v = F(0)
    for p in SWEEP:
        blk = build_block(p)
        eM = p.epsilon * p.M
        cu = max_u_correlation(blk.S, blk.f)
        cv = max_v_correlation(blk.S, blk.f)
        ok &= cu <= eM and cv <= 8 * eM
        worst_u, worst_v = max(worst_u, cu / eM), max(worst_v, cv / eM)
        cx = conditional_signal(blk)
        ok &= all(cx[s] <= 8 * p.epsilon for s in (p.a, -p.a))
        ok &= all(cx[s] == 0 for s in (p.b, -p.b))
    detail = f"max c_U/(eps M) = {worst_u}, max c_V/(eps M) = {float(worst_v):.4f}"
    assert record(3, "c_U <= eps M, c_V <= 8 eps M, cell pieces", ok, time.perf_counter() - t0, 10.0, detail)


def test_criterion_4_lower_bound():
    t0 = time.perf_counter()
    ok = True
    ratios = []
    for p in SWEEP:
        blk = build_block(p)
        res = min_l1_decomposition(blk.S, blk.f)
        ok &= res.cost >= p.M / 24 and res.cost <= p.M
        ok &= res.certificate().passed
        ok &= decomposition_dual_value(blk.S, blk.f)[0] == res.cost
        H, h = blk.canonical_H, blk.canonical_h
        u, v = stochastic_integral(H, blk.S), evaluate_static(h, blk.S)
        ok &= u + v == blk.f and moment(u, 1) + moment(v, 1) == p.M
        ratios.append(res.cost / p.M)
    m16 = sum(r >= F(1, 16) for r in ratios)
    detail = f"min cost/M = {min(ratios)} ({float(min(ratios)):.4f}); cost >= M/16 in {m16}/{len(ratios)}"
    assert record(4, "M/24 <= LP cost <= M, certified", ok, time.perf_counter() - t0, 10.0, detail)


def test_criterion_5_convergence():
    t0 = time.perf_counter()
    N = 8
    model = paste(SCHED, N)
    ok = True
    for p in (1, 2, 3):
        for m in range(N):
            lhs = moment(model.g_full - model.g_partials[m], p)
            rhs = F(1, 2) * sum((F(2) ** (-n * (n + 1 - p)) for n in range(m + 1, N + 1)), F(0))
            ok &= lhs == rhs == closed_form_tail(p, m + 1, N)
    assert record(5, "E|g - g_m|^p = (1/2) sum 2^-n(n+1-p), N=8", ok, time.perf_counter() - t0, 5.0)


def test_criterion_6_divergence():
    t0 = time.perf_counter()
    res = divergence_check(SCHED, 5)
    ok = res.report.passed
    ok &= all(r["decoupled"] and r["global_cost"] >= F(r["N"], 24) for r in res.rows)
    ok &= len(res.increments) == 4 and all(inc >= F(1, 24) for inc in res.increments)
    costs = ", ".join(f"{float(r['global_cost']):.4f}" for r in res.rows)
    assert record(6, "global cost decouples, >= N/24, increments >= 1/24", ok,
                  time.perf_counter() - t0, 60.0, f"cost(1..5) = {costs}")


def test_criterion_7_partials():
    t0 = time.perf_counter()
    model = paste(SCHED, 8)
    ok = True
    for m in range(9):
        H, h = g_partial_decomposition(model, m)
        u = stochastic_integral(H, model.S)
        v = evaluate_static(h, model.S)
        ok &= u + v == model.g_partials[m]
        bound = max([b.params.M for b in model.blocks[:m]] or [0])
        ok &= all(abs(x) <= bound for x in u.values + v.values)
        ok &= model.g_partials[m].is_nonnegative()
    assert record(7, "g_m = (H.S)_2 + h(S_2), bounded, g_m >= 0, m <= 8", ok, time.perf_counter() - t0, 1.0)


def test_criterion_8_continuous():
    t0 = time.perf_counter()
    params = ContinuousBlockParams(0.5, 2, 2, 3)
    rep = mc_verify(params, 100_000, seed=20240601, path_samples=20_000)
    bad = [r.name for r in rep.rows if not r.passed]
    chi = rep["chi-square fit of (S_sigma, X, S_T) to the discrete block"]
    detail = f"{len(rep.rows)} rows, chi-square p = {chi.estimate:.3f}" + (f", failing: {bad}" if bad else "")
    assert record(8, "Brownian block MC within 4 SE, chi-square p >= 1e-3", rep.passed,
                  time.perf_counter() - t0, 30.0, detail)


def test_criterion_9_infrastructure():
    t0 = time.perf_counter()
    ok = True
    n_lp = 0
    blocks = [build_block(p) for p in SWEEP]
    models = [paste(SCHED, N) for N in range(1, 9)]
    for S in [b.S for b in blocks] + [m.S for m in models]:
        ok &= verify_martingale(S).passed
    for blk in blocks:
        ok &= min_l1_decomposition(blk.S, blk.f).certificate().passed
        ok &= max_u_correlation_witness(blk.S, blk.f)[2].passed
        n_lp += 2
    div = divergence_check(SCHED, 5)
    ok &= all(c.passed for c in div.report.checks if c.name.endswith("zero duality gap"))
    n_lp += 5 + 5  # global solves plus per-block solves inside the check
    for blk in blocks:
        text = json.dumps(blk.to_dict(), sort_keys=True)
        ok &= json.dumps(BlockModel.from_dict(json.loads(text)).to_dict(), sort_keys=True) == text
        ok &= FiniteFilteredSpace.loads(blk.space.dumps()) == blk.space
    for m in models[:5]:
        text = json.dumps(m.to_dict(), sort_keys=True)
        ok &= json.dumps(PastedModel.from_dict(json.loads(text)).to_dict(), sort_keys=True) == text
    params = ContinuousBlockParams(0.5, 2, 2, 3)
    a = mc_verify(params, 20_000, seed=99)
    b = mc_verify(params, 20_000, seed=99)
    ok &= a.to_csv() == b.to_csv()
    assert record(9, "martingales, zero duality gaps, JSON round-trips, seeded MC", ok,
                  time.perf_counter() - t0, None, f"{n_lp}+ certified LPs, {len(blocks) + len(models)} processes")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
