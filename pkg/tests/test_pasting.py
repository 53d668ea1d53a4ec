import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semistatic.blocks import BlockParams
from semistatic.decompose import min_l1_decomposition
from semistatic.errors import IndexOutOfRange, InvalidDepth, InvalidRange
from semistatic.market import evaluate_static, stochastic_integral
from semistatic.pasting import (
    DUMMY,
    PastedModel,
    PastingSchedule,
    closed_form_tail,
    convergence_table,
    default_schedule,
    divergence_check,
    g_partial_decomposition,
    infinite_tail_bounds,
    paste,
    terminal_cells,
    verify_partials,
)
from semistatic.probspace import RandomVariable, moment

SCHED = default_schedule()


@pytest.fixture(scope="module")
def model5():
    return paste(SCHED, 5)


def test_schedule_values():
    assert SCHED.params(1) == BlockParams(F(1, 2), 2, F(9, 4), F(11, 4))
    assert SCHED.params(3) == BlockParams(F(1, 2**9), 8, 2 + F(1, 12), 3 - F(1, 12))
    assert SCHED.block_mass(4) == F(1, 16)
    assert SCHED.levels_distinct(10)


def test_levels_distinct_detects_collision():
    clash = PastingSchedule.from_table(
        [BlockParams(F(1, 2), 2, F(9, 4), F(11, 4)), BlockParams(F(1, 16), 4, F(9, 4), 3)],
        [F(1, 2), F(1, 4)],
    )
    assert not clash.levels_distinct(2)


def test_depth_one():
    m = paste(SCHED, 1)
    assert len(m.space) == 9
    assert m.space.event_probability(m.block_events[0]) == F(1, 2)
    assert m.space.event_probability(m.dummy_event) == F(1, 2)


def test_depth_three_masses():
    m = paste(SCHED, 3)
    assert len(m.space) == 25
    masses = [m.space.event_probability(e) for e in m.block_events] + [m.space.event_probability(m.dummy_event)]
    assert masses == [F(1, 2), F(1, 4), F(1, 8), F(1, 8)]
    assert m.report.passed, m.report.summary()


def test_terminal_cells():
    assert terminal_cells(paste(SCHED, 2)) == 9
    assert terminal_cells(paste(SCHED, 4)) == 17


def test_invalid_depth():
    for bad in (0, -1, 1.5):
        with pytest.raises(InvalidDepth):
            paste(SCHED, bad)
    with pytest.raises(InvalidDepth):
        divergence_check(SCHED, 0)


def test_structure(model5):
    rep = model5.report
    assert rep.passed, rep.summary()
    assert model5.S.terminal[DUMMY] == 0 and model5.g_full[DUMMY] == 0


def test_convergence_examples(model5):
    t = convergence_table(SCHED, 5, 1, 0, model=model5)
    want = F(1, 2) * (F(1, 2**1) + F(1, 2**4) + F(1, 2**9) + F(1, 2**16) + F(1, 2**25))
    assert t.rows[0]["computed"] == t.rows[0]["closed_form"] == want

    t = convergence_table(SCHED, 4, 2, 1)
    want = F(1, 2) * (F(1, 2**2) + F(1, 2**6) + F(1, 2**12))
    assert t.rows[1]["computed"] == t.rows[1]["closed_form"] == want


@pytest.mark.parametrize("p", [1, 2, 3, 5])
def test_last_term_only(p, model5):
    t = convergence_table(SCHED, 5, p, model=model5)
    assert t.all_equal
    assert t.rows[-1]["computed"] == F(1, 2) * F(2) ** (-5 * (6 - p))


def test_convergence_matches_weighted_block_moments(model5):
    for p in (1, 2, 3):
        for m in range(5):
            direct = sum(
                (SCHED.block_mass(n) * moment(model5.blocks[n - 1].f, p) for n in range(m + 1, 6)), F(0)
            )
            assert moment(model5.g_full - model5.g_partials[m], p) == direct


def test_convergence_bad_range(model5):
    with pytest.raises(InvalidRange):
        convergence_table(SCHED, 5, 1, 5, model=model5)
    with pytest.raises(InvalidRange):
        convergence_table(SCHED, 5, 0, model=model5)


def test_tail_interval():
    for p in (1, 2, 3):
        for N in (2, 5, 8):
            lo, hi = infinite_tail_bounds(p, N)
            deep = closed_form_tail(p, N + 1, N + 30)
            assert lo <= deep <= hi
            assert hi - lo < closed_form_tail(p, N + 1, N + 1)


def test_partials_examples(model5):
    H, h = g_partial_decomposition(model5, 0)
    assert stochastic_integral(H, model5.S) == RandomVariable.constant(model5.space, 0)
    assert h.support() == set()

    m2 = paste(SCHED, 2)
    H, h = g_partial_decomposition(m2, 1)
    a1, b1 = F(9, 4), F(11, 4)
    assert h.support() == {a1, -a1, b1, -b1}

    H, h = g_partial_decomposition(model5, 5)
    assert stochastic_integral(H, model5.S) + evaluate_static(h, model5.S) == model5.g_full
    with pytest.raises(IndexOutOfRange):
        g_partial_decomposition(model5, 6)


def test_partials_report(model5):
    assert verify_partials(model5).passed


def test_partials_agree_on_early_blocks(model5):
    sp = model5.space
    for m in range(6):
        g = model5.g_partials[m]
        early = [a for a in sp.atoms if 1 <= a[0] <= m]
        assert all(g[a] == model5.g_full[a] for a in early)
        differ = sp.event_probability([a for a in sp.atoms if g[a] != model5.g_full[a]])
        tail = sum((SCHED.block_mass(n) for n in range(m + 1, 6)), F(0))
        # g_m differs from g only where X = 1 and S_1 = -1 inside later blocks
        assert differ <= tail <= F(1, 2**m)


def test_divergence_small():
    res = divergence_check(SCHED, 3)
    assert res.report.passed, res.report.summary()
    first = res.rows[0]
    blk_cost = min_l1_decomposition(paste(SCHED, 1).blocks[0].S, paste(SCHED, 1).blocks[0].f).cost
    assert first["global_cost"] == F(1, 2) * blk_cost == F(68, 117)
    assert all(inc >= F(1, 24) for inc in res.increments)
    assert "global_cost" in res.to_csv().splitlines()[0]


def test_model_json_roundtrip():
    m = paste(SCHED, 3)
    text = json.dumps(m.to_dict(), sort_keys=True)
    back = PastedModel.from_dict(json.loads(text))
    assert json.dumps(back.to_dict(), sort_keys=True) == text
    assert back.g_partials == m.g_partials
    assert back.report.passed


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.integers(1, 4))
def test_closed_form_is_weighted_moment_sum(N, p):
    # closed form against the raw schedule 2^-n eps_n M_n^p / 2
    raw = sum(
        (SCHED.block_mass(n) * SCHED.epsilon(n) * SCHED.M(n) ** p / 2 for n in range(1, N + 1)), F(0)
    )
    assert closed_form_tail(p, 1, N) == raw
