import json
from fractions import Fraction as F

import pytest

from conftest import SWEEP
from semistatic.blocks import (
    BlockModel,
    BlockParams,
    build_block,
    canonical_decomposition,
    conditional_signal,
    f_alternative,
    verify_block,
)
from semistatic.errors import InvalidParams
from semistatic.market import evaluate_static, stochastic_integral
from semistatic.probspace import RandomVariable, cond_expectation, moment


def test_reference_atom_probability(reference_block):
    assert len(reference_block.space) == 8
    # (1/2) P(S_1 = 1) * (1/2) P(X = 0) * (3/4) P(S_2 = a | S_1 = 1)
    assert reference_block.space.prob((1, 0, 1)) == F(3, 16)


def test_probability_of_A_tilde(reference_block):
    blk = reference_block
    # inclusion-exclusion: P(A) + P(X=1) - P(A)P(X=1)
    assert blk.space.event_probability(blk.A_tilde) == F(1, 2) + F(1, 2) - F(1, 4) == F(3, 4)


@pytest.mark.parametrize(
    "args",
    [
        (F(1, 4), 1, 2, 2),
        (0, 1, 2, 3),
        (F(3, 4), 1, 2, 3),
        (F(1, 2), -1, 2, 3),
        (F(1, 2), 1, F(3, 2), 3),
        (F(1, 2), 1, 2, F(7, 2)),
    ],
)
def test_invalid_params(args):
    with pytest.raises(InvalidParams):
        BlockParams(*args)


def test_build_block_rejects_non_params():
    with pytest.raises(InvalidParams):
        build_block((F(1, 2), 2, 2, 3))


def test_canonical_decomposition_reference(reference_block):
    H, h = canonical_decomposition(reference_block)
    assert H.cell_values() == [[-1], [0, 0, 0, 0]]
    assert h.payoff_map == {2: 1, -2: 1, 3: -1, -3: -1}
    u = stochastic_integral(H, reference_block.S)
    v = evaluate_static(h, reference_block.S)
    assert u + v == reference_block.f
    assert moment(u, 1) == moment(v, 1) == 1


def test_degenerate_zero_block():
    blk = build_block(BlockParams(F(1, 2), 0, 2, 3))
    H, h = canonical_decomposition(blk)
    zero = RandomVariable.constant(blk.space, 0)
    assert blk.f == zero
    assert all(p == zero for p in H.positions)
    assert set(h.payoff_map.values()) == {0}


def test_reference_conditional_signal(reference_block):
    cx = conditional_signal(reference_block)
    assert cx == {2: F(4, 7), -2: F(4, 5), 3: 0, -3: 0}
    # numerator eps/2 = P(X = 1, S_1 = -1, S_2 = +-a) summed with the A-part
    assert reference_block.space.event_probability(reference_block.S.terminal.level_set(2)) == F(7, 16)


def test_reference_report(reference_block):
    rep = verify_block(reference_block)
    assert rep.passed, rep.summary()
    assert rep["E[|f|^2] = M^2 eps/2"].value == 1


@pytest.mark.parametrize("params", SWEEP, ids=str)
def test_block_identities_on_sweep(params):
    blk = build_block(params)
    rep = verify_block(blk, with_lp=False)
    assert rep.passed, rep.summary()


def test_two_formulas_of_f_agree(sweep_blocks):
    for blk in sweep_blocks:
        assert blk.f == f_alternative(blk)
        assert blk.f.is_nonnegative()


def test_independence_of_signal(sweep_blocks):
    for blk in sweep_blocks:
        eps = blk.params.epsilon
        S1 = blk.S.slices[1]
        one_A = RandomVariable.indicator(blk.space, blk.A)
        for phi in (S1, one_A):
            assert (blk.X * phi).expectation() == eps * phi.expectation()


def test_moments_match_closed_form(sweep_blocks):
    for blk in sweep_blocks:
        p = blk.params
        for k in range(1, 9):
            assert moment(blk.f, k) == p.M**k * p.epsilon / 2


def test_conditional_law_of_terminal_move(sweep_blocks):
    for blk in sweep_blocks:
        p = blk.params
        for lv in (p.a, p.b):
            up = RandomVariable.indicator(blk.space, blk.S.terminal.level_set(lv))
            ce = cond_expectation(up, 1)
            for atom in blk.space.atoms:
                on_level = (atom in blk.A_tilde) == (lv == p.a)
                expect = (lv + atom[0]) / (2 * lv) if on_level else 0
                assert ce[atom] == expect


def test_block_json_roundtrip(reference_block):
    text = json.dumps(reference_block.to_dict(), sort_keys=True)
    back = BlockModel.from_dict(json.loads(text))
    assert json.dumps(back.to_dict(), sort_keys=True) == text
    assert back.f == reference_block.f and back.params == reference_block.params
