from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from semistatic.errors import MalformedProgram
from semistatic.lp import LinearProgram, solve, verify_certificate


def _lp(sense="min"):
    return LinearProgram(sense=sense)


def test_single_lower_bound():
    lp = _lp()
    x = lp.add_var("x", cost=1, lower=None)
    lp.add_row({x: 1}, ">=", 3)
    sol = solve(lp)
    assert sol.status == "optimal" and sol.x == [3] and sol.objective == 3
    assert sol.duals == [1]
    assert verify_certificate(lp, sol).passed


def test_infeasible():
    lp = _lp()
    x = lp.add_var("x", lower=None)
    lp.add_row({x: 1}, "<=", -1)
    lp.add_row({x: 1}, ">=", 1)
    assert solve(lp).status == "infeasible"
    assert not verify_certificate(lp, solve(lp)).passed


def test_unbounded():
    lp = _lp("max")
    lp.add_var("x", cost=1, lower=None)
    assert solve(lp).status == "unbounded"


def test_textbook_max():
    # max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), value 36
    lp = _lp("max")
    x = lp.add_var("x", 3)
    y = lp.add_var("y", 5)
    lp.add_row({x: 1}, "<=", 4)
    lp.add_row({y: 2}, "<=", 12)
    lp.add_row({x: 3, y: 2}, "<=", 18)
    sol = solve(lp)
    assert sol.x == [2, 6] and sol.objective == 36
    assert sol.duals == [0, F(3, 2), 1]
    assert verify_certificate(lp, sol).passed


def test_degenerate_redundant_equalities():
    lp = _lp()
    x = lp.add_var("x", 1)
    y = lp.add_var("y", 2)
    lp.add_row({x: 1, y: 1}, "=", 1)
    lp.add_row({x: 2, y: 2}, "=", 2)
    lp.add_row({x: 1}, "<=", F(1, 3))
    sol = solve(lp)
    assert sol.objective == F(5, 3)
    assert verify_certificate(lp, sol).passed


def test_bounds_are_respected():
    lp = _lp("max")
    lp.add_var("x", 1, lower=-2, upper=F(7, 2))
    lp.add_var("y", 1, lower=None, upper=-1)
    sol = solve(lp)
    assert sol.x == [F(7, 2), -1] and sol.objective == F(5, 2)
    assert verify_certificate(lp, sol).passed


def test_malformed_programs():
    lp = _lp()
    lp.add_var("x")
    lp.add_row({3: 1}, "<=", 1)
    with pytest.raises(MalformedProgram):
        solve(lp)
    lp = _lp()
    lp.add_var("x")
    lp.add_row({0: 1}, "<", 1)
    with pytest.raises(MalformedProgram):
        solve(lp)
    with pytest.raises(MalformedProgram):
        solve(LinearProgram(sense="maximize"))


def test_dump_format():
    lp = _lp()
    x = lp.add_var("x", F(1, 2), lower=None)
    lp.add_row({x: F(-2, 3)}, "<=", 1)
    text = lp.dump()
    assert "obj 1/2" in text
    assert "bound x -inf +inf" in text
    assert "row -2/3 <= 1/1" in text


# random programs checked against scipy's HiGHS as a floating-point oracle

coef = st.integers(-5, 5)


@st.composite
def random_programs(draw):
    n = draw(st.integers(1, 5))
    m = draw(st.integers(0, 6))
    lp = LinearProgram(sense=draw(st.sampled_from(["min", "max"])))
    for j in range(n):
        kind = draw(st.sampled_from(["nonneg", "free", "box", "upper"]))
        lo, hi = {"nonneg": (0, None), "free": (None, None), "box": (-3, 4), "upper": (None, 2)}[kind]
        lp.add_var(f"x{j}", cost=draw(coef), lower=lo, upper=hi)
    for _ in range(m):
        row = {j: draw(coef) for j in range(n)}
        lp.add_row(row, draw(st.sampled_from(["<=", "=", ">="])), draw(st.integers(-6, 6)))
    return lp


def _scipy(lp):
    n = lp.num_vars
    s = 1 if lp.sense == "min" else -1
    c = [s * float(v) for v in lp.objective]
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for coeffs, rel, rhs in lp.rows:
        dense = [float(coeffs.get(j, 0)) for j in range(n)]
        if rel == "<=":
            A_ub.append(dense); b_ub.append(float(rhs))
        elif rel == ">=":
            A_ub.append([-v for v in dense]); b_ub.append(-float(rhs))
        else:
            A_eq.append(dense); b_eq.append(float(rhs))
    bounds = [(None if lo is None else float(lo), None if hi is None else float(hi)) for lo, hi in lp.bounds]
    res = linprog(c, A_ub=A_ub or None, b_ub=b_ub or None, A_eq=A_eq or None, b_eq=b_eq or None,
                  bounds=bounds, method="highs")
    return res


@settings(max_examples=200, deadline=None)
@given(random_programs())
def test_random_programs_match_scipy(lp):
    sol = solve(lp)
    ref = _scipy(lp)
    expected = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(ref.status)
    assume(expected is not None)
    assert sol.status == expected
    if sol.optimal:
        s = 1 if lp.sense == "min" else -1
        assert float(sol.objective) == pytest.approx(s * ref.fun, abs=1e-7)
        assert verify_certificate(lp, sol).passed


@settings(max_examples=100, deadline=None)
@given(random_programs(), st.builds(F, st.integers(1, 9), st.integers(1, 9)))
def test_scale_equivariance(lp, lam):
    sol = solve(lp)
    scaled = LinearProgram([lam * c for c in lp.objective], list(lp.rows), list(lp.bounds), lp.sense, list(lp.names))
    sol2 = solve(scaled)
    assert sol2.status == sol.status
    if sol.optimal:
        assert sol2.objective == lam * sol.objective
        # Bland's rule sees the same sign pattern, so the same vertex comes back
        assert sol2.x == sol.x
        assert lp.value(sol2.x) == sol.objective


@settings(max_examples=50, deadline=None)
@given(random_programs())
def test_determinism(lp):
    a, b = solve(lp), solve(lp)
    assert (a.status, a.x, a.duals, a.objective, a.pivots) == (b.status, b.x, b.duals, b.objective, b.pivots)


def test_certificate_detects_tampering():
    lp = _lp("max")
    x = lp.add_var("x", 3)
    y = lp.add_var("y", 5)
    lp.add_row({x: 1}, "<=", 4)
    lp.add_row({y: 2}, "<=", 12)
    lp.add_row({x: 3, y: 2}, "<=", 18)
    sol = solve(lp)
    sol.duals = [0, F(3, 2), F(11, 10)]
    assert not verify_certificate(lp, sol).passed
    sol = solve(lp)
    sol.x = [F(1), F(6)]
    assert not verify_certificate(lp, sol).passed


def test_results_are_fractions():
    lp = _lp()
    x = lp.add_var("x", F(1, 3))
    lp.add_row({x: 3}, ">=", 2)
    sol = solve(lp)
    assert all(type(v) is F for v in sol.x + sol.duals + [sol.objective])
    assert np.isclose(float(sol.objective), 2 / 9)
