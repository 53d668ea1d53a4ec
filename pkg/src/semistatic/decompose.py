"""LP builders for semi-static decompositions and correlation bounds.

``min_l1_decomposition`` finds the cheapest ``u + v >= f`` with ``u`` a
terminal gain of a predictable strategy and ``v`` a function of S_T, cost
measured as ``E|u| + E|v|``.  The inequality (rather than equality) is what
makes the optimum a lower bound for every dominating representation.

``decomposition_dual_value`` states the same quantity as its dual program
over densities, built from scratch, so the two routes only share the simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import SpaceMismatch
from .lp import LinearProgram, LPSolution, solve, verify_certificate
from .market import (
    PredictableStrategy,
    PriceProcess,
    StaticClaim,
    evaluate_static,
    stochastic_integral,
    terminal_partition,
)
from .probspace import RandomVariable, cond_expectation_given, moment
from .report import Report, rows_to_csv


@dataclass
class DecompositionResult:
    cost: Fraction
    strategy: PredictableStrategy
    claim: StaticClaim
    u: RandomVariable
    v: RandomVariable
    slack: RandomVariable
    lp: LinearProgram
    solution: LPSolution

    @property
    def dual_certificate(self) -> list:
        return self.solution.duals

    def certificate(self) -> Report:
        return verify_certificate(self.lp, self.solution)


def _check_space(S: PriceProcess, f: RandomVariable):
    if f.space is not S.space and f.space != S.space:
        raise SpaceMismatch("payoff and price process live on different spaces")


def _strategy_vars(lp: LinearProgram, S: PriceProcess):
    """One free position per cell of F_{t-1}; returns (vars, u-expressions)."""
    space = S.space
    H_vars = []
    for t in range(1, S.horizon + 1):
        n_cells = len(space.partition(t - 1))
        H_vars.append([lp.add_var(f"H{t}_{c}", lower=None) for c in range(n_cells)])
    u_expr = [dict() for _ in space.atoms]
    for t in range(1, S.horizon + 1):
        inc = S.increment(t).values
        cells = space.cell_index(t - 1)
        for i, (c, d) in enumerate(zip(cells, inc)):
            if d:
                var = H_vars[t - 1][c]
                u_expr[i][var] = u_expr[i].get(var, 0) + d
    return H_vars, u_expr


def _claim_vars(lp: LinearProgram, S: PriceProcess):
    values = sorted(S.terminal_values())
    h_vars = {s: lp.add_var(f"h[{s}]", lower=None) for s in values}
    return values, h_vars


def _read_strategy(S, H_vars, x) -> PredictableStrategy:
    return PredictableStrategy.from_cells(S.space, [[x[v] for v in row] for row in H_vars])


def min_l1_decomposition(S: PriceProcess, f: RandomVariable) -> DecompositionResult:
    """Exact minimum of ||u||_1 + ||v||_1 over u in U, v in V with u + v >= f.

    Always feasible: the constant claim ``max f`` dominates ``f``.
    """
    _check_space(S, f)
    space = S.space
    lp = LinearProgram(sense="min")
    H_vars, u_expr = _strategy_vars(lp, S)
    values, h_vars = _claim_vars(lp, S)
    t_vars = [lp.add_var(f"t{i}", cost=p) for i, p in enumerate(space.probs)]
    mass = {s: Fraction(0) for s in values}
    for s, p in zip(S.terminal.values, space.probs):
        mass[s] += p
    s_vars = {s: lp.add_var(f"s[{s}]", cost=mass[s]) for s in values}

    for i, expr in enumerate(u_expr):
        if expr:
            lp.add_row({t_vars[i]: 1, **{k: -c for k, c in expr.items()}}, ">=", 0)
            lp.add_row({t_vars[i]: 1, **expr}, ">=", 0)
    for s in values:
        lp.add_row({s_vars[s]: 1, h_vars[s]: -1}, ">=", 0)
        lp.add_row({s_vars[s]: 1, h_vars[s]: 1}, ">=", 0)
    for i, (expr, st) in enumerate(zip(u_expr, S.terminal.values)):
        row = dict(expr)
        row[h_vars[st]] = row.get(h_vars[st], 0) + 1
        lp.add_row(row, ">=", f.values[i])

    sol = solve(lp)
    if not sol.optimal:  # pragma: no cover - feasible and bounded below by 0
        raise RuntimeError(f"decomposition LP returned {sol.status}")
    H = _read_strategy(S, H_vars, sol.x)
    h = StaticClaim({s: sol.x[h_vars[s]] for s in values})
    u = stochastic_integral(H, S)
    v = evaluate_static(h, S)
    return DecompositionResult(sol.objective, H, h, u, v, u + v - f, lp, sol)


def decomposition_dual_value(S: PriceProcess, f: RandomVariable):
    """Dual route: max E[f q] over densities q >= 0 with

    * E[q | S_T] <= 1  (q has norm <= 1 against V), and
    * q = r + w with |r| <= 1 and w orthogonal to every gains increment
      H_t (S_t - S_{t-1}) 1_cell  (q has norm <= 1 against U).

    Returns ``(value, q)``; by LP duality the value equals the primal cost.
    """
    _check_space(S, f)
    space = S.space
    lp = LinearProgram(sense="max")
    q = [lp.add_var(f"q{i}", cost=p * fv) for i, (p, fv) in enumerate(zip(space.probs, f.values))]
    r = [lp.add_var(f"r{i}", lower=-1, upper=1) for i in range(len(space))]
    for t in range(1, S.horizon + 1):
        inc = S.increment(t).values
        cells = space.cell_index(t - 1)
        for c in range(len(space.partition(t - 1))):
            row = {}
            for i, (ci, d) in enumerate(zip(cells, inc)):
                if ci == c and d:
                    w = space.probs[i] * d
                    row[q[i]] = w
                    row[r[i]] = -w
            if row:
                lp.add_row(row, "=", 0)
    for cell in terminal_partition(S):
        idx = [space.index(a) for a in cell]
        lp.add_row({q[i]: space.probs[i] for i in idx}, "<=", sum(space.probs[i] for i in idx))
    sol = solve(lp)
    if not sol.optimal:  # pragma: no cover
        raise RuntimeError(f"dual decomposition LP returned {sol.status}")
    return sol.objective, RandomVariable(space, [sol.x[v] for v in q])


def _u_correlation_lp(S: PriceProcess, f: RandomVariable):
    space = S.space
    lp = LinearProgram(sense="max")
    H_vars, u_expr = _strategy_vars(lp, S)
    t_vars = [lp.add_var(f"t{i}") for i in range(len(space))]
    for k in range(lp.num_vars):
        lp.objective[k] = Fraction(0)
    for i, expr in enumerate(u_expr):
        for k, c in expr.items():
            lp.objective[k] += space.probs[i] * f.values[i] * c
    for i, expr in enumerate(u_expr):
        lp.add_row({t_vars[i]: 1, **{k: -c for k, c in expr.items()}}, ">=", 0)
        lp.add_row({t_vars[i]: 1, **expr}, ">=", 0)
    lp.add_row({t_vars[i]: p for i, p in enumerate(space.probs)}, "<=", 1)
    sol = solve(lp)
    return lp, sol, H_vars


def max_u_correlation(S: PriceProcess, f: RandomVariable) -> Fraction:
    """sup{ E[f u] : u in U, ||u||_1 <= 1 } by LP."""
    _check_space(S, f)
    _, sol, _ = _u_correlation_lp(S, f)
    if not sol.optimal:  # pragma: no cover - feasible set is bounded in u
        raise RuntimeError(f"correlation LP returned {sol.status}")
    return sol.objective


def max_u_correlation_witness(S: PriceProcess, f: RandomVariable):
    """Optimal value plus the maximizing strategy and the LP certificate report."""
    _check_space(S, f)
    lp, sol, H_vars = _u_correlation_lp(S, f)
    return sol.objective, _read_strategy(S, H_vars, sol.x), verify_certificate(lp, sol)


def max_v_correlation(S: PriceProcess, f: RandomVariable) -> Fraction:
    """sup{ E[f v] : v in V, ||v||_1 <= 1 } = max_s |E[f | S_T = s]|.

    The supremum is attained by the indicator of the best terminal cell,
    normalized by its probability.
    """
    _check_space(S, f)
    ce = cond_expectation_given(f, terminal_partition(S))
    return max(abs(x) for x in ce.values)


def decomposition_checks(block) -> Report:
    """LP-backed checks on one block: cost bounds, correlations, certificates."""
    p = block.params
    S, f = block.S, block.f
    rep = Report("decomposition")
    res = min_l1_decomposition(S, f)
    cert = res.certificate()
    rep.extend(cert, prefix="cost LP: ")
    rep.add("u + v - f >= 0", res.slack.is_nonnegative())
    norm_u, norm_v = moment(res.u, 1), moment(res.v, 1)
    rep.add("cost = ||u||_1 + ||v||_1", res.cost == norm_u + norm_v, res.cost, norm_u + norm_v)
    rep.add("cost <= M (canonical pair feasible)", res.cost <= p.M, res.cost, p.M)
    rep.add("cost >= M/24", res.cost >= p.M / 24, res.cost, p.M / 24)
    rep.add("cost >= M/16", res.cost >= p.M / 16, res.cost, p.M / 16, hard=False)
    dual_value, _ = decomposition_dual_value(S, f)
    rep.add("dual program value = cost", dual_value == res.cost, dual_value, res.cost)

    cu = max_u_correlation(S, f)
    cv = max_v_correlation(S, f)
    eM = p.epsilon * p.M
    rep.add("max E[fu]/||u||_1 <= eps M", cu <= eM, cu, eM)
    rep.add("max E[fv]/||v||_1 <= 8 eps M", cv <= 8 * eM, cv, 8 * eM)
    rep.add("max E[fv]/||v||_1 <= 12 eps M", cv <= 12 * eM, cv, 12 * eM)
    Ef2 = moment(f, 2)
    chain = cu * norm_u + cv * norm_v
    rep.add("E[f^2] <= c_U ||u*||_1 + c_V ||v*||_1", Ef2 <= chain, Ef2, chain)
    return rep


REPORT_COLUMNS = [
    "epsilon", "M", "a", "b", "cost", "M/16", "M/24",
    "max_u_corr", "eps*M", "max_v_corr", "8*eps*M", "12*eps*M",
    "cost>=M/24", "cost>=M/16", "u_corr<=eps*M", "v_corr<=8eps*M", "v_corr<=12eps*M",
]


def block_row(block) -> dict:
    """One CSV row summarizing the LP quantities of a block."""
    p = block.params
    cost = min_l1_decomposition(block.S, block.f).cost
    cu = max_u_correlation(block.S, block.f)
    cv = max_v_correlation(block.S, block.f)
    eM = p.epsilon * p.M
    return {
        "epsilon": p.epsilon, "M": p.M, "a": p.a, "b": p.b,
        "cost": cost, "M/16": p.M / 16, "M/24": p.M / 24,
        "max_u_corr": cu, "eps*M": eM, "max_v_corr": cv,
        "8*eps*M": 8 * eM, "12*eps*M": 12 * eM,
        "cost>=M/24": cost >= p.M / 24, "cost>=M/16": cost >= p.M / 16,
        "u_corr<=eps*M": cu <= eM, "v_corr<=8eps*M": cv <= 8 * eM,
        "v_corr<=12eps*M": cv <= 12 * eM,
    }


def rows_csv(rows) -> str:
    return rows_to_csv(rows, REPORT_COLUMNS)
