"""
One block: a tiny payoff that is expensive to hedge
===================================================

The eight-atom block carries a payoff f with E[f] = M eps / 2 that is
nevertheless hard to write as dynamic gains plus a claim on S_2: the
cheapest dominating decomposition costs a fixed fraction of M.
"""

from fractions import Fraction as F

from semistatic.blocks import BlockParams, build_block, conditional_signal, verify_block
from semistatic.decompose import (
    decomposition_dual_value,
    max_u_correlation,
    max_v_correlation,
    min_l1_decomposition,
)
from semistatic.probspace import moment

block = build_block(BlockParams(F(1, 2), F(2), F(2), F(3)))
for atom, p, s2, f in zip(block.space.atoms, block.space.probs, block.S.terminal.values, block.f.values):
    print(f"  atom {atom}: P = {p}, S_2 = {s2}, f = {f}")
print("E|f|, E|f|^2:", moment(block.f, 1), moment(block.f, 2))
print("E[X | S_2]:", conditional_signal(block))

# the short-stock + digital pair reproduces f with cost exactly M
res = min_l1_decomposition(block.S, block.f)
print("cheapest u + v >= f costs", res.cost, "(M =", block.params.M, ", M/16 =", block.params.M / 16, ")")
print("  optimal strategy:", res.strategy.cell_values())
print("  optimal claim:", {str(k): str(v) for k, v in res.claim.payoff_map.items()})
print("  dual program value:", decomposition_dual_value(block.S, block.f)[0])

# f is nearly orthogonal to both outcome spaces, which is why the cost is large
print("max E[fu]/|u|_1 =", max_u_correlation(block.S, block.f), " max E[fv]/|v|_1 =", max_v_correlation(block.S, block.f))

print(verify_block(block).summary())
