"""
A two-period scenario tree with exact probabilities
===================================================

Build a small filtered space by hand, put a martingale on it, trade it with
a predictable strategy and check that the gains have zero mean.
"""

from fractions import Fraction as F

from semistatic.market import (
    PredictableStrategy,
    StaticClaim,
    evaluate_static,
    make_price_process,
    stochastic_integral,
    terminal_partition,
    verify_martingale,
)
from semistatic.probspace import discrete_partition, make_space

# atoms (first move, second move), all equally likely
atoms = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
after_first = [[(1, 1), (1, -1)], [(-1, 1), (-1, -1)]]
space = make_space(atoms, [F(1, 4)] * 4, [[atoms], after_first, discrete_partition(atoms)])

# S moves +-1, then +-2
S = make_price_process(space, [[0] * 4, [a[0] for a in atoms], [a[0] + 2 * a[1] for a in atoms]])
print(verify_martingale(S).summary())

# buy one share at time 0, double up after an up-move, flatten after a down-move
H = PredictableStrategy.from_cells(space, [[1], [2, 0]])
u = stochastic_integral(H, S)
print("terminal gains:", {a: str(v) for a, v in zip(atoms, u.values)}, " mean:", u.expectation())

# a call struck at 0 is a static claim, a function of S_2 only
call = evaluate_static(StaticClaim({s: max(s, 0) for s in S.terminal_values()}), S)
print("call payoff:", [str(v) for v in call.values], " price:", call.expectation())
print("cells of sigma(S_2):", terminal_partition(S))
