"""
Exact linear programming with a dual certificate
================================================

Solve a textbook program over the rationals, read off the duals and let an
independent check confirm optimality.
"""

from fractions import Fraction as F

from semistatic.lp import LinearProgram, solve, verify_certificate

lp = LinearProgram(sense="max")
x = lp.add_var("x", cost=3)
y = lp.add_var("y", cost=5)
lp.add_row({x: 1}, "<=", 4)
lp.add_row({y: 2}, "<=", 12)
lp.add_row({x: 3, y: 2}, "<=", 18)

sol = solve(lp)
print("status:", sol.status, " x =", sol.x, " value =", sol.objective)
print("duals (shadow prices):", sol.duals)
print(verify_certificate(lp, sol).summary())

# tighten the last row by a third of a unit: the value drops by exactly 1/3
lp.rows[2] = (lp.rows[2][0], "<=", F(53, 3))
print("after tightening:", solve(lp).objective)

# the plain-text dump can be fed to another solver for cross-checking
print(lp.dump())
