"""
Pasting blocks: g_m converges, the hedging cost does not
========================================================

Blocks with eps_n = 2^-n^2 and M_n = 2^n sit on disjoint pieces of mass
2^-n.  The partial sums g_m converge to g in every L^p, yet the cheapest
decomposition of g on the depth-N model grows linearly in N.
"""

from semistatic.pasting import convergence_table, default_schedule, divergence_check, paste, verify_partials

schedule = default_schedule()
model = paste(schedule, 6)
print(model.report.summary())

for p in (1, 2, 3):
    table = convergence_table(schedule, 6, p, model=model)
    print(f"p = {p}: E|g - g_m|^p for m = 0..5:", [f"{float(r['computed']):.3e}" for r in table.rows],
          "exact match:", table.all_equal)

print(verify_partials(model).summary())

res = divergence_check(schedule, 5)
for row in res.rows:
    print(f"N = {row['N']}: global cost {float(row['global_cost']):.4f}"
          f"  (N/24 = {float(row['N/24']):.4f}, decoupled: {row['decoupled']})")
print("increments:", [f"{float(i):.4f}" for i in res.increments])
