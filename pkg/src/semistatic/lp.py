"""Exact-rational linear programming.

Two-phase primal simplex on a sparse tableau with Bland's pivoting rule, so
it terminates and is deterministic.  Every optimal answer carries a dual
vector; :func:`verify_certificate` re-checks primal feasibility, dual
feasibility, complementary slackness and a zero duality gap using only the
program data and the returned vectors.

Arithmetic uses ``gmpy2.mpq`` internally when available (same exact values
as :class:`fractions.Fraction`, just faster); results are always returned as
``Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import MalformedProgram
from .probspace import format_rational
from .report import Report

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

_ZERO = _Q(0)
_ONE = _Q(1)

RELATIONS = ("<=", "=", ">=")
OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


def _q(x):
    if isinstance(x, Fraction):
        return _Q(x.numerator, x.denominator)
    return _Q(x)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(int(x.numerator), int(x.denominator))


@dataclass
class LinearProgram:
    """``sense`` c.x subject to rows ``coeffs.x rel rhs`` and per-variable bounds.

    Rows hold sparse coefficient dicts ``{column: value}``.  Bounds default
    to ``[0, +inf)``; ``None`` means unbounded on that side.
    """

    objective: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    bounds: list = field(default_factory=list)
    sense: str = "min"
    names: list = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def add_var(self, name=None, cost=0, lower=0, upper=None) -> int:
        self.objective.append(Fraction(cost))
        self.bounds.append(
            (None if lower is None else Fraction(lower), None if upper is None else Fraction(upper))
        )
        self.names.append(name if name is not None else f"x{len(self.objective) - 1}")
        return len(self.objective) - 1

    def add_row(self, coeffs, rel, rhs) -> int:
        if isinstance(coeffs, (list, tuple)):
            coeffs = {j: c for j, c in enumerate(coeffs)}
        coeffs = {j: Fraction(c) for j, c in coeffs.items() if c != 0}
        self.rows.append((coeffs, rel, Fraction(rhs)))
        return len(self.rows) - 1

    def validate(self):
        n = self.num_vars
        if self.sense not in ("min", "max"):
            raise MalformedProgram(f"sense must be 'min' or 'max', got {self.sense!r}")
        if len(self.bounds) != n:
            raise MalformedProgram(f"{len(self.bounds)} bounds for {n} variables")
        for i, (coeffs, rel, _) in enumerate(self.rows):
            if rel not in RELATIONS:
                raise MalformedProgram(f"row {i}: unknown relation {rel!r}")
            for j in coeffs:
                if not isinstance(j, int) or not 0 <= j < n:
                    raise MalformedProgram(f"row {i}: column {j!r} out of range")

    def value(self, x) -> Fraction:
        return sum((c * xi for c, xi in zip(self.objective, x)), Fraction(0))

    def dump(self) -> str:
        """Plain-text table, one line per row, values as ``num/den``."""
        self.validate()
        lines = [f"sense {self.sense}", "vars " + " ".join(self.names)]
        lines.append("obj " + " ".join(format_rational(c) for c in self.objective))
        for j, (lo, hi) in enumerate(self.bounds):
            lo_s = "-inf" if lo is None else format_rational(lo)
            hi_s = "+inf" if hi is None else format_rational(hi)
            lines.append(f"bound {self.names[j]} {lo_s} {hi_s}")
        for coeffs, rel, rhs in self.rows:
            dense = [format_rational(coeffs.get(j, 0)) for j in range(self.num_vars)]
            lines.append("row " + " ".join(dense) + f" {rel} {format_rational(rhs)}")
        return "\n".join(lines) + "\n"


@dataclass
class LPSolution:
    status: str
    x: Optional[list] = None
    duals: Optional[list] = None
    objective: Optional[Fraction] = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Sparse simplex tableau in the form  min c.z  s.t.  A z = b, z >= 0."""

    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows  # list of dict col -> _Q
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols
        self.pivots = 0

    def pivot(self, r, j, cost_rows):
        row = self.rows[r]
        piv = row[j]
        if piv != _ONE:
            inv = _ONE / piv
            row = {k: v * inv for k, v in row.items()}
            self.rows[r] = row
            self.rhs[r] = self.rhs[r] * inv
        b_r = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(j)
            if f is None:
                continue
            for k, v in row.items():
                nv = other.get(k, _ZERO) - f * v
                if nv:
                    other[k] = nv
                else:
                    other.pop(k, None)
            if b_r:
                self.rhs[i] -= f * b_r
        for cost in cost_rows:
            f = cost.get(j)
            if f is None:
                continue
            for k, v in row.items():
                nv = cost.get(k, _ZERO) - f * v
                if nv:
                    cost[k] = nv
                else:
                    cost.pop(k, None)
        self.basis[r] = j
        self.pivots += 1

    def run(self, cost, allowed) -> str:
        """Bland's rule until optimal or unbounded; ``cost`` holds reduced costs."""
        while True:
            entering = None
            for j, v in cost.items():
                if v < 0 and allowed(j) and (entering is None or j < entering):
                    entering = j
            if entering is None:
                return OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is None or a <= 0:
                    continue
                ratio = self.rhs[i] / a
                key = (ratio, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], entering, [cost])


def solve(lp: LinearProgram) -> LPSolution:
    """Solve exactly.  Status is ``optimal``, ``infeasible`` or ``unbounded``."""
    lp.validate()
    sign = 1 if lp.sense == "min" else -1
    c = [sign * _q(v) for v in lp.objective]

    # column transform: x_j = offset_j + sum(s * z_k)
    offsets = []
    col_map = []  # list of (k, s) per original variable
    std_cost = []
    bound_rows = []  # (k, ub) meaning z_k <= ub
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            offsets.append(_q(lo))
            k = len(std_cost)
            std_cost.append(c[j])
            col_map.append([(k, 1)])
            if hi is not None:
                bound_rows.append((k, _q(hi) - _q(lo)))
        elif hi is not None:
            offsets.append(_q(hi))
            k = len(std_cost)
            std_cost.append(-c[j])
            col_map.append([(k, -1)])
        else:
            offsets.append(_ZERO)
            k = len(std_cost)
            std_cost.extend([c[j], -c[j]])
            col_map.append([(k, 1), (k + 1, -1)])
    nstruct = len(std_cost)

    # rows in structural columns: (coeffs, rel, rhs)
    raw = []
    for coeffs, rel, rhs in lp.rows:
        row = {}
        b = _q(rhs)
        for j, a in coeffs.items():
            a = _q(a)
            b -= a * offsets[j]
            for k, s in col_map[j]:
                row[k] = row.get(k, _ZERO) + (a if s == 1 else -a)
        raw.append(({k: v for k, v in row.items() if v}, rel, b))
    for k, ub in bound_rows:
        raw.append(({k: _ONE}, "<=", ub))

    # orientation and auxiliary columns
    m = len(raw)
    orient = []
    kinds = []
    for row, rel, b in raw:
        if rel == "<=":
            flip = b < 0
        elif rel == ">=":
            flip = b <= 0
        else:
            flip = b < 0
        o = -1 if flip else 1
        orient.append(o)
        eff = rel if not flip else {"<=": ">=", ">=": "<=", "=": "="}[rel]
        kinds.append(eff)

    ncols = nstruct
    slack_col = [None] * m
    for i in range(m):
        if kinds[i] != "=":
            slack_col[i] = ncols
            ncols += 1
    art_start = ncols
    id_col = [None] * m
    rows, rhs, basis = [], [], []
    for i, (row, _, b) in enumerate(raw):
        o = orient[i]
        trow = {k: (v if o == 1 else -v) for k, v in row.items()}
        if kinds[i] == "<=":
            trow[slack_col[i]] = _ONE
            id_col[i] = slack_col[i]
        else:
            if kinds[i] == ">=":
                trow[slack_col[i]] = -_ONE
            trow[ncols] = _ONE
            id_col[i] = ncols
            ncols += 1
        rows.append(trow)
        rhs.append(b if o == 1 else -b)
        basis.append(id_col[i])
    tab = _Tableau(rows, rhs, basis, ncols)
    is_art = lambda j: j >= art_start  # noqa: E731

    # phase 1
    if ncols > art_start:
        cost1 = {}
        for i, row in enumerate(tab.rows):
            if is_art(tab.basis[i]):
                for k, v in row.items():
                    if not is_art(k):
                        cost1[k] = cost1.get(k, _ZERO) - v
        cost1 = {k: v for k, v in cost1.items() if v}
        tab.run(cost1, lambda j: not is_art(j))
        infeas = sum((tab.rhs[i] for i in range(m) if is_art(tab.basis[i])), _ZERO)
        if infeas > 0:
            return LPSolution(INFEASIBLE, pivots=tab.pivots)
        # drive zero-level artificials out where possible; rows that cannot be
        # pivoted are redundant and stay inert with the artificial at 0
        for i in range(m):
            if is_art(tab.basis[i]):
                cands = [k for k in tab.rows[i] if not is_art(k)]
                if cands:
                    tab.pivot(i, min(cands), [])

    # phase 2 reduced costs: r_j = c_j - sum_i c_B(i) a_ij
    full_cost = {k: v for k, v in enumerate(std_cost) if v}
    cost2 = dict(full_cost)
    for i, row in enumerate(tab.rows):
        cb = full_cost.get(tab.basis[i])
        if cb:
            for k, v in row.items():
                nv = cost2.get(k, _ZERO) - cb * v
                if nv:
                    cost2[k] = nv
                else:
                    cost2.pop(k, None)
    for i in range(m):
        cost2.pop(tab.basis[i], None)
    status = tab.run(cost2, lambda j: not is_art(j))
    if status == UNBOUNDED:
        return LPSolution(UNBOUNDED, pivots=tab.pivots)

    z = [_ZERO] * ncols
    for i in range(m):
        z[tab.basis[i]] = tab.rhs[i]
    x = []
    for j in range(lp.num_vars):
        v = offsets[j]
        for k, s in col_map[j]:
            v += z[k] if s == 1 else -z[k]
        x.append(_frac(v))
    # y_i = c(id_col) - r(id_col) with c = 0 on slack/artificial columns
    y_std = [-cost2.get(id_col[i], _ZERO) for i in range(m)]
    duals = [_frac(sign * orient[i] * y_std[i]) for i in range(len(lp.rows))]
    return LPSolution(OPTIMAL, x=x, duals=duals, objective=lp.value(x), pivots=tab.pivots)


def verify_certificate(lp: LinearProgram, sol: LPSolution) -> Report:
    """Independent exact check of an optimal solution and its dual vector.

    Works in minimization form: for ``max`` programs both the objective and
    the duals are negated first.  Dual sign convention (min form): ``>=``
    rows carry y >= 0, ``<=`` rows y <= 0, equalities are free.
    """
    rep = Report("LP optimality certificate")
    if not sol.optimal:
        rep.add("status is optimal", False, sol.status, OPTIMAL)
        return rep
    s = 1 if lp.sense == "min" else -1
    c = [s * v for v in lp.objective]
    y = [s * v for v in sol.duals]
    x = sol.x

    rows_ok, slack_ok, sign_ok = True, True, True
    for (coeffs, rel, rhs), yi in zip(lp.rows, y):
        lhs = sum((a * x[j] for j, a in coeffs.items()), Fraction(0))
        if rel == "<=":
            rows_ok &= lhs <= rhs
            sign_ok &= yi <= 0
        elif rel == ">=":
            rows_ok &= lhs >= rhs
            sign_ok &= yi >= 0
        else:
            rows_ok &= lhs == rhs
        if yi != 0:
            slack_ok &= lhs == rhs
    bounds_ok = all(
        (lo is None or xj >= lo) and (hi is None or xj <= hi)
        for xj, (lo, hi) in zip(x, lp.bounds)
    )
    rep.add("primal rows satisfied", rows_ok)
    rep.add("primal bounds satisfied", bounds_ok)
    rep.add("dual row signs", sign_ok)

    d = list(c)
    for (coeffs, _, _), yi in zip(lp.rows, y):
        if yi:
            for j, a in coeffs.items():
                d[j] -= a * yi
    reduced_ok = True
    dual_obj = sum((rhs * yi for (_, _, rhs), yi in zip(lp.rows, y)), Fraction(0))
    for j, (dj, (lo, hi)) in enumerate(zip(d, lp.bounds)):
        if dj > 0:
            if lo is None:
                reduced_ok = False
                continue
            dual_obj += lo * dj
            slack_ok &= x[j] == lo
        elif dj < 0:
            if hi is None:
                reduced_ok = False
                continue
            dual_obj += hi * dj
            slack_ok &= x[j] == hi
    rep.add("reduced costs consistent with bounds", reduced_ok)
    rep.add("complementary slackness", slack_ok)
    primal_obj = sum((cj * xj for cj, xj in zip(c, x)), Fraction(0))
    rep.add("objective matches x", s * primal_obj == sol.objective, sol.objective, s * primal_obj)
    rep.add("zero duality gap", primal_obj == dual_obj, s * dual_obj, s * primal_obj)
    return rep
