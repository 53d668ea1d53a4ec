"""Pasting blocks into one model, truncated at depth N.

Block n sits on an F_0-measurable piece Omega_n of mass 2^-n with parameters
eps_n = 2^(-n^2), M_n = 2^n and its own terminal levels a_n, b_n.  The mass
2^-N left over by truncation goes to a single dummy atom with S = 0 and
g = 0, so the weights 2^-n appear unchanged in every identity.

Dummy atom label: ``(0,)``.  Block atoms: ``(n, s1, x, up)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Callable, Sequence

from . import blocks as _blocks
from .decompose import min_l1_decomposition
from .errors import IndexOutOfRange, InvalidDepth, InvalidRange
from .market import (
    PredictableStrategy,
    PriceProcess,
    StaticClaim,
    evaluate_static,
    make_price_process,
    price_process_from_dict,
    price_process_to_dict,
    stochastic_integral,
    terminal_partition,
    verify_martingale,
)
from .probspace import (
    RandomVariable,
    discrete_partition,
    format_rational,
    make_space,
    moment,
    parse_rational,
)
from .report import Report, rows_to_csv

DUMMY = (0,)


def _eps(n):
    return Fraction(1, 2 ** (n * n))


def _M(n):
    return Fraction(2**n)


def _a(n):
    return 2 + Fraction(1, 4 * n)


def _b(n):
    return 3 - Fraction(1, 4 * n)


def _mass(n):
    return Fraction(1, 2**n)


@dataclass(frozen=True)
class PastingSchedule:
    """Per-block parameters as functions of the block index n >= 1."""

    epsilon: Callable = _eps
    M: Callable = _M
    a: Callable = _a
    b: Callable = _b
    block_mass: Callable = _mass

    @classmethod
    def from_table(cls, params: Sequence, masses: Sequence) -> "PastingSchedule":
        """Schedule read from explicit per-block parameters (index n = 1..len)."""
        params, masses = tuple(params), tuple(masses)
        return cls(
            epsilon=lambda n: params[n - 1].epsilon,
            M=lambda n: params[n - 1].M,
            a=lambda n: params[n - 1].a,
            b=lambda n: params[n - 1].b,
            block_mass=lambda n: masses[n - 1],
        )

    def params(self, n: int) -> _blocks.BlockParams:
        return _blocks.BlockParams(self.epsilon(n), self.M(n), self.a(n), self.b(n))

    def levels_distinct(self, N: int) -> bool:
        vals = [self.a(n) for n in range(1, N + 1)] + [self.b(n) for n in range(1, N + 1)]
        return len(set(vals)) == len(vals) and all(2 <= v <= 3 for v in vals)


def default_schedule() -> PastingSchedule:
    """eps_n = 2^(-n^2), M_n = 2^n, a_n = 2 + 1/(4n), b_n = 3 - 1/(4n), P(Omega_n) = 2^-n."""
    return PastingSchedule()


@dataclass(frozen=True, eq=False)
class PastedModel:
    depth: int
    schedule: PastingSchedule
    blocks: tuple
    space: object
    S: PriceProcess
    block_events: tuple  # Omega_1..Omega_N
    dummy_event: frozenset
    g_full: RandomVariable
    g_partials: tuple  # g_0..g_N

    @cached_property
    def report(self) -> Report:
        return verify_pasted(self)

    def block_atom(self, n: int, label) -> tuple:
        return (n,) + tuple(label)

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "block_params": [b.params.to_dict() for b in self.blocks],
            "block_masses": [
                format_rational(self.space.event_probability(ev)) for ev in self.block_events
            ],
            "price_process": price_process_to_dict(self.S),
            "g_full": [format_rational(v) for v in self.g_full.values],
        }

    @classmethod
    def from_dict(cls, data) -> "PastedModel":
        """Load a dumped model; the stored space, S and g are used as written."""
        N = int(data["depth"])
        params = [
            _blocks.BlockParams(**{k: parse_rational(v) for k, v in d.items()})
            for d in data["block_params"]
        ]
        masses = [parse_rational(m) for m in data["block_masses"]]
        schedule = PastingSchedule.from_table(params, masses)
        S = price_process_from_dict(data["price_process"])
        space = S.space
        g_full = RandomVariable(space, [parse_rational(v) for v in data["g_full"]])
        events = tuple(space.event(lambda a, n=n: a[0] == n) for n in range(1, N + 1))
        partials = [RandomVariable.constant(space, 0)]
        for ev in events:
            partials.append(partials[-1] + g_full * RandomVariable.indicator(space, ev))
        blks = tuple(_blocks.build_block(p) for p in params)
        return cls(N, schedule, blks, space, S, events, frozenset([DUMMY]), g_full, tuple(partials))


def paste(schedule: PastingSchedule, depth: int) -> PastedModel:
    if not isinstance(depth, int) or depth < 1:
        raise InvalidDepth(f"depth must be a positive integer, got {depth!r}")
    N = depth
    blks = tuple(_blocks.build_block(schedule.params(n)) for n in range(1, N + 1))
    atoms, probs = [], []
    for n, blk in enumerate(blks, start=1):
        w = schedule.block_mass(n)
        for a, p in zip(blk.space.atoms, blk.space.probs):
            atoms.append((n,) + a)
            probs.append(w * p)
    residual = 1 - sum((schedule.block_mass(n) for n in range(1, N + 1)), Fraction(0))
    atoms.append(DUMMY)
    probs.append(residual)

    f0 = [[a for a in atoms if a[0] == n] for n in range(1, N + 1)] + [[DUMMY]]
    f1 = [
        [a for a in atoms if a[:3] == (n, s1, x)]
        for n in range(1, N + 1)
        for s1 in (1, -1)
        for x in (0, 1)
    ] + [[DUMMY]]
    space = make_space(atoms, probs, [f0, f1, discrete_partition(atoms)])

    def lift(rv_of_block: Callable) -> list:
        vals = []
        for a in atoms:
            if a == DUMMY:
                vals.append(0)
            else:
                vals.append(rv_of_block(a[0])[a[1:]])
        return vals

    S = make_price_process(space, [lift(lambda n, t=t: blks[n - 1].S.slices[t]) for t in range(3)])
    f_lifted = RandomVariable(space, lift(lambda n: blks[n - 1].f))
    events = tuple(space.event(lambda a, n=n: a[0] == n) for n in range(1, N + 1))
    partials = [RandomVariable.constant(space, 0)]
    for n in range(1, N + 1):
        partials.append(partials[-1] + f_lifted * RandomVariable.indicator(space, events[n - 1]))
    model = PastedModel(
        N, schedule, blks, space, S, events, frozenset([DUMMY]), partials[-1], tuple(partials)
    )
    model.report  # verify every block in place now rather than on first access
    return model


def restrict_to_block(model: PastedModel, n: int, rv: RandomVariable) -> RandomVariable:
    blk = model.blocks[n - 1]
    return RandomVariable(blk.space, [rv[(n,) + a] for a in blk.space.atoms])


def verify_pasted(model: PastedModel) -> Report:
    """Structural identities of the pasted model, each block re-checked in place."""
    sch, space, N = model.schedule, model.space, model.depth
    rep = Report(f"pasted model N={N}")
    f0_cells = {frozenset(c) for c in space.partition(0)}
    rep.add(
        "{Omega_n} u {Omega_0} is the F_0 partition",
        f0_cells == set(model.block_events) | {model.dummy_event},
    )
    masses_ok = all(
        space.event_probability(ev) == sch.block_mass(n)
        for n, ev in enumerate(model.block_events, start=1)
    )
    rep.add("P(Omega_n) = 2^-n", masses_ok)
    dummy_mass = space.event_probability(model.dummy_event)
    rep.add("P(Omega_0) = 2^-N", dummy_mass == Fraction(1, 2**N), dummy_mass, Fraction(1, 2**N))
    rep.add(
        "S = 0 and g = 0 on Omega_0",
        all(s[DUMMY] == 0 for s in model.S.slices) and model.g_full[DUMMY] == 0,
    )
    rep.add("a_n, b_n pairwise distinct in [2, 3]", sch.levels_distinct(N))
    ident_ok = True
    for n, ev in enumerate(model.block_events, start=1):
        lv = {sch.a(n), sch.b(n)}
        ident_ok &= ev == space.event(lambda a: abs(model.S.terminal[a]) in lv)
    rep.add("Omega_n = {|S_2| in {a_n, b_n}}", ident_ok)
    rep.add("g_m >= 0 for all m", all(g.is_nonnegative() for g in model.g_partials))
    rep.extend(verify_martingale(model.S), prefix="pasted: ")

    restrict_ok = True
    for n, blk in enumerate(model.blocks, start=1):
        w = sch.block_mass(n)
        probs = [space.prob((n,) + a) / w for a in blk.space.atoms]
        restrict_ok &= tuple(probs) == blk.space.probs
        for t in range(3):
            restrict_ok &= restrict_to_block(model, n, model.S.slices[t]) == blk.S.slices[t]
        restrict_ok &= restrict_to_block(model, n, model.g_full) == blk.f
        restrict_ok &= blk.f == _blocks.f_alternative(blk)
        restrict_ok &= verify_martingale(blk.S).passed
    rep.add("each block recovered by restriction and renormalization", restrict_ok)
    return rep


def closed_form_tail(p: int, start: int, stop: int) -> Fraction:
    """(1/2) sum_{n=start}^{stop} 2^(-n(n+1-p))."""
    return Fraction(1, 2) * sum(
        (Fraction(2) ** (-n * (n + 1 - p)) for n in range(start, stop + 1)), Fraction(0)
    )


def infinite_tail_bounds(p: int, N: int):
    """Exact interval containing (1/2) sum_{n>N} 2^(-n(n+1-p))."""
    K = max(N + 1, p)
    lower = closed_form_tail(p, N + 1, K)
    # for n > K successive terms shrink by at least 2^-(2K+4-p) <= 1/2
    q = Fraction(2) ** (-(2 * (K + 1) + 2 - p))
    first = Fraction(1, 2) * Fraction(2) ** (-(K + 1) * (K + 2 - p))
    return lower, lower + first / (1 - q)


@dataclass
class ConvergenceTable:
    depth: int
    p: int
    rows: list
    tail_bounds: tuple

    @property
    def all_equal(self) -> bool:
        return all(r["equal"] for r in self.rows)

    def to_csv(self) -> str:
        return rows_to_csv(self.rows, ["m", "p", "computed", "closed_form", "equal"])


def convergence_table(schedule, depth, p, m_max=None, model=None) -> ConvergenceTable:
    """E[|g - g_m|^p] on the truncated model next to its closed form, m = 0..m_max."""
    if not isinstance(p, int) or p < 1:
        raise InvalidRange(f"p must be a positive integer, got {p!r}")
    if model is None:
        model = paste(schedule, depth)
    N = model.depth
    if m_max is None:
        m_max = N - 1
    if not 0 <= m_max < N:
        raise InvalidRange(f"m_max must lie in 0..{N - 1}, got {m_max}")
    rows = []
    for m in range(m_max + 1):
        computed = moment(model.g_full - model.g_partials[m], p)
        closed = closed_form_tail(p, m + 1, N)
        rows.append({"m": m, "p": p, "computed": computed, "closed_form": closed, "equal": computed == closed})
    return ConvergenceTable(N, p, rows, infinite_tail_bounds(p, N))


def g_partial_decomposition(model: PastedModel, m: int):
    """(H, h) with (H.S)_2 + h(S_2) = g_m, both components bounded.

    H picks the block's short position through the F_0 cell; h is the block
    digital on {+-a_n, +-b_n} for n <= m and zero at every other terminal value.
    """
    if not isinstance(m, int) or not 0 <= m <= model.depth:
        raise IndexOutOfRange(f"m must lie in 0..{model.depth}, got {m!r}")
    space = model.space
    first = [Fraction(0)] * len(space.partition(0))
    for n in range(1, m + 1):
        blk = model.blocks[n - 1]
        cell = space.cell_index(0)[space.index((n,) + blk.space.atoms[0])]
        first[cell] = blk.canonical_H.cell_values()[0][0]
    H = PredictableStrategy.from_cells(space, [first, [0] * len(space.partition(1))])
    payoff = {s: Fraction(0) for s in model.S.terminal_values()}
    for n in range(1, m + 1):
        payoff.update(model.blocks[n - 1].canonical_h.payoff_map)
    return H, StaticClaim(payoff)


def verify_partials(model: PastedModel) -> Report:
    rep = Report(f"g_m in U_inf + V_inf, N={model.depth}")
    for m in range(model.depth + 1):
        H, h = g_partial_decomposition(model, m)
        u = stochastic_integral(H, model.S)
        v = evaluate_static(h, model.S)
        g = model.g_partials[m]
        bounded = max(abs(x) for x in u.values + v.values) <= max(
            [b.params.M for b in model.blocks[:m]] or [0]
        )
        rep.add(f"m={m}: (H.S)_2 + h(S_2) = g_m", u + v == g)
        rep.add(f"m={m}: components bounded by max M_n", bounded)
        rep.add(f"m={m}: g_m >= 0", g.is_nonnegative())
    return rep


def _block_cost(blk) -> Fraction:
    return min_l1_decomposition(blk.S, blk.f).cost


@dataclass
class DivergenceResult:
    rows: list
    increments: list
    report: Report

    def to_csv(self) -> str:
        return rows_to_csv(
            self.rows,
            ["N", "global_cost", "sum_block_costs", "N/24", "N/16", "decoupled", "cost>=N/24", "cost>=N/16"],
        )


def divergence_check(schedule, depth) -> DivergenceResult:
    """Global LP cost of g on the truncated models N' = 1..depth vs. per-block costs."""
    if not isinstance(depth, int) or depth < 1:
        raise InvalidDepth(f"depth must be a positive integer, got {depth!r}")
    rep = Report(f"divergence N<= {depth}")
    block_costs = {}
    rows = []
    for N in range(1, depth + 1):
        model = paste(schedule, N)
        blk = model.blocks[N - 1]
        block_costs[N] = _block_cost(blk)
        res = min_l1_decomposition(model.S, model.g_full)
        rep.extend(res.certificate(), prefix=f"N={N} LP: ")
        total = sum(
            (schedule.block_mass(n) * block_costs[n] for n in range(1, N + 1)), Fraction(0)
        )
        row = {
            "N": N,
            "global_cost": res.cost,
            "sum_block_costs": total,
            "N/24": Fraction(N, 24),
            "N/16": Fraction(N, 16),
            "decoupled": res.cost == total,
            "cost>=N/24": res.cost >= Fraction(N, 24),
            "cost>=N/16": res.cost >= Fraction(N, 16),
        }
        rows.append(row)
        rep.add(f"N={N}: global cost = sum 2^-n cost_n", row["decoupled"], res.cost, total)
        rep.add(f"N={N}: cost >= N/24", row["cost>=N/24"], res.cost, Fraction(N, 24))
        rep.add(f"N={N}: cost >= N/16", row["cost>=N/16"], res.cost, Fraction(N, 16), hard=False)
    increments = [rows[i]["global_cost"] - rows[i - 1]["global_cost"] for i in range(1, len(rows))]
    for i, inc in enumerate(increments, start=2):
        rep.add(f"cost({i}) - cost({i - 1}) >= 1/24", inc >= Fraction(1, 24), inc, Fraction(1, 24))
    return DivergenceResult(rows, increments, rep)


def terminal_cells(model: PastedModel) -> int:
    return len(terminal_partition(model.S))
