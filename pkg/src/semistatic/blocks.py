"""The single-block counterexample on eight atoms.

Three independent coin flips: S_1 = +-1, a Bernoulli(eps) signal X revealed
at time 1, and the terminal move of S_2 to +-a on the event
``A~ = {S_1 = 1} u {X = 1}`` or to +-b off it, with the up-probability
fixed by the martingale condition.  The payoff ``f = M X 1{S_1 = -1}`` is
small in every L^p norm yet needs semi-static components of size ~M.

Atom labels are ``(s1, x, up)`` with ``s1, up`` in {-1, +1} and ``x`` in {0, 1};
``up = +1`` means S_2 = +L where L is a or b.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import InvalidParams
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
    cond_expectation,
    cond_expectation_given,
    discrete_partition,
    format_rational,
    make_space,
    moment,
    parse_rational,
    partition_by,
    trivial_partition,
)
from .report import Report


@dataclass(frozen=True)
class BlockParams:
    epsilon: Fraction
    M: Fraction
    a: Fraction
    b: Fraction

    def __post_init__(self):
        for name in ("epsilon", "M", "a", "b"):
            object.__setattr__(self, name, parse_rational(getattr(self, name)))
        self.validate()

    def validate(self):
        if not 0 < self.epsilon <= Fraction(1, 2):
            raise InvalidParams(f"epsilon = {self.epsilon} outside (0, 1/2]")
        # M = 0 is tolerated as the degenerate (all-zero) block
        if self.M < 0:
            raise InvalidParams(f"M = {self.M} must be positive")
        for name in ("a", "b"):
            v = getattr(self, name)
            if not 2 <= v <= 3:
                raise InvalidParams(f"{name} = {v} outside [2, 3]")
        if self.a == self.b:
            raise InvalidParams("a and b must differ so |S_2| identifies A~")

    def to_dict(self) -> dict:
        return {k: format_rational(getattr(self, k)) for k in ("epsilon", "M", "a", "b")}


ATOMS = tuple(product((1, -1), (0, 1), (1, -1)))


def in_A(label) -> bool:
    return label[0] == 1


def in_A_tilde(label) -> bool:
    return label[0] == 1 or label[1] == 1


def level(params: BlockParams, label) -> Fraction:
    return params.a if in_A_tilde(label) else params.b


def up_probability(params: BlockParams, s1, tilde: bool) -> Fraction:
    """P(S_2 = +L | F_1) = (L + S_1) / (2L), L = a on A~ and b off it."""
    L = params.a if tilde else params.b
    return (L + s1) / (2 * L)


def atom_probability(params: BlockParams, label) -> Fraction:
    s1, x, up = label
    p_x = params.epsilon if x == 1 else 1 - params.epsilon
    p_up = up_probability(params, s1, in_A_tilde(label))
    return Fraction(1, 2) * p_x * (p_up if up == 1 else 1 - p_up)


@dataclass(frozen=True, eq=False)
class BlockModel:
    params: BlockParams
    space: object
    S: PriceProcess
    X: RandomVariable
    A: frozenset
    A_tilde: frozenset
    f: RandomVariable
    canonical_H: PredictableStrategy
    canonical_h: StaticClaim

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "price_process": price_process_to_dict(self.S),
            "X": [format_rational(v) for v in self.X.values],
            "f": [format_rational(v) for v in self.f.values],
            "canonical_H": self.canonical_H.to_dict(),
            "canonical_h": self.canonical_h.to_dict(),
        }

    @classmethod
    def from_dict(cls, data) -> "BlockModel":
        params = BlockParams(**{k: parse_rational(v) for k, v in data["params"].items()})
        S = price_process_from_dict(data["price_process"])
        space = S.space
        X = RandomVariable(space, [parse_rational(v) for v in data["X"]])
        f = RandomVariable(space, [parse_rational(v) for v in data["f"]])
        H = PredictableStrategy.from_dict(space, data["canonical_H"])
        h = StaticClaim.from_dict(data["canonical_h"])
        return cls(params, space, S, X, space.event(in_A), space.event(in_A_tilde), f, H, h)


def build_block(params: BlockParams) -> BlockModel:
    if not isinstance(params, BlockParams):
        raise InvalidParams("expected BlockParams")
    params.validate()
    probs = [atom_probability(params, a) for a in ATOMS]
    space = make_space(
        ATOMS,
        probs,
        [trivial_partition(ATOMS), partition_by(ATOMS, lambda a: a[:2]), discrete_partition(ATOMS)],
    )
    S = make_price_process(
        space,
        [
            [0] * 8,
            [a[0] for a in ATOMS],
            [a[2] * level(params, a) for a in ATOMS],
        ],
    )
    X = RandomVariable.from_function(space, lambda a: a[1])
    A = space.event(in_A)
    A_tilde = space.event(in_A_tilde)
    f = params.M * (RandomVariable.indicator(space, A_tilde) - RandomVariable.indicator(space, A))
    H, h = _canonical(params, space)
    return BlockModel(params, space, S, X, A, A_tilde, f, H, h)


def _canonical(p: BlockParams, space):
    half = p.M / 2
    H = PredictableStrategy.from_cells(space, [[-half], [0, 0, 0, 0]])
    h = StaticClaim({p.a: half, -p.a: half, p.b: -half, -p.b: -half})
    return H, h


def canonical_decomposition(block: BlockModel):
    """Short M/2 shares over the first period plus a digital on |S_2|.

    ``f = -(M/2) S_1 + (M/2)(1{|S_2| = a} - 1{|S_2| = b})``.
    """
    return _canonical(block.params, block.space)


def f_alternative(block: BlockModel) -> RandomVariable:
    """``M X 1{A^c}``, the second defining formula of the payoff."""
    not_A = RandomVariable.indicator(block.space, set(block.space.atoms) - block.A)
    return block.params.M * block.X * not_A


def conditional_signal(block: BlockModel) -> dict:
    """E[X | S_2 = s] for each terminal value s."""
    ce = cond_expectation_given(block.X, terminal_partition(block.S))
    return {s: ce.values[block.S.terminal.values.index(s)] for s in block.S.terminal_values()}


def verify_block(block: BlockModel, *, with_lp: bool = True) -> Report:
    """Exact verification of every identity of the block construction."""
    p = block.params
    space = block.space
    rep = Report(f"block eps={p.epsilon} M={p.M} a={p.a} b={p.b}")

    rep.add("f >= 0", block.f.is_nonnegative())
    rep.add("f = M(1_A~ - 1_A) = M X 1_{A^c}", block.f == f_alternative(block))
    rep.add("sum of atom probabilities = 1", sum(space.probs) == 1)
    rep.extend(verify_martingale(block.S))

    # conditional law of S_2 given F_1, cell by cell
    up = RandomVariable.indicator(space, space.event(lambda a: a[2] == 1))
    ce_up = cond_expectation(up, 1)
    cells_ok = all(
        ce_up[a] == up_probability(p, a[0], in_A_tilde(a)) for a in space.atoms
    )
    rep.add("P(S_2 = +L | F_1) = (L + S_1)/(2L) on every F_1 cell", cells_ok)
    tilde_ok = block.A_tilde == space.event(lambda a: abs(block.S.terminal[a]) == p.a)
    rep.add("A~ = {|S_2| = a}", tilde_ok)

    for k in (1, 2, 3, 4):
        target = p.M**k * p.epsilon / 2
        got = moment(block.f, k)
        rep.add(f"E[|f|^{k}] = M^{k} eps/2", got == target, got, target)

    p_a = space.event_probability(block.S.terminal.level_set(p.a))
    rep.add("P(S_2 = a) >= 1/8", p_a >= Fraction(1, 8), p_a, Fraction(1, 8))

    cx = conditional_signal(block)
    for s in (p.a, -p.a):
        rep.add(f"E[X | S_2 = {s}] <= 8 eps", cx[s] <= 8 * p.epsilon, cx[s], 8 * p.epsilon)
    for s in (p.b, -p.b):
        rep.add(f"E[X | S_2 = {s}] = 0", cx[s] == 0, cx[s], Fraction(0))

    H, h = block.canonical_H, block.canonical_h
    u = stochastic_integral(H, block.S)
    v = evaluate_static(h, block.S)
    rep.add("canonical (H, h) reproduces f", u + v == block.f)
    rep.add("canonical ||u||_1 = M/2", moment(u, 1) == p.M / 2, moment(u, 1), p.M / 2)
    rep.add("canonical ||v||_1 = M/2", moment(v, 1) == p.M / 2, moment(v, 1), p.M / 2)

    if with_lp:
        from .decompose import decomposition_checks

        rep.extend(decomposition_checks(block))
    return rep
