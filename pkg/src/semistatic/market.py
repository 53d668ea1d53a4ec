"""Price processes, predictable strategies and static claims on a finite space.

The dynamic outcome space U is never enumerated: it is the image of
:func:`stochastic_integral` over predictable strategies, i.e. a linear space
parameterized by one position per filtration cell per trading period.  The
static space V is the set of functions of the terminal price.

On a finite space every variable is bounded, so U and its bounded version
coincide (likewise V), and every gains process H.S against a martingale S is
itself a martingale.  Lower bounds certified here therefore hold for the
supermartingale-constrained outcome spaces as well.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import (
    AdaptednessViolation,
    MissingTerminalValue,
    PredictabilityViolation,
    SpaceMismatch,
)
from .probspace import (
    FiniteFilteredSpace,
    RandomVariable,
    cond_expectation,
    format_rational,
    label_to_str,
    parse_rational,
    partition_by,
    str_to_label,
)
from .report import Report


def _same_space(x, y):
    if x is not y and x != y:
        raise SpaceMismatch("objects live on different spaces")


@dataclass(frozen=True, eq=False)
class PriceProcess:
    """Adapted process S_0..S_T.  ``slices[t]`` is the variable S_t."""

    space: FiniteFilteredSpace
    slices: tuple
    martingale: bool = True

    def __post_init__(self):
        if len(self.slices) != self.space.horizon + 1:
            raise AdaptednessViolation(
                f"{len(self.slices)} slices for horizon {self.space.horizon}"
            )
        for t, s in enumerate(self.slices):
            _same_space(s.space, self.space)
            if not self.space.is_measurable(s.values, t):
                raise AdaptednessViolation(f"S_{t} is not F_{t}-measurable")

    @property
    def horizon(self) -> int:
        return self.space.horizon

    @property
    def terminal(self) -> RandomVariable:
        return self.slices[-1]

    def increment(self, t: int) -> RandomVariable:
        return self.slices[t] - self.slices[t - 1]

    def terminal_values(self) -> list:
        """Distinct values of S_T in order of first occurrence."""
        return list(dict.fromkeys(self.terminal.values))


def make_price_process(space, slices, martingale=True) -> PriceProcess:
    slices = tuple(s if isinstance(s, RandomVariable) else RandomVariable(space, s) for s in slices)
    return PriceProcess(space, slices, martingale)


@dataclass(frozen=True, eq=False)
class PredictableStrategy:
    """Positions H_1..H_T; ``positions[t-1]`` is held over (t-1, t]."""

    space: FiniteFilteredSpace
    positions: tuple

    def __post_init__(self):
        if len(self.positions) != self.space.horizon:
            raise PredictabilityViolation(
                f"{len(self.positions)} positions for horizon {self.space.horizon}"
            )
        for t, h in enumerate(self.positions, start=1):
            _same_space(h.space, self.space)
            if not self.space.is_measurable(h.values, t - 1):
                raise PredictabilityViolation(f"H_{t} is not F_{t - 1}-measurable")

    @classmethod
    def zero(cls, space) -> "PredictableStrategy":
        return cls(space, tuple(RandomVariable.constant(space, 0) for _ in range(space.horizon)))

    @classmethod
    def from_cells(cls, space, cell_values: Sequence[Sequence]) -> "PredictableStrategy":
        """Build from one value per cell of F_{t-1}, for t = 1..T."""
        positions = []
        for t, values in enumerate(cell_values, start=1):
            ids = space.cell_index(t - 1)
            if len(values) != len(space.partition(t - 1)):
                raise PredictabilityViolation(f"H_{t} needs one value per cell of F_{t - 1}")
            positions.append(RandomVariable(space, [values[c] for c in ids]))
        return cls(space, tuple(positions))

    def cell_values(self) -> list:
        out = []
        for t, h in enumerate(self.positions, start=1):
            vals = {}
            for c, x in zip(self.space.cell_index(t - 1), h.values):
                vals.setdefault(c, x)
            out.append([vals[c] for c in range(len(vals))])
        return out

    def scaled(self, lam) -> "PredictableStrategy":
        return PredictableStrategy(self.space, tuple(lam * h for h in self.positions))

    def __add__(self, other: "PredictableStrategy") -> "PredictableStrategy":
        _same_space(self.space, other.space)
        return PredictableStrategy(
            self.space, tuple(x + y for x, y in zip(self.positions, other.positions))
        )

    def to_dict(self) -> dict:
        periods = []
        for t, values in enumerate(self.cell_values(), start=1):
            part = self.space.partition(t - 1)
            periods.append(
                [
                    {"cell": [label_to_str(a) for a in cell], "value": format_rational(v)}
                    for cell, v in zip(part, values)
                ]
            )
        return {"positions": periods}

    @classmethod
    def from_dict(cls, space, data) -> "PredictableStrategy":
        positions = []
        for period in data["positions"]:
            vals = {}
            for entry in period:
                v = parse_rational(entry["value"])
                for s in entry["cell"]:
                    vals[str_to_label(s)] = v
            positions.append(RandomVariable(space, vals))
        return cls(space, tuple(positions))


@dataclass(frozen=True)
class StaticClaim:
    """European claim h(S_T) given by its value at each terminal price."""

    payoff_map: Mapping

    def __post_init__(self):
        object.__setattr__(
            self,
            "payoff_map",
            {Fraction(k): Fraction(v) for k, v in dict(self.payoff_map).items()},
        )

    def __call__(self, s) -> Fraction:
        try:
            return self.payoff_map[Fraction(s)]
        except KeyError:
            raise MissingTerminalValue(f"claim has no payoff at terminal value {s}") from None

    def support(self) -> set:
        return {k for k, v in self.payoff_map.items() if v != 0}

    def to_dict(self) -> dict:
        return {
            "payoffs": [
                [format_rational(k), format_rational(v)] for k, v in sorted(self.payoff_map.items())
            ]
        }

    @classmethod
    def from_dict(cls, data) -> "StaticClaim":
        return cls({parse_rational(k): parse_rational(v) for k, v in data["payoffs"]})


def gains_process(H: PredictableStrategy, S: PriceProcess) -> list:
    """(H.S)_t for t = 0..T."""
    _same_space(H.space, S.space)
    out = [RandomVariable.constant(S.space, 0)]
    for t in range(1, S.horizon + 1):
        out.append(out[-1] + H.positions[t - 1] * S.increment(t))
    return out


def stochastic_integral(H: PredictableStrategy, S: PriceProcess) -> RandomVariable:
    """Terminal gains sum_t H_t (S_t - S_{t-1})."""
    if H.space is not S.space and H.space != S.space:
        raise SpaceMismatch("strategy and price process live on different spaces")
    return gains_process(H, S)[-1]


def evaluate_static(h: StaticClaim, S: PriceProcess) -> RandomVariable:
    return RandomVariable(S.space, [h(s) for s in S.terminal.values])


def terminal_partition(S: PriceProcess) -> list:
    """Cells of sigma(S_T): atoms grouped by exact value of S_T."""
    value = dict(zip(S.space.atoms, S.terminal.values))
    return partition_by(S.space.atoms, value.__getitem__)


def verify_martingale(S: PriceProcess) -> Report:
    report = Report("martingale property")
    for t in range(1, S.horizon + 1):
        ce = cond_expectation(S.slices[t], t - 1)
        report.add(f"E[S_{t} | F_{t - 1}] = S_{t - 1}", ce == S.slices[t - 1])
    return report


def price_process_to_dict(S: PriceProcess) -> dict:
    return {
        "space": S.space.to_dict(),
        "slices": [[format_rational(x) for x in s.values] for s in S.slices],
        "martingale": S.martingale,
    }


def price_process_from_dict(data, space=None) -> PriceProcess:
    space = space or FiniteFilteredSpace.from_dict(data["space"])
    return make_price_process(
        space,
        [[parse_rational(x) for x in s] for s in data["slices"]],
        data.get("martingale", True),
    )


def dumps_strategy(H: PredictableStrategy) -> str:
    return json.dumps(H.to_dict(), sort_keys=True)


def dumps_claim(h: StaticClaim) -> str:
    return json.dumps(h.to_dict(), sort_keys=True)
