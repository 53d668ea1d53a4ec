"""Finite filtered probability spaces with exact rational arithmetic.

Atoms are labelled by tuples of ints, probabilities are
:class:`fractions.Fraction`, and the filtration is a list of partitions of
the atom set, one per time index ``t = 0..T``.  Nothing here ever rounds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import (
    InvalidPartition,
    NonPositiveProbability,
    PartitionNotRefining,
    ProbabilitySumNotOne,
    SpaceMismatch,
    TimeOutOfRange,
    UnknownAtom,
)

Rational = Fraction
Label = tuple
Partition = tuple  # tuple of cells, each cell a tuple of labels


def parse_rational(text) -> Fraction:
    """Parse ``"num/den"``, an integer string, or a Fraction/int exactly."""
    if isinstance(text, (Fraction, int)):
        return Fraction(text)
    return Fraction(str(text).strip())


def format_rational(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def label_to_str(label: Label) -> str:
    return ",".join(str(int(k)) for k in label)


def str_to_label(text: str) -> Label:
    return tuple(int(k) for k in text.split(","))


def _normalize_partition(atoms: Sequence[Label], cells: Iterable[Iterable]) -> Partition:
    index = {a: i for i, a in enumerate(atoms)}
    out = []
    seen: set = set()
    for cell in cells:
        cell = tuple(tuple(a) for a in cell)
        if not cell:
            raise InvalidPartition("empty cell")
        for a in cell:
            if a not in index:
                raise UnknownAtom(f"partition mentions unknown atom {a!r}")
            if a in seen:
                raise InvalidPartition(f"atom {a!r} appears in two cells")
            seen.add(a)
        out.append(tuple(sorted(cell, key=index.__getitem__)))
    if len(seen) != len(atoms):
        raise InvalidPartition("partition does not cover every atom")
    out.sort(key=lambda c: index[c[0]])
    return tuple(out)


def _refines(finer: Partition, coarser: Partition) -> bool:
    owner = {}
    for i, cell in enumerate(coarser):
        for a in cell:
            owner[a] = i
    return all(len({owner[a] for a in cell}) == 1 for cell in finer)


@dataclass(frozen=True, eq=False)
class FiniteFilteredSpace:
    """Atoms, their probabilities and a refining sequence of partitions."""

    atoms: tuple
    probs: tuple
    partitions: tuple
    _index: dict = field(init=False, repr=False, compare=False)
    _cell_of: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.atoms)})
        cell_of = []
        for part in self.partitions:
            m = {}
            for ci, cell in enumerate(part):
                for a in cell:
                    m[a] = ci
            cell_of.append(tuple(m[a] for a in self.atoms))
        object.__setattr__(self, "_cell_of", tuple(cell_of))

    @property
    def horizon(self) -> int:
        """Final time index T."""
        return len(self.partitions) - 1

    def __len__(self):
        return len(self.atoms)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FiniteFilteredSpace):
            return NotImplemented
        return (
            self.atoms == other.atoms
            and self.probs == other.probs
            and self.partitions == other.partitions
        )

    def __hash__(self):
        return hash((self.atoms, self.probs))

    def index(self, label) -> int:
        try:
            return self._index[tuple(label)]
        except KeyError:
            raise UnknownAtom(f"unknown atom {label!r}") from None

    def prob(self, label) -> Fraction:
        return self.probs[self.index(label)]

    def partition(self, t: int) -> Partition:
        self._check_time(t)
        return self.partitions[t]

    def cell_index(self, t: int) -> tuple:
        """Cell number (into ``partition(t)``) of every atom, in atom order."""
        self._check_time(t)
        return self._cell_of[t]

    def _check_time(self, t):
        if not isinstance(t, int) or not 0 <= t <= self.horizon:
            raise TimeOutOfRange(f"time {t!r} outside 0..{self.horizon}")

    def event_probability(self, event: Iterable) -> Fraction:
        """Exact probability of a set of atoms."""
        idx = {self.index(a) for a in event}
        return sum((self.probs[i] for i in idx), Fraction(0))

    def event(self, predicate: Callable[[Label], bool]) -> frozenset:
        return frozenset(a for a in self.atoms if predicate(a))

    def is_measurable(self, values: Sequence, t: int) -> bool:
        """True when ``values`` (atom order) is constant on every cell of F_t."""
        seen = {}
        for ci, v in zip(self.cell_index(t), values):
            if seen.setdefault(ci, v) != v:
                return False
        return True

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "atoms": [label_to_str(a) for a in self.atoms],
            "probs": [format_rational(p) for p in self.probs],
            "partitions": [
                [[label_to_str(a) for a in cell] for cell in part]
                for part in self.partitions
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FiniteFilteredSpace":
        atoms = [str_to_label(s) for s in data["atoms"]]
        probs = [parse_rational(s) for s in data["probs"]]
        parts = [
            [[str_to_label(s) for s in cell] for cell in part]
            for part in data["partitions"]
        ]
        return make_space(atoms, probs, parts)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "FiniteFilteredSpace":
        return cls.from_dict(json.loads(text))


def make_space(atoms, probs, partitions) -> FiniteFilteredSpace:
    """Validate and build a :class:`FiniteFilteredSpace`.

    ``partitions[0]`` may be nontrivial (a declared F_0); each partition must
    refine its predecessor and the last one must separate every atom.
    """
    atoms = tuple(tuple(a) for a in atoms)
    probs = tuple(parse_rational(p) for p in probs)
    if len(atoms) != len(probs):
        raise InvalidPartition(f"{len(atoms)} atoms but {len(probs)} probabilities")
    if len(set(atoms)) != len(atoms):
        raise InvalidPartition("duplicate atom labels")
    if not atoms:
        raise InvalidPartition("a space needs at least one atom")
    for a, p in zip(atoms, probs):
        if p <= 0:
            raise NonPositiveProbability(f"P({a!r}) = {p} is not positive")
    total = sum(probs, Fraction(0))
    if total != 1:
        raise ProbabilitySumNotOne(f"probabilities sum to {total}")
    if not partitions:
        raise InvalidPartition("filtration needs at least one partition")
    parts = tuple(_normalize_partition(atoms, p) for p in partitions)
    for t in range(1, len(parts)):
        if not _refines(parts[t], parts[t - 1]):
            raise PartitionNotRefining(f"partition {t} does not refine partition {t - 1}")
    if len(parts[-1]) != len(atoms):
        raise InvalidPartition("final partition must separate all atoms")
    return FiniteFilteredSpace(atoms, probs, parts)


def trivial_partition(atoms) -> list:
    return [list(atoms)]


def discrete_partition(atoms) -> list:
    return [[a] for a in atoms]


def partition_by(atoms, key: Callable) -> list:
    """Group atoms by ``key(atom)``; cells appear in order of first occurrence."""
    groups: dict = {}
    for a in atoms:
        groups.setdefault(key(a), []).append(a)
    return list(groups.values())


class RandomVariable:
    """Exact rational value per atom of a space."""

    __slots__ = ("space", "values")

    def __init__(self, space: FiniteFilteredSpace, values):
        if isinstance(values, dict):
            try:
                values = [values[a] for a in space.atoms]
            except KeyError as exc:
                raise UnknownAtom(f"no value for atom {exc.args[0]!r}") from None
        values = tuple(Fraction(v) for v in values)
        if len(values) != len(space):
            raise SpaceMismatch(f"{len(values)} values for {len(space)} atoms")
        self.space = space
        self.values = values

    # constructors ----------------------------------------------------------

    @classmethod
    def constant(cls, space, c) -> "RandomVariable":
        return cls(space, [c] * len(space))

    @classmethod
    def from_function(cls, space, fn: Callable[[Label], object]) -> "RandomVariable":
        return cls(space, [fn(a) for a in space.atoms])

    @classmethod
    def indicator(cls, space, event) -> "RandomVariable":
        event = {tuple(a) for a in event}
        for a in event:
            space.index(a)
        return cls(space, [1 if a in event else 0 for a in space.atoms])

    # access -----------------------------------------------------------------

    def __getitem__(self, label) -> Fraction:
        return self.values[self.space.index(label)]

    def as_dict(self) -> dict:
        return dict(zip(self.space.atoms, self.values))

    def __repr__(self):
        body = ", ".join(f"{label_to_str(a)}: {v}" for a, v in zip(self.space.atoms, self.values))
        return f"RandomVariable({{{body}}})"

    # arithmetic -------------------------------------------------------------

    def _other(self, other):
        if isinstance(other, RandomVariable):
            if other.space is not self.space and other.space != self.space:
                raise SpaceMismatch("random variables live on different spaces")
            return other.values
        return (Fraction(other),) * len(self.values)

    def __add__(self, other):
        return RandomVariable(self.space, [x + y for x, y in zip(self.values, self._other(other))])

    __radd__ = __add__

    def __sub__(self, other):
        return RandomVariable(self.space, [x - y for x, y in zip(self.values, self._other(other))])

    def __rsub__(self, other):
        return RandomVariable(self.space, [y - x for x, y in zip(self.values, self._other(other))])

    def __mul__(self, other):
        return RandomVariable(self.space, [x * y for x, y in zip(self.values, self._other(other))])

    __rmul__ = __mul__

    def __neg__(self):
        return RandomVariable(self.space, [-x for x in self.values])

    def __abs__(self):
        return RandomVariable(self.space, [abs(x) for x in self.values])

    def __pow__(self, p: int):
        return RandomVariable(self.space, [x**p for x in self.values])

    def __eq__(self, other):
        if not isinstance(other, RandomVariable):
            return NotImplemented
        return self.space == other.space and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def map(self, fn: Callable) -> "RandomVariable":
        return RandomVariable(self.space, [fn(x) for x in self.values])

    def is_nonnegative(self) -> bool:
        return all(x >= 0 for x in self.values)

    def expectation(self) -> Fraction:
        return sum((p * x for p, x in zip(self.space.probs, self.values)), Fraction(0))

    def level_set(self, value) -> frozenset:
        value = Fraction(value)
        return frozenset(a for a, x in zip(self.space.atoms, self.values) if x == value)


def _average_over(rv: RandomVariable, cell_ids: Sequence[int]) -> RandomVariable:
    num: dict = {}
    den: dict = {}
    for ci, p, x in zip(cell_ids, rv.space.probs, rv.values):
        num[ci] = num.get(ci, 0) + p * x
        den[ci] = den.get(ci, 0) + p
    return RandomVariable(rv.space, [num[ci] / den[ci] for ci in cell_ids])


def cond_expectation(rv: RandomVariable, t: int) -> RandomVariable:
    """E[rv | F_t], exact, as a variable constant on each F_t cell."""
    return _average_over(rv, rv.space.cell_index(t))


def cond_expectation_given(rv: RandomVariable, partition) -> RandomVariable:
    """Conditional expectation on the sigma-algebra generated by ``partition``."""
    space = rv.space
    part = _normalize_partition(space.atoms, partition)
    owner = {}
    for ci, cell in enumerate(part):
        for a in cell:
            owner[a] = ci
    return _average_over(rv, [owner[a] for a in space.atoms])


def moment(rv: RandomVariable, p: int) -> Fraction:
    """E[|rv|^p] for an integer ``p >= 1``."""
    if not isinstance(p, int) or p < 1:
        raise ValueError(f"moment order must be a positive integer, got {p!r}")
    return sum((q * abs(x) ** p for q, x in zip(rv.space.probs, rv.values)), Fraction(0))


def event_probability(space: FiniteFilteredSpace, event) -> Fraction:
    return space.event_probability(event)


def restrict(rv: RandomVariable, sub: FiniteFilteredSpace, relabel: Callable[[Label], Label]):
    """Read ``rv`` on the atoms of ``sub``; ``relabel`` maps sub-atoms to rv's atoms."""
    return RandomVariable(sub, [rv[relabel(a)] for a in sub.atoms])
