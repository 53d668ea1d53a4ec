"""The Brownian version of the block, by Monte Carlo.

W starts at 0; sigma is the first hit of |W| = 1, where the Bernoulli(eps)
signal X is revealed.  T is the first time after sigma at which |W| reaches
a on A~ = {W_sigma = 1} u {X = 1} and b otherwise, and S = W stopped at T.
Only the exit side matters for the law of the outcome, and it follows the
gambler's-ruin probability (L + s)/(2L).

Two samplers:

* :func:`sample_outcomes` draws (S_sigma, X, S_T) from the exact law;
* :func:`simulate_paths` runs a symmetric walk on a spatial grid with
  1, a, b on the grid, whose exit probabilities equal the continuous ones,
  so neither sampler carries discretization bias.

All randomness comes from ``numpy.random.SeedSequence(seed)``, split into a
fixed number of streams that are concatenated in order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy import stats

from . import blocks as _blocks
from .errors import GridMismatch, InsufficientSamples, InvalidParams, StartOutsideInterval
from .report import rows_to_csv

Number = Union[int, float, Fraction, str]
MIN_SAMPLES = 10_000
N_SIGMA = 4.0
CHI2_LEVEL = 1e-3


def _exact(x: Number) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True)
class ContinuousBlockParams:
    epsilon: Fraction
    M: Fraction
    a: Fraction
    b: Fraction

    def __post_init__(self):
        for name in ("epsilon", "M", "a", "b"):
            object.__setattr__(self, name, _exact(getattr(self, name)))
        if not 0 < self.epsilon <= Fraction(1, 2):
            raise InvalidParams(f"epsilon = {self.epsilon} outside (0, 1/2]")
        if self.M <= 0:
            raise InvalidParams(f"M = {self.M} must be positive")
        for name in ("a", "b"):
            if not 2 <= getattr(self, name) <= 3:
                raise InvalidParams(f"{name} = {getattr(self, name)} outside [2, 3]")
        if self.a == self.b:
            raise InvalidParams("a and b must differ")

    def discrete(self) -> _blocks.BlockParams:
        return _blocks.BlockParams(self.epsilon, self.M, self.a, self.b)


@dataclass(frozen=True)
class OutcomeSample:
    s_sigma: int
    x: int
    in_A_tilde: bool
    s_T: float
    f: float


@dataclass
class PathSample:
    grid_step: float
    path: np.ndarray
    sigma_index: int
    T_index: int
    x: int

    @property
    def s_sigma(self) -> float:
        return float(self.path[self.sigma_index])

    @property
    def s_T(self) -> float:
        return float(self.path[self.T_index])


def hitting_prob(start, level):
    """P(hit +level before -level | start) = (level + start) / (2 level)."""
    if level <= 0 or abs(start) >= level:
        raise StartOutsideInterval(f"start {start} not inside (-{level}, {level})")
    return (level + start) / (2 * level)


def sample_outcomes(params: ContinuousBlockParams, n: int, rng: np.random.Generator) -> dict:
    """Vectorized exact-law draws; arrays keyed by OutcomeSample field names."""
    eps, M, a, b = (float(v) for v in (params.epsilon, params.M, params.a, params.b))
    s_sigma = np.where(rng.random(n) < 0.5, 1, -1)
    x = (rng.random(n) < eps).astype(np.int64)
    tilde = (s_sigma == 1) | (x == 1)
    L = np.where(tilde, a, b)
    up = rng.random(n) < (L + s_sigma) / (2 * L)
    s_T = np.where(up, L, -L)
    f = M * x * (s_sigma == -1)
    return {"s_sigma": s_sigma, "x": x, "in_A_tilde": tilde, "s_T": s_T, "f": f, "up": up}


def sample_outcome(params: ContinuousBlockParams, rng: np.random.Generator) -> OutcomeSample:
    d = sample_outcomes(params, 1, rng)
    return OutcomeSample(
        int(d["s_sigma"][0]), int(d["x"][0]), bool(d["in_A_tilde"][0]), float(d["s_T"][0]), float(d["f"][0])
    )


def spatial_step(grid_step) -> Fraction | float:
    """sqrt(grid_step), exact when grid_step is a square rational."""
    if isinstance(grid_step, (Fraction, int, str)):
        q = Fraction(grid_step)
        rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
        if rn * rn == q.numerator and rd * rd == q.denominator:
            return Fraction(rn, rd)
        return math.sqrt(q)
    return math.sqrt(grid_step)


def default_grid_step(params: ContinuousBlockParams) -> Fraction:
    """Time step whose spatial step is 1/(4 lcm(den a, den b))."""
    delta = Fraction(1, 4 * lcm(params.a.denominator, params.b.denominator))
    return delta * delta


def grid_levels(params: ContinuousBlockParams, grid_step) -> tuple:
    """(1, a, b) in units of the spatial step; GridMismatch if any is off grid."""
    delta = spatial_step(grid_step)
    out = []
    for lv in (Fraction(1), params.a, params.b):
        if isinstance(delta, Fraction):
            k = lv / delta
            ok = k.denominator == 1
            k = int(k) if ok else None
        else:
            r = float(lv) / delta
            k = round(r)
            ok = abs(r - k) < 1e-9 * max(1.0, r)
        if not ok:
            raise GridMismatch(f"level {lv} is not a multiple of spatial step {delta}")
        out.append(int(k))
    return tuple(out)


def simulate_paths(params: ContinuousBlockParams, n: int, grid_step, rng: np.random.Generator) -> dict:
    """Run n grid walks to sigma and then to T; returns per-path arrays."""
    k1, ka, kb = grid_levels(params, grid_step)
    delta = float(spatial_step(grid_step))
    pos = np.zeros(n, dtype=np.int64)
    sigma_steps = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    while active.any():
        idx = np.flatnonzero(active)
        pos[idx] += np.where(rng.random(idx.size) < 0.5, 1, -1)
        sigma_steps[idx] += 1
        active[idx] = np.abs(pos[idx]) < k1
    s_sigma = np.sign(pos)
    x = (rng.random(n) < float(params.epsilon)).astype(np.int64)
    tilde = (s_sigma == 1) | (x == 1)
    target = np.where(tilde, ka, kb)
    T_steps = sigma_steps.copy()
    active = np.abs(pos) < target
    while active.any():
        idx = np.flatnonzero(active)
        pos[idx] += np.where(rng.random(idx.size) < 0.5, 1, -1)
        T_steps[idx] += 1
        active[idx] = np.abs(pos[idx]) < target[idx]
    s_T = pos * delta
    f = float(params.M) * x * (s_sigma == -1)
    return {
        "s_sigma": s_sigma, "x": x, "in_A_tilde": tilde, "s_T": s_T, "f": f,
        "up": pos > 0, "sigma_index": sigma_steps, "T_index": T_steps,
    }


def simulate_path(params: ContinuousBlockParams, grid_step, rng: np.random.Generator) -> PathSample:
    """One full walk: start 0, reveal X at the first |W| = 1, stop at |W| = a or b."""
    k1, ka, kb = grid_levels(params, grid_step)
    delta = float(spatial_step(grid_step))
    steps = [0]
    while abs(steps[-1]) < k1:
        steps.append(steps[-1] + (1 if rng.random() < 0.5 else -1))
    sigma_index = len(steps) - 1
    x = int(rng.random() < float(params.epsilon))
    target = ka if (steps[-1] > 0 or x == 1) else kb
    while abs(steps[-1]) < target:
        steps.append(steps[-1] + (1 if rng.random() < 0.5 else -1))
    return PathSample(float(grid_step), np.asarray(steps, dtype=float) * delta, sigma_index, len(steps) - 1, x)


# --------------------------------------------------------------------------- report


@dataclass(frozen=True)
class SwitchStrategy:
    """Hold ``before`` shares on [0, sigma) and ``after`` on [sigma, T].

    ``after`` may be a mapping ``(s_sigma, x) -> position``: it is revealed at
    sigma, so the strategy stays predictable.
    """

    name: str
    before: float
    after: Union[float, Mapping] = 0.0

    def gains(self, s_sigma, x, s_T):
        if isinstance(self.after, Mapping):
            after = np.zeros(len(s_sigma))
            for (s, xx), v in self.after.items():
                after[(s_sigma == s) & (x == xx)] = v
        else:
            after = float(self.after)
        y_sigma = float(self.before) * s_sigma
        return y_sigma, y_sigma + after * (s_T - s_sigma)


DEFAULT_STRATEGIES = tuple(
    SwitchStrategy(f"before={b:+d},after={c:+d}", b, c) for b in (-1, 0, 1) for c in (-1, 0, 1)
)


@dataclass
class MCEstimate:
    name: str
    estimate: float
    se: float
    target: float
    passed: bool
    kind: str = "within 4 SE"


@dataclass
class MCReport:
    params: ContinuousBlockParams
    n_samples: int
    seed: int
    grid_step: Optional[str]
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def __getitem__(self, name) -> MCEstimate:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def _dicts(self):
        return [
            {
                "name": r.name, "estimate": repr(r.estimate), "se": repr(r.se),
                "target": repr(r.target), "kind": r.kind, "passed": r.passed,
                "n_samples": self.n_samples, "seed": self.seed, "grid_step": self.grid_step,
            }
            for r in self.rows
        ]

    def to_csv(self) -> str:
        cols = ["name", "estimate", "se", "target", "kind", "passed", "n_samples", "seed", "grid_step"]
        return rows_to_csv(self._dicts(), cols)

    def to_json(self) -> str:
        return json.dumps({"passed": self.passed, "rows": self._dicts()}, indent=2)


def _mean_se(values: np.ndarray):
    n = values.size
    if n == 0:
        return float("nan"), float("nan")
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
    return mean, se


def _close(name, values, target, rows):
    est, se = _mean_se(values)
    ok = abs(est - target) <= N_SIGMA * se if se > 0 else est == target
    rows.append(MCEstimate(name, est, se, float(target), bool(ok)))


def _draw(params, n, seed, n_streams, sampler) -> dict:
    children = np.random.SeedSequence(seed).spawn(n_streams)
    sizes = [n // n_streams + (1 if i < n % n_streams else 0) for i in range(n_streams)]
    parts = [sampler(params, size, np.random.default_rng(ss)) for ss, size in zip(children, sizes)]
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def chi_square_fit(params: ContinuousBlockParams, d: dict) -> tuple:
    """Chi-square statistic and p-value of (s_sigma, x, up) against the discrete block law."""
    block = _blocks.BlockParams(params.epsilon, params.M, params.a, params.b)
    observed, expected = [], []
    n = d["s_sigma"].size
    for s1, x, up in _blocks.ATOMS:
        mask = (d["s_sigma"] == s1) & (d["x"] == x) & (d["up"] == (up == 1))
        observed.append(int(mask.sum()))
        expected.append(n * float(_blocks.atom_probability(block, (s1, x, up))))
    res = stats.chisquare(observed, expected)
    return float(res.statistic), float(res.pvalue)


def mc_verify(
    params: ContinuousBlockParams,
    n_samples: int,
    seed: int,
    strategies: Sequence[SwitchStrategy] = DEFAULT_STRATEGIES,
    *,
    n_streams: int = 8,
    grid_step=None,
    path_samples: int = 0,
) -> MCReport:
    """Monte Carlo check of the moment, hitting, signal and correlation identities."""
    if n_samples < MIN_SAMPLES:
        raise InsufficientSamples(f"need at least {MIN_SAMPLES} samples, got {n_samples}")
    eps, M, a, b = params.epsilon, params.M, params.a, params.b
    d = _draw(params, n_samples, seed, n_streams, sample_outcomes)
    rows: list = []
    gs = None if grid_step is None else str(grid_step)
    report = MCReport(params, n_samples, seed, gs, rows)

    f, x, s_sigma, s_T, tilde = d["f"], d["x"], d["s_sigma"], d["s_T"], d["in_A_tilde"]
    rows.append(MCEstimate("f in {0, M} and f >= 0", float(np.isin(f, [0.0, float(M)]).mean()), 0.0, 1.0,
                           bool(np.isin(f, [0.0, float(M)]).all()), "exact"))
    _close("E[f] = M eps/2", f, M * eps / 2, rows)
    _close("E[f^2] = M^2 eps/2", f**2, M**2 * eps / 2, rows)
    for s in (1, -1):
        sel = tilde & (s_sigma == s)
        _close(f"P(S_T = a | A~, S_sigma = {s:+d}) = (a + s)/(2a)", (s_T[sel] == float(a)).astype(float),
               hitting_prob(Fraction(s), a), rows)
    sel = ~tilde
    _close("P(S_T = b | A~^c, S_sigma = -1) = (b - 1)/(2b)", (s_T[sel] == float(b)).astype(float),
           hitting_prob(Fraction(-1), b), rows)

    exact_cx = _blocks.conditional_signal(_blocks.build_block(params.discrete()))
    for s in (a, -a):
        sel = s_T == float(s)
        _close(f"E[X | S_T = {s}] (discrete-block value)", x[sel].astype(float), exact_cx[s], rows)
        est, se = _mean_se(x[sel].astype(float))
        rows.append(MCEstimate(f"E[X | S_T = {s}] <= 8 eps", est, se, float(8 * eps),
                               bool(est <= float(8 * eps) + N_SIGMA * se), "upper bound + 4 SE"))
    off = np.abs(s_T) == float(b)
    rows.append(MCEstimate("X = 0 on {|S_T| = b}", float(x[off].sum()), 0.0, 0.0, bool((x[off] == 0).all()), "exact"))

    chi2, pval = chi_square_fit(params, d)
    rows.append(MCEstimate("chi-square fit of (S_sigma, X, S_T) to the discrete block", pval, chi2,
                           CHI2_LEVEL, pval >= CHI2_LEVEL, "p-value >= 1e-3; se column holds the statistic"))

    bound = float(eps * M)
    for strat in strategies:
        y_sigma, y_T = strat.gains(s_sigma, x, s_T)
        excess = f * y_T - bound * np.abs(y_T)
        est, se = _mean_se(excess)
        ok = est <= N_SIGMA * se if se > 0 else est <= 0
        rows.append(MCEstimate(f"{strat.name}: E[fu] - eps M ||u||_1 <= 0", est, se, 0.0, bool(ok), "upper bound + 4 SE"))
        _close(f"{strat.name}: E[Y_T - Y_sigma] = 0", y_T - y_sigma, 0, rows)

    hold = SwitchStrategy("hold 1 until sigma", 1, 0)
    y_sigma, y_T = hold.gains(s_sigma, x, s_T)
    _close("hold 1 until sigma: E[fu] = -M eps/2", f * y_T, -M * eps / 2, rows)

    if path_samples:
        step = grid_step if grid_step is not None else default_grid_step(params)
        report.grid_step = str(step)
        pd = _draw(params, path_samples, seed + 1, n_streams,
                   lambda prm, size, rng: simulate_paths(prm, size, step, rng))
        block = params.discrete()
        for s in (a, -a, b, -b):
            target = sum(
                _blocks.atom_probability(block, lab)
                for lab in _blocks.ATOMS
                if lab[2] * _blocks.level(block, lab) == s
            )
            _close(f"path walk: P(S_T = {s})", (np.abs(pd["s_T"] - float(s)) < 1e-9).astype(float), target, rows)
        first_hit = np.abs(pd["s_sigma"]) == 1
        rows.append(MCEstimate("path walk: sigma < T and |W_sigma| = 1", float(first_hit.mean()), 0.0, 1.0,
                               bool(first_hit.all() and (pd["T_index"] > pd["sigma_index"]).all()), "exact"))
    return report
