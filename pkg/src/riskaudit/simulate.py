"""Synthetic populations from a score that is calibrated by construction.

Every group shares the per-decile recidivism probability ``q(s)``; groups
differ only in how scores are distributed. A group's decile masses are an
exponential tilt of a base distribution, ``m(s) ∝ base(s) * exp(theta * s)``,
with ``theta`` solved so that ``sum_s m(s) q(s)`` hits the group's target
prevalence.

Randomness: ``numpy.random.PCG64`` seeded through ``SeedSequence(seed)``.
A single population uses ``SeedSequence(seed)`` directly; Monte Carlo
replicate ``i`` uses child ``i`` of ``SeedSequence(seed).spawn(reps)``.
"""

import json
import math
import statistics
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .exceptions import ConfigError
from .impact import delta_general
from .ingest import FELONY, Dataset
from .validation import DECILES

RNG_NAME = "numpy.PCG64/SeedSequence"
DEFAULT_Q = tuple(round(0.1 + 0.8 * i / 9, 12) for i in range(10))
UNIFORM_BASE = (0.1,) * 10
_CENTER = 5.5


def _check_q(q):
    q = tuple(float(v) for v in q)
    if len(q) != len(DECILES):
        raise ConfigError(f"q must have {len(DECILES)} entries, got {len(q)}")
    if any(not 0.0 <= v <= 1.0 for v in q):
        raise ConfigError("every q(s) must lie in [0, 1]")
    if any(b < a for a, b in zip(q, q[1:])):
        raise ConfigError("q must be nondecreasing in the score")
    return q


def _check_base(base):
    base = np.asarray(base, dtype=float)
    if base.shape != (len(DECILES),) or np.any(base < 0) or base.sum() <= 0:
        raise ConfigError("base_mass must be 10 non-negative weights with positive sum")
    return tuple((base / base.sum()).tolist())


def tilted_mass(base, theta):
    base = np.asarray(base, dtype=float)
    support = base > 0
    logw = np.full(base.shape, -np.inf)
    logw[support] = np.log(base[support]) + theta * (np.arange(1, 11)[support] - _CENTER)
    logw -= logw[support].max()
    w = np.exp(logw)
    return w / w.sum()


def solve_mass(q, base, prevalence):
    """Decile masses, tilted from ``base``, whose mean of ``q`` equals ``prevalence``.

    Raises ConfigError when the target lies outside ``[min q, max q]`` over
    the base support.
    """
    q = np.asarray(q, dtype=float)
    base = np.asarray(base, dtype=float)
    support = base > 0
    lo, hi = q[support].min(), q[support].max()
    if not lo <= prevalence <= hi:
        raise ConfigError(
            f"prevalence {prevalence} unreachable: must lie in [min q, max q] = [{lo}, {hi}]"
        )
    if hi - lo < 1e-15:
        return base / base.sum()
    if prevalence == lo or prevalence == hi:
        # limit theta -> -inf / +inf: all mass on the extreme-q deciles
        edge = support & (q == prevalence)
        m = np.where(edge, base, 0.0)
        return m / m.sum()

    def excess(theta):
        return float(tilted_mass(base, theta) @ q) - prevalence

    a, b = -1.0, 1.0
    while excess(a) > 0:
        a *= 2
        if a < -1e4:
            raise ConfigError(f"cannot reach prevalence {prevalence}")
    while excess(b) < 0:
        b *= 2
        if b > 1e4:
            raise ConfigError(f"cannot reach prevalence {prevalence}")
    theta = brentq(excess, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return tilted_mass(base, theta)


@dataclass(frozen=True)
class SimConfig:
    """Synthetic population settings.

    ``groups`` and ``prevalence`` are parallel; the first group plays the
    role of group b in impact computations.
    """

    groups: tuple = ("b", "w")
    prevalence: tuple = (0.51, 0.39)
    n_per_group: tuple = (100_000, 100_000)
    q: tuple = DEFAULT_Q
    base_mass: tuple = UNIFORM_BASE
    seed: int = 0
    masses: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        groups = tuple(str(g) for g in self.groups)
        prevalence = tuple(float(p) for p in self.prevalence)
        n = self.n_per_group
        n = (int(n),) * len(groups) if isinstance(n, (int, np.integer)) else tuple(int(v) for v in n)
        if len(groups) < 1 or len(set(groups)) != len(groups):
            raise ConfigError("groups must be distinct and non-empty")
        if len(prevalence) != len(groups) or len(n) != len(groups):
            raise ConfigError("groups, prevalence and n_per_group must have the same length")
        if any(v < 1 for v in n):
            raise ConfigError("n_per_group must be positive")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        q = _check_q(self.q)
        base = _check_base(self.base_mass)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "prevalence", prevalence)
        object.__setattr__(self, "n_per_group", n)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "base_mass", base)
        object.__setattr__(self, "seed", int(self.seed))
        masses = tuple(tuple(solve_mass(q, base, p).tolist()) for p in prevalence)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_mapping(cls, mapping):
        mapping = dict(mapping)
        prevalence = mapping.pop("prevalence", None)
        if isinstance(prevalence, dict):
            if "groups" in mapping:
                raise ConfigError("give groups either as prevalence keys or as a list, not both")
            mapping["groups"] = tuple(prevalence)
            mapping["prevalence"] = tuple(prevalence.values())
        elif prevalence is not None:
            mapping["prevalence"] = tuple(prevalence)
        unknown = set(mapping) - {"groups", "prevalence", "n_per_group", "q", "base_mass", "seed"}
        if unknown:
            raise ConfigError(f"unknown simulation keys: {sorted(unknown)}")
        try:
            return cls(**mapping)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def mass(self, group):
        return np.asarray(self.masses[self.groups.index(group)])

    def implied_prevalence(self, group):
        return float(self.mass(group) @ np.asarray(self.q))

    def with_seed(self, seed):
        return SimConfig(self.groups, self.prevalence, self.n_per_group, self.q, self.base_mass, seed)

    def to_dict(self):
        return {
            "groups": list(self.groups),
            "prevalence": list(self.prevalence),
            "n_per_group": list(self.n_per_group),
            "q": list(self.q),
            "base_mass": list(self.base_mass),
            "seed": self.seed,
        }


def load_sim_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read simulation config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("simulation config must be a JSON object")
    return raw


def _sample(cfg, rng):
    ids, groups, scores, outcomes = [], [], [], []
    q = np.asarray(cfg.q)
    for g, n, mass in zip(cfg.groups, cfg.n_per_group, cfg.masses):
        cdf = np.cumsum(mass)
        cdf /= cdf[-1]
        s = np.searchsorted(cdf, rng.random(n), side="right") + 1
        y = (rng.random(n) < q[s - 1]).astype(np.int8)
        ids.extend(f"{g}-{i}" for i in range(n))
        groups.extend([g] * n)
        scores.append(s)
        outcomes.append(y)
    total = len(ids)
    return Dataset(
        ids=ids,
        groups=groups,
        scores=np.concatenate(scores),
        outcomes=np.concatenate(outcomes),
        charge_degrees=[FELONY] * total,
        priors=np.zeros(total, dtype=np.int64),
    )


def generate_population(cfg, seed_seq: Optional[np.random.SeedSequence] = None):
    """Draw a dataset from ``cfg``. Scores come from the group's tilted masses, outcomes from ``q(score)``."""
    seed_seq = seed_seq if seed_seq is not None else np.random.SeedSequence(cfg.seed)
    return _sample(cfg, np.random.Generator(np.random.PCG64(seed_seq)))


def analytic_hr_prob(cfg, group, outcome, threshold):
    """Population ``P(S > threshold | R = group, Y = outcome)`` implied by ``cfg``."""
    q = np.asarray(cfg.q)
    w = cfg.mass(group) * (q if outcome == 1 else 1.0 - q)
    total = w.sum()
    if total == 0:
        return None
    return float(w[threshold:].sum() / total) if threshold >= 0 else 1.0


def analytic_delta(cfg, policy, y1, y2, group_b=None, group_w=None):
    group_b = group_b or cfg.groups[0]
    group_w = group_w or cfg.groups[1]
    pb = analytic_hr_prob(cfg, group_b, y1, policy.threshold)
    pw = analytic_hr_prob(cfg, group_w, y2, policy.threshold)
    return policy.spread * (pb - pw)


def analytic_error_rates(cfg, group, threshold):
    """Population prevalence, PPV, FPR and FNR at ``threshold``."""
    q = np.asarray(cfg.q)
    m = cfg.mass(group)
    high = np.arange(1, 11) > threshold
    tp = float((m * q)[high].sum())
    fp = float((m * (1 - q))[high].sum())
    p = float(m @ q)
    return {
        "prevalence": p,
        "ppv": tp / (tp + fp) if tp + fp > 0 else None,
        "fpr": fp / (1 - p) if p < 1 else None,
        "fnr": (p - tp) / p if p > 0 else None,
    }


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    se: Optional[float]
    values: tuple

    @property
    def reps(self):
        return len(self.values)


def _one_rep(cfg, seed_seq, policy, pairs, group_b, group_w):
    pop = generate_population(cfg, seed_seq)
    return [delta_general(pop, policy, y1, y2, group_b, group_w).delta for y1, y2 in pairs]


def _summarize(values):
    reps = len(values)
    mean = math.fsum(values) / reps
    se = statistics.stdev(values) / math.sqrt(reps) if reps > 1 else None
    return MonteCarloResult(mean, se, tuple(values))


def monte_carlo_deltas(cfg, policy, pairs, reps, group_b=None, group_w=None, n_jobs=1):
    """Like :func:`monte_carlo_delta` for several ``(y1, y2)`` pairs on shared replicates."""
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    pairs = [tuple(p) for p in pairs]
    group_b = group_b or cfg.groups[0]
    group_w = group_w or cfg.groups[1]
    children = np.random.SeedSequence(cfg.seed).spawn(reps)
    if n_jobs == 1:
        per_rep = [_one_rep(cfg, c, policy, pairs, group_b, group_w) for c in children]
    else:
        from joblib import Parallel, delayed

        per_rep = Parallel(n_jobs=n_jobs)(
            delayed(_one_rep)(cfg, c, policy, pairs, group_b, group_w) for c in children
        )
    return {pair: _summarize([row[i] for row in per_rep]) for i, pair in enumerate(pairs)}


def monte_carlo_delta(cfg, policy, y1, y2, reps, group_b=None, group_w=None, n_jobs=1):
    """Mean and standard error of the plug-in delta over ``reps`` independent populations.

    Per-replicate values are kept in replicate order, so the result does not
    depend on ``n_jobs``. ``se`` is ``None`` for a single replicate.
    """
    return monte_carlo_deltas(cfg, policy, [(y1, y2)], reps, group_b, group_w, n_jobs)[(y1, y2)]
