"""Few-copy entanglement detection: confidence bounds and protocol simulation.

Each copy of the state is queried with one randomly drawn binary observable.
After ``N`` copies with ``S`` "yes" answers the deviation
``delta = S/N - p_s`` decides the outcome: for ``delta > 0`` entanglement is
claimed with confidence at least ``1 - exp(-D(p_s + delta || p_s) N)``, and
for ``delta <= 0`` the run is inconclusive.

Randomness comes from numpy's ``PCG64`` bit generator seeded through
``SeedSequence``, which is reproducible across platforms. Trial ``k`` of a
batch seeded with ``seed`` uses ``SeedSequence([seed, k])``.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from fewcopy.states import (
    NoisyState,
    ObservableSet,
    expected_p_e,
    lambda_limit,
    outcome_probabilities,
    outcome_probability_oracle,
)


class NoiseLimitError(ValueError):
    """The expected deviation from the separable bound is not positive."""


def kl_divergence(x, y):
    """Bernoulli KL divergence ``D(x || y)`` in nats, with ``0 log 0 = 0``.

    Accepts scalars or arrays for ``x``; ``y`` must lie strictly inside (0, 1).
    """
    if not 0.0 < y < 1.0:
        raise ValueError(f"y must lie in (0, 1), got {y}")
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0.0) | (xa > 1.0)):
        raise ValueError("x must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(xa > 0.0, xa * np.log(xa / y), 0.0)
        b = np.where(xa < 1.0, (1.0 - xa) * np.log((1.0 - xa) / (1.0 - y)), 0.0)
    d = np.maximum(a + b, 0.0)
    return float(d) if d.ndim == 0 else d


def confidence_min(delta: float, p_s: float, n: int) -> float | None:
    """Lower bound on the detection confidence after ``n`` copies.

    Returns ``None`` when ``delta <= 0``: no claim can be made.
    """
    if delta <= 0.0:
        return None
    if p_s + delta > 1.0 + 1e-15:
        raise ValueError("p_s + delta exceeds 1")
    return -math.expm1(-kl_divergence(min(p_s + delta, 1.0), p_s) * n)


def max_copies(c0: float, p_s: float, delta: float) -> float:
    """Copies needed at most to reach confidence ``c0``; real-valued, not rounded."""
    if not 0.0 < c0 < 1.0:
        raise ValueError("c0 must lie in (0, 1)")
    if delta <= 0.0:
        raise NoiseLimitError(
            "noise at or beyond lambda_lim: the deviation from the separable bound is not positive"
        )
    if p_s + delta > 1.0 + 1e-15:
        raise ValueError("p_s + delta exceeds 1")
    return -math.log1p(-c0) / kl_divergence(min(p_s + delta, 1.0), p_s)


def max_copies_for_noise(c0: float, noise: float, n: int, p_s: float = 0.75) -> float:
    """:func:`max_copies` at the expected deviation of the white-noise model."""
    return max_copies(c0, p_s, expected_p_e(noise, n) - p_s)


def check_noise(noise: float, n: int) -> None:
    limit = lambda_limit(n)
    if noise >= limit:
        raise NoiseLimitError(
            f"noise {noise} is not below lambda_lim = 2^n / (2 (2^n - 1)) = {limit:.12g} for n = {n}"
        )


def confidence_curve(noise: float, n: int, p_s: float, max_n: int) -> list[tuple[int, float]]:
    """Theoretical minimum confidence for ``N = 1 .. max_n`` copies."""
    check_noise(noise, n)
    d = kl_divergence(expected_p_e(noise, n), p_s)
    return [(k, -math.expm1(-d * k)) for k in range(1, max_n + 1)]


@dataclass(frozen=True)
class ProtocolConfig:
    observable_set: ObservableSet
    state: NoisyState
    n_copies: int
    target_confidence: float = 0.99
    rng_seed: int = 0
    mode: Literal["analytic", "oracle"] = "analytic"

    def __post_init__(self):
        if self.n_copies < 1:
            raise ValueError("n_copies must be at least 1")
        if not 0.0 < self.target_confidence < 1.0:
            raise ValueError("target_confidence must lie in (0, 1)")
        if self.mode not in ("analytic", "oracle"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.observable_set.n_qubits != self.state.n_qubits:
            raise ValueError("observable set and state act on different registers")
        if self.observable_set.n_qubits > 62:
            raise ValueError("sampling limited to 62 qubits")


@dataclass(frozen=True)
class CopyRecord:
    copy_index: int
    observable_mask: int
    outcome: int
    cumulative_s: int
    p_e_obs: float
    delta: float
    c_min: float | None

    @property
    def conclusive(self) -> bool:
        return self.c_min is not None


@dataclass(frozen=True)
class ConfidenceTrace:
    """Per-copy record of a protocol run, stored column-wise.

    ``c_min`` is NaN wherever ``delta <= 0``; :attr:`conclusive` marks the rest.
    """

    observable_mask: np.ndarray
    outcome: np.ndarray
    cumulative_s: np.ndarray
    p_e_obs: np.ndarray
    delta: np.ndarray
    c_min: np.ndarray
    separable_bound: float
    n_qubits: int
    noise: float
    uniform_weights: bool
    rng_seed: int
    observable_set: ObservableSet | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return self.outcome.size

    @property
    def copy_index(self) -> np.ndarray:
        return np.arange(len(self))

    @property
    def conclusive(self) -> np.ndarray:
        return self.delta > 0.0

    @property
    def n_copies(self) -> int:
        return len(self)

    @property
    def final_s(self) -> int:
        return int(self.cumulative_s[-1])

    @property
    def final_delta(self) -> float:
        return float(self.delta[-1])

    @property
    def verdict(self) -> str:
        return "entangled" if self.final_delta > 0.0 else "inconclusive"

    @property
    def confidence(self) -> float | None:
        """Final minimum confidence, ``None`` if inconclusive."""
        return float(self.c_min[-1]) if self.final_delta > 0.0 else None

    def first_reaching(self, c0: float) -> int | None:
        """Number of copies after which ``c_min >= c0`` first holds."""
        hit = np.flatnonzero(np.nan_to_num(self.c_min, nan=0.0) >= c0)
        return int(hit[0]) + 1 if hit.size else None

    def records(self) -> Iterator[CopyRecord]:
        for k in range(len(self)):
            yield CopyRecord(
                copy_index=k,
                observable_mask=int(self.observable_mask[k]),
                outcome=int(self.outcome[k]),
                cumulative_s=int(self.cumulative_s[k]),
                p_e_obs=float(self.p_e_obs[k]),
                delta=float(self.delta[k]),
                c_min=float(self.c_min[k]) if self.delta[k] > 0.0 else None,
            )


def make_rng(seed: int, trial: int | None = None) -> np.random.Generator:
    entropy = seed if trial is None else [seed, trial]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _draw_masks(obs: ObservableSet, n_copies: int, rng: np.random.Generator) -> np.ndarray:
    if obs.weights is None:
        return rng.integers(0, obs.size, size=n_copies, dtype=np.int64)
    return rng.choice(obs.size, size=n_copies, p=obs.weights).astype(np.int64)


def _outcome_probabilities(cfg: ProtocolConfig, masks: np.ndarray) -> np.ndarray:
    if cfg.mode == "analytic":
        return outcome_probabilities(cfg.state, masks)
    unique, inverse = np.unique(masks, return_inverse=True)
    probs = np.array([outcome_probability_oracle(cfg.state, int(m)) for m in unique])
    return probs[inverse]


def trace_from_outcomes(
    masks: np.ndarray,
    outcomes: np.ndarray,
    p_s: float,
    *,
    n_qubits: int,
    noise: float = float("nan"),
    uniform_weights: bool = True,
    rng_seed: int = 0,
    observable_set: ObservableSet | None = None,
) -> ConfidenceTrace:
    """Build the cumulative trace from raw per-copy outcomes."""
    outcomes = np.asarray(outcomes, dtype=np.int8)
    if outcomes.size == 0:
        raise ValueError("at least one outcome is needed")
    if np.any((outcomes != 0) & (outcomes != 1)):
        raise ValueError("outcomes must be 0 or 1")
    s = np.cumsum(outcomes, dtype=np.int64)
    k = np.arange(1, outcomes.size + 1)
    p_obs = s / k
    delta = p_obs - p_s
    with np.errstate(invalid="ignore"):
        c = -np.expm1(-kl_divergence(p_obs, p_s) * k)
    c_min = np.where(delta > 0.0, c, np.nan)
    arrays = [np.asarray(masks, dtype=np.int64), outcomes, s, p_obs, delta, c_min]
    for a in arrays:
        a.flags.writeable = False
    return ConfidenceTrace(
        *arrays,
        separable_bound=p_s,
        n_qubits=n_qubits,
        noise=noise,
        uniform_weights=uniform_weights,
        rng_seed=rng_seed,
        observable_set=observable_set,
    )


def run_protocol(cfg: ProtocolConfig, rng: np.random.Generator | None = None) -> ConfidenceTrace:
    """Simulate ``cfg.n_copies`` i.i.d. copies, one random observable each.

    Deterministic in ``cfg.rng_seed`` unless an explicit ``rng`` is given.
    """
    if rng is None:
        rng = make_rng(cfg.rng_seed)
    obs = cfg.observable_set
    masks = _draw_masks(obs, cfg.n_copies, rng)
    p_yes = _outcome_probabilities(cfg, masks)
    outcomes = (rng.random(cfg.n_copies) < p_yes).astype(np.int8)
    return trace_from_outcomes(
        masks,
        outcomes,
        obs.separable_bound,
        n_qubits=obs.n_qubits,
        noise=cfg.state.noise,
        uniform_weights=obs.is_uniform,
        rng_seed=cfg.rng_seed,
        observable_set=obs,
    )


def run_trials(cfg: ProtocolConfig, trials: int) -> list[ConfidenceTrace]:
    """Independent runs; trial ``k`` draws from ``make_rng(cfg.rng_seed, k)``."""
    return [run_protocol(cfg, make_rng(cfg.rng_seed, k)) for k in range(trials)]


def final_counts(cfg: ProtocolConfig, trials: int) -> np.ndarray:
    """Final ``S`` of each trial of :func:`run_trials`, without keeping traces."""
    return np.array([run_protocol(cfg, make_rng(cfg.rng_seed, k)).final_s for k in range(trials)])


def with_seed(cfg: ProtocolConfig, seed: int) -> ProtocolConfig:
    return replace(cfg, rng_seed=seed)
