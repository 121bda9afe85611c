"""Standard witness estimation as a resource baseline.

Each local term of the witness is a +-1 observable whose mean has to be
estimated to accuracy ``epsilon`` at a given confidence level; the normal
approximation gives ``N = ceil(z**2 (1 - mean**2) / epsilon**2)`` shots per
term, and a witness with ``Q`` terms costs ``Q`` times that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from fewcopy.detector import make_rng, max_copies_for_noise
from fewcopy.states import GraphState, MAX_DENSE_QUBITS, dense_state, pauli_expectation, pauli_trace_fraction

# 68% is the one-sigma convention; 95% uses the usual rounded quantile.
_Z_CONVENTIONS = {0.68: 1.0, 0.95: 1.95996}


def z_score(confidence_level: float) -> float:
    """Two-sided normal quantile for ``confidence_level``."""
    if not 0.0 < confidence_level < 1.0:
        raise ValueError("confidence_level must lie in (0, 1)")
    for level, z in _Z_CONVENTIONS.items():
        if math.isclose(confidence_level, level, abs_tol=1e-12):
            return z
    return NormalDist().inv_cdf(0.5 + confidence_level / 2.0)


def shots_for_accuracy(mean: float, epsilon: float, confidence_level: float) -> int:
    """Smallest shot count with ``z sqrt((1 - mean**2) / N) <= epsilon``."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if abs(mean) > 1.0:
        raise ValueError("mean of a +-1 observable lies in [-1, 1]")
    z = z_score(confidence_level)
    n = z * z * (1.0 - mean * mean) / (epsilon * epsilon)
    # guard against values like 1875.0000000002 from float division
    return max(1, math.ceil(n - 1e-9))


@dataclass(frozen=True)
class ShotEstimate:
    epsilon: float
    confidence_level: float
    noise: float
    shots_per_term: int
    n_terms: int

    @property
    def total_shots(self) -> int:
        return self.shots_per_term * self.n_terms


@dataclass(frozen=True)
class CoverageReport:
    noise: float
    epsilon: float
    confidence_level: float
    shots: int
    trials: int
    hits: int

    @property
    def coverage(self) -> float:
        return self.hits / self.trials


def simulate_expectation_estimation(
    noise: float, epsilon: float, confidence_level: float, trials: int, seed: int
) -> CoverageReport:
    """Fraction of estimates of a noisy stabilizer mean ``1 - noise`` within ``epsilon``.

    Each trial takes :func:`shots_for_accuracy` +-1 samples. The count of +1
    outcomes is drawn as a single binomial, which has the same distribution
    as summing the individual shots.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    mean = 1.0 - noise
    shots = shots_for_accuracy(mean, epsilon, confidence_level)
    rng = make_rng(seed)
    plus = rng.binomial(shots, (1.0 + mean) / 2.0, size=trials)
    estimates = 2.0 * plus / shots - 1.0
    hits = int(np.count_nonzero(np.abs(estimates - mean) <= epsilon + 1e-12))
    return CoverageReport(noise, epsilon, confidence_level, shots, trials, hits)


def witness_total_cost(
    n: int,
    noise: float,
    epsilon: float,
    confidence_level: float,
    q_terms: int | None = None,
) -> ShotEstimate:
    """Shots for all ``q_terms`` local terms (default ``2**n``)."""
    q = (1 << n) if q_terms is None else q_terms
    if q < 1:
        raise ValueError("q_terms must be at least 1")
    per_term = shots_for_accuracy(1.0 - noise, epsilon, confidence_level)
    return ShotEstimate(epsilon, confidence_level, noise, per_term, q)


def resource_ratio(
    n: int,
    noise: float,
    epsilon: float = 0.02,
    confidence_level: float = 0.95,
    q_terms: int | None = None,
    c0: float = 0.99,
) -> tuple[ShotEstimate, float, float]:
    """Witness cost, few-copy copy budget and their ratio."""
    cost = witness_total_cost(n, noise, epsilon, confidence_level, q_terms)
    n_max = max_copies_for_noise(c0, noise, n)
    return cost, n_max, cost.total_shots / n_max


def witness_lambda_limit(g: GraphState, dense: bool = False) -> float:
    """Noise threshold of ``W = 1/2 - |G><G|`` under white noise.

    ``-Tr[W rho_t] / (Tr[W] / 2**n - Tr[W rho_t])``. With ``dense=True`` the
    projector is expanded as the average of all stabilizers and both traces
    are evaluated from the statevector.
    """
    n = g.n_qubits
    if not dense:
        d = 2.0**n
        return d / (2.0 * (d - 1.0))
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense path limited to {MAX_DENSE_QUBITS} qubits")
    psi = dense_state(g)
    overlap = 0.0
    proj_trace = 0.0
    for s in g.generators.elements():
        overlap += pauli_expectation(s, psi).real
        proj_trace += pauli_trace_fraction(s).real
    overlap /= 2.0**n  # <G| P |G>
    # Tr[P] = sum_i Tr[S_i] / 2**n = sum_i (Tr[S_i] / 2**n)
    w_target = 0.5 - overlap
    w_trace_fraction = 0.5 - proj_trace / 2.0**n
    return -w_target / (w_trace_fraction - w_target)
