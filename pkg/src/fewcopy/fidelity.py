"""Fidelity with the target graph state from existing protocol data.

With uniform sampling ``S/N`` estimates the average of ``<M_i>`` over all
stabilizer projectors, and ``|G><G| = 2**-n sum_i (2 M_i - 1)`` turns that
average into ``F = 2 S/N - 1``. No further copies are consumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from fewcopy.detector import ConfidenceTrace


@dataclass(frozen=True)
class FidelityEstimate:
    f_hat: float
    std_error: float
    n_copies_used: int

    @property
    def witness_value(self) -> float:
        """Plug-in estimate of ``<1/2 - |G><G|>``."""
        return 0.5 - self.f_hat


def fidelity_from_trace(t: ConfidenceTrace) -> FidelityEstimate:
    if not t.uniform_weights:
        raise ValueError("fidelity estimate requires uniformly sampled observables")
    n = t.n_copies
    p = t.final_s / n
    return FidelityEstimate(
        f_hat=2.0 * p - 1.0,
        std_error=2.0 * math.sqrt(p * (1.0 - p) / n),
        n_copies_used=n,
    )


def expected_fidelity(noise: float, n: int) -> float:
    """``<G| rho |G>`` for white noise of strength ``noise`` on ``n`` qubits."""
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must lie in [0, 1]")
    d = 2.0**n
    return 1.0 - noise * (d - 1.0) / d
