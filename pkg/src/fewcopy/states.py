"""Graph states, the white-noise model and the stabilizer observable set.

The analytic path never touches amplitudes: for a target stabilizer state
mixed with white noise, every non-identity stabilizer projector
``M = (1 + S) / 2`` answers "yes" with probability ``1 - noise / 2``.

A dense statevector oracle (``n <= MAX_DENSE_QUBITS``) is kept beside it to
check that claim independently. The oracle builds amplitudes from the graph
adjacency directly and applies Pauli strings bitwise, so it shares no code
with the stabilizer algebra it verifies.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from fewcopy.pauli import PauliString, StabilizerGroup

MAX_DENSE_QUBITS = 12
SEPARABLE_BOUND = 0.75

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class GraphState:
    """Graph state ``|G>`` with optional Hadamards on some qubits.

    ``local_cliffords[q]`` is ``"I"`` or ``"H"``; generator ``a`` is
    ``X_a prod_{b in N(a)} Z_b`` conjugated by those local gates.
    """

    n_qubits: int
    edges: frozenset[tuple[int, int]]
    generators: StabilizerGroup
    local_cliffords: tuple[str, ...]

    @property
    def hadamard_qubits(self) -> tuple[int, ...]:
        return tuple(q for q, c in enumerate(self.local_cliffords) if c == "H")

    def neighbors(self, a: int) -> list[int]:
        return sorted({v for e in self.edges for v in e if a in e and v != a})

    def statevector(self) -> DenseState:
        return dense_state(self)


@dataclass(frozen=True)
class NoisyState:
    """``noise * 1/2**n + (1 - noise) * |target><target|``."""

    target: GraphState
    noise: float

    def __post_init__(self):
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError(f"noise must lie in [0, 1], got {self.noise}")

    @property
    def n_qubits(self) -> int:
        return self.target.n_qubits


@dataclass(frozen=True)
class ObservableSet:
    """The binary observables ``(1 + S_i) / 2`` over a stabilizer group.

    ``weights=None`` stands for the uniform distribution, which avoids
    materialising ``2**n`` floats for large ``n``.
    """

    source_group: StabilizerGroup
    separable_bound: float = SEPARABLE_BOUND
    weights: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 < self.separable_bound < 1.0:
            raise ValueError("separable_bound must lie in (0, 1)")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float).copy()
            if w.shape != (self.size,):
                raise ValueError(f"expected {self.size} weights, got shape {w.shape}")
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("weights must be a probability vector")
            w.flags.writeable = False
            object.__setattr__(self, "weights", w)

    @property
    def n_qubits(self) -> int:
        return self.source_group.n_qubits

    @property
    def size(self) -> int:
        return self.source_group.order

    @property
    def is_uniform(self) -> bool:
        return self.weights is None or bool(np.all(self.weights == self.weights[0]))

    def weight_vector(self) -> np.ndarray:
        if self.weights is None:
            return np.full(self.size, 1.0 / self.size)
        return self.weights

    def observable(self, mask: int) -> PauliString:
        """The stabilizer ``S_i`` behind observable ``mask``."""
        return self.source_group.element(mask)


@dataclass(frozen=True)
class DenseState:
    """Normalised statevector, qubit 0 as the most significant index bit."""

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_qubits > MAX_DENSE_QUBITS:
            raise ValueError(f"dense states limited to {MAX_DENSE_QUBITS} qubits")
        amps = np.asarray(self.amplitudes, dtype=complex).copy()
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError("amplitude vector has the wrong length")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-10:
            raise ValueError("amplitudes are not normalised")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)


def build_graph_state(
    edges: Iterable[tuple[int, int]], n: int, hadamard: Iterable[int] = ()
) -> GraphState:
    """Graph state on ``n`` qubits for an arbitrary simple graph."""
    if n < 1:
        raise ValueError("n must be positive")
    edge_set: set[tuple[int, int]] = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
        if u == v:
            raise ValueError(f"self-loop on qubit {u}")
        edge_set.add((min(u, v), max(u, v)))
    had = sorted(set(hadamard))
    if any(not 0 <= q < n for q in had):
        raise ValueError("Hadamard tag outside the register")

    z_masks = [0] * n
    for u, v in edge_set:
        z_masks[u] |= 1 << v
        z_masks[v] |= 1 << u
    gens = [PauliString(n, 1 << a, z_masks[a]) for a in range(n)]
    if had:
        gens = [g.conjugated_by_hadamard(had) for g in gens]
    cliffords = tuple("H" if q in had else "I" for q in range(n))
    return GraphState(n, frozenset(edge_set), StabilizerGroup(tuple(gens)), cliffords)


def build_linear_cluster(n: int) -> GraphState:
    """Path-graph cluster state on ``n >= 2`` qubits."""
    if n < 2:
        raise ValueError("a linear cluster needs at least 2 qubits")
    return build_graph_state([(a, a + 1) for a in range(n - 1)], n)


def build_c4_state() -> GraphState:
    """(|0000> + |0011> + |1100> - |1111>) / 2 as a locally rotated 4-cluster."""
    return build_graph_state([(0, 1), (1, 2), (2, 3)], 4, hadamard=(0, 3))


def observable_set_from_witness(g: GraphState) -> ObservableSet:
    """Observables ``(1 + S_i)/2`` for the witness ``1/2 - |G><G|``.

    Uniform sampling over all ``2**n`` stabilizers; separable states answer
    "yes" with probability at most 3/4.
    """
    return ObservableSet(g.generators, SEPARABLE_BOUND)


def _check_mask(s: NoisyState, obs_mask: int) -> None:
    if not 0 <= obs_mask < (1 << s.n_qubits):
        raise ValueError(f"mask {obs_mask} outside [0, {1 << s.n_qubits})")


def outcome_probability(s: NoisyState, obs_mask: int) -> float:
    """Probability of outcome 1 for observable ``obs_mask`` on the noisy state."""
    _check_mask(s, obs_mask)
    if obs_mask == 0:
        return 1.0
    return 1.0 - s.noise / 2.0


def outcome_probabilities(s: NoisyState, masks: np.ndarray) -> np.ndarray:
    """Vectorised :func:`outcome_probability`."""
    masks = np.asarray(masks)
    if masks.size and (masks.min() < 0 or masks.max() >= (1 << s.n_qubits)):
        raise ValueError("mask outside the group")
    return np.where(masks == 0, 1.0, 1.0 - s.noise / 2.0)


def expected_p_e(noise: float, n: int) -> float:
    """Mean "yes" probability under uniform sampling: ``1 + noise (1 - 2**n) / 2**(n+1)``."""
    d = 2.0**n
    return 1.0 + noise * (1.0 - d) / (2.0 * d)


def lambda_limit(n: int) -> float:
    """Largest white-noise fraction that keeps the expected deviation positive."""
    if n < 1:
        raise ValueError("n must be positive")
    d = 2.0**n
    return d / (2.0 * (d - 1.0))


# --- dense oracle -------------------------------------------------------------


def _reverse_bits(mask: int, n: int) -> int:
    return int(format(mask, f"0{n}b")[::-1], 2) if n else 0


def dense_state(g: GraphState) -> DenseState:
    """Amplitudes ``(-1)**(#edges inside b) / sqrt(2**n)``, then local Hadamards."""
    n = g.n_qubits
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense states limited to {MAX_DENSE_QUBITS} qubits")
    idx = np.arange(1 << n)
    bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
    parity = np.zeros(1 << n, dtype=np.int64)
    for u, v in g.edges:
        parity += bits[u] & bits[v]
    psi = np.where(parity % 2, -1.0, 1.0).astype(complex) / np.sqrt(2.0**n)
    psi = psi.reshape((2,) * n)
    for q in g.hadamard_qubits:
        psi = np.moveaxis(np.tensordot(_HADAMARD, psi, axes=([1], [q])), 0, q)
    return DenseState(n, psi.reshape(-1))


def _bitwise_action(p: PauliString) -> tuple[int, np.ndarray]:
    """``P|b> = coef[b] |b ^ flip>`` over statevector indices."""
    n = p.n_qubits
    flip = _reverse_bits(p.x_bits, n)
    zm = _reverse_bits(p.z_bits, n)
    idx = np.arange(1 << n, dtype=np.uint64)
    z_parity = np.bitwise_count(idx & np.uint64(zm)) & 1
    # sigma(x, z) = i**(x.z) X**x Z**z
    prefactor = 1j ** ((p.phase + (p.x_bits & p.z_bits).bit_count()) % 4)
    return flip, prefactor * np.where(z_parity, -1.0, 1.0)


def apply_pauli(p: PauliString, amplitudes: np.ndarray) -> np.ndarray:
    """Return ``P |psi>`` by acting on basis indices, without a dense matrix."""
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if amplitudes.shape != (1 << p.n_qubits,):
        raise ValueError("statevector length does not match the Pauli string")
    flip, coef = _bitwise_action(p)
    out = np.empty_like(amplitudes)
    out[np.arange(amplitudes.size) ^ flip] = coef * amplitudes
    return out


def pauli_expectation(p: PauliString, state: DenseState) -> complex:
    psi = state.amplitudes
    return complex(np.vdot(psi, apply_pauli(p, psi)))


def pauli_trace_fraction(p: PauliString) -> complex:
    """``Tr[P] / 2**n`` summed over the diagonal of the bitwise action."""
    if p.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"dense evaluation limited to {MAX_DENSE_QUBITS} qubits")
    flip, coef = _bitwise_action(p)
    if flip:
        return 0j
    return complex(coef.sum()) / coef.size


def outcome_probability_oracle(s: NoisyState, obs_mask: int) -> float:
    """Independent evaluation of ``Tr[(1 + S) rho] / 2`` from dense amplitudes."""
    if s.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"oracle limited to {MAX_DENSE_QUBITS} qubits")
    _check_mask(s, obs_mask)
    p = s.target.generators.element(obs_mask)
    tr = pauli_trace_fraction(p)
    pure = pauli_expectation(p, dense_state(s.target))
    value = (1.0 + s.noise * tr + (1.0 - s.noise) * pure) / 2.0
    if abs(value.imag) > 1e-10:
        raise ArithmeticError(f"non-real outcome probability {value}")
    return float(value.real)


# --- graph ingestion ----------------------------------------------------------


class GraphSpecError(ValueError):
    """Malformed graph name or edge-list file."""


def parse_edge_list(text: str, source: str = "<edges>") -> GraphState:
    """Read ``u v`` pairs, one per line, 0-indexed; ``#`` starts a comment.

    The register size is one more than the largest endpoint.
    """
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphSpecError(f"{source}:{lineno}: expected 'u v', got {raw.strip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphSpecError(f"{source}:{lineno}: non-integer vertex in {raw.strip()!r}") from None
        if u < 0 or v < 0:
            raise GraphSpecError(f"{source}:{lineno}: negative vertex index")
        if u == v:
            raise GraphSpecError(f"{source}:{lineno}: self-loop on vertex {u}")
        edges.append((u, v))
    if not edges:
        raise GraphSpecError(f"{source}: no edges found")
    n = 1 + max(max(e) for e in edges)
    return build_graph_state(edges, n)


def load_graph(spec: str) -> GraphState:
    """Resolve ``"linear:N"``, ``"c4"`` or a path to an edge-list file."""
    if spec == "c4":
        return build_c4_state()
    if spec.startswith("linear:"):
        try:
            n = int(spec.split(":", 1)[1])
        except ValueError:
            raise GraphSpecError(f"bad linear cluster size in {spec!r}") from None
        if n < 2:
            raise GraphSpecError("a linear cluster needs at least 2 qubits")
        return build_linear_cluster(n)
    try:
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise GraphSpecError(f"cannot read graph file {spec!r}: {exc.strerror}") from None
    return parse_edge_list(text, source=spec)
