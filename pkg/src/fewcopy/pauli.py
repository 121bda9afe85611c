"""Symplectic n-qubit Pauli strings and stabilizer groups.

A Pauli string is stored as two integer bit masks plus a phase exponent::

    P = i**phase * sigma(x_0, z_0) (x) ... (x) sigma(x_{n-1}, z_{n-1})

where ``sigma(1, 0) = X``, ``sigma(0, 1) = Z``, ``sigma(1, 1) = Y`` and bit ``q``
of each mask refers to qubit ``q``. Qubit 0 is the leftmost character of the
text label and the most significant tensor factor of the dense matrix.

Stabilizer group elements are addressed by subset masks over the generators,
so the ``2**n`` elements never have to be stored at once.
"""

from __future__ import annotations

import re
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from functools import reduce

import numpy as np

MAX_ENUMERATION_QUBITS = 20

_LABEL_RE = re.compile(r"^([+-])(i?)([IXYZ]+)$")
_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}

_SINGLE = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
}


class PhaseError(ValueError):
    """Raised when a real sign is requested from a string with imaginary phase."""


def _check_same_size(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise ValueError(
            f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}"
        )


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator with a phase in ``{1, i, -1, -i}``."""

    n_qubits: int
    x_bits: int = 0
    z_bits: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x_bits & ~full or self.z_bits & ~full or self.x_bits < 0 or self.z_bits < 0:
            raise ValueError("bit masks exceed n_qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse ``"+XZII"``, ``"-YY"`` or ``"+iY"``. A missing sign means ``+``."""
        text = label.strip()
        if text and text[0] not in "+-":
            text = "+" + text
        m = _LABEL_RE.match(text)
        if m is None:
            raise ValueError(f"not a Pauli label: {label!r}")
        sign, imag, ops = m.groups()
        phase = (2 if sign == "-" else 0) + (1 if imag else 0)
        x = z = 0
        for q, op in enumerate(ops):
            if op in "XY":
                x |= 1 << q
            if op in "ZY":
                z |= 1 << q
        return cls(len(ops), x, z, phase)

    @property
    def sign(self) -> int:
        """Real sign of a Hermitian string; raises :class:`PhaseError` otherwise."""
        if self.phase % 2:
            raise PhaseError(f"{self} has an imaginary phase")
        return 1 if self.phase == 0 else -1

    @property
    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    def ops(self) -> str:
        """Unsigned operator letters, qubit 0 first."""
        out = []
        for q in range(self.n_qubits):
            xq = (self.x_bits >> q) & 1
            zq = (self.z_bits >> q) & 1
            out.append("IZXY"[2 * xq + zq])
        return "".join(out)

    def __str__(self) -> str:
        return _PHASE_PREFIX[self.phase] + self.ops()

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    def conjugated_by_hadamard(self, qubits) -> PauliString:
        """Return ``H P H`` with Hadamards on ``qubits`` (X <-> Z, Y -> -Y)."""
        mask = 0
        for q in qubits:
            mask |= 1 << q
        x, z = self.x_bits, self.z_bits
        n_y = (x & z & mask).bit_count()
        new_x = (x & ~mask) | (z & mask)
        new_z = (z & ~mask) | (x & mask)
        return PauliString(self.n_qubits, new_x, new_z, self.phase + 2 * n_y)

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix. Intended for small-n checks only."""
        factors = [
            _SINGLE[((self.x_bits >> q) & 1, (self.z_bits >> q) & 1)]
            for q in range(self.n_qubits)
        ]
        return (1j ** self.phase) * reduce(np.kron, factors)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Operator product ``a @ b`` with the phase from single-qubit products."""
    _check_same_size(a, b)
    x1, z1, x2, z2 = a.x_bits, a.z_bits, b.x_bits, b.z_bits
    y1 = x1 & z1
    only_x1 = x1 & ~z1
    only_z1 = z1 & ~x1
    # per qubit: sigma_1 sigma_2 = i**g sigma_3 with g in {-1, 0, 1}
    plus = (y1 & z2 & ~x2) | (only_x1 & x2 & z2) | (only_z1 & x2 & ~z2)
    minus = (y1 & x2 & ~z2) | (only_x1 & z2 & ~x2) | (only_z1 & x2 & z2)
    phase = a.phase + b.phase + plus.bit_count() - minus.bit_count()
    return PauliString(a.n_qubits, x1 ^ x2, z1 ^ z2, phase)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the symplectic inner product of ``a`` and ``b`` is even."""
    _check_same_size(a, b)
    return ((a.x_bits & b.z_bits) ^ (a.z_bits & b.x_bits)).bit_count() % 2 == 0


def _gf2_rank(rows: Sequence[int]) -> int:
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
    return len(basis)


@dataclass(frozen=True)
class StabilizerGroup:
    """Abelian group generated by independent, commuting Hermitian Pauli strings.

    Element ``mask`` is the product of the generators whose bit is set in
    ``mask``; ``mask = 0`` is the identity.
    """

    generators: tuple[PauliString, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise ValueError("a stabilizer group needs at least one generator")
        n = gens[0].n_qubits
        for g in gens:
            if g.n_qubits != n:
                raise ValueError("generators act on different qubit counts")
            g.sign  # noqa: B018  (raises PhaseError for non-Hermitian strings)
        for i, g in enumerate(gens):
            for h in gens[i + 1:]:
                if not commutes(g, h):
                    raise ValueError(f"generators {g} and {h} anticommute")
        rows = [(g.x_bits << n) | g.z_bits for g in gens]
        if _gf2_rank(rows) != len(gens):
            raise ValueError("generators are not independent")

    @property
    def n_qubits(self) -> int:
        return self.generators[0].n_qubits

    @property
    def order(self) -> int:
        return 1 << len(self.generators)

    def __len__(self) -> int:
        return self.order

    def element(self, mask: int) -> PauliString:
        return group_element(self, mask)

    def elements(self) -> Iterator[PauliString]:
        """Yield all elements in mask order 0, 1, ..., 2**k - 1.

        Walks a Gray code so each step costs one multiplication; results are
        reordered by buffering, which is why enumeration is capped at
        ``MAX_ENUMERATION_QUBITS`` generators.
        """
        k = len(self.generators)
        if k > MAX_ENUMERATION_QUBITS:
            raise ValueError(
                f"full enumeration limited to {MAX_ENUMERATION_QUBITS} generators"
            )
        out: list[PauliString | None] = [None] * (1 << k)
        current = PauliString.identity(self.n_qubits)
        out[0] = current
        gray = 0
        for step in range(1, 1 << k):
            bit = (step & -step).bit_length() - 1
            gray ^= 1 << bit
            current = multiply(current, self.generators[bit])
            out[gray] = current
        yield from out  # type: ignore[misc]


def group_element(g: StabilizerGroup, mask: int) -> PauliString:
    """Product of the generators selected by the bits of ``mask``."""
    if not 0 <= mask < g.order:
        raise ValueError(f"mask {mask} outside [0, {g.order})")
    result = PauliString.identity(g.n_qubits)
    k = 0
    while mask:
        if mask & 1:
            result = multiply(result, g.generators[k])
        mask >>= 1
        k += 1
    result.sign  # noqa: B018  (commuting Hermitian generators give a real sign)
    return result
