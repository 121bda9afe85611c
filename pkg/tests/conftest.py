import random
from functools import reduce

import numpy as np
import pytest

from fewcopy.states import build_graph_state


def random_connected_graph(n, rng):
    """Random spanning tree plus a random sprinkle of extra edges."""
    order = list(range(n))
    rng.shuffle(order)
    edges = {tuple(sorted((order[k], order[rng.randrange(k)]))) for k in range(1, n)}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < 0.3:
                edges.add((u, v))
    return sorted(edges)


def random_graph_states(count, n_range, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.choice(list(n_range))
        had = [q for q in range(n) if rng.random() < 0.3]
        out.append(build_graph_state(random_connected_graph(n, rng), n, hadamard=had))
    return out


_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def circuit_statevector(n, edges, hadamard=()):
    """|+>^n, then CZ on every edge, then H on tagged qubits, all as dense matrices."""
    dim = 1 << n
    psi = np.full(dim, 1 / np.sqrt(dim), dtype=complex)
    for u, v in edges:
        diag = np.ones(dim)
        for b in range(dim):
            if (b >> (n - 1 - u)) & 1 and (b >> (n - 1 - v)) & 1:
                diag[b] = -1
        psi = diag * psi
    for q in hadamard:
        ops = [_H if k == q else np.eye(2) for k in range(n)]
        psi = reduce(np.kron, ops) @ psi
    return psi


@pytest.fixture
def graph_rng():
    return random.Random(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
