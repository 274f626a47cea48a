"""Ground-truth engines for tests: exhaustive stabilizer enumeration and
dense-vector expectation values for tiny systems.

Hard caps are contractual; these are test oracles, not simulators.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .hamiltonian import Hamiltonian
from .pauli import PauliOp
from .stabgroup import (
    CircuitDescription,
    GuardExceededError,
    NotFullRankError,
    StabGroup,
    StabGroupError,
)

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class DenseState:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm} not unit")


def dense_pauli(p: PauliOp) -> np.ndarray:
    """Dense matrix of a Pauli; site 0 is the least significant qubit."""
    mat = np.array([[1.0 + 0j]])
    for site in range(p.n_sites):
        mat = np.kron(_SINGLE[p.letter(site)], mat)
    return (1j**p.phase) * mat


@functools.lru_cache(maxsize=4)
def enumerate_full_groups(n: int) -> tuple[StabGroup, ...]:
    """All full (rank n) stabilizer groups, each exactly once.

    DFS over signed Paulis with canonical dedup; n <= 3 is a hard guard.
    The count must equal 2^n * prod_{i<=n} (2^i + 1).
    """
    if n > 3:
        raise GuardExceededError("enumerate_full_groups guard: n <= 3")
    paulis = [
        PauliOp(n, x, z, ph)
        for x in range(1 << n)
        for z in range(1 << n)
        if x | z
        for ph in (0, 2)
    ]
    seen = {(): True}
    full: list[StabGroup] = []

    def visit(group: StabGroup):
        if group.rank == n:
            full.append(group)
            return
        for p in paulis:
            try:
                child = group.extend(p)
            except StabGroupError:
                continue
            if child.rank == group.rank or child.rows in seen:
                continue
            seen[child.rows] = True
            visit(child)

    visit(StabGroup.trivial(n))
    return tuple(full)


def dense_from_group(s: StabGroup) -> DenseState:
    """The unique state stabilized by a full group, via projector products."""
    if s.rank != s.n_sites:
        raise NotFullRankError("dense_from_group requires a full group")
    if s.n_sites > 10:
        raise GuardExceededError("dense_from_group guard: n <= 10")
    dim = 1 << s.n_sites
    proj = np.eye(dim, dtype=complex)
    for g in s.generators:
        proj = proj @ ((np.eye(dim, dtype=complex) + dense_pauli(g)) / 2.0)
    for col in range(dim):
        vec = proj[:, col]
        norm = np.linalg.norm(vec)
        if norm > 1e-8:
            vec = vec / norm
            for g in s.generators:
                if np.linalg.norm(dense_pauli(g) @ vec - vec) > 1e-9:
                    raise StabGroupError("projector construction failed")
            return DenseState(s.n_sites, vec)
    raise StabGroupError("no stabilized state found")


def dense_expectation(h: Hamiltonian, psi: DenseState) -> float:
    """<psi|H|psi> as a real number (imaginary part must vanish)."""
    if h.n_sites > 10:
        raise GuardExceededError("dense_expectation guard: n <= 10")
    value = 0.0 + 0.0j
    for w, op in h.terms:
        value += w * (psi.amplitudes.conj() @ (dense_pauli(op) @ psi.amplitudes))
    if abs(value.imag) >= 1e-10:
        raise ValueError(f"expectation has imaginary part {value.imag}")
    return float(value.real)


def simulate_circuit(circuit: CircuitDescription) -> DenseState:
    """Statevector of circuit|0..0>, for cross-checking Clifford synthesis."""
    if circuit.n > 10:
        raise GuardExceededError("simulate_circuit guard: n <= 10")
    state = np.zeros(1 << circuit.n, dtype=complex)
    state[0] = 1.0
    for gate in circuit.gates:
        state = _apply_dense_gate(state, circuit.n, gate)
    return DenseState(circuit.n, state)


def _apply_dense_gate(state: np.ndarray, n: int, gate: tuple) -> np.ndarray:
    kind = gate[0]
    psi = state.reshape([2] * n)
    if kind in ("H", "S", "X", "Z"):
        q = gate[1]
        mats = {
            "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
            "S": np.array([[1, 0], [0, 1j]], dtype=complex),
            "X": _SINGLE["X"],
            "Z": _SINGLE["Z"],
        }
        axis = n - 1 - q
        psi = np.moveaxis(np.tensordot(mats[kind], psi, axes=([1], [axis])), 0, axis)
    elif kind == "CNOT":
        a, b = gate[1], gate[2]
        mat = np.zeros((4, 4), dtype=complex)
        for ctl in (0, 1):
            for tgt in (0, 1):
                mat[(ctl << 1) | (tgt ^ ctl), (ctl << 1) | tgt] = 1.0
        axes = (n - 1 - a, n - 1 - b)
        psi = np.tensordot(mat.reshape(2, 2, 2, 2), psi, axes=([2, 3], list(axes)))
        psi = np.moveaxis(psi, [0, 1], list(axes))
    else:
        raise ValueError(f"unknown gate {kind!r}")
    return psi.reshape(-1)
