"""Simulated-annealing baseline over Clifford circuits.

The ansatz is a grid of single-qubit Clifford slots, (layers+1) rows by n
columns, with a fixed CNOT ladder (i -> i+1) between consecutive rows.
One annealing move replaces a uniformly chosen slot with one of the 24
single-qubit Cliffords; moves are accepted with probability
min(1, exp(-dE/T)) under an exponentially decaying temperature.

Trailing all-identity slot rows (and their ladders) are not part of the
prepared circuit, so appending identity rows never changes the energy.

Energies are exact: every Hamiltonian term is conjugated backward through
the circuit and read out against |0..0>.  A batch of chains is evaluated
with vectorized numpy bit arithmetic (n <= 62); a plain-Python path backs
it up and serves as the reference in tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import Hamiltonian
from .pauli import PauliOp, multiply
from .rng import SplitMix64
from .solver_general import e_stab
from .stabgroup import StabGroup, _apply_gate

_VEC_MAX_N = 62


def _enumerate_single_qubit_cliffords():
    """The 24 single-qubit Cliffords as distinct tableau actions.

    Breadth-first over words in {H, S} starting from the identity; the
    discovery order fixes the slot index semantics (index 0 = identity).
    Each action maps X and Z to (x_bit, z_bit, sign_bit) images.
    """

    def gate_on(img, gate):
        x, z, s = img
        return _apply_gate(x, z, s, (gate, 0))

    ident = ((1, 0, 0), (0, 1, 0))
    order = [ident]
    seen = {ident}
    queue = [ident]
    while queue:
        act = queue.pop(0)
        for gate in ("H", "S"):
            nxt = (gate_on(act[0], gate), gate_on(act[1], gate))
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    assert len(order) == 24
    return tuple(order)


CLIFFORD_1Q = _enumerate_single_qubit_cliffords()


def _action_table():
    """table[c][code] for code = x | z<<1 -> (x', z', sign_flip)."""
    table = []
    for ximg, zimg in CLIFFORD_1Q:
        px = PauliOp(1, ximg[0], ximg[1], 2 * ximg[2])
        pz = PauliOp(1, zimg[0], zimg[1], 2 * zimg[2])
        row = [(0, 0, 0)]
        for code in (1, 2, 3):
            if code == 1:
                img = px
            elif code == 2:
                img = pz
            else:
                img = multiply(px, pz)
                img = PauliOp(1, img.x_bits, img.z_bits, (img.phase + 1) % 4)  # Y = iXZ
            row.append((img.x_bits, img.z_bits, img.phase >> 1))
        table.append(tuple(row))
    return tuple(table)


ACTION = _action_table()


def _compose(c2: int, c1: int) -> int:
    """Index of the Clifford acting as (c2 after c1)."""
    out = []
    for code in (1, 2):
        x, z, s = ACTION[c1][code]
        x2, z2, s2 = ACTION[c2][(x | (z << 1))]
        out.append((x2, z2, s ^ s2))
    return CLIFFORD_1Q.index(tuple(out))


INVERSE = tuple(
    next(c2 for c2 in range(24) if _compose(c2, c1) == 0) for c1 in range(24)
)


@dataclass(frozen=True)
class Schedule:
    t_start: float = 5.0
    t_end: float = 0.05
    steps: int = 2500

    def temperature(self, step: int) -> float:
        if self.steps <= 1:
            return self.t_start
        return self.t_start * (self.t_end / self.t_start) ** (step / (self.steps - 1))


@dataclass(frozen=True)
class CliffordAnsatz:
    n: int
    layers: int
    slots: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.slots) != self.layers + 1 or any(len(r) != self.n for r in self.slots):
            raise ValueError("slot grid must be (layers+1) x n")
        if any(not 0 <= c < 24 for row in self.slots for c in row):
            raise ValueError("slot indices must be in [0, 24)")

    @classmethod
    def identity(cls, n: int, layers: int) -> "CliffordAnsatz":
        return cls(n, layers, tuple((0,) * n for _ in range(layers + 1)))

    def active_rows(self) -> tuple[tuple[int, ...], ...]:
        """Rows up to the last non-identity one (trailing ladders dropped)."""
        rows = list(self.slots)
        while len(rows) > 1 and all(c == 0 for c in rows[-1]):
            rows.pop()
        return tuple(rows)


def stabilizer_group(ansatz: CliffordAnsatz) -> StabGroup:
    """Propagate <Z_0..Z_{n-1}> forward through the circuit."""
    n = ansatz.n
    gens = []
    for q in range(n):
        x, z, s = 0, 1 << q, 0
        rows = ansatz.active_rows()
        for li, row in enumerate(rows):
            nx = nz = 0
            flip = 0
            for i in range(n):
                code = ((x >> i) & 1) | (((z >> i) & 1) << 1)
                bx, bz, bs = ACTION[row[i]][code]
                nx |= bx << i
                nz |= bz << i
                flip ^= bs
            x, z, s = nx, nz, s ^ flip
            if li < len(rows) - 1:
                for a in range(n - 1):
                    x, z, s = _apply_gate(x, z, s, ("CNOT", a, a + 1))
        gens.append(PauliOp(n, x, z, 2 * s))
    return StabGroup.from_generators(gens, n)


def evaluate(ansatz: CliffordAnsatz, h: Hamiltonian) -> float:
    """Energy of the prepared stabilizer state."""
    if h.n_sites != ansatz.n:
        raise ValueError("size mismatch")
    if h.n_sites <= _VEC_MAX_N and h.terms:
        ev = _BatchEvaluator([h], ansatz.layers)
        slots = np.array([ansatz.active_rows()], dtype=np.int64)
        return float(ev.energies_for_rows(slots, [0])[0])
    return e_stab(h, stabilizer_group(ansatz))


class _BatchEvaluator:
    """Vectorized backward conjugation of all terms for a batch of chains.

    Chains may carry different Hamiltonians as long as the term letter
    structure is shared (weights enter only the final reduction).
    """

    def __init__(self, hs: list[Hamiltonian], layers: int):
        first = hs[0]
        keys = [op.key for _, op in first.terms]
        for h in hs[1:]:
            if [op.key for _, op in h.terms] != keys:
                raise ValueError("batched Hamiltonians must share term structure")
        self.n = first.n_sites
        self.layers = layers
        self.w = np.array([[w for w, _ in h.terms] for h in hs], dtype=float)
        self.tx = np.array([op.x_bits for _, op in first.terms], dtype=np.int64)
        self.tz = np.array([op.z_bits for _, op in first.terms], dtype=np.int64)
        self.ts = np.array([op.phase >> 1 for _, op in first.terms], dtype=np.int64)
        self.tbl_x = np.array([[c[0] for c in row] for row in ACTION], dtype=np.int64)
        self.tbl_z = np.array([[c[1] for c in row] for row in ACTION], dtype=np.int64)
        self.tbl_s = np.array([[c[2] for c in row] for row in ACTION], dtype=np.int64)
        self.inv = np.array(INVERSE, dtype=np.int64)

    def energies(self, slots: np.ndarray) -> np.ndarray:
        """slots: int array [B, layers+1, n] -> energy per chain."""
        rows_per_chain = []
        for b in range(slots.shape[0]):
            rows = slots.shape[1]
            while rows > 1 and not slots[b, rows - 1].any():
                rows -= 1
            rows_per_chain.append(rows)
        out = np.empty(slots.shape[0], dtype=float)
        # group chains by active depth so each group propagates in lockstep
        for rows in set(rows_per_chain):
            idx = [b for b, r in enumerate(rows_per_chain) if r == rows]
            out[idx] = self.energies_for_rows(slots[idx, :rows, :], idx)
        return out

    def energies_for_rows(self, slots: np.ndarray, chain_idx=None) -> np.ndarray:
        B = slots.shape[0]
        n, T = self.n, self.tx.shape[0]
        x = np.broadcast_to(self.tx, (B, T)).copy()
        z = np.broadcast_to(self.tz, (B, T)).copy()
        s = np.broadcast_to(self.ts, (B, T)).copy()
        n_rows = slots.shape[1]
        for li in range(n_rows - 1, -1, -1):
            if li < n_rows - 1:
                for a in range(n - 2, -1, -1):
                    self._cnot(x, z, s, a, a + 1)
            cliffs = self.inv[slots[:, li, :]]  # [B, n]
            for q in range(n):
                xq = (x >> q) & 1
                zq = (z >> q) & 1
                code = xq | (zq << 1)
                c = cliffs[:, q][:, None]
                bx = self.tbl_x[c, code]
                bz = self.tbl_z[c, code]
                s ^= self.tbl_s[c, code]
                x = (x & ~(1 << q)) | (bx << q)
                z = (z & ~(1 << q)) | (bz << q)
        diag = (x == 0).astype(float)
        signs = 1.0 - 2.0 * (s & 1)
        w = self.w[chain_idx] if chain_idx is not None else self.w
        # row-wise pairwise sum: identical per chain whatever the batch shape
        return (diag * signs * w).sum(axis=1)

    @staticmethod
    def _cnot(x, z, s, a, b):
        xa = (x >> a) & 1
        za = (z >> a) & 1
        xb = (x >> b) & 1
        zb = (z >> b) & 1
        s ^= xa & zb & (xb ^ za ^ 1)
        x ^= xa << b
        z ^= zb << a


@dataclass
class AnnealResult:
    seed: int
    best_energy: float
    best_ansatz: CliffordAnsatz
    trace: list  # (step, temperature, energy, best_energy)


def anneal_batch(
    h,
    schedule: Schedule,
    seeds: list[int],
    layers: int = 2,
    random_init: bool = False,
    keep_trace: bool = True,
) -> list[AnnealResult]:
    """Independent chains, one per seed, evaluated in lockstep.

    ``h`` is one Hamiltonian shared by all chains, or a list (one per
    seed) sharing the same term structure.  Each chain consumes only its
    own splitmix64 stream, so results are identical whether chains run
    alone or in a batch.
    """
    hs = list(h) if isinstance(h, (list, tuple)) else [h] * len(seeds)
    if len(hs) != len(seeds):
        raise ValueError("need one Hamiltonian per seed")
    n = hs[0].n_sites
    if n > _VEC_MAX_N:
        raise ValueError(f"annealer fast path requires n <= {_VEC_MAX_N}")
    B = len(seeds)
    rngs = [SplitMix64(s) for s in seeds]
    slots = np.zeros((B, layers + 1, n), dtype=np.int64)
    if random_init:
        for b, rng in enumerate(rngs):
            for li in range(layers + 1):
                for q in range(n):
                    slots[b, li, q] = rng.randrange(24)
    ev = _BatchEvaluator(hs, layers)
    energy = ev.energies(slots)
    best = energy.copy()
    best_slots = slots.copy()
    traces = [[] for _ in range(B)] if keep_trace else None

    n_slots = (layers + 1) * n
    proposal = slots.copy()
    for step in range(schedule.steps):
        temp = schedule.temperature(step)
        moves = []
        for rng in rngs:
            slot = rng.randrange(n_slots)
            moves.append((slot // n, slot % n, rng.randrange(24)))
        np.copyto(proposal, slots)
        for b, (li, q, c) in enumerate(moves):
            proposal[b, li, q] = c
        new_energy = ev.energies(proposal)
        for b, rng in enumerate(rngs):
            delta = new_energy[b] - energy[b]
            prob = 1.0 if delta <= 0 else math.exp(-delta / temp)
            if rng.uniform() < prob:
                li, q, c = moves[b]
                slots[b, li, q] = c
                energy[b] = new_energy[b]
                if energy[b] < best[b]:
                    best[b] = energy[b]
                    best_slots[b] = slots[b]
            if keep_trace:
                traces[b].append((step, temp, float(energy[b]), float(best[b])))
    out = []
    for b, seed in enumerate(seeds):
        ansatz = CliffordAnsatz(n, layers, tuple(tuple(int(c) for c in row) for row in best_slots[b]))
        out.append(
            AnnealResult(seed, float(best[b]), ansatz, traces[b] if keep_trace else [])
        )
    return out


def anneal(
    h: Hamiltonian,
    schedule: Schedule | None = None,
    seed: int = 0,
    layers: int = 2,
    random_init: bool = False,
):
    """Single annealing chain; returns (best_energy, best_ansatz, trace)."""
    schedule = schedule or Schedule()
    res = anneal_batch(h, schedule, [seed], layers=layers, random_init=random_init)[0]
    return res.best_energy, res.best_ansatz, res.trace
