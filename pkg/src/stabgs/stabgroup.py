"""Canonical stabilizer groups over the symplectic GF(2) representation.

A group is stored as its reduced row echelon basis over the 2n-column
symplectic matrix (column order: x_0..x_{n-1}, then z_0..z_{n-1}), each
row carrying the sign of that generator inside the group.  Two StabGroup
values generate the same signed group iff their serialized forms are
identical, which is what makes state deduplication in the dynamic
programs sound.

Row-level helpers operate on packed rows ``(vec, phase)`` with
``vec = x_bits | z_bits << width`` and phase in {0, 2}; the 1D solver
uses them directly on small windows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .pauli import PauliOp, PauliSet, commutes, phase_product


class StabGroupError(ValueError):
    pass


class AnticommutingGeneratorsError(StabGroupError):
    pass


class MinusIdentityError(StabGroupError):
    pass


class NotFullRankError(StabGroupError):
    pass


class GuardExceededError(StabGroupError):
    pass


# ---------------------------------------------------------------------------
# packed-row algebra
# ---------------------------------------------------------------------------

Row = tuple[int, int]  # (vec, phase) with phase in {0, 2}


def row_pack(x: int, z: int, phase: int, width: int) -> Row:
    return (x | (z << width), phase)


def row_unpack(row: Row, width: int) -> tuple[int, int, int]:
    mask = (1 << width) - 1
    return (row[0] & mask, row[0] >> width, row[1])


def _pivot(vec: int) -> int:
    return (vec & -vec).bit_length() - 1


def row_mul(r1: Row, r2: Row, width: int) -> Row:
    """Exact product of two packed rows, phase mod 4."""
    mask = (1 << width) - 1
    t = phase_product(r1[0] & mask, r1[0] >> width, r2[0] & mask, r2[0] >> width)
    return (r1[0] ^ r2[0], (r1[1] + r2[1] + t) % 4)


def rows_reduce(rows: Sequence[Row], vec: int, phase: int, width: int) -> Row:
    """Reduce a Pauli against RREF rows; phase tracked exactly mod 4."""
    v, ph = vec, phase
    for rv, rph in rows:
        if v & (rv & -rv):
            v, ph = row_mul((v, ph), (rv, rph), width)
    return (v, ph)


def rows_member(rows: Sequence[Row], vec: int, phase: int, width: int) -> str:
    """Membership with sign: 'plus', 'minus', or 'absent'."""
    v, ph = rows_reduce(rows, vec, phase, width)
    if v:
        return "absent"
    return "plus" if ph == 0 else "minus"


def rows_insert(rows: tuple[Row, ...], vec: int, phase: int, width: int):
    """Insert a Hermitian Pauli into canonical RREF rows.

    Returns (status, rows) with status 'added', 'present', or 'minus'.
    The caller guarantees the new element commutes with the group.
    """
    v, ph = rows_reduce(rows, vec, phase, width)
    if v == 0:
        return ("present" if ph == 0 else "minus"), rows
    if ph not in (0, 2):
        raise StabGroupError("non-Hermitian element cannot enter a stabilizer group")
    piv = v & -v
    out = []
    for row in rows:
        if row[0] & piv:
            row = row_mul(row, (v, ph), width)
        out.append(row)
    out.append((v, ph))
    out.sort(key=lambda r: r[0] & -r[0])
    return "added", tuple(out)


def rows_canonical(items: Iterable[Row], width: int) -> tuple[Row, ...]:
    """Canonical RREF rows of a list of mutually commuting Hermitian rows."""
    rows: tuple[Row, ...] = ()
    for vec, phase in items:
        status, rows = rows_insert(rows, vec, phase, width)
        if status == "minus":
            raise MinusIdentityError("generators multiply to -I")
    return rows


def rows_commute(rows: Sequence[Row], vec: int, width: int) -> bool:
    mask = (1 << width) - 1
    x2, z2 = vec & mask, vec >> width
    for rv, _ in rows:
        x1, z1 = rv & mask, rv >> width
        if ((x1 & z2) ^ (z1 & x2)).bit_count() % 2:
            return False
    return True


def rows_project(rows: Sequence[Row], width: int, lo: int, hi: int) -> tuple[Row, ...]:
    """Canonical rows of the subgroup supported on sites [lo, hi], reindexed.

    Computed as the kernel of the outside-window coordinate map on the
    generator span (polynomial, never by element enumeration).
    """
    new_width = max(0, hi - lo + 1)
    inside_x = ((1 << new_width) - 1) << lo if new_width else 0
    inside = inside_x | (inside_x << width)
    full = (1 << (2 * width)) - 1
    outside = full & ~inside

    work = list(rows)
    used = [False] * len(work)
    bits = outside
    while bits:
        col = bits & -bits
        bits ^= col
        pivot_idx = None
        for i, row in enumerate(work):
            if not used[i] and (row[0] & col):
                pivot_idx = i
                break
        if pivot_idx is None:
            continue
        used[pivot_idx] = True
        for i, row in enumerate(work):
            if i != pivot_idx and (row[0] & col):
                work[i] = row_mul(row, work[pivot_idx], width)

    mask = (1 << width) - 1
    kept = []
    for i, (v, ph) in enumerate(work):
        if used[i] or v == 0:
            continue
        if v & outside:  # pivotless outside column cannot remain set
            raise StabGroupError("projection elimination failed")
        x, z = v & mask, v >> width
        kept.append((((x >> lo) | ((z >> lo) << new_width)), ph))
    return rows_canonical(kept, new_width)


def rows_shift_embed(rows: Sequence[Row], width: int, offset: int, new_width: int) -> tuple[Row, ...]:
    """Re-embed rows into a wider window, shifting sites by ``offset``."""
    mask = (1 << width) - 1
    out = []
    for v, ph in rows:
        x, z = v & mask, v >> width
        out.append(((x << offset) | ((z << offset) << new_width), ph))
    return rows_canonical(out, new_width)


# ---------------------------------------------------------------------------
# public group type
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StabGroup:
    """Canonical independent-generator form of a stabilizer group."""

    n_sites: int
    rows: tuple[Row, ...]

    @classmethod
    def trivial(cls, n_sites: int) -> "StabGroup":
        return cls(n_sites, ())

    @classmethod
    def from_generators(cls, gens: Iterable[PauliOp], n_sites: int | None = None) -> "StabGroup":
        """Canonicalize arbitrary (possibly dependent) generators.

        Raises AnticommutingGeneratorsError if any input pair anticommutes
        and MinusIdentityError if a dependent subset multiplies to -I.
        """
        gens = list(gens)
        if n_sites is None:
            if not gens:
                raise StabGroupError("n_sites required for empty generator list")
            n_sites = gens[0].n_sites
        for g in gens:
            if g.n_sites != n_sites:
                raise StabGroupError("generator size mismatch")
            if not g.is_hermitian:
                raise StabGroupError("generators must be Hermitian")
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                if not commutes(a, b):
                    raise AnticommutingGeneratorsError(f"{a} anticommutes with {b}")
        rows = rows_canonical(
            ((g.x_bits | (g.z_bits << n_sites), g.phase) for g in gens), n_sites
        )
        return cls(n_sites, rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def generators(self) -> tuple[PauliOp, ...]:
        mask = (1 << self.n_sites) - 1
        return tuple(
            PauliOp(self.n_sites, v & mask, v >> self.n_sites, ph) for v, ph in self.rows
        )

    def serialize(self) -> str:
        body = ";".join(f"{v:x}.{ph}" for v, ph in self.rows)
        return f"{self.n_sites}:{body}"

    def member_sign(self, p: PauliOp) -> str:
        """'plus' iff p is in the group, 'minus' iff -p is, else 'absent'."""
        if p.n_sites != self.n_sites:
            raise StabGroupError("size mismatch")
        return rows_member(self.rows, p.x_bits | (p.z_bits << self.n_sites), p.phase, self.n_sites)

    def member_value(self, p: PauliOp) -> int:
        return {"plus": 1, "minus": -1, "absent": 0}[self.member_sign(p)]

    def extend(self, p: PauliOp) -> "StabGroup":
        """Canonical <self, p>; rank grows iff p was absent."""
        if p.n_sites != self.n_sites:
            raise StabGroupError("size mismatch")
        for g in self.generators:
            if not commutes(g, p):
                raise AnticommutingGeneratorsError(f"{p} anticommutes with generator {g}")
        status, rows = rows_insert(
            self.rows, p.x_bits | (p.z_bits << self.n_sites), p.phase, self.n_sites
        )
        if status == "minus":
            raise MinusIdentityError(f"extending by {p} yields -I")
        return StabGroup(self.n_sites, rows)

    def project_window(self, m: int, l: int) -> "StabGroup":
        """Subgroup supported entirely inside sites [m, l], reindexed."""
        if not 0 <= m <= l < self.n_sites:
            raise StabGroupError(f"invalid window [{m}, {l}]")
        return StabGroup(l - m + 1, rows_project(self.rows, self.n_sites, m, l))

    def intersect_with_set(self, candidates: Iterable[PauliOp]) -> PauliSet:
        """Candidates that are exact (sign-matching) members of the group."""
        out = PauliSet()
        for q in candidates:
            if self.member_sign(q) == "plus":
                out.add(q)
        return out

    def enumerate_elements(self) -> PauliSet:
        """All 2^rank signed elements including +I (test oracle, rank <= 20)."""
        if self.rank > 20:
            raise GuardExceededError("enumerate_elements rank guard (20) exceeded")
        elems: list[Row] = [(0, 0)]
        for row in self.rows:
            elems += [row_mul(e, row, self.n_sites) for e in elems]
        mask = (1 << self.n_sites) - 1
        out = PauliSet()
        for v, ph in elems:
            out.add(PauliOp(self.n_sites, v & mask, v >> self.n_sites, ph))
        return out

    def to_clifford_circuit(self) -> "CircuitDescription":
        if self.rank != self.n_sites:
            raise NotFullRankError(f"rank {self.rank} < n_sites {self.n_sites}")
        circuit = _synthesize(self)
        regenerated = StabGroup.from_generators(
            [
                conjugate_through_circuit(PauliOp.from_letters(self.n_sites, {q: "Z"}), circuit)
                for q in range(self.n_sites)
            ],
            self.n_sites,
        )
        if regenerated != self:
            raise StabGroupError("circuit synthesis failed conjugation check")
        return circuit


# ---------------------------------------------------------------------------
# Clifford circuit synthesis and conjugation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircuitDescription:
    """Gate list over {H, S, CNOT, X, Z} preparing a stabilizer state from |0..0>."""

    n: int
    gates: tuple[tuple, ...]

    def to_json_dict(self) -> dict:
        return {"n": self.n, "gates": [list(g) for g in self.gates]}


def _apply_gate(x: int, z: int, s: int, gate: tuple) -> tuple[int, int, int]:
    """Conjugate a Pauli (bit vectors + sign bit) by one gate: P -> g P g†."""
    kind = gate[0]
    if kind == "H":
        q = gate[1]
        bit = 1 << q
        xq, zq = x & bit, z & bit
        s ^= 1 if (xq and zq) else 0
        x = (x & ~bit) | zq
        z = (z & ~bit) | xq
    elif kind == "S":
        q = gate[1]
        bit = 1 << q
        if (x & bit) and (z & bit):
            s ^= 1
        z ^= x & bit
    elif kind == "X":
        q = gate[1]
        if z & (1 << q):
            s ^= 1
    elif kind == "Z":
        q = gate[1]
        if x & (1 << q):
            s ^= 1
    elif kind == "CNOT":
        a, b = gate[1], gate[2]
        xa, za = (x >> a) & 1, (z >> a) & 1
        xb, zb = (x >> b) & 1, (z >> b) & 1
        if xa & zb & (xb ^ za ^ 1):
            s ^= 1
        x ^= xa << b
        z ^= zb << a
    else:
        raise StabGroupError(f"unknown gate {kind!r}")
    return x, z, s


def conjugate_through_circuit(p: PauliOp, circuit: CircuitDescription) -> PauliOp:
    """Propagate p through the circuit gate by gate (application order)."""
    if p.n_sites != circuit.n:
        raise StabGroupError("size mismatch")
    x, z, s = p.x_bits, p.z_bits, p.phase >> 1
    for gate in circuit.gates:
        x, z, s = _apply_gate(x, z, s, gate)
    return PauliOp(p.n_sites, x, z, 2 * s)


def _synthesize(group: StabGroup) -> CircuitDescription:
    """Reduce generators to {+Z_j} by gates, then invert the gate list."""
    n = group.n_sites
    rows = [[g.x_bits, g.z_bits, g.phase >> 1] for g in group.generators]
    gates: list[tuple] = []

    def apply(gate: tuple):
        for row in rows:
            row[0], row[1], row[2] = _apply_gate(row[0], row[1], row[2], gate)
        gates.append(gate)

    for j in range(n):
        bit = 1 << j
        pivot = next((i for i in range(j, n) if rows[i][0] & bit), None)
        if pivot is None:
            pivot = next((i for i in range(j, n) if rows[i][1] & bit), None)
            if pivot is None:
                raise StabGroupError("full-rank group leaves a qubit untouched")
            apply(("H", j))
        rows[j], rows[pivot] = rows[pivot], rows[j]
        for c in range(n):
            if c != j and (rows[j][0] >> c) & 1:
                apply(("CNOT", j, c))
        if rows[j][1] & bit:
            apply(("S", j))
        for c in range(n):
            if c != j and (rows[j][1] >> c) & 1:
                apply(("H", c))
                apply(("CNOT", j, c))
                apply(("H", c))
        apply(("H", j))
        # remaining rows commute with Z_j, so their x_j is already clear;
        # clear their z_j by row multiplication (same group, no gates)
        for i in range(n):
            if i != j and (rows[i][1] & bit):
                t = phase_product(rows[i][0], rows[i][1], rows[j][0], rows[j][1])
                rows[i][0] ^= rows[j][0]
                rows[i][1] ^= rows[j][1]
                rows[i][2] = (rows[i][2] + rows[j][2] + (t >> 1)) & 1
    for j in range(n):
        if rows[j][2]:
            apply(("X", j))

    inverse: list[tuple] = []
    for gate in reversed(gates):
        if gate[0] == "S":
            inverse += [gate, gate, gate]
        else:
            inverse.append(gate)
    # cancel adjacent involutive pairs (H H, X X, Z Z, CNOT CNOT)
    cleaned: list[tuple] = []
    for gate in inverse:
        if cleaned and cleaned[-1] == gate and gate[0] != "S":
            cleaned.pop()
        else:
            cleaned.append(gate)
    return CircuitDescription(n, tuple(cleaned))
