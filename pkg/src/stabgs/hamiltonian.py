"""Weighted Pauli-sum Hamiltonians and their file formats.

Three flavours:

* ``Hamiltonian``        -- finite chain, header ``qubits N``
* ``PeriodicHamiltonian1D`` -- infinite 1D chain, header ``period L``;
  term site indices are relative to a unit origin and may exceed L
  (replication at every multiple of L is implied)
* ``SupercellHamiltonian``  -- wrapped torus, header
  ``supercell D1 [D2] sites_per_cell S`` with ``uterm`` lines of
  ``LETTER@(dx[,dy],s)`` entries; offsets wrap modulo the dims

Signs of parsed Paulis are folded into weights, duplicate terms merge by
weight addition, and terms below ``MERGE_EPS`` are dropped.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .pauli import PauliOp, format_pauli, multiply, parse_pauli
from .rng import SplitMix64

MERGE_EPS = 1e-12
PRUNE_EPS = 1e-12


class HamiltonianError(ValueError):
    pass


class HamiltonianParseError(HamiltonianError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _merge_terms(pairs, n_sites):
    """Fold signs into weights, merge duplicate Paulis, drop tiny weights."""
    acc: dict[tuple[int, int], float] = {}
    order: list[tuple[int, int]] = []
    for weight, op in pairs:
        w = weight * op.sign
        key = (op.x_bits, op.z_bits)
        if key not in acc:
            acc[key] = 0.0
            order.append(key)
        acc[key] += w
    out = []
    for x, z in order:
        w = acc[(x, z)]
        if abs(w) >= MERGE_EPS:
            out.append((w, PauliOp(n_sites, x, z, 0)))
    return tuple(out)


@dataclass(frozen=True)
class Hamiltonian:
    """Finite-chain Pauli sum; all stored Paulis have phase 0."""

    n_sites: int
    terms: tuple[tuple[float, PauliOp], ...]

    @classmethod
    def from_terms(cls, n_sites: int, pairs) -> "Hamiltonian":
        return cls(n_sites, _merge_terms(pairs, n_sites))

    @property
    def k(self) -> int:
        """Locality: max over terms of (last - first + 1); 0 if empty."""
        spans = [
            op.last_site - op.first_site + 1
            for _, op in self.terms
            if not op.is_identity
        ]
        return max(spans, default=0)

    @property
    def by_last_site(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for i, (_, op) in enumerate(self.terms):
            if op.is_identity:
                continue
            out.setdefault(op.last_site, []).append(i)
        return {m: tuple(ids) for m, ids in out.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hamiltonian):
            return NotImplemented
        return self.n_sites == other.n_sites and [
            (w, op.key) for w, op in self.terms
        ] == [(w, op.key) for w, op in other.terms]

    def __hash__(self):
        return hash((self.n_sites, tuple((w, op.key) for w, op in self.terms)))


@dataclass(frozen=True)
class PeriodicHamiltonian1D:
    """1D Hamiltonian invariant under translation by ``l`` sites.

    ``cell_terms`` hold one representative per translation family,
    normalized so the first support site lies in [0, l).
    """

    l: int
    cell_terms: tuple[tuple[float, tuple[tuple[int, str], ...]], ...]

    @classmethod
    def from_terms(cls, l: int, pairs) -> "PeriodicHamiltonian1D":
        """pairs: (weight, pattern) with pattern a (site, letter) sequence."""
        acc: dict[tuple, float] = {}
        order = []
        for weight, pattern in pairs:
            pattern = tuple(sorted((s, c) for s, c in pattern if c != "I"))
            if pattern:
                shift = (pattern[0][0] // l) * l
                pattern = tuple((s - shift, c) for s, c in pattern)
            if pattern not in acc:
                acc[pattern] = 0.0
                order.append(pattern)
            acc[pattern] += weight
        out = tuple(
            (acc[p], p) for p in order if abs(acc[p]) >= MERGE_EPS and p
        )
        return cls(l, out)

    @property
    def k(self) -> int:
        spans = [p[-1][0] - p[0][0] + 1 for _, p in self.cell_terms]
        return max(spans, default=0)

    def finite_chain(self, n_sites: int) -> Hamiltonian:
        """Open-boundary realization: every translate fully inside [0, n)."""
        pairs = []
        for w, pattern in self.cell_terms:
            span_last = pattern[-1][0]
            j = -(pattern[0][0] // self.l) - 2
            while True:
                base = j * self.l
                j += 1
                if base + pattern[0][0] < 0:
                    continue
                if base + span_last >= n_sites:
                    break
                pairs.append(
                    (w, PauliOp.from_letters(n_sites, {base + s: c for s, c in pattern}))
                )
        return Hamiltonian.from_terms(n_sites, pairs)


@dataclass(frozen=True)
class SupercellHamiltonian:
    """Torus-wrapped periodic Hamiltonian with 1 or 2 periodic dimensions."""

    dims: tuple[int, ...]
    sites_per_cell: int
    terms: tuple[tuple[float, tuple[tuple[str, tuple[int, ...], int], ...]], ...]

    def __post_init__(self):
        if len(self.dims) not in (1, 2):
            raise HamiltonianError("supercell supports 1 or 2 dimensions")
        object.__setattr__(
            self,
            "terms",
            tuple((w, tuple(sorted(entries))) for w, entries in self.terms),
        )

    @property
    def n_qubits(self) -> int:
        return math.prod(self.dims) * self.sites_per_cell

    def cells(self):
        return itertools.product(*(range(d) for d in self.dims))

    def qubit_index(self, cell: tuple[int, ...], site: int) -> int:
        lin = 0
        for c, d in zip(cell, self.dims):
            lin = lin * d + (c % d)
        return lin * self.sites_per_cell + site

    def wrapped_term(self, entries, shift: tuple[int, ...]) -> PauliOp:
        """One translate of a term as a PauliOp on the torus.

        Letters landing on the same qubit multiply; a translate whose
        collisions leave a non-Hermitian phase is rejected upstream.
        """
        op = PauliOp.identity(self.n_qubits)
        for letter, offset, site in entries:
            cell = tuple(o + s for o, s in zip(offset, shift))
            q = self.qubit_index(cell, site)
            op = multiply(op, PauliOp.from_letters(self.n_qubits, {q: letter}))
        return op


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def load(path_or_text: str):
    """Parse a Hamiltonian file (or literal text); type chosen by header."""
    text = path_or_text
    if "\n" not in path_or_text:
        try:
            with open(path_or_text) as fh:
                text = fh.read()
        except OSError:
            pass  # single-line literal text
    lines = text.splitlines()
    header = None
    header_line = 0
    for i, raw in enumerate(lines, 1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            header, header_line = stripped, i
            break
    if header is None:
        raise HamiltonianParseError("missing header", 1)
    fields = header.split()
    try:
        if fields[0] == "qubits":
            return _load_finite(int(fields[1]), lines, header_line)
        if fields[0] == "period":
            return _load_periodic(int(fields[1]), lines, header_line)
        if fields[0] == "supercell":
            return _load_supercell(fields, lines, header_line)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, HamiltonianParseError):
            raise
        raise HamiltonianParseError(f"bad header {header!r}", header_line) from exc
    raise HamiltonianParseError(f"unknown header {fields[0]!r}", header_line)


def _term_lines(lines, header_line, keyword):
    for i, raw in enumerate(lines, 1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped or i == header_line:
            continue
        parts = stripped.split(None, 2)
        if parts[0] != keyword:
            raise HamiltonianParseError(f"expected {keyword!r}, got {parts[0]!r}", i)
        if len(parts) < 3:
            raise HamiltonianParseError("term needs a weight and a Pauli", i)
        try:
            weight = float(parts[1])
        except ValueError:
            raise HamiltonianParseError(f"bad weight {parts[1]!r}", i) from None
        yield i, weight, parts[2]


def _load_finite(n: int, lines, header_line) -> Hamiltonian:
    pairs = []
    for i, weight, body in _term_lines(lines, header_line, "term"):
        try:
            op = parse_pauli(body, n)
        except ValueError as exc:
            raise HamiltonianParseError(str(exc), i) from None
        pairs.append((weight, op))
    return Hamiltonian.from_terms(n, pairs)


def _load_periodic(l: int, lines, header_line) -> PeriodicHamiltonian1D:
    pairs = []
    for i, weight, body in _term_lines(lines, header_line, "term"):
        big_n = 4 * l + 64  # indices are unbounded in principle; roomy parse window
        try:
            op = parse_pauli(body, big_n)
        except ValueError as exc:
            raise HamiltonianParseError(str(exc), i) from None
        pattern = tuple((s, op.letter(s)) for s in op.support)
        pairs.append((weight * op.sign, pattern))
    return PeriodicHamiltonian1D.from_terms(l, pairs)


def _load_supercell(fields, lines, header_line) -> SupercellHamiltonian:
    if "sites_per_cell" not in fields:
        raise HamiltonianParseError("supercell header needs sites_per_cell", header_line)
    sep = fields.index("sites_per_cell")
    dims = tuple(int(f) for f in fields[1:sep])
    spc = int(fields[sep + 1])
    terms = []
    for i, weight, body in _term_lines(lines, header_line, "uterm"):
        entries = []
        for token in body.split():
            try:
                letter, loc = token.split("@", 1)
                if letter not in "XYZ" or not (loc.startswith("(") and loc.endswith(")")):
                    raise ValueError
                nums = [int(v) for v in loc[1:-1].split(",")]
                offset, site = tuple(nums[:-1]), nums[-1]
                if len(offset) != len(dims) or not 0 <= site < spc:
                    raise ValueError
            except ValueError:
                raise HamiltonianParseError(f"bad uterm entry {token!r}", i) from None
            entries.append((letter, offset, site))
        terms.append((weight, tuple(entries)))
    return SupercellHamiltonian(dims, spc, tuple(terms))


def format_hamiltonian(h, comments: tuple[str, ...] = ()) -> str:
    out = [f"# {c}" for c in comments]
    if isinstance(h, Hamiltonian):
        out.append(f"qubits {h.n_sites}")
        out += [f"term {w!r} {format_pauli(op)[1:]}" for w, op in h.terms]
    elif isinstance(h, PeriodicHamiltonian1D):
        out.append(f"period {h.l}")
        out += [
            "term {!r} {}".format(w, " ".join(f"{c}{s}" for s, c in pattern))
            for w, pattern in h.cell_terms
        ]
    elif isinstance(h, SupercellHamiltonian):
        dims = " ".join(str(d) for d in h.dims)
        out.append(f"supercell {dims} sites_per_cell {h.sites_per_cell}")
        for w, entries in h.terms:
            body = " ".join(
                "{}@({},{})".format(c, ",".join(str(o) for o in off), s)
                for c, off, s in entries
            )
            out.append(f"uterm {w!r} {body}")
    else:
        raise HamiltonianError(f"cannot format {type(h).__name__}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# generators and transforms
# ---------------------------------------------------------------------------


def gen_stochastic_heisenberg(n: int, k: int, seed: int, with_zz: bool = True) -> Hamiltonian:
    """Random k-nearest Heisenberg chain with N(0,1) couplings.

    Spin operators are sigma/2, so each coupling term carries weight J/4.
    Three couplings are drawn per bond in a fixed order regardless of
    ``with_zz`` so the xx/yy weights match across the two model variants.
    """
    if not n >= k >= 2:
        raise HamiltonianError("need n >= k >= 2")
    rng = SplitMix64(seed)
    pairs = []
    for i in range(n):
        for j in range(i + 1, min(i + k, n)):
            jxx, jyy, jzz = rng.gaussian(), rng.gaussian(), rng.gaussian()
            pairs.append((jxx / 4, PauliOp.from_letters(n, {i: "X", j: "X"})))
            pairs.append((jyy / 4, PauliOp.from_letters(n, {i: "Y", j: "Y"})))
            if with_zz:
                pairs.append((jzz / 4, PauliOp.from_letters(n, {i: "Z", j: "Z"})))
    return Hamiltonian.from_terms(n, pairs)


def _rotate_pairs(weight, letter_sites, angle_of):
    """Expand one term under per-site X/Z mixing: X -> cX - sZ, Z -> sX + cZ."""
    options = []
    for site, letter in letter_sites:
        theta = angle_of(site)
        c, s = math.cos(theta), math.sin(theta)
        if letter == "X":
            options.append([(c, site, "X"), (-s, site, "Z")])
        elif letter == "Z":
            options.append([(s, site, "X"), (c, site, "Z")])
        else:
            options.append([(1.0, site, letter)])
    for combo in itertools.product(*options):
        w = weight
        for coef, _, _ in combo:
            w *= coef
        if combo and abs(w) < PRUNE_EPS:
            continue
        yield w, tuple((site, c) for _, site, c in combo)


def rotate_y(h, angles):
    """Conjugate every term by per-site rotations about Y.

    ``angles``: per-site sequence/dict for finite Hamiltonians, or a
    site-in-cell dict for supercell Hamiltonians.  Locality is unchanged;
    terms below PRUNE_EPS after expansion are dropped.
    """
    if isinstance(h, Hamiltonian):
        if isinstance(angles, dict):
            angle_of = lambda s: angles.get(s, 0.0)
        else:
            angle_of = lambda s: angles[s]
        pairs = []
        for w, op in h.terms:
            sites = [(s, op.letter(s)) for s in op.support]
            for new_w, pattern in _rotate_pairs(w, sites, angle_of):
                pairs.append((new_w, PauliOp.from_letters(h.n_sites, dict(pattern))))
        return Hamiltonian.from_terms(h.n_sites, pairs)
    if isinstance(h, SupercellHamiltonian):
        angle_of = lambda site_in_cell: angles.get(site_in_cell, 0.0)
        acc: dict[tuple, float] = {}
        order = []
        for w, entries in h.terms:
            keyed = [((off, site), letter) for letter, off, site in entries]
            for new_w, pattern in _rotate_pairs(w, keyed, lambda loc: angle_of(loc[1])):
                entry = tuple(sorted((c, loc[0], loc[1]) for loc, c in pattern))
                if entry not in acc:
                    acc[entry] = 0.0
                    order.append(entry)
                acc[entry] += new_w
        terms = tuple(
            (acc[e], e) for e in order if abs(acc[e]) >= PRUNE_EPS and e
        )
        return SupercellHamiltonian(h.dims, h.sites_per_cell, terms)
    raise HamiltonianError(f"rotate_y does not support {type(h).__name__}")


def make_cluster_chain(j_y: float, h_y: float) -> PeriodicHamiltonian1D:
    """Generalized cluster chain: -XZX - J_y YY + h_y Y per site."""
    return PeriodicHamiltonian1D.from_terms(
        1,
        [
            (-1.0, ((0, "X"), (1, "Z"), (2, "X"))),
            (-j_y, ((0, "Y"), (1, "Y"))),
            (h_y, ((0, "Y"),)),
        ],
    )


def make_toric(h_x: float, h_z: float, dims: tuple[int, int] = (2, 2)) -> SupercellHamiltonian:
    """Toric code with X and Z fields on a torus of ``dims`` cells.

    Each cell holds a vertical-bond qubit (site 0) and a horizontal-bond
    qubit (site 1); vertex stars are X-type, plaquettes Z-type.  The 2x2
    wrapping realizes the unit-supercell identification: neighbouring
    stars share both of their facing bonds, which is what lets all four
    letter-balanced star/plaquette combinations commute.
    """
    vertex = (
        ("X", (0, 0), 1),
        ("X", (-1, 0), 1),
        ("X", (0, 0), 0),
        ("X", (0, -1), 0),
    )
    plaquette = (
        ("Z", (0, 0), 1),
        ("Z", (0, 1), 1),
        ("Z", (0, 0), 0),
        ("Z", (1, 0), 0),
    )
    terms = [(-1.0, vertex), (-1.0, plaquette)]
    for site in (0, 1):
        terms.append((-h_x, (("X", (0, 0), site),)))
        terms.append((-h_z, (("Z", (0, 0), site),)))
    terms = [(w, e) for w, e in terms if abs(w) >= MERGE_EPS]
    return SupercellHamiltonian(dims, 2, tuple(terms))
