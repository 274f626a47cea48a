"""Signed Hermitian Pauli operators in symplectic GF(2) representation.

A Pauli on n sites is stored as two bit vectors (Python ints) plus a phase
that counts powers of i applied to the site-letter tensor product.  The
letter at site j is decoded from bit j of ``x_bits`` / ``z_bits``:

    (0,0) -> I    (1,0) -> X    (1,1) -> Y    (0,1) -> Z

Y carries its own factor of i internally (Y = i X Z), so Hermitian
operators have phase 0 (sign +1) or 2 (sign -1).  Phases 1 and 3 occur
only as transient products of anticommuting operators.

Text form is sparse and site-indexed, e.g. ``-X0 Z1 X2``; the bare token
``I`` names the identity.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


class PauliError(ValueError):
    pass


class PauliParseError(PauliError):
    """Raised on malformed Pauli text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_LETTER = {v: k for k, v in _LETTER_TO_BITS.items()}


def phase_product(x1: int, z1: int, x2: int, z2: int) -> int:
    """Power of i picked up multiplying site letters of (x1,z1) by (x2,z2).

    Summed over sites via the single-site table (XY=iZ, YZ=iX, ZX=iY and
    the reversed orders with -i); returned mod 4.
    """
    plus = (
        (x1 & ~z1 & x2 & z2).bit_count()
        + (x1 & z1 & ~x2 & z2).bit_count()
        + (~x1 & z1 & x2 & ~z2).bit_count()
    )
    minus = (
        (x1 & ~z1 & ~x2 & z2).bit_count()
        + (x1 & z1 & x2 & ~z2).bit_count()
        + (~x1 & z1 & x2 & z2).bit_count()
    )
    return (plus - minus) % 4


@dataclass(frozen=True)
class PauliOp:
    """Immutable signed Pauli operator on ``n_sites`` qubits."""

    n_sites: int
    x_bits: int
    z_bits: int
    phase: int = 0

    def __post_init__(self):
        if self.n_sites < 0:
            raise PauliError("n_sites must be non-negative")
        mask = (1 << self.n_sites) - 1
        if (self.x_bits & ~mask) or (self.z_bits & ~mask):
            raise PauliError("bit vector exceeds n_sites")
        if not 0 <= self.phase < 4:
            object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n_sites: int) -> "PauliOp":
        return cls(n_sites, 0, 0, 0)

    @classmethod
    def from_letters(cls, n_sites: int, letters: dict[int, str], sign: int = 1) -> "PauliOp":
        """Build from a site -> letter map; sign is +1 or -1."""
        x = z = 0
        for site, letter in letters.items():
            if not 0 <= site < n_sites:
                raise PauliError(f"site {site} out of range for n={n_sites}")
            try:
                xb, zb = _LETTER_TO_BITS[letter]
            except KeyError:
                raise PauliError(f"unknown letter {letter!r}") from None
            x |= xb << site
            z |= zb << site
        if sign not in (1, -1):
            raise PauliError("sign must be +1 or -1")
        return cls(n_sites, x, z, 0 if sign == 1 else 2)

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    @property
    def sign(self) -> int:
        if self.phase == 0:
            return 1
        if self.phase == 2:
            return -1
        raise PauliError("non-Hermitian Pauli has no real sign")

    @property
    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    def letter(self, site: int) -> str:
        return _BITS_TO_LETTER[((self.x_bits >> site) & 1, (self.z_bits >> site) & 1)]

    @property
    def support(self) -> tuple[int, ...]:
        bits = self.x_bits | self.z_bits
        out = []
        while bits:
            low = bits & -bits
            out.append(low.bit_length() - 1)
            bits ^= low
        return tuple(out)

    @property
    def first_site(self) -> int | None:
        bits = self.x_bits | self.z_bits
        return (bits & -bits).bit_length() - 1 if bits else None

    @property
    def last_site(self) -> int | None:
        bits = self.x_bits | self.z_bits
        return bits.bit_length() - 1 if bits else None

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.x_bits, self.z_bits, self.phase)

    def unsigned(self) -> "PauliOp":
        return PauliOp(self.n_sites, self.x_bits, self.z_bits, 0)

    def negated(self) -> "PauliOp":
        return PauliOp(self.n_sites, self.x_bits, self.z_bits, (self.phase + 2) % 4)

    def __str__(self) -> str:
        return format_pauli(self)


def commutes(a: PauliOp, b: PauliOp) -> bool:
    """True iff the symplectic inner product of a and b vanishes mod 2."""
    if a.n_sites != b.n_sites:
        raise PauliError("size mismatch")
    return ((a.x_bits & b.z_bits) ^ (a.z_bits & b.x_bits)).bit_count() % 2 == 0


def multiply(a: PauliOp, b: PauliOp) -> PauliOp:
    """Exact product a*b with phase mod 4.

    Commuting Hermitian inputs yield a Hermitian result (phase 0 or 2);
    anticommuting inputs yield a transient phase 1 or 3.
    """
    if a.n_sites != b.n_sites:
        raise PauliError("size mismatch")
    phase = (a.phase + b.phase + phase_product(a.x_bits, a.z_bits, b.x_bits, b.z_bits)) % 4
    return PauliOp(a.n_sites, a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits, phase)


def truncate(p: PauliOp, m: int, l: int) -> PauliOp:
    """Unsigned letter substring on sites [m, l], reindexed from 0.

    The sign is discarded by definition; the result always has phase 0.
    """
    if not 0 <= m <= l < p.n_sites:
        raise PauliError(f"invalid window [{m}, {l}] for n={p.n_sites}")
    width = l - m + 1
    mask = (1 << width) - 1
    return PauliOp(width, (p.x_bits >> m) & mask, (p.z_bits >> m) & mask, 0)


def parse_pauli(text: str, n_sites: int) -> PauliOp:
    """Parse sparse Pauli text like ``-X0 Z1 X2`` (or ``I``/``+I``)."""
    s = text.strip()
    if not s:
        raise PauliParseError("empty Pauli text", 0)
    pos = 0
    sign = 1
    if s[0] in "+-":
        sign = 1 if s[0] == "+" else -1
        pos = 1
    body = s[pos:].strip()
    if body == "I":
        return PauliOp.identity(n_sites) if sign == 1 else PauliOp(n_sites, 0, 0, 2)
    letters: dict[int, str] = {}
    offset = pos
    for token in body.split():
        tok_pos = s.find(token, offset)
        offset = tok_pos + len(token)
        letter, idx_text = token[0], token[1:]
        if letter not in "XYZ":
            raise PauliParseError(f"bad letter {letter!r}", tok_pos)
        if not idx_text.isdigit():
            raise PauliParseError(f"bad site index {idx_text!r}", tok_pos + 1)
        idx = int(idx_text)
        if idx >= n_sites:
            raise PauliParseError(f"site {idx} >= n_sites {n_sites}", tok_pos + 1)
        if idx in letters:
            raise PauliParseError(f"duplicate site index {idx}", tok_pos + 1)
        letters[idx] = letter
    return PauliOp.from_letters(n_sites, letters, sign)


def format_pauli(p: PauliOp) -> str:
    """Canonical text form: explicit sign, letters in ascending site order."""
    sign_char = "+" if p.sign == 1 else "-"
    if p.is_identity:
        return sign_char + "I"
    return sign_char + " ".join(f"{p.letter(i)}{i}" for i in p.support)


class PauliSet:
    """Ordered, duplicate-free collection of PauliOps.

    Iteration order is insertion order; downstream tie-breaking relies
    on it, so this type never reorders.
    """

    def __init__(self, terms: Iterable[PauliOp] = ()):
        self._terms: list[PauliOp] = []
        self._index: dict[tuple[int, int, int], int] = {}
        for t in terms:
            self.add(t)

    def add(self, p: PauliOp) -> bool:
        """Insert p; returns False (without error) if already present."""
        if p.key in self._index:
            return False
        self._index[p.key] = len(self._terms)
        self._terms.append(p)
        return True

    def __contains__(self, p: PauliOp) -> bool:
        return p.key in self._index

    def __iter__(self) -> Iterator[PauliOp]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __getitem__(self, i: int) -> PauliOp:
        return self._terms[i]

    def position(self, p: PauliOp) -> int:
        return self._index[p.key]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSet):
            return NotImplemented
        return [t.key for t in self._terms] == [t.key for t in other._terms]

    def __repr__(self) -> str:
        return "PauliSet([" + ", ".join(str(t) for t in self._terms) + "])"
