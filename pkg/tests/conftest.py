import random

import pytest

from stabgs.hamiltonian import Hamiltonian
from stabgs.pauli import PauliOp
from stabgs.rng import SplitMix64


def random_pauli(rng: random.Random, n: int, hermitian: bool = True) -> PauliOp:
    x = rng.randrange(1 << n)
    z = rng.randrange(1 << n)
    phase = rng.choice((0, 2)) if hermitian else rng.randrange(4)
    return PauliOp(n, x, z, phase)


def random_local_hamiltonian(seed: int, n: int, k: int, n_terms: int) -> Hamiltonian:
    """Random k-local chain with Gaussian weights; letters fully random."""
    rng = SplitMix64(seed)
    pick = random.Random(seed ^ 0x5BD1E995)
    pairs = []
    for _ in range(n_terms):
        span = pick.randint(1, min(k, n))
        start = pick.randint(0, n - span)
        letters = {}
        for s in range(start, start + span):
            letters[s] = pick.choice("XYZ") if s in (start, start + span - 1) else pick.choice("IXYZ")
        pairs.append((rng.gaussian(), PauliOp.from_letters(n, letters)))
    return Hamiltonian.from_terms(n, pairs)


@pytest.fixture
def rng():
    return random.Random(20260809)
