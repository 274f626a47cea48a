import numpy as np
import pytest

from stabgs.hamiltonian import Hamiltonian
from stabgs.oracle import (
    dense_expectation,
    dense_from_group,
    dense_pauli,
    enumerate_full_groups,
)
from stabgs.pauli import parse_pauli
from stabgs.rng import SplitMix64
from stabgs.solver_general import e_stab
from stabgs.stabgroup import GuardExceededError, NotFullRankError, StabGroup

from conftest import random_local_hamiltonian


def P(text, n):
    return parse_pauli(text, n)


def G(n, *texts):
    return StabGroup.from_generators([P(t, n) for t in texts], n)


class TestEnumeration:
    def test_counts(self):
        # 2^n prod (2^i + 1): 6, 60, 1080
        assert len(enumerate_full_groups(1)) == 6
        assert len(enumerate_full_groups(2)) == 60
        assert len(enumerate_full_groups(3)) == 1080

    def test_all_distinct_and_full(self):
        groups = enumerate_full_groups(2)
        assert len({g.rows for g in groups}) == 60
        assert all(g.rank == 2 for g in groups)

    def test_guard(self):
        with pytest.raises(GuardExceededError):
            enumerate_full_groups(4)


class TestDenseFromGroup:
    def test_zero_state(self):
        psi = dense_from_group(G(1, "Z0"))
        assert np.allclose(psi.amplitudes, [1, 0])

    def test_plus_state(self):
        psi = dense_from_group(G(1, "X0"))
        assert np.allclose(np.abs(psi.amplitudes), [2**-0.5] * 2)

    def test_bell(self):
        psi = dense_from_group(G(2, "X0 X1", "Z0 Z1"))
        assert np.allclose(np.abs(psi.amplitudes), [2**-0.5, 0, 0, 2**-0.5])

    def test_not_full_rank(self):
        with pytest.raises(NotFullRankError):
            dense_from_group(G(2, "Z0"))


class TestDenseExpectation:
    def test_z_on_zero(self):
        h = Hamiltonian.from_terms(1, [(-1.0, P("Z0", 1))])
        assert dense_expectation(h, dense_from_group(G(1, "Z0"))) == pytest.approx(-1)

    def test_absent_term_vanishes(self):
        h = Hamiltonian.from_terms(1, [(-1.0, P("X0", 1)), (-1.0, P("Z0", 1))])
        assert dense_expectation(h, dense_from_group(G(1, "Z0"))) == pytest.approx(-1)

    def test_group_energy_identity_all_n2_groups(self):
        # <psi|H|psi> == e_stab(H, Stab(psi)) for all 60 full groups
        rng = SplitMix64(99)
        for trial in range(10):
            h = random_local_hamiltonian(1000 + trial, 2, 2, 5)
            for g in enumerate_full_groups(2):
                psi = dense_from_group(g)
                assert abs(dense_expectation(h, psi) - e_stab(h, g)) <= 1e-10

    def test_lemma_absent_pauli_has_zero_expectation(self, rng):
        for g in enumerate_full_groups(2)[:20]:
            psi = dense_from_group(g)
            for _ in range(10):
                x, z = rng.randrange(4), rng.randrange(4)
                if not (x | z):
                    continue
                from stabgs.pauli import PauliOp

                p = PauliOp(2, x, z, 0)
                if g.member_sign(p) == "absent":
                    val = psi.amplitudes.conj() @ (dense_pauli(p) @ psi.amplitudes)
                    assert abs(val) <= 1e-10
