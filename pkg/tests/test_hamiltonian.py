import math

import pytest

from stabgs.hamiltonian import (
    Hamiltonian,
    HamiltonianParseError,
    PeriodicHamiltonian1D,
    SupercellHamiltonian,
    format_hamiltonian,
    gen_stochastic_heisenberg,
    load,
    make_cluster_chain,
    make_toric,
    rotate_y,
)
from stabgs.oracle import dense_pauli
from stabgs.pauli import PauliOp, parse_pauli

import numpy as np


class TestLoadFinite:
    def test_basic(self):
        h = load("qubits 2\nterm -1.0 Z0 Z1\nterm -0.5 X0\n")
        assert isinstance(h, Hamiltonian)
        assert h.n_sites == 2 and h.k == 2 and len(h.terms) == 2

    def test_duplicates_merge(self):
        h = load("qubits 1\nterm 1 X0\nterm 1 X0\n")
        assert len(h.terms) == 1 and h.terms[0][0] == 2.0

    def test_sign_folded_into_weight(self):
        h = load("qubits 1\nterm 2.0 -X0\n")
        assert h.terms[0][0] == -2.0 and h.terms[0][1].phase == 0

    def test_cancellation_drops_term(self):
        h = load("qubits 1\nterm 1 X0\nterm -1 X0\n")
        assert h.terms == ()

    def test_zero_terms_ok(self):
        h = load("qubits 1\n")
        assert h.terms == () and h.k == 0

    def test_comments_ignored(self):
        h = load("# hi\nqubits 1\n# mid\nterm 1 X0  # trailing\n")
        assert len(h.terms) == 1

    def test_parse_error_carries_line(self):
        with pytest.raises(HamiltonianParseError) as err:
            load("qubits 2\nterm 1 X0\nterm 1 W1\n")
        assert err.value.line == 3

    def test_index_out_of_range(self):
        with pytest.raises(HamiltonianParseError):
            load("qubits 2\nterm 1 X5\n")

    def test_round_trip(self):
        h = gen_stochastic_heisenberg(5, 3, seed=11)
        assert load(format_hamiltonian(h)) == h

    def test_by_last_site_partitions(self):
        h = gen_stochastic_heisenberg(6, 3, seed=2)
        ids = sorted(i for ids in h.by_last_site.values() for i in ids)
        assert ids == list(range(len(h.terms)))


class TestLoadPeriodic:
    def test_cluster_model(self):
        h = load("period 1\nterm -1.0 X0 Z1 X2\nterm -0.3 Y0 Y1\nterm 0.2 Y0\n")
        assert isinstance(h, PeriodicHamiltonian1D)
        assert h == make_cluster_chain(0.3, 0.2)
        assert h.k == 3

    def test_anchor_normalization(self):
        # a term given at sites 3,4 with period 1 is the same family as 0,1
        h = load("period 1\nterm 1.0 Y3 Y4\nterm 1.0 Y0 Y1\n")
        assert len(h.cell_terms) == 1 and h.cell_terms[0][0] == 2.0

    def test_round_trip(self):
        h = make_cluster_chain(0.7, 0.1)
        assert load(format_hamiltonian(h)) == h

    def test_finite_chain_realization(self):
        h = make_cluster_chain(0.5, 0.25)
        fin = h.finite_chain(6)
        # 4 XZX translates fit, 5 YY, 6 Y
        assert len(fin.terms) == 4 + 5 + 6


class TestLoadSupercell:
    def test_round_trip(self):
        h = make_toric(0.5, 0.25)
        assert load(format_hamiltonian(h)) == h

    def test_header(self):
        h = load("supercell 2 2 sites_per_cell 2\nuterm -1.0 X@(0,0,1) X@(-1,0,1) X@(0,0,0) X@(0,-1,0)\n")
        assert isinstance(h, SupercellHamiltonian)
        assert h.dims == (2, 2) and h.n_qubits == 8

    def test_wrapped_term_distinct_qubits(self):
        h = make_toric(0.0, 0.0)
        op = h.wrapped_term(h.terms[0][1], (0, 0))
        assert len(op.support) == 4

    def test_bad_entry(self):
        with pytest.raises(HamiltonianParseError):
            load("supercell 2 sites_per_cell 1\nuterm 1.0 X@(0)\n")


class TestStochasticHeisenberg:
    def test_term_counts(self):
        assert len(gen_stochastic_heisenberg(4, 2, 7, True).terms) == 9
        assert len(gen_stochastic_heisenberg(4, 2, 7, False).terms) == 6

    def test_determinism(self):
        a = gen_stochastic_heisenberg(6, 3, 123)
        b = gen_stochastic_heisenberg(6, 3, 123)
        assert a == b

    def test_xx_weights_match_across_variants(self):
        a = gen_stochastic_heisenberg(4, 2, 9, True)
        b = gen_stochastic_heisenberg(4, 2, 9, False)
        ax = {op.key: w for w, op in a.terms if "Z" not in str(op)}
        bx = {op.key: w for w, op in b.terms}
        assert ax == bx

    def test_spin_half_scaling(self):
        # weights are J/4 with J ~ N(0,1): sample std should be ~0.25
        h = gen_stochastic_heisenberg(40, 3, 5)
        ws = [w for w, _ in h.terms]
        std = (sum(w * w for w in ws) / len(ws)) ** 0.5
        assert 0.15 < std < 0.35


class TestRotateY:
    def test_single_site_right_angle(self):
        h = Hamiltonian.from_terms(1, [(-1.0, parse_pauli("X0", 1))])
        r = rotate_y(h, [math.pi / 2])
        assert len(r.terms) == 1
        w, op = r.terms[0]
        assert str(op) == "+Z0" and abs(w - 1.0) < 1e-12

    def test_two_site_expansion(self):
        h = Hamiltonian.from_terms(2, [(1.0, parse_pauli("X0 X1", 2))])
        th = 0.3
        r = rotate_y(h, [th, th])
        got = {str(op): w for w, op in r.terms}
        c, s = math.cos(th), math.sin(th)
        assert abs(got["+X0 X1"] - c * c) < 1e-12
        assert abs(got["+X0 Z1"] + c * s) < 1e-12
        assert abs(got["+Z0 X1"] + s * c) < 1e-12
        assert abs(got["+Z0 Z1"] - s * s) < 1e-12

    def test_zero_angle_is_identity(self):
        h = gen_stochastic_heisenberg(4, 2, 3)
        assert rotate_y(h, [0.0] * 4) == h

    def test_inverse_rotation(self):
        h = gen_stochastic_heisenberg(4, 2, 3)
        th = [0.3, -0.8, 1.1, 0.0]
        back = rotate_y(rotate_y(h, th), [-t for t in th])
        assert back.n_sites == h.n_sites
        orig = {op.key: w for w, op in h.terms}
        got = {op.key: w for w, op in back.terms}
        assert set(orig) == set(got)
        assert all(abs(orig[k] - got[k]) < 1e-9 for k in orig)

    def test_weight_norm_preserved_per_term(self):
        h = Hamiltonian.from_terms(2, [(0.7, parse_pauli("X0 Z1", 2))])
        r = rotate_y(h, [0.4, 1.2])
        assert abs(sum(w * w for w, _ in r.terms) - 0.49) < 1e-12

    def test_against_dense_conjugation(self):
        th = [0.37, 0.91]
        h = Hamiltonian.from_terms(2, [(1.0, parse_pauli("X0 X1", 2))])
        r = rotate_y(h, th)
        dense_r = sum(w * dense_pauli(op) for w, op in r.terms)
        y = dense_pauli(parse_pauli("Y0", 2)), dense_pauli(parse_pauli("Y1", 2))
        u = None
        for q, t in enumerate(th):
            mat = np.cos(t / 2) * np.eye(4) + 1j * np.sin(t / 2) * y[q]
            u = mat if u is None else mat @ u
        expected = u.conj().T @ dense_pauli(parse_pauli("X0 X1", 2)) @ u
        assert np.allclose(dense_r, expected)

    def test_supercell_rotation_prunes(self):
        h = make_toric(1.0, 1.0)
        r = rotate_y(h, {0: 0.0, 1: 0.0})
        assert r == h
