import random

import pytest

from stabgs.pauli import (
    PauliOp,
    PauliParseError,
    PauliSet,
    commutes,
    format_pauli,
    multiply,
    parse_pauli,
    truncate,
)

from conftest import random_pauli


def P(text, n):
    return parse_pauli(text, n)


class TestCommutes:
    def test_single_site_anticommutation(self):
        assert commutes(P("X0", 1), P("Z0", 1)) is False

    def test_two_anticommuting_sites_cancel(self):
        assert commutes(P("X0 Z1", 2), P("Z0 X1", 2)) is True

    def test_identity_commutes_with_everything(self, rng):
        for _ in range(50):
            p = random_pauli(rng, 4)
            assert commutes(PauliOp.identity(4), p)

    def test_symmetry(self, rng):
        for _ in range(200):
            a, b = random_pauli(rng, 5), random_pauli(rng, 5)
            assert commutes(a, b) == commutes(b, a)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            commutes(P("X0", 1), P("X0", 2))


class TestMultiply:
    def test_xz_is_minus_i_y(self):
        prod = multiply(P("X0", 1), P("Z0", 1))
        assert (prod.x_bits, prod.z_bits, prod.phase) == (1, 1, 3)

    def test_involution(self):
        assert multiply(P("Z0", 1), P("Z0", 1)) == PauliOp.identity(1)

    def test_two_site_product(self):
        # (X0 X1)(Z0 Z1) = (-i Y0)(-i Y1) = -Y0 Y1
        prod = multiply(P("X0 X1", 2), P("Z0 Z1", 2))
        assert prod == P("-Y0 Y1", 2)

    def test_associativity_with_phase(self, rng):
        for _ in range(200):
            a, b, c = (random_pauli(rng, 3, hermitian=False) for _ in range(3))
            assert multiply(a, multiply(b, c)) == multiply(multiply(a, b), c)

    def test_commutation_iff_products_equal(self, rng):
        for _ in range(200):
            a, b = random_pauli(rng, 4), random_pauli(rng, 4)
            assert commutes(a, b) == (multiply(a, b) == multiply(b, a))

    def test_commuting_product_is_hermitian(self, rng):
        for _ in range(100):
            a, b = random_pauli(rng, 4), random_pauli(rng, 4)
            if commutes(a, b):
                assert multiply(a, b).is_hermitian


class TestTruncate:
    def test_sign_dropped_and_reindexed(self):
        t = truncate(P("-X0 Z1 X2", 3), 1, 2)
        assert t == P("Z0 X1", 2)
        assert t.phase == 0

    def test_outside_support_gives_identity(self):
        assert truncate(P("X0", 3), 1, 2) == PauliOp.identity(2)

    def test_single_site(self):
        assert truncate(P("Y0 Y1", 2), 0, 0) == P("Y0", 1)

    def test_nested_windows(self, rng):
        for _ in range(100):
            p = random_pauli(rng, 6)
            m, l = sorted(rng.sample(range(6), 2))
            inner = truncate(p, m, l)
            width = l - m + 1
            m2 = rng.randrange(width)
            l2 = rng.randrange(m2, width)
            assert truncate(inner, m2, l2) == truncate(p, m + m2, m + l2)

    def test_invalid_window(self):
        with pytest.raises(ValueError):
            truncate(P("X0", 2), 1, 0)


class TestParseFormat:
    def test_basic(self):
        p = P("-X0 Z1 X2", 4)
        assert [p.letter(i) for i in range(4)] == ["X", "Z", "X", "I"]
        assert p.sign == -1

    def test_single_site(self):
        p = P("+Y3", 4)
        assert p.letter(3) == "Y" and p.support == (3,)

    def test_duplicate_index_rejected(self):
        with pytest.raises(PauliParseError):
            parse_pauli("X0 X0", 2)

    def test_bad_letter_position(self):
        with pytest.raises(PauliParseError) as err:
            parse_pauli("X0 W1", 2)
        assert err.value.position == 3

    def test_index_out_of_range(self):
        with pytest.raises(PauliParseError):
            parse_pauli("X5", 2)

    def test_round_trip(self, rng):
        for _ in range(100):
            p = random_pauli(rng, 5)
            assert parse_pauli(format_pauli(p), 5) == p

    def test_identity_round_trip(self):
        assert format_pauli(PauliOp.identity(3)) == "+I"
        assert parse_pauli("+I", 3) == PauliOp.identity(3)

    def test_canonical_normalization(self):
        assert format_pauli(parse_pauli("X0", 2)) == "+X0"


class TestPauliSet:
    def test_insertion_order_preserved(self):
        s = PauliSet([P("X0", 2), P("Z1", 2), P("X0 Z1", 2)])
        assert [str(p) for p in s] == ["+X0", "+Z1", "+X0 Z1"]

    def test_no_duplicates(self):
        s = PauliSet()
        assert s.add(P("X0", 1)) is True
        assert s.add(P("X0", 1)) is False
        assert len(s) == 1

    def test_signs_distinct(self):
        s = PauliSet([P("X0", 1), P("-X0", 1)])
        assert len(s) == 2
