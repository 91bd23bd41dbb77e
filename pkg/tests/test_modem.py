import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from twrelay.modem import CONSTELLATION, qpsk_demod, qpsk_mod, qpsk_slice, random_bits, xor_bits
from twrelay.numerics import RngStream

from oracles import qpsk_bits

R = np.sqrt(0.5)


def frames(min_symbols=1, max_symbols=40):
    return st.integers(min_symbols, max_symbols).flatmap(
        lambda n: arrays(np.uint8, 2 * n, elements=st.integers(0, 1)))


def test_random_bits_deterministic():
    a = random_bits(RngStream(4), 4)
    b = random_bits(RngStream(4), 4)
    assert a.shape == (4,)
    np.testing.assert_array_equal(a, b)
    assert set(np.unique(a)) <= {0, 1}


def test_random_bits_balanced():
    bits = random_bits(RngStream(8), 1_000_000)
    assert bits.mean() == pytest.approx(0.5, abs=0.005)


@pytest.mark.parametrize("n", [3, 0, -2])
def test_random_bits_rejects_bad_length(n):
    with pytest.raises(ValueError):
        random_bits(RngStream(1), n)


@pytest.mark.parametrize("bits, expected", [
    ([0, 0], [R * (1 + 1j)]),
    ([1, 1], [R * (-1 - 1j)]),
    ([0, 1, 1, 0], [R * (1 - 1j), R * (-1 + 1j)]),
])
def test_mod_mapping(bits, expected):
    np.testing.assert_array_equal(qpsk_mod(bits), expected)


def test_mod_rejects_odd_length():
    with pytest.raises(ValueError):
        qpsk_mod([0, 1, 1])


@pytest.mark.parametrize("sym, bits", [(0.9 + 0.2j, [0, 0]), (-0.1 - 2.0j, [1, 1]),
                                       (0.3 - 0.1j, [0, 1]), (-4 + 1j, [1, 0])])
def test_demod_quadrants(sym, bits):
    np.testing.assert_array_equal(qpsk_demod([sym]), bits)


def test_demod_boundary_ties_to_zero():
    np.testing.assert_array_equal(qpsk_demod([0j, 1 + 0j, 0 - 1j]), [0, 0, 0, 0, 0, 1])


def test_round_trip_all_two_symbol_frames():
    for bits in itertools.product((0, 1), repeat=4):
        np.testing.assert_array_equal(qpsk_demod(qpsk_mod(bits)), bits)


def test_mapping_matches_lookup_oracle():
    for idx, sym in enumerate(CONSTELLATION):
        bits = (idx >> 1, idx & 1)
        assert qpsk_bits(sym) == bits
        np.testing.assert_array_equal(qpsk_demod([sym]), bits)


def test_gray_neighbours_differ_in_one_bit():
    for a, b in itertools.combinations(range(4), 2):
        dist = abs(CONSTELLATION[a] - CONSTELLATION[b])
        hamming = bin(a ^ b).count("1")
        if np.isclose(dist, np.sqrt(2)):  # 90 degrees apart
            assert hamming == 1
        else:
            assert hamming == 2


def test_slice_is_closed_on_constellation():
    gen = np.random.default_rng(0)
    z = gen.standard_normal(1000) + 1j * gen.standard_normal(1000)
    assert np.all(np.isin(np.round(qpsk_slice(z), 12), np.round(CONSTELLATION, 12)))


def test_xor_examples():
    np.testing.assert_array_equal(xor_bits([1, 0, 1, 0], [0, 1, 1, 0]), [1, 1, 0, 0])


def test_xor_length_mismatch():
    with pytest.raises(ValueError):
        xor_bits([1, 0], [1, 0, 1, 1])


@settings(max_examples=200, deadline=None)
@given(frames())
def test_modulation_energy_and_round_trip(bits):
    sym = qpsk_mod(bits)
    assert np.mean(np.abs(sym) ** 2) == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_array_equal(qpsk_demod(sym), bits)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 30).flatmap(
    lambda n: st.tuples(*[arrays(np.uint8, 2 * n, elements=st.integers(0, 1))] * 3)))
def test_xor_group_laws(abc):
    a, b, c = abc
    np.testing.assert_array_equal(xor_bits(a, a), np.zeros_like(a))
    np.testing.assert_array_equal(xor_bits(a, b), xor_bits(b, a))
    np.testing.assert_array_equal(xor_bits(xor_bits(a, b), c), xor_bits(a, xor_bits(b, c)))
    np.testing.assert_array_equal(xor_bits(xor_bits(a, b), b), a)
