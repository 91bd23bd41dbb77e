import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from twrelay.channel import (ChannelRealization, downlink_receive, draw_channel, noise_variance,
                             snr_db_from_variance, uplink_receive)
from twrelay.numerics import RngStream, cgauss


def test_draw_is_reproducible():
    a = draw_channel(RngStream(3, (1,)))
    b = draw_channel(RngStream(3, (1,)))
    np.testing.assert_array_equal(a.h_ab, b.h_ab)
    np.testing.assert_array_equal(a.h_cb, b.h_cb)


def test_reciprocity_is_exact():
    ch = draw_channel(RngStream(1), 100)
    assert ch.h_ba is ch.h_ab
    assert ch.h_bc is ch.h_cb
    np.testing.assert_array_equal(ch.H[..., :, 0], ch.h_ab)
    np.testing.assert_array_equal(ch.H[..., :, 1], ch.h_cb)


def test_coefficient_power_and_rayleigh_envelope():
    ch = draw_channel(RngStream(21), 250_000)  # 10^6 coefficients
    h = np.concatenate([ch.h_ab.ravel(), ch.h_cb.ravel()])
    assert h.size == 1_000_000
    for coeff in (ch.h_ab[:, 0], ch.h_ab[:, 1], ch.h_cb[:, 0], ch.h_cb[:, 1]):
        assert np.mean(np.abs(coeff) ** 2) == pytest.approx(1.0, abs=0.01)
    ks = stats.kstest(np.abs(h), "rayleigh", args=(0, 1 / math.sqrt(2)))
    assert ks.statistic < 0.01


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        ChannelRealization(np.zeros(2), np.zeros(3))


def test_uplink_orthogonal_noiseless():
    ch = ChannelRealization([1, 0], [0, 1])
    s1, s2 = (1 + 1j) / math.sqrt(2), (1 - 1j) / math.sqrt(2)
    np.testing.assert_array_equal(uplink_receive(ch, s1, s2, 0.0), [s1, s2])


def test_uplink_noiseless_general_and_linear():
    gen = np.random.default_rng(2)
    ch = draw_channel(gen)
    xa, xc = cgauss(gen, 1, 5), cgauss(gen, 1, 5)
    ya, yc = cgauss(gen, 1, 5), cgauss(gen, 1, 5)
    y = uplink_receive(ch, xa, xc, 0.0)
    np.testing.assert_allclose(y, (ch.H @ np.stack([xa, xc])).T, atol=1e-14)
    lhs = uplink_receive(ch, xa + 2 * ya, xc + 2 * yc, 0.0)
    rhs = y + 2 * uplink_receive(ch, ya, yc, 0.0)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_uplink_batched_channels_broadcast_over_symbols():
    ch = draw_channel(RngStream(4), 3)
    x = np.ones((3, 7))
    y = uplink_receive(ch, x, x, 0.0)
    assert y.shape == (3, 7, 2)
    np.testing.assert_allclose(y[1, 4], ch.h_ab[1] + ch.h_cb[1])


def test_uplink_noise_variance():
    ch = draw_channel(RngStream(5))
    xa = np.full(100_000, (1 + 1j) / math.sqrt(2))
    y = uplink_receive(ch, xa, xa, 1.0, RngStream(6))
    n = y - uplink_receive(ch, xa, xa, 0.0)
    for i in range(2):
        assert np.mean(np.abs(n[:, i]) ** 2) == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("h, s, expected", [
    ([1, 1], [2 + 1j, -1j], 2 + 0j),
    ([0.5j, 3], [1 + 1j, 0], 0.5j * (1 + 1j)),
    ([0.3, -2j], [0, 0], 0j),
])
def test_downlink_noiseless(h, s, expected):
    assert downlink_receive(h, s, 0.0) == pytest.approx(expected)


def test_downlink_noise():
    y = downlink_receive([1, 0], np.zeros((200_000, 2)), 0.5, RngStream(9))
    assert np.mean(np.abs(y) ** 2) == pytest.approx(0.5, abs=0.01)


def test_noise_variance_convention():
    assert noise_variance(0) == 1.0
    assert noise_variance(10) == pytest.approx(0.1)
    assert noise_variance(float("inf")) == 0.0
    assert snr_db_from_variance(0.0) == float("inf")


@given(st.floats(-50, 80))
def test_snr_round_trip_and_monotone(snr):
    v = noise_variance(snr)
    assert v > 0
    assert snr_db_from_variance(v) == pytest.approx(snr, abs=1e-9)
    assert noise_variance(snr + 0.5) < v
