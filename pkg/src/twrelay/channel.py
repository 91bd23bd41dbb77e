"""Reciprocal Rayleigh block-fading links between the terminals and the relay.

SNR convention: every transmitting node radiates unit total energy per
channel use (the relay's energy is summed over its two antennas) and every
receive antenna sees complex noise of total variance ``10**(-snr_db/10)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import as_generator, cgauss


def noise_variance(snr_db: float) -> float:
    """Per-antenna noise variance; ``snr_db = inf`` gives a noiseless link."""
    return float(10.0 ** (-snr_db / 10.0))


def snr_db_from_variance(variance: float) -> float:
    if variance == 0:
        return float("inf")
    return float(-10.0 * np.log10(variance))


@dataclass(frozen=True)
class ChannelRealization:
    """One flat-fading draw for both links, held fixed over a frame.

    ``h_ab[..., i]`` is the gain from terminal A to relay antenna ``i``.
    Downlink rows are the same coefficients (reciprocity), exposed as
    :attr:`h_ba` and :attr:`h_bc`. Leading axes index independent trials.
    """

    h_ab: np.ndarray
    h_cb: np.ndarray

    def __post_init__(self):
        h_ab = np.asarray(self.h_ab, dtype=complex)
        h_cb = np.asarray(self.h_cb, dtype=complex)
        if h_ab.shape[-1:] != (2,) or h_ab.shape != h_cb.shape:
            raise ValueError("h_ab and h_cb must have equal shapes ending in 2")
        object.__setattr__(self, "h_ab", h_ab)
        object.__setattr__(self, "h_cb", h_cb)

    @property
    def h_ba(self) -> np.ndarray:
        return self.h_ab

    @property
    def h_bc(self) -> np.ndarray:
        return self.h_cb

    @property
    def H(self) -> np.ndarray:
        """Uplink matrix with columns ``h_ab`` and ``h_cb``."""
        return np.stack([self.h_ab, self.h_cb], axis=-1)

    @property
    def batch_shape(self) -> tuple:
        return self.h_ab.shape[:-1]

    def __getitem__(self, idx) -> ChannelRealization:
        return ChannelRealization(self.h_ab[idx], self.h_cb[idx])


def draw_channel(rng, size=None) -> ChannelRealization:
    """Four i.i.d. CN(0, 1) coefficients per realization."""
    gen = as_generator(rng)
    shape = (2, 2) if size is None else tuple(np.atleast_1d(size)) + (2, 2)
    h = cgauss(gen, 1.0, shape)
    return ChannelRealization(h[..., 0, :], h[..., 1, :])


def uplink_receive(ch: ChannelRealization, x_a, x_c, variance: float, rng=None):
    """Relay observation ``h_ab x_a + h_cb x_c + n_b`` per antenna.

    ``x_a`` and ``x_c`` are symbols with the channel's batch shape plus any
    trailing symbol axis; the result appends an antenna axis of length 2.
    Per-trial channels broadcast over the symbol axis.
    """
    x_a = np.asarray(x_a, dtype=complex)
    x_c = np.asarray(x_c, dtype=complex)
    h_ab, h_cb = _align(ch.h_ab, x_a), _align(ch.h_cb, x_a)
    y = h_ab * x_a[..., None] + h_cb * x_c[..., None]
    if variance > 0:
        y = y + cgauss(rng, variance, y.shape)
    elif variance < 0:
        raise ValueError("variance must be non-negative")
    return y


def downlink_receive(h_row, s_b, variance: float, rng=None):
    """Terminal observation ``h_row . s_b + n`` (plain product, no conjugate)."""
    h_row = np.asarray(h_row, dtype=complex)
    s_b = np.asarray(s_b, dtype=complex)
    h = _align(h_row, s_b[..., 0])
    y = h[..., 0] * s_b[..., 0] + h[..., 1] * s_b[..., 1]
    if variance > 0:
        y = y + cgauss(rng, variance, np.shape(y))
    elif variance < 0:
        raise ValueError("variance must be non-negative")
    return y


def _align(h, x):
    """Insert axes so per-trial vectors ``h`` broadcast over symbol axes of ``x``."""
    extra = np.ndim(x) - (np.ndim(h) - 1)
    if extra <= 0:
        return h
    return np.expand_dims(h, tuple(range(-1 - extra, -1)))
