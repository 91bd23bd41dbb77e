"""Relay forwarding strategies and the matching terminal decoders.

Array conventions: per-trial quantities (channel rows, AF gains, antenna
cases) carry the batch shape ``B``; symbol streams carry ``B + (S,)`` and
relay transmit vectors ``B + (S, 2)``, one row per channel use. Every relay
operation keeps the total transmit energy per channel use at one, either
exactly (decode-and-forward over constellation inputs) or in expectation
(amplify-and-forward).

Terminals are given exact knowledge of all four channel coefficients. For
the antenna-selection schemes they recompute the relay's antenna case from
that knowledge, so no signaling is modeled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import ChannelRealization, _align
from .modem import SQRT_HALF, qpsk_demod, qpsk_mod, qpsk_slice, xor_bits
from .numerics import mat2_mmse_solve

UNRELIABLE_GAIN = 1e-12


class DegenerateChannelError(ValueError):
    """The relay cannot normalize or invert an all-zero / singular channel."""


class RelayStrategy(enum.Enum):
    AF_1ANT = "af1"
    AF = "af"
    DF_SM = "df-sm"
    DF_NC = "df-nc"
    DF_NC_ALAMOUTI = "df-nc-alamouti"
    DF_ANT = "df-ant"
    DF_NC_ANT = "df-nc-ant"

    @property
    def tag(self) -> str:
        return self.value

    @property
    def index(self) -> int:
        """Position in declaration order; stable key for RNG streams and sorting."""
        return _ORDER.index(self)

    @property
    def uses_downlink_csi(self) -> bool:
        return self in (RelayStrategy.DF_ANT, RelayStrategy.DF_NC_ANT)

    @property
    def is_decode_forward(self) -> bool:
        return self not in (RelayStrategy.AF, RelayStrategy.AF_1ANT)

    @classmethod
    def from_tag(cls, tag: str) -> RelayStrategy:
        try:
            return cls(tag.strip().lower())
        except ValueError:
            tags = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown scheme {tag!r}; choose from {tags}") from None


_ORDER = list(RelayStrategy)


class AntennaCase(enum.IntEnum):
    """Which relay antenna each terminal's downlink prefers.

    BOTH_1 / BOTH_2: both links are stronger on antenna 1 / 2.
    A1_C2: A's link prefers antenna 1, C's link antenna 2. A2_C1 the reverse.
    """

    BOTH_1 = 1
    BOTH_2 = 2
    A1_C2 = 3
    A2_C1 = 4


@dataclass(frozen=True)
class RelayTransmission:
    """Relay transmit vectors plus the side data genie decoders may use.

    ``s_b`` has shape ``B + (S, 2)``. ``alpha`` is the AF gain (shape ``B``)
    and ``case`` the antenna case for the selection schemes.
    """

    s_b: np.ndarray
    alpha: Optional[np.ndarray] = None
    case: Optional[np.ndarray] = None

    def energy_per_use(self) -> np.ndarray:
        return np.sum(np.abs(self.s_b) ** 2, axis=-1)


def _per_trial(a, like):
    """Append axes to a per-trial array so it broadcasts over ``like``'s symbol axes."""
    a = np.asarray(a)
    return a.reshape(a.shape + (1,) * (np.ndim(like) - a.ndim))


def _rows(ch: ChannelRealization, side: str):
    """(row toward this terminal, own uplink vector, partner uplink vector)."""
    if side == "A":
        return ch.h_ba, ch.h_ab, ch.h_cb
    if side == "C":
        return ch.h_bc, ch.h_cb, ch.h_ab
    raise ValueError(f"side must be 'A' or 'C', got {side!r}")


def is_unreliable(gain) -> np.ndarray:
    return np.abs(gain) <= UNRELIABLE_GAIN


def _equalize(y, gain):
    """``y / gain`` with near-zero gains mapped to a zero estimate."""
    y = np.asarray(y, dtype=complex)
    gain = _per_trial(gain, y)
    bad = is_unreliable(gain)
    return np.where(bad, 0.0, y / np.where(bad, 1.0, gain))


def _dot(h, p):
    return h[..., 0] * p[..., 0] + h[..., 1] * p[..., 1]


def _sqnorm(v):
    return np.abs(v[..., 0]) ** 2 + np.abs(v[..., 1]) ** 2


def _cancel_and_divide(y, h_row, p_own, p_other, own_x):
    """Decode the partner's symbol from ``y = g_own x_own + g_other x_other + n``."""
    g_own = _per_trial(_dot(h_row, p_own), y)
    return _equalize(y - g_own * own_x, _dot(h_row, p_other))


# -- amplify and forward ----------------------------------------------------

def af_gain(ch: ChannelRealization, variance: float) -> np.ndarray:
    den = _sqnorm(ch.h_ab) + _sqnorm(ch.h_cb) + 2.0 * variance
    if np.any(den <= 0):
        raise DegenerateChannelError("all-zero channel with zero noise")
    return 1.0 / np.sqrt(den)


def af_relay(y_b, ch: ChannelRealization, variance: float) -> RelayTransmission:
    """Scale both antennas' observations by the AF gain and retransmit."""
    alpha = af_gain(ch, variance)
    y_b = np.asarray(y_b, dtype=complex)
    return RelayTransmission(s_b=_per_trial(alpha, y_b) * y_b, alpha=alpha)


def af_decode(y, ch: ChannelRealization, own_x, alpha, side: str):
    """Analog network coding: strip the terminal's own echo, invert the composite gain."""
    h_row, h_own, h_other = _rows(ch, side)
    y = np.asarray(y, dtype=complex)
    g_own = _per_trial(_dot(h_row, h_own), y)
    return _equalize(y / _per_trial(alpha, y) - g_own * own_x, _dot(h_row, h_other))


def _first_antenna(ch: ChannelRealization) -> ChannelRealization:
    mask = np.array([1.0, 0.0])
    return ChannelRealization(ch.h_ab * mask, ch.h_cb * mask)


def af1_gain(ch: ChannelRealization, variance: float) -> np.ndarray:
    den = np.abs(ch.h_ab[..., 0]) ** 2 + np.abs(ch.h_cb[..., 0]) ** 2 + variance
    if np.any(den <= 0):
        raise DegenerateChannelError("zero channel with zero noise")
    return 1.0 / np.sqrt(den)


def af1_relay(y_b, ch: ChannelRealization, variance: float) -> RelayTransmission:
    """Single-antenna AF baseline: only antenna 1 listens and transmits."""
    alpha = af1_gain(ch, variance)
    y_b = np.asarray(y_b, dtype=complex)
    s_b = np.zeros_like(y_b)
    s_b[..., 0] = _per_trial(alpha, y_b[..., 0]) * y_b[..., 0]
    return RelayTransmission(s_b=s_b, alpha=alpha)


def af1_decode(y, ch: ChannelRealization, own_x, alpha, side: str):
    return af_decode(y, _first_antenna(ch), own_x, alpha, side)


# -- decode and forward -----------------------------------------------------

def df_detect(y_b, ch: ChannelRealization, variance: float):
    """MMSE-estimate both uplink symbols, then slice to the constellation.

    Returns
    -------
    x_a, x_c : ndarray
        Constellation points with the shape of ``y_b`` minus the antenna axis.
    """
    y_b = np.asarray(y_b, dtype=complex)
    H = ch.H
    extra = (y_b.ndim - 1) - (H.ndim - 2)
    if extra > 0:
        H = np.expand_dims(H, tuple(range(-2 - extra, -2)))
    est = mat2_mmse_solve(H, y_b, variance)
    return qpsk_slice(est[..., 0]), qpsk_slice(est[..., 1])


_E1 = np.array([1.0, 0.0])
_E2 = np.array([0.0, 1.0])


def dfsm_relay(x_a, x_c) -> RelayTransmission:
    """Antenna 1 carries the re-encoded A stream, antenna 2 the C stream."""
    return RelayTransmission(s_b=SQRT_HALF * np.stack([x_a, x_c], axis=-1))


def dfsm_decode(y, ch: ChannelRealization, own_x, side: str):
    """Cancel the own-symbol antenna using the true own symbol, divide by the other.

    When the relay mis-detected the own symbol the cancellation leaves a
    residual, which is the behavior a real terminal would see.
    """
    h_row = _rows(ch, side)[0]
    p_a, p_c = SQRT_HALF * _E1, SQRT_HALF * _E2
    if side == "A":
        return _cancel_and_divide(y, h_row, p_a, p_c, own_x)
    return _cancel_and_divide(y, h_row, p_c, p_a, own_x)


def dfnc_relay(bits_a, bits_c) -> RelayTransmission:
    """XOR the detected bit streams and send the coded symbol on both antennas."""
    x_b = qpsk_mod(xor_bits(bits_a, bits_c))
    return RelayTransmission(s_b=SQRT_HALF * np.stack([x_b, x_b], axis=-1))


def dfnc_decode(y, ch: ChannelRealization, own_bits, side: str):
    h_row = _rows(ch, side)[0]
    gain = SQRT_HALF * (h_row[..., 0] + h_row[..., 1])
    return xor_bits(qpsk_demod(_equalize(y, gain)), own_bits)


def alamouti_encode(x) -> RelayTransmission:
    """Alamouti-code a symbol stream of even length over two channel uses per pair.

    Pair ``(s1, s2)`` becomes ``(s1, s2)/sqrt(2)`` followed by
    ``(-conj(s2), conj(s1))/sqrt(2)``.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] % 2:
        raise ValueError("Alamouti coding needs an even number of symbols")
    s1, s2 = x[..., 0::2], x[..., 1::2]
    s_b = np.empty(x.shape + (2,), dtype=complex)
    s_b[..., 0::2, 0] = s1
    s_b[..., 0::2, 1] = s2
    s_b[..., 1::2, 0] = -np.conj(s2)
    s_b[..., 1::2, 1] = np.conj(s1)
    return RelayTransmission(s_b=SQRT_HALF * s_b)


def alamouti_decode(y, h_row):
    """Linear Alamouti combining for one receive antenna.

    ``y`` holds consecutive channel uses, pairs along the last axis; the
    returned stream has the same shape. A zero channel row yields zeros.
    """
    y = np.asarray(y, dtype=complex)
    h_row = _align(np.asarray(h_row, dtype=complex), y[..., 0::2])
    h1, h2 = h_row[..., 0], h_row[..., 1]
    y1, y2 = y[..., 0::2], y[..., 1::2]
    norm = SQRT_HALF * (np.abs(h1) ** 2 + np.abs(h2) ** 2)
    bad = norm <= UNRELIABLE_GAIN
    inv = np.where(bad, 0.0, 1.0 / np.where(bad, 1.0, norm))
    out = np.empty_like(y)
    out[..., 0::2] = inv * (np.conj(h1) * y1 + h2 * np.conj(y2))
    out[..., 1::2] = inv * (np.conj(h2) * y1 - h1 * np.conj(y2))
    return out


def dfnc_alamouti_decode(y, ch: ChannelRealization, own_bits, side: str):
    h_row = _rows(ch, side)[0]
    return xor_bits(qpsk_demod(alamouti_decode(y, h_row)), own_bits)


# -- antenna selection ------------------------------------------------------

def preferred_antennas(ch: ChannelRealization):
    """Boolean arrays: does A's / C's downlink prefer antenna 1 (ties -> antenna 1)."""
    a1 = np.abs(ch.h_ba[..., 0]) >= np.abs(ch.h_ba[..., 1])
    c1 = np.abs(ch.h_bc[..., 0]) >= np.abs(ch.h_bc[..., 1])
    return a1, c1


def antenna_case(ch: ChannelRealization):
    a1, c1 = preferred_antennas(ch)
    case = np.where(a1, np.where(c1, 1, 3), np.where(c1, 4, 2))
    if case.ndim == 0:
        return AntennaCase(int(case))
    return case


def _unit(first):
    """Per-trial unit vector e1 where ``first`` else e2."""
    first = np.asarray(first)[..., None]
    return np.where(first, _E1, _E2)


def dfant_precoders(case, literal_table: bool = False):
    """Per-trial precoders ``(p_a, p_c)`` so that ``s_b = p_a x_a + p_c x_c``.

    Text rule: ``x_c`` goes out on the antenna A prefers, ``x_a`` on the one
    C prefers; when both prefer the same antenna the symbols superpose
    there. ``literal_table`` swaps the placement in the split cases.
    """
    case = np.asarray(case)
    a_pref_1 = (case == 1) | (case == 3)
    c_pref_1 = (case == 1) | (case == 4)
    if literal_table:
        return SQRT_HALF * _unit(a_pref_1), SQRT_HALF * _unit(c_pref_1)
    return SQRT_HALF * _unit(c_pref_1), SQRT_HALF * _unit(a_pref_1)


def dfant_relay(x_a, x_c, case, literal_table: bool = False) -> RelayTransmission:
    x_a = np.asarray(x_a, dtype=complex)
    p_a, p_c = dfant_precoders(case, literal_table)
    p_a, p_c = _align(p_a, x_a), _align(p_c, x_a)
    s_b = p_a * x_a[..., None] + p_c * np.asarray(x_c)[..., None]
    return RelayTransmission(s_b=s_b, case=np.asarray(case))


def dfant_decode(y, ch: ChannelRealization, own_x, case, side: str, literal_table: bool = False):
    h_row = _rows(ch, side)[0]
    p_a, p_c = dfant_precoders(case, literal_table)
    if side == "A":
        return _cancel_and_divide(y, h_row, p_a, p_c, own_x)
    return _cancel_and_divide(y, h_row, p_c, p_a, own_x)


def dfncant_precoder(case):
    case = np.asarray(case)[..., None]
    return np.where(case == 1, _E1, np.where(case == 2, _E2, SQRT_HALF * (_E1 + _E2)))


def dfncant_relay(x_b, case) -> RelayTransmission:
    x_b = np.asarray(x_b, dtype=complex)
    p = _align(dfncant_precoder(case), x_b)
    return RelayTransmission(s_b=p * x_b[..., None], case=np.asarray(case))


def dfncant_decode(y, ch: ChannelRealization, own_bits, case, side: str):
    h_row = _rows(ch, side)[0]
    gain = _dot(h_row, dfncant_precoder(case))
    return xor_bits(qpsk_demod(_equalize(y, gain)), own_bits)


# -- dispatch ---------------------------------------------------------------

def _relay_af1(y_b, ch, variance, literal_table):
    return af1_relay(y_b, ch, variance)


def _relay_af(y_b, ch, variance, literal_table):
    return af_relay(y_b, ch, variance)


def _relay_dfsm(y_b, ch, variance, literal_table):
    return dfsm_relay(*df_detect(y_b, ch, variance))


def _network_coded(y_b, ch, variance):
    x_a, x_c = df_detect(y_b, ch, variance)
    return qpsk_mod(xor_bits(qpsk_demod(x_a), qpsk_demod(x_c)))


def _relay_dfnc(y_b, ch, variance, literal_table):
    x_a, x_c = df_detect(y_b, ch, variance)
    return dfnc_relay(qpsk_demod(x_a), qpsk_demod(x_c))


def _relay_dfnc_alamouti(y_b, ch, variance, literal_table):
    return alamouti_encode(_network_coded(y_b, ch, variance))


def _relay_dfant(y_b, ch, variance, literal_table):
    x_a, x_c = df_detect(y_b, ch, variance)
    return dfant_relay(x_a, x_c, antenna_case(ch), literal_table)


def _relay_dfncant(y_b, ch, variance, literal_table):
    return dfncant_relay(_network_coded(y_b, ch, variance), antenna_case(ch))


def _decode_af1(y, ch, own_bits, tx, side, literal_table):
    return qpsk_demod(af1_decode(y, ch, qpsk_mod(own_bits), tx.alpha, side))


def _decode_af(y, ch, own_bits, tx, side, literal_table):
    return qpsk_demod(af_decode(y, ch, qpsk_mod(own_bits), tx.alpha, side))


def _decode_dfsm(y, ch, own_bits, tx, side, literal_table):
    return qpsk_demod(dfsm_decode(y, ch, qpsk_mod(own_bits), side))


def _decode_dfnc(y, ch, own_bits, tx, side, literal_table):
    return dfnc_decode(y, ch, own_bits, side)


def _decode_dfnc_alamouti(y, ch, own_bits, tx, side, literal_table):
    return dfnc_alamouti_decode(y, ch, own_bits, side)


def _decode_dfant(y, ch, own_bits, tx, side, literal_table):
    case = antenna_case(ch)
    return qpsk_demod(dfant_decode(y, ch, qpsk_mod(own_bits), case, side, literal_table))


def _decode_dfncant(y, ch, own_bits, tx, side, literal_table):
    return dfncant_decode(y, ch, own_bits, antenna_case(ch), side)


RELAY_OPS = {
    RelayStrategy.AF_1ANT: _relay_af1,
    RelayStrategy.AF: _relay_af,
    RelayStrategy.DF_SM: _relay_dfsm,
    RelayStrategy.DF_NC: _relay_dfnc,
    RelayStrategy.DF_NC_ALAMOUTI: _relay_dfnc_alamouti,
    RelayStrategy.DF_ANT: _relay_dfant,
    RelayStrategy.DF_NC_ANT: _relay_dfncant,
}

DECODERS = {
    RelayStrategy.AF_1ANT: _decode_af1,
    RelayStrategy.AF: _decode_af,
    RelayStrategy.DF_SM: _decode_dfsm,
    RelayStrategy.DF_NC: _decode_dfnc,
    RelayStrategy.DF_NC_ALAMOUTI: _decode_dfnc_alamouti,
    RelayStrategy.DF_ANT: _decode_dfant,
    RelayStrategy.DF_NC_ANT: _decode_dfncant,
}


def relay_transmit(strategy: RelayStrategy, y_b, ch: ChannelRealization, variance: float,
                   literal_table: bool = False) -> RelayTransmission:
    """Run the relay side of ``strategy`` on the uplink observation ``y_b``."""
    return RELAY_OPS[strategy](y_b, ch, variance, literal_table)


def terminal_decode(strategy: RelayStrategy, y, ch: ChannelRealization, own_bits,
                    tx: RelayTransmission, side: str, literal_table: bool = False):
    """Recover the partner's bits at terminal ``side`` from its downlink samples."""
    return DECODERS[strategy](y, ch, own_bits, tx, side, literal_table)
