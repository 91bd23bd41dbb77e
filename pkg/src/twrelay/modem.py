"""Bit generation, Gray-mapped QPSK and XOR network coding of bit frames.

Bit frames are integer arrays of 0/1 whose last axis is the bit index; symbol
frames are complex arrays whose last axis is the symbol index. Two bits make
one symbol: ``(b0, b1) -> ((1 - 2 b0) + 1j (1 - 2 b1)) / sqrt(2)``.
"""

from __future__ import annotations

import numpy as np

from .numerics import as_generator

SQRT_HALF = np.sqrt(0.5)

# index = 2*b0 + b1
CONSTELLATION = SQRT_HALF * np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])


def _check_even(n):
    if n <= 0 or n % 2:
        raise ValueError(f"frame length must be even and positive, got {n}")


def random_bits(rng, n_bits: int, size=None) -> np.ndarray:
    """I.i.d. equiprobable bits, shape ``size + (n_bits,)``."""
    _check_even(n_bits)
    shape = (n_bits,) if size is None else tuple(np.atleast_1d(size)) + (n_bits,)
    return as_generator(rng).integers(0, 2, size=shape, dtype=np.uint8)


def qpsk_mod(bits) -> np.ndarray:
    bits = np.asarray(bits)
    _check_even(bits.shape[-1])
    b = bits.reshape(bits.shape[:-1] + (-1, 2)).astype(np.int8)
    return SQRT_HALF * ((1 - 2 * b[..., 0]) + 1j * (1 - 2 * b[..., 1]))


def qpsk_demod(symbols) -> np.ndarray:
    """Hard sign decisions; points on an axis decide toward bit 0."""
    s = np.asarray(symbols, dtype=complex)
    bits = np.empty(s.shape + (2,), dtype=np.uint8)
    bits[..., 0] = s.real < 0
    bits[..., 1] = s.imag < 0
    return bits.reshape(s.shape[:-1] + (-1,)) if s.ndim else bits


def qpsk_slice(symbols) -> np.ndarray:
    """Map each estimate to its nearest constellation point."""
    s = np.asarray(symbols, dtype=complex)
    re = np.where(s.real < 0, -SQRT_HALF, SQRT_HALF)
    im = np.where(s.imag < 0, -SQRT_HALF, SQRT_HALF)
    return re + 1j * im


def xor_bits(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape[-1:] != b.shape[-1:]:
        raise ValueError(f"frame length mismatch: {a.shape[-1:]} vs {b.shape[-1:]}")
    return np.bitwise_xor(a, b)
