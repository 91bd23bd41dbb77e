"""Closed-form 2x2 complex algebra and seeded complex Gaussian sampling.

Vectors are numpy arrays whose last axis has length 2 and matrices are arrays
whose last two axes are 2x2, so every routine here broadcasts over leading
batch axes (trials, symbols).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SINGULAR_DET = 1e-12


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when an unregularized 2x2 system has (near) zero determinant."""


@dataclass(frozen=True)
class RngStream:
    """Identifies one independent random stream.

    The stream is a pure function of ``(seed, stream_id)``: every call to
    :meth:`generator` returns a fresh generator positioned at the start of
    the same sequence, so trials can be evaluated in any order or on any
    worker and still see identical samples.

    Parameters
    ----------
    seed : int
        Global 64-bit experiment seed.
    stream_id : tuple of int
        Non-negative integers naming the stream, e.g.
        ``(strategy, snr_key, trial)``.
    """

    seed: int
    stream_id: tuple[int, ...] = ()

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if any(k < 0 for k in self.stream_id):
            raise ValueError("stream_id entries must be non-negative")

    def child(self, *keys: int) -> RngStream:
        return RngStream(self.seed, self.stream_id + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def cgauss(rng, variance: float, size=None):
    """Draw circularly-symmetric complex Gaussian samples.

    ``variance`` is the total complex variance E|n|^2; real and imaginary
    parts are independent with variance ``variance / 2`` each.

    Parameters
    ----------
    rng : RngStream or numpy.random.Generator
        Source of randomness. An ``RngStream`` starts from its beginning.
    variance : float
        Total variance, must be >= 0.
    size : int or tuple of int, optional
        Output shape. ``None`` returns a Python complex.
    """
    if not variance >= 0:
        raise ValueError(f"variance must be non-negative, got {variance}")
    gen = as_generator(rng)
    shape = () if size is None else size
    scale = np.sqrt(variance / 2.0)
    z = scale * (gen.standard_normal(shape) + 1j * gen.standard_normal(shape))
    if size is None:
        return complex(z)
    return z


def herm(m):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(m, -1, -2))


def mat2_det(m):
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def mat2_inv(m, det=None):
    """Adjugate / determinant inverse of (a batch of) 2x2 matrices."""
    m = np.asarray(m, dtype=complex)
    if det is None:
        det = mat2_det(m)
    adj = np.empty_like(m)
    adj[..., 0, 0] = m[..., 1, 1]
    adj[..., 1, 1] = m[..., 0, 0]
    adj[..., 0, 1] = -m[..., 0, 1]
    adj[..., 1, 0] = -m[..., 1, 0]
    return adj / np.asarray(det)[..., None, None]


def matmul2(a, b):
    """Batched 2x2 product written out elementwise.

    Per-element arithmetic does not depend on the batch shape, so a trial
    gives bit-identical results whether it is evaluated alone or in a batch.
    """
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
    for i in range(2):
        for j in range(2):
            out[..., i, j] = a[..., i, 0] * b[..., 0, j] + a[..., i, 1] * b[..., 1, j]
    return out


def matvec(m, v):
    m = np.asarray(m)
    v = np.asarray(v)
    out = np.empty(np.broadcast_shapes(m.shape[:-1], v.shape), dtype=complex)
    out[..., 0] = m[..., 0, 0] * v[..., 0] + m[..., 0, 1] * v[..., 1]
    out[..., 1] = m[..., 1, 0] * v[..., 0] + m[..., 1, 1] * v[..., 1]
    return out


def gram_regularized(H, reg):
    """Return ``H^H H + reg I`` for a batch of 2x2 channel matrices."""
    H = np.asarray(H, dtype=complex)
    G = matmul2(herm(H), H)
    G[..., 0, 0] += reg
    G[..., 1, 1] += reg
    return G


def mat2_mmse_solve(H, y, reg: float):
    """Regularized least squares ``(H^H H + reg I)^{-1} H^H y``.

    Parameters
    ----------
    H : array_like, shape (..., 2, 2)
        Channel matrices, columns are the per-transmitter channel vectors.
    y : array_like, shape (..., 2)
        Received vectors. Leading axes broadcast against ``H``.
    reg : float
        Diagonal loading, >= 0. With ``reg == 0`` this is zero forcing.

    Raises
    ------
    SingularMatrixError
        If ``reg == 0`` and any ``|det(H^H H)| <= 1e-12``.
    """
    if not reg >= 0:
        raise ValueError(f"reg must be non-negative, got {reg}")
    H = np.asarray(H, dtype=complex)
    y = np.asarray(y, dtype=complex)
    G = gram_regularized(H, reg)
    det = mat2_det(G)
    if reg == 0 and np.any(np.abs(det) <= SINGULAR_DET):
        raise SingularMatrixError("H^H H is singular; use reg > 0")
    W = matmul2(mat2_inv(G, det), herm(H))
    return matvec(W, y)
