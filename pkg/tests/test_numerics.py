import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twrelay.numerics import (RngStream, SingularMatrixError, cgauss, herm, mat2_inv,
                              mat2_mmse_solve, matvec)

from oracles import cofactor_mmse


def test_cgauss_zero_variance():
    assert cgauss(RngStream(3), 0.0) == 0j
    assert np.all(cgauss(RngStream(3), 0.0, 10) == 0)


def test_cgauss_rejects_negative_variance():
    with pytest.raises(ValueError):
        cgauss(RngStream(3), -1.0)


def test_cgauss_moments():
    z = cgauss(RngStream(11, (1,)), 1.0, 1_000_000)
    assert abs(z.mean()) < 0.01
    z2 = cgauss(RngStream(11, (2,)), 2.0, 1_000_000)
    assert np.mean(np.abs(z2) ** 2) == pytest.approx(2.0, abs=0.05)
    # circular: equal, uncorrelated real and imaginary parts
    assert np.var(z2.real) == pytest.approx(1.0, abs=0.01)
    assert np.var(z2.imag) == pytest.approx(1.0, abs=0.01)
    assert abs(np.mean(z2.real * z2.imag)) < 0.01


def test_rng_stream_reproducible_and_distinct():
    a = cgauss(RngStream(5, (1, 2, 3)), 1.0, 1000)
    b = cgauss(RngStream(5, (1, 2, 3)), 1.0, 1000)
    c = cgauss(RngStream(5, (1, 2, 4)), 1.0, 1000)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)


def test_rng_stream_order_independent():
    ids = [(0, k) for k in range(20)]
    forward = {i: cgauss(RngStream(9, i), 1.0, 4) for i in ids}
    backward = {i: cgauss(RngStream(9, i), 1.0, 4) for i in reversed(ids)}
    for i in ids:
        np.testing.assert_array_equal(forward[i], backward[i])


def test_rng_stream_rejects_negative_keys():
    with pytest.raises(ValueError):
        RngStream(1, (-1,))


def test_mmse_identity_zero_forcing():
    out = mat2_mmse_solve(np.eye(2), np.array([3 + 0j, 4j]), 0.0)
    np.testing.assert_allclose(out, [3, 4j], atol=1e-15)


def test_mmse_identity_regularized():
    out = mat2_mmse_solve(np.eye(2), np.array([2 + 0j, 2 + 0j]), 1.0)
    np.testing.assert_allclose(out, [1, 1], atol=1e-15)


def test_mmse_matches_cofactor_oracle():
    gen = np.random.default_rng(42)
    for _ in range(200):
        H = cgauss(gen, 1.0, (2, 2))
        y = cgauss(gen, 1.0, 2)
        expected = cofactor_mmse(H.tolist(), y.tolist(), 0.5)
        np.testing.assert_allclose(mat2_mmse_solve(H, y, 0.5), expected, rtol=0, atol=1e-10)


def test_mmse_batched_matches_single():
    gen = np.random.default_rng(1)
    H = cgauss(gen, 1.0, (50, 2, 2))
    y = cgauss(gen, 1.0, (50, 2))
    batch = mat2_mmse_solve(H, y, 0.3)
    for i in range(50):
        assert batch[i].tobytes() == mat2_mmse_solve(H[i], y[i], 0.3).tobytes()


def test_mmse_singular_raises():
    H = np.array([[1, 2], [2, 4]], dtype=complex)
    with pytest.raises(SingularMatrixError):
        mat2_mmse_solve(H, np.ones(2), 0.0)
    # regularization makes it solvable
    assert np.all(np.isfinite(mat2_mmse_solve(H, np.ones(2), 0.1)))


def test_mmse_negative_reg_rejected():
    with pytest.raises(ValueError):
        mat2_mmse_solve(np.eye(2), np.ones(2), -1.0)


def test_mmse_converges_to_zero_forcing():
    gen = np.random.default_rng(7)
    H = cgauss(gen, 1.0, (2, 2))
    y = cgauss(gen, 1.0, 2)
    zf = np.linalg.solve(H, y)
    dist = [np.linalg.norm(mat2_mmse_solve(H, y, r) - zf) for r in (1e-3, 1e-6, 1e-9)]
    assert dist[0] > dist[1] > dist[2]
    assert dist[2] < 1e-7


complex_entry = st.builds(complex, st.floats(-3, 3), st.floats(-3, 3))


@settings(max_examples=200, deadline=None)
@given(st.lists(complex_entry, min_size=4, max_size=4), st.lists(complex_entry, min_size=2, max_size=2))
def test_zero_forcing_inverts_channel(entries, x):
    H = np.array(entries).reshape(2, 2)
    G = herm(H) @ H
    if abs(np.linalg.det(G)) < 1e-3 or np.linalg.cond(H) > 1e3:
        return
    x = np.array(x)
    np.testing.assert_allclose(mat2_mmse_solve(H, H @ x, 0.0), x, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.lists(complex_entry, min_size=4, max_size=4))
def test_inverse_and_conjugate_transpose(entries):
    M = np.array(entries).reshape(2, 2)
    np.testing.assert_array_equal(herm(herm(M)), M)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det) > 1e-3:
        np.testing.assert_allclose(M @ mat2_inv(M), np.eye(2), atol=1e-10 * max(1, np.abs(M).max() ** 2 / abs(det)))


@settings(max_examples=100, deadline=None)
@given(st.lists(complex_entry, min_size=2, max_size=2))
def test_squared_norm(v):
    v = np.array(v)
    assert np.sum(np.abs(v) ** 2) == pytest.approx(np.sum(v * np.conj(v)).real, abs=1e-12)


def test_matvec():
    M = np.array([[1, 2j], [3, 4]])
    v = np.array([1j, 1])
    np.testing.assert_allclose(matvec(M, v), M @ v)
