"""Monte Carlo BER engine for the two-way relay strategies.

One trial is one channel realization, one frame per terminal, both stages.
Every trial draws from its own random streams keyed by
``(strategy, snr, trial)``, so a record depends only on the seed and the
configuration, never on batch size, worker count or which other cells
were run.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelRealization, downlink_receive, draw_channel, noise_variance, uplink_receive
from .modem import qpsk_demod, qpsk_mod
from .numerics import SINGULAR_DET, RngStream, as_generator, cgauss, gram_regularized, mat2_det
from .relay import RelayStrategy, _sqnorm, relay_transmit, terminal_decode

log = logging.getLogger(__name__)

DEFAULT_SNR_GRID = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)

# top-level stream keys below (seed, ...)
_TRIAL_STREAM = 0
_DIAGNOSTIC_STREAM = 1
_ENERGY_STREAM = 2


def snr_key(snr_db: float) -> int:
    """Injective non-negative integer key for an SNR value (its IEEE-754 bits)."""
    return int(np.float64(snr_db).view(np.uint64))


def trial_stream(seed: int, strategy: RelayStrategy, snr_db: float, trial: int) -> RngStream:
    return RngStream(seed, (_TRIAL_STREAM, strategy.index, snr_key(snr_db), trial))


@dataclass(frozen=True)
class SimConfig:
    """Sweep configuration.

    ``target_errors <= 0`` disables early stopping. ``workers`` and
    ``batch_trials`` affect speed only, never results.
    """

    strategies: tuple = tuple(RelayStrategy)
    snr_grid_db: tuple = DEFAULT_SNR_GRID
    frame_bits: int = 400
    max_trials: int = 200_000
    target_errors: int = 100
    seed: int = 1
    table1_literal: bool = False
    workers: int = 1
    batch_trials: int = 256

    def __post_init__(self):
        strategies = tuple(
            RelayStrategy.from_tag(s) if isinstance(s, str) else RelayStrategy(s)
            for s in self.strategies
        )
        if not strategies:
            raise ValueError("at least one strategy is required")
        if len(set(strategies)) != len(strategies):
            raise ValueError("duplicate strategies")
        object.__setattr__(self, "strategies", strategies)
        grid = tuple(float(x) for x in self.snr_grid_db)
        if not grid:
            raise ValueError("snr_grid_db must not be empty")
        if any(math.isnan(x) for x in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("snr_grid_db must be strictly increasing")
        object.__setattr__(self, "snr_grid_db", grid)
        if self.frame_bits < 4 or self.frame_bits % 4:
            raise ValueError(f"frame_bits must be a positive multiple of 4, got {self.frame_bits}")
        if self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.workers < 1 or self.batch_trials < 1:
            raise ValueError("workers and batch_trials must be >= 1")

    @property
    def symbols_per_frame(self) -> int:
        return self.frame_bits // 2


@dataclass(frozen=True)
class TrialOutcome:
    """Bit errors at each terminal for one trial (A counts errors in C's frame)."""

    errors_at_a: int
    errors_at_c: int
    bits_per_terminal: int

    @property
    def total_errors(self) -> int:
        return self.errors_at_a + self.errors_at_c


@dataclass(frozen=True)
class BerRecord:
    strategy: RelayStrategy
    snr_db: float
    total_bits: int
    total_errors: int
    trials_run: int
    errors_a: int = 0
    errors_c: int = 0
    resampled: int = field(default=0, compare=False)

    @property
    def bits_per_terminal(self) -> int:
        return self.total_bits // 2

    @property
    def ber(self) -> float:
        return self.total_errors / self.total_bits

    @property
    def ber_a(self) -> float:
        return self.errors_a / self.bits_per_terminal

    @property
    def ber_c(self) -> float:
        return self.errors_c / self.bits_per_terminal

    @property
    def std_error(self) -> float:
        """Binomial standard error ``sqrt(p (1 - p) / n)`` of :attr:`ber`."""
        p = self.ber
        return math.sqrt(p * (1.0 - p) / self.total_bits)


@dataclass
class _Payload:
    bits_a: np.ndarray
    bits_c: np.ndarray
    noise_b: np.ndarray  # unit-variance relay noise, (S, 2)
    noise_a: np.ndarray
    noise_c: np.ndarray


def _draw_payload(rng, frame_bits: int, noisy: bool = True) -> _Payload:
    gen = as_generator(rng)
    n_sym = frame_bits // 2
    bits = gen.integers(0, 2, size=(2, frame_bits), dtype=np.uint8)
    # noise is drawn last, so skipping it leaves the bits unchanged
    noise = cgauss(gen, 1.0, (4, n_sym)) if noisy else np.zeros((4, n_sym), dtype=complex)
    return _Payload(bits[0], bits[1], noise[:2].T, noise[2], noise[3])


def _stack(payloads: Sequence[_Payload]) -> _Payload:
    return _Payload(*(np.stack([getattr(p, f) for p in payloads])
                      for f in ("bits_a", "bits_c", "noise_b", "noise_a", "noise_c")))


def is_degenerate(strategy: RelayStrategy, ch: ChannelRealization, variance: float) -> np.ndarray:
    """Channel draws the relay cannot process (only possible without noise)."""
    if variance > 0:
        return np.zeros(ch.batch_shape, dtype=bool)
    if strategy is RelayStrategy.AF:
        return _sqnorm(ch.h_ab) + _sqnorm(ch.h_cb) <= 0
    if strategy is RelayStrategy.AF_1ANT:
        return np.abs(ch.h_ab[..., 0]) ** 2 + np.abs(ch.h_cb[..., 0]) ** 2 <= 0
    return np.abs(mat2_det(gram_regularized(ch.H, 0.0))) <= SINGULAR_DET


def _simulate(strategy: RelayStrategy, ch: ChannelRealization, variance: float,
              payload: _Payload, table1_literal: bool):
    """Both stages for a batch of trials; returns per-trial error counts at A and C."""
    sd = math.sqrt(variance)
    x_a, x_c = qpsk_mod(payload.bits_a), qpsk_mod(payload.bits_c)
    y_b = uplink_receive(ch, x_a, x_c, 0.0) + sd * payload.noise_b
    tx = relay_transmit(strategy, y_b, ch, variance, table1_literal)
    y_a = downlink_receive(ch.h_ba, tx.s_b, 0.0) + sd * payload.noise_a
    y_c = downlink_receive(ch.h_bc, tx.s_b, 0.0) + sd * payload.noise_c
    got_c = terminal_decode(strategy, y_a, ch, payload.bits_a, tx, "A", table1_literal)
    got_a = terminal_decode(strategy, y_c, ch, payload.bits_c, tx, "C", table1_literal)
    err_a = np.count_nonzero(got_c != payload.bits_c, axis=-1)
    err_c = np.count_nonzero(got_a != payload.bits_a, axis=-1)
    return err_a, err_c


def run_trial(strategy: RelayStrategy, ch: ChannelRealization, snr_db: float,
              rng: RngStream, cfg: SimConfig) -> TrialOutcome:
    """One two-stage exchange over a fixed channel.

    Fresh frames and noise come from ``rng`` (an ``RngStream`` or a numpy
    generator). Within a sweep, trial ``t`` draws its channel from
    :func:`trial_stream` and then passes the same generator here.
    ``snr_db = inf`` runs both hops noiseless.

    Raises
    ------
    DegenerateChannelError, SingularMatrixError
        If the relay cannot process ``ch`` (possible only without noise).
    """
    variance = noise_variance(snr_db)
    payload = _stack([_draw_payload(rng, cfg.frame_bits, variance > 0)])
    ch1 = ChannelRealization(ch.h_ab[None], ch.h_cb[None])
    err_a, err_c = _simulate(strategy, ch1, variance, payload, cfg.table1_literal)
    return TrialOutcome(int(err_a[0]), int(err_c[0]), cfg.frame_bits)


def _trial_inputs(strategy, snr_db, variance, trials: Iterable[int], cfg: SimConfig):
    """Channels and payloads for a run of trials.

    Each trial's stream yields its channel first and then its payload, the
    same order :func:`run_trial` callers use. A degenerate channel (zero
    probability, noiseless runs only) is redrawn from child streams.
    """
    streams = [trial_stream(cfg.seed, strategy, snr_db, t) for t in trials]
    h_ab, h_cb, payloads = [], [], []
    for stream in streams:
        gen = stream.generator()
        ch = draw_channel(gen)
        h_ab.append(ch.h_ab)
        h_cb.append(ch.h_cb)
        payloads.append(_draw_payload(gen, cfg.frame_bits, variance > 0))
    ch = ChannelRealization(np.stack(h_ab), np.stack(h_cb))
    resampled = 0
    for i in np.flatnonzero(is_degenerate(strategy, ch, variance)):
        attempt = 0
        while True:
            attempt += 1
            resampled += 1
            log.warning("degenerate channel for %s trial %s, resampling",
                        strategy.tag, streams[i].stream_id[-1])
            new = draw_channel(streams[i].child(attempt))
            if not is_degenerate(strategy, new, variance):
                break
        ch.h_ab[i], ch.h_cb[i] = new.h_ab, new.h_cb
    return ch, _stack(payloads), resampled


def run_cell(strategy: RelayStrategy, snr_db: float, cfg: SimConfig) -> BerRecord:
    """Trials for one (strategy, SNR) pair until the error target or trial cap.

    The stop point is resolved per trial, so the record does not depend on
    ``cfg.batch_trials``.
    """
    variance = noise_variance(snr_db)
    done = errors_a = errors_c = resampled = 0
    while done < cfg.max_trials:
        n = min(cfg.batch_trials, cfg.max_trials - done)
        ch, payload, res = _trial_inputs(strategy, snr_db, variance, range(done, done + n), cfg)
        err_a, err_c = _simulate(strategy, ch, variance, payload, cfg.table1_literal)
        if cfg.target_errors > 0:
            cum = errors_a + errors_c + np.cumsum(err_a + err_c)
            hit = np.flatnonzero(cum >= cfg.target_errors)
            if hit.size:
                n = int(hit[0]) + 1
                err_a, err_c = err_a[:n], err_c[:n]
        errors_a += int(err_a.sum())
        errors_c += int(err_c.sum())
        resampled += res
        done += n
        if cfg.target_errors > 0 and errors_a + errors_c >= cfg.target_errors:
            break
    return BerRecord(
        strategy=strategy,
        snr_db=snr_db,
        total_bits=2 * cfg.frame_bits * done,
        total_errors=errors_a + errors_c,
        trials_run=done,
        errors_a=errors_a,
        errors_c=errors_c,
        resampled=resampled,
    )


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(cfg: SimConfig) -> list[BerRecord]:
    """Simulate every (strategy, SNR) cell; records sorted by strategy then SNR."""
    cells = [(s, snr, cfg) for s in sorted(cfg.strategies, key=lambda s: s.index)
             for snr in cfg.snr_grid_db]
    if cfg.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_run_cell_args, cells))
    else:
        records = [run_cell(*c) for c in cells]
    return sorted(records, key=lambda r: (r.strategy.index, r.snr_db))


class SlopeEstimationError(ValueError):
    pass


def estimate_slope(records: Sequence[BerRecord], lo_db: float, hi_db: float) -> float:
    """Diversity-order estimate: decades of BER lost per 10 dB over a window.

    Least-squares fit of ``log10(ber)`` against ``snr_db`` using records with
    ``lo_db <= snr_db <= hi_db`` and non-zero BER, reported as a positive
    number for a falling curve.
    """
    pts = [(r.snr_db, r.ber) for r in records
           if lo_db <= r.snr_db <= hi_db and r.total_errors > 0]
    if len({p[0] for p in pts}) < 2:
        raise SlopeEstimationError(
            f"need at least two SNR points with errors in [{lo_db}, {hi_db}] dB")
    snr = np.array([p[0] for p in pts])
    logber = np.log10([p[1] for p in pts])
    dx = snr - snr.mean()
    slope = np.sum(dx * (logber - logber.mean())) / np.sum(dx * dx)
    return float(-10.0 * slope) + 0.0


# -- diagnostics ------------------------------------------------------------

def rayleigh_qpsk_ber_theory(ebn0_db):
    """Per-bit error probability of coherent Gray QPSK over Rayleigh fading."""
    g = 10.0 ** (np.asarray(ebn0_db, dtype=float) / 10.0)
    return 0.5 * (1.0 - np.sqrt(g / (1.0 + g)))


def rayleigh_qpsk_ber(ebn0_db: float, n_bits: int, seed: int = 1,
                      chunk_bits: int = 1 << 18) -> tuple[int, int]:
    """Point-to-point QPSK over i.i.d. per-symbol Rayleigh fading, genie equalizer.

    Calibrates the modem, fading and noise conventions against
    :func:`rayleigh_qpsk_ber_theory`. Symbol energy is one, so the noise
    variance is ``1 / (2 Eb/N0)``.

    Returns
    -------
    errors, bits : int
    """
    if n_bits <= 0 or n_bits % 2:
        raise ValueError("n_bits must be even and positive")
    variance = 1.0 / (2.0 * 10.0 ** (ebn0_db / 10.0))
    gen = RngStream(seed, (_DIAGNOSTIC_STREAM, snr_key(ebn0_db))).generator()
    errors = done = 0
    while done < n_bits:
        n = min(chunk_bits, n_bits - done)
        bits = gen.integers(0, 2, size=n, dtype=np.uint8)
        x = qpsk_mod(bits)
        h = cgauss(gen, 1.0, x.shape)
        y = h * x + cgauss(gen, variance, x.shape)
        errors += int(np.count_nonzero(qpsk_demod(y / h) != bits))
        done += n
    return errors, done


def point_to_point_record(ebn0_db: float, n_bits: int, seed: int = 1) -> dict:
    errors, bits = rayleigh_qpsk_ber(ebn0_db, n_bits, seed)
    ber = errors / bits
    return {
        "ebn0_db": ebn0_db,
        "bits": bits,
        "errors": errors,
        "ber": ber,
        "theory": float(rayleigh_qpsk_ber_theory(ebn0_db)),
        "std_error": math.sqrt(ber * (1.0 - ber) / bits),
    }



def mean_relay_energy(strategy: RelayStrategy, snr_db: float, n_trials: int, seed: int = 1,
                      frame_bits: int = 4, table1_literal: bool = False) -> float:
    """Average relay transmit energy per channel use over random trials.

    Draws channels, frames and uplink noise in bulk (not per-trial streams),
    so it is cheap enough for large ``n_trials``.
    """
    variance = noise_variance(snr_db)
    gen = RngStream(seed, (_ENERGY_STREAM, strategy.index, snr_key(snr_db))).generator()
    ch = draw_channel(gen, n_trials)
    bits = gen.integers(0, 2, size=(2, n_trials, frame_bits), dtype=np.uint8)
    noise = cgauss(gen, variance, (n_trials, frame_bits // 2, 2))
    y_b = uplink_receive(ch, qpsk_mod(bits[0]), qpsk_mod(bits[1]), 0.0) + noise
    tx = relay_transmit(strategy, y_b, ch, variance, table1_literal)
    return float(np.mean(tx.energy_per_use()))
