"""Link-level Monte Carlo simulator for a two-antenna two-way relay.

Two single-antenna terminals A and C exchange QPSK frames through a relay B
with two antennas. The relay either amplifies, or detects and re-encodes the
superposed uplink, optionally network-coding the two streams with XOR and
optionally using Alamouti coding or antenna selection on the downlink.
"""

from .channel import ChannelRealization, draw_channel, noise_variance
from .modem import qpsk_demod, qpsk_mod, random_bits, xor_bits
from .numerics import RngStream, SingularMatrixError, cgauss, mat2_mmse_solve
from .relay import AntennaCase, DegenerateChannelError, RelayStrategy
from .simulator import BerRecord, SimConfig, TrialOutcome, estimate_slope, run_sweep, run_trial

__version__ = "0.1.0"

__all__ = [
    "AntennaCase",
    "BerRecord",
    "ChannelRealization",
    "DegenerateChannelError",
    "RelayStrategy",
    "RngStream",
    "SimConfig",
    "SingularMatrixError",
    "TrialOutcome",
    "cgauss",
    "draw_channel",
    "estimate_slope",
    "mat2_mmse_solve",
    "noise_variance",
    "qpsk_demod",
    "qpsk_mod",
    "random_bits",
    "run_sweep",
    "run_trial",
    "xor_bits",
]
