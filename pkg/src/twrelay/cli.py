"""Command-line front end: run a sweep, write the CSV, optionally a gnuplot script."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .relay import RelayStrategy
from .simulator import BerRecord, SimConfig, point_to_point_record, run_sweep

CSV_HEADER = ("scheme", "snr_db", "ber", "ber_a", "ber_c", "bits", "errors", "trials")

# label, gnuplot style; blue dashed AF, black solid DF without CSI, red DF with selection
SERIES_STYLE = {
    RelayStrategy.AF_1ANT: ("AF, 1-antenna relay", 'dt 3 lw 2 lc rgb "blue" pt 6'),
    RelayStrategy.AF: ("AF", 'dt 2 lw 2 lc rgb "blue" pt 4'),
    RelayStrategy.DF_SM: ("DF-SM", 'dt 1 lw 2 lc rgb "black" pt 1'),
    RelayStrategy.DF_NC: ("DF-NC", 'dt 1 lw 2 lc rgb "black" pt 2'),
    RelayStrategy.DF_NC_ALAMOUTI: ("DF-NC-Alamouti", 'dt 1 lw 2 lc rgb "black" pt 7'),
    RelayStrategy.DF_ANT: ("DF-ANT", 'dt 1 lw 2 lc rgb "red" pt 9'),
    RelayStrategy.DF_NC_ANT: ("DF-NC-ANT", 'dt 1 lw 2 lc rgb "red" pt 5'),
}


def format_sci(x: float) -> str:
    """``1.234568e-3`` style: 7 significant digits, unpadded exponent."""
    mantissa, exp = f"{x:.6e}".split("e")
    return f"{mantissa}e{int(exp)}"


def format_snr(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def csv_row(r: BerRecord) -> list[str]:
    return [
        r.strategy.tag,
        format_snr(r.snr_db),
        format_sci(r.ber),
        format_sci(r.ber_a),
        format_sci(r.ber_c),
        str(r.total_bits),
        str(r.total_errors),
        str(r.trials_run),
    ]


def write_csv(records: Sequence[BerRecord], path) -> None:
    if not records:
        raise ValueError("no records to write")
    rows = sorted(records, key=lambda r: (r.strategy.index, r.snr_db))
    with open(path, "w", newline="", encoding="ascii") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(csv_row(r))


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="ascii") as f:
        rows = list(csv.DictReader(f))
    for row in rows:
        for k in ("snr_db", "ber", "ber_a", "ber_c"):
            row[k] = float(row[k])
        for k in ("bits", "errors", "trials"):
            row[k] = int(row[k])
    return rows


def emit_plot_script(records: Sequence[BerRecord], path, csv_path) -> None:
    """Write a gnuplot script drawing log-scale BER against SNR, one series per scheme.

    The CSV is referenced relative to the script's directory; run gnuplot
    from there.
    """
    if not records:
        raise ValueError("no records to plot")
    path = Path(path)
    csv_rel = os.path.relpath(Path(csv_path).resolve(), path.resolve().parent)
    png = path.with_suffix(".png").name
    schemes = sorted({r.strategy for r in records}, key=lambda s: s.index)
    lines = [
        "# BER vs SNR, two-way relay with a two-antenna relay",
        f"# data: {csv_rel}",
        'set datafile separator ","',
        "set terminal pngcairo size 900,650 enhanced",
        f'set output "{png}"',
        "set logscale y",
        'set format y "10^{%L}"',
        'set xlabel "SNR (dB)"',
        'set ylabel "BER"',
        "set grid xtics ytics mytics",
        "set key bottom left",
        "plot \\",
    ]
    series = []
    for s in schemes:
        label, style = SERIES_STYLE[s]
        series.append(
            f'  "{csv_rel}" using 2:(strcol(1) eq "{s.tag}" && $3 > 0 ? $3 : 1/0) '
            f'with linespoints {style} title "{label}"'
        )
    lines.append(", \\\n".join(series))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


# -- argument parsing -------------------------------------------------------

def _snr_grid(text: str) -> tuple:
    try:
        parts = [float(p) for p in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad SNR range {text!r}, expected start:step:stop")
    if len(parts) == 1:
        return (parts[0],)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"bad SNR range {text!r}, expected start:step:stop")
    start, step, stop = parts
    if not (math.isfinite(start) and math.isfinite(stop)) or not step > 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad SNR range {text!r}: need step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + k * step, 10) for k in range(n))


def _schemes(text: str) -> tuple:
    if text.strip().lower() == "all":
        return tuple(RelayStrategy)
    try:
        out = tuple(RelayStrategy.from_tag(t) for t in text.split(",") if t.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))
    if not out or len(set(out)) != len(out):
        raise argparse.ArgumentTypeError(f"bad scheme list {text!r}")
    return out


def _frame_bits(text: str) -> int:
    n = _positive_int(text)
    if n % 4:
        raise argparse.ArgumentTypeError(f"frame bits must be divisible by 4, got {n}")
    return n


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _count(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {n}")
    return n


def _seed(text: str) -> int:
    n = _count(text)
    if n >= 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return n


def build_parser() -> argparse.ArgumentParser:
    tags = ",".join(s.tag for s in RelayStrategy)
    p = argparse.ArgumentParser(
        prog="twrelay",
        description="Monte Carlo BER of two-way relaying with a two-antenna relay.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        fromfile_prefix_chars="@",
    )
    p.add_argument("--schemes", type=_schemes, default="all",
                   help=f"comma-separated schemes from {tags}, or 'all'")
    p.add_argument("--snr", type=_snr_grid, default="0:5:30",
                   help="SNR grid in dB as start:step:stop (inclusive) or a single value")
    p.add_argument("--frame-bits", type=_frame_bits, default=400,
                   help="payload bits per terminal per trial, divisible by 4")
    p.add_argument("--max-trials", type=_positive_int, default=200_000,
                   help="trial cap per (scheme, SNR) point")
    p.add_argument("--target-errors", type=_count, default=100,
                   help="stop a point once this many bit errors are seen; 0 disables")
    p.add_argument("--seed", type=_seed, default=1, help="experiment seed")
    p.add_argument("--table1-literal", action="store_true", default=False,
                   help="DF-ANT split cases use the literal table placement instead of the text rule")
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="worker processes; results do not depend on this")
    p.add_argument("--out", default="ber.csv", help="output CSV path")
    p.add_argument("--plot", default=None, help="also write a gnuplot script to this path")
    p.add_argument("--calibrate", type=_positive_int, default=None, metavar="BITS",
                   help="instead of a sweep, run point-to-point QPSK over Rayleigh fading "
                        "with BITS bits per point, treating --snr as Eb/N0, and print the "
                        "simulated and closed-form BER")
    p.add_argument("-v", "--verbose", action="store_true", default=False, help="log progress")
    return p


def parse_args(argv: Optional[Sequence[str]] = None):
    """Parse command-line flags into ``(SimConfig, namespace)``.

    Invalid values exit through argparse with status 2.
    """
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = SimConfig(
            strategies=ns.schemes,
            snr_grid_db=ns.snr,
            frame_bits=ns.frame_bits,
            max_trials=ns.max_trials,
            target_errors=ns.target_errors,
            seed=ns.seed,
            table1_literal=ns.table1_literal,
            workers=ns.workers,
        )
    except ValueError as e:
        parser.error(str(e))
    return cfg, ns


def _calibrate(cfg: SimConfig, n_bits: int) -> None:
    print("ebn0_db,ber,theory,bits,errors,z")
    for snr in cfg.snr_grid_db:
        rec = point_to_point_record(snr, n_bits + n_bits % 2, cfg.seed)
        se = math.sqrt(rec["theory"] * (1 - rec["theory"]) / rec["bits"])
        z = (rec["ber"] - rec["theory"]) / se if se > 0 else 0.0
        print(f"{format_snr(snr)},{format_sci(rec['ber'])},{format_sci(rec['theory'])},"
              f"{rec['bits']},{rec['errors']},{z:.2f}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg, ns = parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if ns.calibrate:
        _calibrate(cfg, ns.calibrate)
        return 0
    records = run_sweep(cfg)
    try:
        write_csv(records, ns.out)
        if ns.plot:
            emit_plot_script(records, ns.plot, ns.out)
    except OSError as e:
        print(f"twrelay: cannot write output: {e}", file=sys.stderr)
        return 1
    for r in records:
        logging.getLogger(__name__).info("%s %s dB: BER %.3e over %d bits",
                                         r.strategy.tag, format_snr(r.snr_db), r.ber, r.total_bits)
    return 0


if __name__ == "__main__":
    sys.exit(main())
