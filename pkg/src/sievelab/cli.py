"""Dataset-emitting command line: one subcommand per analysis.

Each subcommand writes frozen-schema CSV files (header row, LF endings,
UTF-8, reals at 15 significant digits) plus a JSON run manifest carrying
the command line, seed, and a sha256 checksum per output. Outputs are
byte-identical for identical (command, seed, version) regardless of
thread count. Progress goes to stderr; stdout stays quiet.

Exit codes: 1 usage, 2 domain error, 3 resource limit, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, randmodel, residue_legendre, stats_lab
from .errors import DomainError, ResourceError
from .intervals import DEFAULT_CHUNK_ENTRIES, IntervalSet, compute_interval_records
from .sieve_core import build_prime_table

_CHECKPOINT_BLOCK = 500  # intervals per checkpoint flush


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the documented usage code is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _env_default(name: str, fallback, cast):
    raw = os.environ.get(f"SIEVELAB_{name}")
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        raise SystemExit(f"bad SIEVELAB_{name}={raw!r}")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.15g}"


def _write_csv(path: Path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out_dir: Path, command: str, argv: list, outputs: list,
                    seed=None, k_max=None, extras=None) -> Path:
    manifest = {
        "command": command,
        "command_line": " ".join(["sievelab"] + list(argv)),
        "seed": seed,
        "k_max": k_max,
        "version": __version__,
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    if extras:
        manifest.update(extras)
    path = out_dir / f"{command}.manifest.json"
    path.write_bytes((json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return path


def _progress(msg: str) -> None:
    print(f"[sievelab] {msg}", file=sys.stderr, flush=True)


def _table_for(k_needed: int):
    """Prime table comfortably covering the first k_needed primes."""
    k = max(k_needed, 6)
    bound = int(k * (math.log(k) + math.log(math.log(k))) * 1.15) + 100
    return build_prime_table(bound)


# ---------------------------------------------------------------------------
# Checkpointed interval building shared by intervals/bias/corr/conjecture.
# ---------------------------------------------------------------------------

def _checkpoint_load(path: Path) -> list:
    rows = []
    if not path.exists():
        return rows
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rows.append(json.loads(line))
    for i, row in enumerate(rows):
        if row["k"] != i + 1:
            raise DomainError(f"checkpoint {path} corrupt at line {i + 1}")
    return rows


def _checkpoint_append(path: Path, records) -> None:
    with path.open("a", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({
                "k": r.k, "p_k": r.p_k, "p_next": r.p_next, "gap": r.gap,
                "length": r.length, "pi_k": r.pi_k, "li_k": r.li_k,
                "pnt_estimate": r.pnt_estimate,
            }) + "\n")
        fh.flush()


def _records_from_rows(rows) -> list:
    from .intervals import IntervalRecord
    return [IntervalRecord(**row) for row in rows]


def _build_records(k_max: int, table, threads: int, chunk_entries: int,
                   checkpoint) -> list:
    done = []
    if checkpoint:
        ck = Path(checkpoint)
        done = _records_from_rows(_checkpoint_load(ck))
        if done:
            _progress(f"checkpoint: {len(done)} records loaded from {ck}")
    if len(done) >= k_max:
        return done[:k_max]
    k_next = len(done) + 1
    while k_next <= k_max:
        k_hi = min(k_next + _CHECKPOINT_BLOCK - 1, k_max)
        block = compute_interval_records(k_next, k_hi, table, threads=threads,
                                         chunk_entries=chunk_entries)
        if checkpoint:
            _checkpoint_append(Path(checkpoint), block)
        done.extend(block)
        _progress(f"intervals k={k_next}..{k_hi} done")
        k_next = k_hi + 1
    return done


def _interval_set(args):
    table = _table_for(args.kmax + 1)
    records = _build_records(args.kmax, table, args.threads, args.segment_size,
                             args.checkpoint)
    return IntervalSet(records), table


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------

def _cmd_intervals(args, argv) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    interval_set, _ = _interval_set(args)
    rows = [(r.k, r.p_k, r.p_next, r.gap, r.length, r.pi_k, r.li_k, r.pnt_estimate)
            for r in interval_set.records]
    f1 = out / "intervals.csv"
    _write_csv(f1, ["k", "p_k", "p_next", "gap", "length", "pi_k", "li_k", "pnt_estimate"], rows)
    dev_rows = [(r.k, r.p_next ** 2, r.pi_k, r.li_k, r.pi_k - r.li_k)
                for r in interval_set.records]
    f2 = out / "deviations.csv"
    _write_csv(f2, ["k", "x", "pi_k", "li_k", "diff"], dev_rows)
    _write_manifest(out, "intervals", argv, [f1, f2], seed=args.seed, k_max=args.kmax)
    return 0


def _cmd_maier(args, argv) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    k_list = [int(tok) for tok in args.k.split(",") if tok.strip()]
    if not k_list:
        raise DomainError("empty k list")
    table = _table_for(max(k_list) + 1)
    scans = [stats_lab.maier_scan(k, args.lam, table, step=args.step) for k in k_list]
    scan_rows = []
    for s in scans:
        scan_rows.extend((s.k, x, r) for x, r in s.ratios.points)
    f1 = out / "maier_scan.csv"
    _write_csv(f1, ["k", "x", "ratio"], scan_rows)
    summary_rows = [(s.k, s.ratios.metadata["phi_start"], s.ratios.metadata["phi_end"],
                     s.whole_interval_ratio, s.up_deviation, s.down_deviation, s.delta)
                    for s in scans]
    f2 = out / "maier_summary.csv"
    _write_csv(f2, ["k", "phi_start", "phi_end", "whole_interval_ratio",
                    "up_deviation", "down_deviation", "delta"], summary_rows)
    _write_manifest(out, "maier", argv, [f1, f2], seed=args.seed, k_max=max(k_list),
                    extras={"lambda": args.lam, "delta_band": args.delta_band,
                            "delta_lambda": stats_lab.extract_delta(scans)})
    return 0


def _cmd_legendre(args, argv) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = _table_for(args.kmax + 1)
    rows = residue_legendre.legendre_scan(1, args.kmax, table)
    f1 = out / "legendre_scan.csv"
    _write_csv(f1, ["k", "ratio_full", "ratio_truncated", "pi_ratio"],
               [(r.k, r.ratio_full, r.ratio_truncated, r.pi_ratio) for r in rows])
    f2 = out / "legendre_terms.csv"
    _write_csv(f2, ["k", "terms", "l_k"], [(r.k, r.terms, r.length) for r in rows])
    _write_manifest(out, "legendre", argv, [f1, f2], seed=args.seed, k_max=args.kmax)
    return 0


def _cmd_randmodel(args, argv) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = _table_for(args.k + 1)
    summary = randmodel.shift_model(args.k, table, budget=args.budget, seed=args.seed)
    binom = randmodel.binomial_reference(args.k, table)
    pois = randmodel.poisson_reference(args.k, table)
    f1 = out / "randmodel.csv"
    _write_csv(f1, ["k", "mode", "samples", "mean", "variance", "binom_var", "pois_var", "seed"],
               [(summary.k, summary.mode, summary.samples, summary.mean, summary.variance,
                 binom.variance, pois.variance,
                 summary.seed if summary.seed is not None else "")])
    f2 = out / "randmodel_hist.csv"
    hist_rows = [(v, int(c)) for v, c in enumerate(summary.histogram) if c > 0]
    _write_csv(f2, ["value", "count"], hist_rows)
    _write_manifest(out, "randmodel", argv, [f1, f2], seed=args.seed, k_max=args.k,
                    extras={"mode": summary.mode, "budget": args.budget})
    return 0


def _cmd_bias(args, argv) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    interval_set, table = _interval_set(args)
    series = stats_lab.bias_series(interval_set, table)
    meta = series.metadata
    offset = 2.0 if args.count_offset else 0.0
    rows = []
    for i, (x, a) in enumerate(series.points):
        a_off = a + offset
        d = meta["delta"][i]
        rows.append((meta["k"][i], x, a_off, meta["b"][i], meta["c"][i],
                     a_off / d, meta["b_norm"][i], meta["c_norm"][i]))
    f1 = out / "bias.csv"
    _write_csv(f1, ["k", "x", "a", "b", "c", "a_norm", "b_norm", "c_norm"], rows)
    fit = meta["fit"]
    _write_manifest(out, "bias", argv, [f1], seed=args.seed, k_max=args.kmax,
                    extras={"count_offset": bool(args.count_offset),
                            "fit_mean": fit.mean, "fit_stdev": fit.stdev})
    return 0


def _cmd_corr(args, argv) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    interval_set, _ = _interval_set(args)
    deviations = interval_set.pi_array() - interval_set.li_array()
    series = stats_lab.lag_correlation(deviations, args.max_lag, block=args.block or 0)
    f1 = out / "corr.csv"
    _write_csv(f1, ["lag_or_block", "value"], [(int(x), v) for x, v in series.points])
    _write_manifest(out, "corr", argv, [f1], seed=args.seed, k_max=args.kmax,
                    extras={"max_lag": args.max_lag, "block": args.block or 0})
    return 0


def _cmd_conjecture(args, argv) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    interval_set, _ = _interval_set(args)
    series = randmodel.conjecture_check(interval_set)
    meta = series.metadata
    offset = 2.0 if args.count_offset else 0.0
    rows = []
    violations = 0
    for i, (x, d) in enumerate(series.points):
        d_off = d + offset
        if abs(d_off) >= meta["sqrt_li"][i]:
            violations += 1
        rows.append((meta["k"][i], x, d_off, meta["sqrt_li"][i]))
    f1 = out / "conjecture.csv"
    _write_csv(f1, ["k", "x", "pi_minus_li", "sqrt_li"], rows)
    _write_manifest(out, "conjecture", argv, [f1], seed=args.seed, k_max=args.kmax,
                    extras={"count_offset": bool(args.count_offset),
                            "violations": violations})
    return 0


# ---------------------------------------------------------------------------
# Parser wiring.
# ---------------------------------------------------------------------------

def _add_common(sp, kmax=True):
    sp.add_argument("--out", default=_env_default("OUT", "out", str),
                    help="output directory (default: ./out)")
    sp.add_argument("--seed", type=int, default=_env_default("SEED", 0, int))
    sp.add_argument("--threads", type=int, default=_env_default("THREADS", 1, int))
    sp.add_argument("--segment-size", type=int,
                    default=_env_default("SEGMENT_SIZE", DEFAULT_CHUNK_ENTRIES, int),
                    help="sieve chunk span in entries")
    if kmax:
        sp.add_argument("--kmax", type=_positive_int, required=True,
                        help="largest interval index k")


def _add_interval_scan_flags(sp):
    sp.add_argument("--checkpoint", default=_env_default("CHECKPOINT", None, str),
                    help="JSONL checkpoint for resumable interval scans")


def _add_count_offset(sp):
    sp.add_argument("--count-offset", action="store_true",
                    help="compare against li(x) - 2 in deviation columns")


def build_parser() -> _Parser:
    parser = _Parser(prog="sievelab",
                     description="Datasets over the sieve intervals [p_k^2, p_{k+1}^2 - 1]")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("intervals", help="interval records and per-interval deviations")
    _add_common(sp)
    _add_interval_scan_flags(sp)
    sp.set_defaults(func=_cmd_intervals)

    sp = sub.add_parser("maier", help="window-density ratio scans over chosen intervals")
    _add_common(sp, kmax=False)
    sp.add_argument("--k", required=True, help="comma-separated interval indices")
    sp.add_argument("--lambda", dest="lam", type=float, default=3.0)
    sp.add_argument("--delta-band", type=float, default=0.03,
                    help="illustrative band half width recorded in the manifest")
    sp.add_argument("--step", type=int, default=0,
                    help="scan stride; 0 means ceil(Phi/100)")
    sp.set_defaults(func=_cmd_maier)

    sp = sub.add_parser("legendre", help="full/truncated/exact ratio scan and term counts")
    _add_common(sp)
    sp.set_defaults(func=_cmd_legendre)

    sp = sub.add_parser("randmodel", help="shifted-window model summary for one interval")
    _add_common(sp, kmax=False)
    sp.add_argument("--k", type=_positive_int, required=True)
    sp.add_argument("--budget", type=int, default=_env_default("BUDGET", 100_000, int),
                    help="exhaustive threshold / sampled draw count")
    sp.set_defaults(func=_cmd_randmodel)

    sp = sub.add_parser("bias", help="cumulative error curves, raw and normalized")
    _add_common(sp)
    _add_interval_scan_flags(sp)
    _add_count_offset(sp)
    sp.set_defaults(func=_cmd_bias)

    sp = sub.add_parser("corr", help="lag correlation of pi_k - li_k")
    _add_common(sp)
    _add_interval_scan_flags(sp)
    sp.add_argument("--max-lag", type=int, default=50)
    sp.add_argument("--block", type=int, default=0,
                    help="non-overlapping block size; 0 = whole range")
    sp.set_defaults(func=_cmd_corr)

    sp = sub.add_parser("conjecture", help="pi(x) - li(x) against the sqrt(li(x)) band")
    _add_common(sp)
    _add_interval_scan_flags(sp)
    _add_count_offset(sp)
    sp.set_defaults(func=_cmd_conjecture)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except DomainError as exc:
        print(f"sievelab: domain error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"sievelab: resource limit: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"sievelab: i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
