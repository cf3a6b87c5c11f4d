"""Command-line front end.

Subcommands::

    aspm design-psf --length 256 --refine-iters 200 --out psf.json
    aspm analyze    --mode noncoherent --M 16 --axis ebn0-db --range 0:14:0.5
    aspm simulate   --config link.json --axis snr-db --range=-12:-6:1 --seed 1
    aspm verify     [--psf psf.json] [--json report.json]

Exit status is 0 on success, 1 when a design, invariant or simulation check
fails, and 2 on a usage error (including invalid configurations).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analytics, harness, shaping, specfun
from .coding import ConfigError, LinkConfig, Signaling, Detection, bits_to_symbols, symbols_to_bits, symbols_to_train
from .detection import detect
from .link import ChannelSpec, channel_coherent, channel_noncoherent, receive_coherent, receive_noncoherent, shape

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

AXIS_KEYS = {"ebn0-db": "ebn0_db", "snr-db": "snr_db", "lambda": "lam"}
MODES = ("coherent", "noncoherent", "coherent-unipolar", "binary-coherent", "binary-noncoherent")


class UsageError(Exception):
    pass


def parse_range(text: str) -> list[float]:
    """``start:stop:step`` with both ends inclusive (``0:14:0.5`` has 29 values)."""
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise UsageError(f"range must be start:stop:step, got {text!r}") from None
    if not step > 0 or not math.isfinite(step):
        raise UsageError("range step must be > 0")
    if stop < start:
        raise UsageError("range stop must be >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _count(text: str) -> int:
    # accepts 1e4 style counts
    value = float(text)
    if not value.is_integer() or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(value)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# --------------------------------------------------------------------------


def cmd_design_psf(args) -> int:
    if args.length < 32 or args.length % 2:
        raise UsageError(f"--length must be even and >= 32, got {args.length}")
    if args.refine_iters < 0:
        raise UsageError("--refine-iters must be >= 0")
    try:
        psf = shaping.design_psf(args.length, refine_iters=args.refine_iters)
    except shaping.DesignError as exc:
        print(f"design failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    shaping.save_psf(psf, args.out)
    md = psf.metadata
    print(f"acf_error        {md['acf_error']:.6g}")
    print(f"ssb_error        {md['ssb_error']:.6g}")
    print(f"envelope_ripple  {md['envelope_ripple']:.6g}")
    print(f"wrote {args.out}")
    return EXIT_OK


def analyze_rows(mode: str, M: int, axis: str, values, Np=None):
    """(axis_value, lambda, ber_analytic) rows for ``cmd_analyze``."""
    rows = []
    for v in values:
        point = analytics.convert(M, Np, **{AXIS_KEYS[axis]: v})
        if mode == "coherent":
            ber = analytics.ber_coherent(point, M)
        elif mode == "noncoherent":
            ber = analytics.ber_noncoherent(point, M)
        elif mode == "coherent-unipolar":
            ber = analytics.ber_coherent_unipolar(point, M)
        else:
            ber = analytics.ber_binary(point, mode.split("-", 1)[1])
        rows.append((v, point.lam, ber))
    return rows


def cmd_analyze(args) -> int:
    values = parse_range(args.range)
    M = args.M
    if args.mode.startswith("binary"):
        M = 2 if M is None else M
        if M != 2:
            raise UsageError("binary modes need --M 2")
    elif M is None:
        raise UsageError(f"--M is required for mode {args.mode}")
    if M < 2 or M & (M - 1):
        raise UsageError(f"--M must be a power of two >= 2, got {M}")
    if args.axis == "snr-db" and args.Np is None:
        raise UsageError("--axis snr-db needs --Np")
    rows = analyze_rows(args.mode, M, args.axis, values, args.Np)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["axis_value", "lambda", "ber_analytic"])
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _load_config(path) -> LinkConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return LinkConfig.from_dict(doc)
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except ConfigError as exc:
        raise UsageError(f"invalid config {path}: {exc}") from None


def _load_psf(path) -> shaping.PsfPair:
    if path is None:
        return shaping.default_psf()
    try:
        return shaping.load_psf(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read PSF {path}: {exc}") from None


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    psf = _load_psf(args.psf)
    if psf.length != config.psf_length:
        raise UsageError(f"PSF length {psf.length} does not match config psf_length {config.psf_length}")
    try:
        spec = harness.SweepSpec(
            config, args.axis.replace("-", "_"), parse_range(args.range),
            min_errors=args.min_errors, max_bits=args.max_bits, seed=args.seed,
            threads=args.threads, symbols_per_frame=args.symbols_per_frame, reference=args.reference,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    curve = harness.run_sweep(spec, psf)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(harness.CSV_COLUMNS)
        for row in curve.rows():
            w.writerow([_fmt(x) for x in row])
    finally:
        if close:
            fh.close()
    for pt in curve.points:
        if pt.flagged:
            print(f"low confidence at {pt.axis_value:g}: {pt.errors} errors in {pt.bits} bits", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# invariant suite


def _check(name, value, threshold, passed, detail=""):
    return {"name": name, "value": float(value), "threshold": float(threshold), "passed": bool(passed),
            "detail": detail}


def _max_rel(a, b):
    return abs(a - b) / abs(b)


def _analytic_checks():
    out = []
    x = np.linspace(-6.0, 6.0, 1201)
    err = float(np.max(np.abs(specfun.erf(x) + specfun.erfc(x) - 1.0)))
    out.append(_check("erf_erfc_complement", err, 1e-14, err <= 1e-14))

    worst = 0.0
    h = 1e-4
    for lam in (0.0, 1.0, 4.0, 16.0):
        for xv in (0.5, 2.0, 8.0, 20.0):
            fd = (specfun.marcum_q1(math.sqrt(lam), math.sqrt(xv + h))
                  - specfun.marcum_q1(math.sqrt(lam), math.sqrt(xv - h))) / (2 * h)
            exact = -0.5 * math.exp(-(lam + xv) / 2) * float(specfun.bessel_i0(math.sqrt(lam * xv)))
            worst = max(worst, abs(fd - exact))
    out.append(_check("marcum_q1_derivative", worst, 1e-6, worst <= 1e-6))

    worst = max(analytics.verify_appendix_identity(lam, k)[2] for k in range(1, 9) for lam in (0.0, 1.0, 4.0, 16.0))
    out.append(_check("appendix_identity", worst, 1e-8, worst <= 1e-8))

    worst = max(abs(analytics.arrival_time_probability(0.0, M) - 2.0 / M) for M in (4, 16, 64, 256))
    out.append(_check("arrival_time_at_zero", worst, 1e-9, worst <= 1e-9))

    worst = max(_max_rel(analytics.ser_noncoherent(lam, M, "integral"), analytics.ser_noncoherent(lam, M, "sum"))
                for M in (2, 4, 8, 16) for lam in (1.0, 4.0, 16.0, 64.0))
    out.append(_check("noncoherent_sum_vs_integral", worst, 1e-10, worst <= 1e-10))

    worst = 0.0
    for g in np.arange(0.5, 32.5, 0.5):
        p = analytics.convert(2, ebn0=g)
        worst = max(worst, _max_rel(analytics.ber_coherent(p, 2), 0.5 * math.erfc(math.sqrt(g))),
                    _max_rel(analytics.ber_noncoherent(p, 2), 0.5 * math.exp(-g / 2)))
    out.append(_check("binary_reductions", worst, 1e-12, worst <= 1e-12))

    worst = 0.0
    for M in (2, 4, 16, 256, 4096):
        for f in (analytics.ber_coherent, analytics.ber_noncoherent, analytics.ber_coherent_unipolar):
            worst = max(worst, abs(f(0.0, M) - 0.5))
    out.append(_check("ber_at_zero_snr", worst, 1e-6, worst <= 1e-6))

    bers = [analytics.ber_noncoherent(analytics.convert(2 ** k, ebn0=10.0), 2 ** k) for k in range(1, 13)]
    ok = all(b < a for a, b in zip(bers, bers[1:]))
    out.append(_check("noncoherent_decreasing_in_M", bers[-1], 0.0, ok, "BER at M = 4096"))

    margin = min(analytics.ber_coherent_unipolar(2 * mu * mu, M) / analytics.ber_coherent(2 * mu * mu, M)
                 for mu in (1, 2, 3, 4) for M in (4, 16, 64))
    out.append(_check("unipolar_worse_than_bipolar", margin, 1.0, margin > 1.0, "min BER ratio"))
    return out


def _psf_checks(psf):
    out = []
    err = shaping.acf_error(psf)
    out.append(_check("psf_acf_error", err, 2e-2, err <= 2e-2))
    ssb = shaping.hilbert_pair_error(psf)
    out.append(_check("psf_negative_frequency_energy", ssb, 1e-3, ssb <= 1e-3))
    rip = shaping.envelope_ripple(psf)
    out.append(_check("psf_envelope_ripple", rip, 1e-6, rip <= 1e-6))

    diag = shaping.acf_diagnostics(psf)
    gap = diag.papr_designed_db - diag.papr_shaped_db
    out.append(_check("papr_reduction_db", gap, 10.0, gap >= 10.0))

    cfg = LinkConfig(16, 128, 4, Signaling.UNIPOLAR, Detection.NONCOHERENT, psf_length=psf.length,
                     allow_overlap=True)
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, 256 * cfg.bits_per_symbol)
    train = symbols_to_train(bits_to_symbols(bits, cfg), cfg)
    x_g, x_h = shape(train, psf)
    spec = np.abs(np.fft.fft(x_g + 1j * x_h)) ** 2
    n = spec.size
    frac = float(spec[: n // 2 + 1].sum() / spec.sum())
    out.append(_check("shaped_train_sideband_fraction", frac, 0.999, frac >= 0.999))

    worst = 0
    for cfg in (LinkConfig(16, 128, 2, Signaling.BIPOLAR, Detection.COHERENT, psf_length=psf.length, allow_overlap=True),
                LinkConfig(16, 128, 4, Signaling.UNIPOLAR, Detection.COHERENT, psf_length=psf.length, allow_overlap=True),
                cfg):
        bits = rng.integers(0, 2, 512 * cfg.bits_per_symbol, dtype=np.int8)
        x_g, x_h = shape(symbols_to_train(bits_to_symbols(bits, cfg), cfg), psf)
        if cfg.detection is Detection.COHERENT:
            out_ = receive_coherent(channel_coherent(x_g, x_h, ChannelSpec()), psf)
        else:
            out_ = receive_noncoherent(*channel_noncoherent(x_g, x_h, ChannelSpec(phase=1.0)), psf)
        worst += int(np.count_nonzero(symbols_to_bits(detect(out_, cfg, 512), cfg) != bits))
    out.append(_check("noiseless_round_trip_bit_errors", worst, 0, worst == 0))
    return out


def run_invariants(psf) -> list[dict]:
    return _analytic_checks() + _psf_checks(psf)


def cmd_verify(args) -> int:
    psf = _load_psf(args.psf)
    report = run_invariants(psf)
    for item in report:
        status = "PASS" if item["passed"] else "FAIL"
        print(f"{status}  {item['name']:<34} {item['value']:.4g}  (threshold {item['threshold']:.4g})")
    if args.json:
        Path(args.json).write_text(json.dumps({"invariants": report}, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK if all(item["passed"] for item in report) else EXIT_FAIL


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aspm", description="Aggregate spread pulse modulation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design-psf", help="design a constant-envelope SSB shaping filter pair")
    d.add_argument("--length", type=int, required=True)
    d.add_argument("--refine-iters", type=int, required=True)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_design_psf)

    a = sub.add_parser("analyze", help="closed-form BER curve as CSV")
    a.add_argument("--mode", choices=MODES, required=True)
    a.add_argument("--M", type=int)
    a.add_argument("--axis", choices=tuple(AXIS_KEYS), required=True)
    a.add_argument("--range", required=True, help="start:stop:step, inclusive")
    a.add_argument("--Np", type=int)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="Monte Carlo BER sweep as CSV")
    s.add_argument("--config", required=True, help="LinkConfig JSON")
    s.add_argument("--psf", help="PSF JSON (default: shipped L = 256 design)")
    s.add_argument("--axis", choices=tuple(AXIS_KEYS), required=True)
    s.add_argument("--range", required=True, help="start:stop:step, inclusive")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--min-errors", type=_count, default=100)
    s.add_argument("--max-bits", type=_count, default=10 ** 8)
    s.add_argument("--threads", type=int)
    s.add_argument("--symbols-per-frame", type=_count, default=512)
    s.add_argument("--reference", choices=("ideal", "transmitted"), default="ideal")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--psf")
    v.add_argument("--json")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except Exception as exc:  # simulation or numerical failure
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
