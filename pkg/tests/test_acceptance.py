"""Acceptance gates, each at its stated tolerance and runtime budget.

Every test emits a ``criterion N: PASS|FAIL`` line (repeated in the pytest
terminal summary) before asserting.
"""

import math
import time

import numpy as np
import pytest

from aspm import analytics as an
from aspm.coding import LinkConfig, bits_to_symbols, symbols_to_bits, symbols_to_train
from aspm.detection import detect
from aspm.harness import SweepSpec, empirical_lambda, lambda_for_ber, run_sweep
from aspm.link import (ChannelSpec, calibrate_noise, channel_noncoherent, receive_noncoherent, shape)
from aspm.shaping import acf_diagnostics, acf_error, design_psf, hilbert_pair_error


def verdict(report, n, ok, elapsed, budget, detail):
    ok_time = elapsed < budget
    status = "PASS" if ok and ok_time else "FAIL"
    report(f"criterion {n}: {status}  ({elapsed:.2f} s of {budget:g} s)  {detail}")
    return ok and ok_time


def test_criterion_1_binary_reductions(report):
    t0 = time.perf_counter()
    worst = 0.0
    for g in np.arange(0.5, 32.5, 0.5):
        p = an.convert(2, ebn0=g)
        worst = max(worst,
                    abs(an.ber_coherent(p, 2) / (0.5 * math.erfc(math.sqrt(g))) - 1),
                    abs(an.ber_noncoherent(p, 2) / (0.5 * math.exp(-g / 2)) - 1))
    ok = worst <= 1e-12
    assert verdict(report, 1, ok, time.perf_counter() - t0, 1, f"max relative error {worst:.2e} (limit 1e-12)")


def test_criterion_2_arrival_integral(report):
    t0 = time.perf_counter()
    worst = max(abs(an.arrival_time_probability(0.0, M) - 2.0 / M) for M in (4, 16, 64, 256))
    ok = worst <= 1e-9
    assert verdict(report, 2, ok, time.perf_counter() - t0, 1, f"max |P - 2/M| {worst:.2e} (limit 1e-9)")


def test_criterion_3_zero_snr(report):
    t0 = time.perf_counter()
    worst = 0.0
    for M in (2, 4, 16, 256, 4096):
        for f in (an.ber_coherent, an.ber_noncoherent, an.ber_coherent_unipolar):
            worst = max(worst, abs(f(0.0, M) - 0.5))
    for mode in ("coherent", "noncoherent"):
        worst = max(worst, abs(an.ber_binary(0.0, mode) - 0.5))
    ok = worst <= 1e-6
    assert verdict(report, 3, ok, time.perf_counter() - t0, 5, f"max |P_b - 1/2| {worst:.2e} (limit 1e-6)")


def test_criterion_4_appendix_identity(report):
    t0 = time.perf_counter()
    worst = max(an.verify_appendix_identity(lam, k)[2] for k in range(1, 9) for lam in (0.0, 1.0, 4.0, 16.0))
    ok = worst <= 1e-8
    assert verdict(report, 4, ok, time.perf_counter() - t0, 10, f"max abs error {worst:.2e} (limit 1e-8)")


def test_criterion_5_sum_vs_integral(report):
    t0 = time.perf_counter()
    worst = 0.0
    for M in (2, 4, 8, 16):
        for lam in (1.0, 4.0, 16.0, 64.0):
            s = an.ser_noncoherent(lam, M, "sum")
            i = an.ser_noncoherent(lam, M, "integral")
            worst = max(worst, abs(i / s - 1))
    ok = worst <= 1e-10
    assert verdict(report, 5, ok, time.perf_counter() - t0, 10, f"max relative gap {worst:.2e} (limit 1e-10)")


FIG7_CURVES = [
    ("coherent", 128, LinkConfig(16, 128, 2, allow_overlap=True)),
    ("coherent", 256, LinkConfig(16, 256, 2, allow_overlap=True)),
    ("noncoherent", 128, LinkConfig(16, 128, 4, "unipolar", "noncoherent", allow_overlap=True)),
    ("noncoherent", 256, LinkConfig(16, 256, 4, "unipolar", "noncoherent", allow_overlap=True)),
]
# bit errors per point; well above the required 100 so the band test has power
FIG7_MIN_ERRORS = 400


def test_criterion_6_simulation_matches_theory(report, psf):
    t0 = time.perf_counter()
    failures = []
    for mode, Np, cfg in FIG7_CURVES:
        lams = [lambda_for_ber(cfg, t) for t in np.geomspace(1e-1, 1e-3, 5)]
        snr_db = [10 * math.log10(lam / Np) for lam in lams]
        curve = run_sweep(SweepSpec(cfg, "snr_db", snr_db, min_errors=FIG7_MIN_ERRORS, seed=0), psf)
        for pt in curve.points:
            ok = pt.within_band() and not pt.flagged and pt.errors >= 100
            bit_sigma = math.sqrt(pt.ber_analytic * (1 - pt.ber_analytic) / pt.bits)
            report(f"  {mode:<11} Np={Np} snr={pt.axis_value:7.3f} dB  sim={pt.ber:.4e}  "
                   f"analytic={pt.ber_analytic:.4e}  ratio={pt.ber / pt.ber_analytic:.3f}  "
                   f"errors={pt.errors}  dev={(pt.ber - pt.ber_analytic) / (pt.band() / 3):+.2f} sigma "
                   f"(bit-level {(pt.ber - pt.ber_analytic) / bit_sigma:+.2f})  {'ok' if ok else 'OUT'}")
            if not ok:
                failures.append(f"{mode}/Np={Np}@{pt.axis_value:.2f}dB")
    detail = "all 20 points inside the 3-sigma band" if not failures else f"outside band: {', '.join(failures)}"
    assert verdict(report, 6, not failures, time.perf_counter() - t0, 15 * 60, detail)


def test_criterion_7_ordering(report):
    t0 = time.perf_counter()
    gaps = [an.ber_coherent_unipolar(2 * mu * mu, M) - an.ber_coherent(2 * mu * mu, M)
            for mu in (1, 2, 3, 4) for M in (4, 16, 64)]
    bers = [an.ber_noncoherent(an.convert(2 ** k, ebn0=10.0), 2 ** k) for k in range(1, 13)]
    ok = min(gaps) > 0 and all(b < a for a, b in zip(bers, bers[1:]))
    assert verdict(report, 7, ok, time.perf_counter() - t0, 5,
                   f"min unipolar-bipolar gap {min(gaps):.2e}; noncoherent BER at gamma_b=10 from "
                   f"{bers[0]:.2e} (M=2) to {bers[-1]:.2e} (M=4096)")


def test_criterion_8_psf_quality(report):
    t0 = time.perf_counter()
    designed = design_psf(256)
    diag = acf_diagnostics(designed)
    err = acf_error(designed)
    ssb = hilbert_pair_error(designed)
    lags = np.arange(4, 256, 4)
    v2 = max(float(diag.v2[diag.at(k)]) for k in np.concatenate([lags, -lags]))
    gap = diag.papr_designed_db - diag.papr_shaped_db
    checks = {"acf": err <= 2e-2, "ssb": ssb <= 1e-3, "v2": v2 <= 1e-2, "papr": gap >= 10.0}
    failed = [k for k, v in checks.items() if not v]
    assert verdict(report, 8, not failed, time.perf_counter() - t0, 10,
                   f"acf error {err:.4f} (<= 0.02), negative-frequency energy {ssb:.2e} (<= 1e-3), "
                   f"max v2[4j] {v2:.4f} (<= 0.01), PAPR reduction {gap:.2f} dB (>= 10)"
                   + (f"; failed: {', '.join(failed)}" if failed else ""))


def test_criterion_9_calibration(report, psf):
    t0 = time.perf_counter()
    notes, ok = [], True

    # empirical lambda for every receiver at two targets
    for cfg in (LinkConfig(16, 512, 2), LinkConfig(16, 512, 4, "unipolar", "noncoherent")):
        for lam in (16.0, 64.0):
            measured = empirical_lambda(cfg, calibrate_noise(cfg, psf, lam=lam).sigma, 10 ** 6, psf)
            rel = measured / lam - 1
            ok &= abs(rel) <= 0.01
            notes.append(f"{cfg.detection.value} lam={lam:g}: {rel:+.3%}")

    # noise-only noncoherent statistic is chi-square with two degrees of freedom
    n, sigma = 10 ** 6, 0.8
    zeros = np.zeros(n + psf.length - 1)
    I, Q = channel_noncoherent(zeros, zeros, ChannelSpec(sigma=sigma), np.random.default_rng(9))
    y = receive_noncoherent(I, Q, psf).y[psf.length - 1:n + psf.length - 1]
    z = y / (sigma ** 2 * (psf.taps_g @ psf.taps_g + psf.taps_h @ psf.taps_h))
    ok &= abs(z.mean() / 2 - 1) <= 0.01 and abs(z.var() / 4 - 1) <= 0.03
    notes.append(f"y2/sigma_n2 mean {z.mean():.4f} var {z.var():.4f}")

    # decisions do not depend on the demodulator phase
    cfg = LinkConfig(16, 512, 4, "unipolar", "noncoherent")
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, 400 * 4, dtype=np.int8)
    x_g, x_h = shape(symbols_to_train(bits_to_symbols(bits, cfg), cfg), psf)
    sigma = calibrate_noise(cfg, psf, lam=lambda_for_ber(cfg, 1e-2)).sigma
    I, Q = channel_noncoherent(x_g, x_h, ChannelSpec(sigma=sigma, phase=0.7), rng)
    ref = detect(receive_noncoherent(I, Q, psf), cfg, 400)
    changed = 0
    clean_errors = 0
    for phi in np.linspace(0.0, 2 * math.pi, 13):
        rot = (I + 1j * Q) * np.exp(-1j * phi)
        dec = detect(receive_noncoherent(rot.real, rot.imag, psf), cfg, 400)
        changed += int(np.count_nonzero(dec.positions != ref.positions))
        Ic, Qc = channel_noncoherent(x_g, x_h, ChannelSpec(phase=phi))
        clean = symbols_to_bits(detect(receive_noncoherent(Ic, Qc, psf), cfg, 400), cfg)
        clean_errors += int(np.count_nonzero(clean != bits))
    ok &= changed == 0 and clean_errors == 0
    notes.append(f"phase sweep: {changed} changed decisions, {clean_errors} noiseless errors")
    assert verdict(report, 9, ok, time.perf_counter() - t0, 60, "; ".join(notes))


def test_criterion_10_determinism(report, psf):
    t0 = time.perf_counter()
    cfg = LinkConfig(16, 128, 4, "unipolar", "noncoherent", allow_overlap=True)
    values = [10 * math.log10(lambda_for_ber(cfg, t) / 128) for t in (1e-1, 1e-2)]
    texts = [run_sweep(SweepSpec(cfg, "snr_db", values, min_errors=200, seed=7, threads=k), psf).to_csv()
             for k in (1, 8)]
    ok = texts[0] == texts[1]
    assert verdict(report, 10, ok, time.perf_counter() - t0, 120,
                   f"CSV at 1 and 8 threads {'byte-identical' if ok else 'DIFFERENT'} ({len(texts[0])} bytes)")
