"""Monte Carlo BER against the closed forms for 16-ASPM.

Sweeps both detection modes at Np = 128 and 256 over SNR points where the
analytic BER runs from 1e-1 to 1e-3, then prints simulated and analytic
values side by side. Pass a directory as the first argument to also write
one CSV per curve. ``ASPM_THREADS`` sets the worker count.
"""

import math
import sys
from pathlib import Path

import numpy as np

from aspm.coding import LinkConfig
from aspm.harness import SweepSpec, lambda_for_ber, run_sweep

out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else None

curves = {
    "coherent_np128": LinkConfig(16, 128, 2, allow_overlap=True),
    "coherent_np256": LinkConfig(16, 256, 2, allow_overlap=True),
    "noncoherent_np128": LinkConfig(16, 128, 4, "unipolar", "noncoherent", allow_overlap=True),
    "noncoherent_np256": LinkConfig(16, 256, 4, "unipolar", "noncoherent", allow_overlap=True),
}

for name, cfg in curves.items():
    snr_db = [10 * math.log10(lambda_for_ber(cfg, t) / cfg.Np) for t in np.geomspace(1e-1, 1e-3, 5)]
    curve = run_sweep(SweepSpec(cfg, "snr_db", snr_db, min_errors=200))
    print(f"\n{name}\n  SNR dB     simulated    analytic    ratio   errors")
    for pt in curve.points:
        print(f"  {pt.axis_value:7.2f}   {pt.ber:.3e}   {pt.ber_analytic:.3e}   {pt.ber / pt.ber_analytic:5.2f}"
              f"   {pt.errors}")
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
            curve.to_csv(fh)
