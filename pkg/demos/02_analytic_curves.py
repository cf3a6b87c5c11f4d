"""Closed-form BER of M-ary ASPM.

Prints the uncoded BER against E_b/N_0 for the three detector variants and
a few alphabet sizes, then the spreading factor each configuration implies.
The same numbers are available as CSV from ``aspm analyze``.
"""

import numpy as np

from aspm import analytics as an

ebn0_db = np.arange(0.0, 15.0, 2.0)
header = "Eb/N0 dB " + "".join(f"{x:>10.0f}" for x in ebn0_db)

for title, f in (("noncoherent", an.ber_noncoherent),
                 ("coherent, bipolar", an.ber_coherent),
                 ("coherent, unipolar", an.ber_coherent_unipolar)):
    print(f"\n{title}\n{header}")
    for M in (2, 4, 16, 256):
        row = [f(an.convert(M, ebn0_db=x), M) for x in ebn0_db]
        print(f"M={M:<6} " + "".join(f"{b:10.2e}" for b in row))

# Larger alphabets need less energy per bit. They pay for it in bandwidth
# through the spreading factor B / f_b = Np / (2 log2 M).
print("\nspreading factor for Np = 128 and 256")
for M in (2, 4, 16, 256):
    print(f"M={M:<6} {an.spreading_factor(M, 128):6.2f} {an.spreading_factor(M, 256):6.2f}")

# The unipolar detector spends its polarity bit on extra positions; the
# loss against bipolar signalling shrinks, in relative terms, as M grows.
print("\nunipolar / bipolar BER at mu = 4")
for M in (16, 256, 1024, 4096):
    print(f"M={M:<6} {an.ber_coherent_unipolar(32.0, M) / an.ber_coherent(32.0, M):.3f}")
