"""One burst through the whole link.

Bits become pulse positions, the sparse train is spread by the filter
pair, the channel rotates and adds noise, and the matched filter plus
peak picking recovers the bits.
"""

import numpy as np

from aspm.analytics import ber_noncoherent
from aspm.coding import LinkConfig, bits_to_symbols, symbols_to_bits, symbols_to_train
from aspm.detection import detect
from aspm.link import ChannelSpec, calibrate_noise, channel_noncoherent, receive_noncoherent, shape
from aspm.shaping import compute_papr, default_psf

psf = default_psf()
config = LinkConfig(16, 512, 4, "unipolar", "noncoherent")
rng = np.random.default_rng(1)

# %% Transmitter
bits = rng.integers(0, 2, 4 * 2000, dtype=np.int8)
symbols = bits_to_symbols(bits, config)
train = symbols_to_train(symbols, config)
x_g, x_h = shape(train, psf)
print("first symbols (1-based positions):", symbols.positions[:8])
print(f"train: {train.length} samples, {train.n_pulses} pulses")
print(f"PAPR before shaping {compute_papr(train.dense()):.1f} dB, after {compute_papr(x_g + 1j * x_h):.2f} dB")

# %% Channel and receiver
# The noncoherent receiver does not know the carrier phase.
for lam in (6.0, 10.0, 14.0):
    sigma = calibrate_noise(config, psf, lam=lam).sigma
    I, Q = channel_noncoherent(x_g, x_h, ChannelSpec(sigma=sigma, random_phase=True), rng)
    decided = detect(receive_noncoherent(I, Q, psf), config, len(symbols))
    rx = symbols_to_bits(decided, config)
    print(f"lambda {lam:5.1f}: BER {np.mean(rx != bits):.4f}   closed form {ber_noncoherent(lam, 16):.4f}")
