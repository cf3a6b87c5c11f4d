import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aspm.coding import (ConfigError, Detection, LinkConfig, Signaling, SymbolStream, bits_to_symbols,
                         symbols_to_bits, symbols_to_train)


def bipolar16(n=2, Np=512):
    return LinkConfig(16, Np, n, Signaling.BIPOLAR, Detection.COHERENT)


def unipolar16(n=4, Np=512):
    return LinkConfig(16, Np, n, Signaling.UNIPOLAR, Detection.NONCOHERENT)


class TestLinkConfig:
    def test_rates(self):
        cfg = bipolar16()
        assert cfg.bits_per_symbol == 4
        assert cfg.pulse_rate(fs=1024.0) == 2.0
        assert cfg.bit_rate(fs=1024.0) == 8.0

    @pytest.mark.parametrize("Np, sf", [(128, 16.0), (256, 32.0)])
    def test_spreading_factor(self, Np, sf):
        cfg = LinkConfig(16, Np, 2, allow_overlap=True)
        assert cfg.spreading_factor == sf

    def test_position_table(self):
        cfg = unipolar16()
        np.testing.assert_array_equal(cfg.offsets, np.arange(16) * 4)
        assert len(set(cfg.offsets.tolist())) == cfg.n_positions
        assert bipolar16().n_positions == 8

    @pytest.mark.parametrize("M", [0, 1, 3, 12])
    def test_bad_alphabet(self, M):
        with pytest.raises(ConfigError):
            LinkConfig(M, 512, 2)

    def test_spacing_minimum(self):
        with pytest.raises(ConfigError):
            LinkConfig(16, 512, 1)
        with pytest.raises(ConfigError):
            LinkConfig(16, 512, 3, Signaling.UNIPOLAR, Detection.NONCOHERENT)

    def test_noncoherent_needs_unipolar(self):
        with pytest.raises(ConfigError):
            LinkConfig(16, 512, 4, Signaling.BIPOLAR, Detection.NONCOHERENT)

    def test_overlap_rule(self):
        with pytest.raises(ConfigError):
            LinkConfig(16, 256, 2)
        assert LinkConfig(16, 256, 2, allow_overlap=True).Np == 256
        # Np must exceed psf_length + max offset strictly
        LinkConfig(16, 256 + 14 + 1, 2)

    def test_offsets_must_fit_frame(self):
        with pytest.raises(ConfigError):
            LinkConfig(16, 60, 4, Signaling.UNIPOLAR, Detection.NONCOHERENT, allow_overlap=True)

    def test_dict_round_trip(self):
        cfg = unipolar16(Np=400)
        assert LinkConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            LinkConfig.from_dict({**bipolar16().to_dict(), "bogus": 1})


class TestBitMapping:
    def test_bipolar_example(self):
        cfg = bipolar16(n=3)
        sym = bits_to_symbols([1, 0, 1, 1], cfg)
        train = symbols_to_train(sym, cfg)
        assert train.indices[0] - cfg.guard == 5 * cfg.n
        assert train.amplitudes[0] == -1.0

    def test_unipolar_example(self):
        cfg = unipolar16()
        train = symbols_to_train(bits_to_symbols([1, 1, 1, 1], cfg), cfg)
        assert train.indices[0] - cfg.guard == 15 * cfg.n
        assert train.amplitudes[0] == 1.0

    def test_binary_is_equidistant(self):
        cfg = LinkConfig(2, 300, 2)
        bits = np.array([0, 1, 1, 0, 1])
        train = symbols_to_train(bits_to_symbols(bits, cfg), cfg)
        np.testing.assert_array_equal(np.diff(train.indices), 300)
        np.testing.assert_array_equal(train.amplitudes, (-1.0) ** bits)

    def test_inverse_example(self):
        bits = symbols_to_bits(SymbolStream([6], [1]), bipolar16())
        np.testing.assert_array_equal(bits, [1, 0, 1, 1])

    def test_out_of_range_symbol(self):
        with pytest.raises(ValueError):
            symbols_to_bits(SymbolStream([17], [0]), unipolar16())
        with pytest.raises(ValueError):
            symbols_to_bits(SymbolStream([1], [1]), unipolar16())

    def test_non_binary_input(self):
        with pytest.raises(ValueError):
            bits_to_symbols([0, 2, 1, 1], bipolar16())

    @pytest.mark.parametrize("M, sig", [(2, "bipolar"), (16, "bipolar"), (16, "unipolar"), (64, "unipolar")])
    def test_round_trip(self, M, sig, rng):
        det = "coherent"
        cfg = LinkConfig(M, 1024, 4, sig, det)
        bits = rng.integers(0, 2, 10_000)
        np.testing.assert_array_equal(symbols_to_bits(bits_to_symbols(bits, cfg), cfg), bits)

    @settings(max_examples=60)
    @given(st.lists(st.integers(0, 1), max_size=70), st.sampled_from([2, 4, 8, 16, 32]), st.booleans())
    def test_round_trip_with_padding(self, bits, M, bipolar):
        cfg = LinkConfig(M, 2048, 4, "bipolar" if bipolar else "unipolar", "coherent")
        sym = bits_to_symbols(bits, cfg)
        assert sym.pad == (-len(bits)) % cfg.bits_per_symbol
        np.testing.assert_array_equal(symbols_to_bits(sym, cfg), np.asarray(bits, dtype=np.int8))

    def test_bit_count_bookkeeping(self, rng):
        cfg = unipolar16()
        sym = bits_to_symbols(rng.integers(0, 2, 400), cfg)
        assert len(sym) * cfg.bits_per_symbol == 400


class TestTrain:
    def test_empty(self):
        cfg = bipolar16()
        train = symbols_to_train(SymbolStream([], []), cfg)
        assert train.n_pulses == 0
        assert train.length == 2 * cfg.Np + cfg.psf_length
        assert not train.dense().any()

    def test_single_symbol(self):
        cfg = LinkConfig(16, 128, 2, allow_overlap=True)
        train = symbols_to_train(SymbolStream([1], [0]), cfg)
        np.testing.assert_array_equal(train.indices, [cfg.guard])
        np.testing.assert_array_equal(train.amplitudes, [1.0])

    def test_spacing_bounds(self):
        cfg = LinkConfig(16, 128, 2, allow_overlap=True)
        train = symbols_to_train(SymbolStream([1, 3, 6], [0, 0, 0]), cfg)
        gaps = np.diff(train.indices)
        assert np.all(gaps >= cfg.Np - 5 * cfg.n) and np.all(gaps <= cfg.Np + 5 * cfg.n)

    @settings(max_examples=40)
    @given(st.lists(st.integers(1, 16), min_size=1, max_size=40))
    def test_frame_offsets_multiple_of_n(self, positions):
        cfg = unipolar16()
        train = symbols_to_train(SymbolStream(positions, np.zeros(len(positions))), cfg)
        rel = train.indices - cfg.guard - np.arange(len(positions)) * cfg.Np
        assert np.all(rel % cfg.n == 0)
        assert np.all(np.diff(train.indices) > 0)
        assert np.all(np.diff(train.indices) >= cfg.Np - cfg.max_offset)
