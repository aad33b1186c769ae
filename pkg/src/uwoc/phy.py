"""Transmit/receive signal processing for the conjugate-symmetric OFDM link.

The transmitter maps coded bits to Gray QPSK, spreads each symbol over
``n_freq`` subcarrier slots and ``n_time`` consecutive data OFDM symbols with
Hadamard chips, and places the chips on a 32-point Hermitian-loaded OFDM grid
(bins 0 and 16 nulled, bins 1..15 data, 31..17 conjugates) so the time-domain
signal is real and suits intensity modulation.  Frames interlace pilot and
data symbols one-for-one.

The receiver strips the cyclic prefix, takes the DFT, averages each data bin
with the conjugate of its mirror, least-squares-estimates the channel from
the most recent pilot symbol, combines detectors by maximum ratio, equalizes
(MMSE by default, ZF optionally), despreads, and emits exact Gray-QPSK LLRs.

All transforms accept leading batch dimensions; the documented shapes are
for a single frame.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

DEFAULT_PILOT_SEED = 20107

SQRT2 = np.sqrt(2.0)


# ---------------------------------------------------------------------------
# OFDM numerology


@dataclass(frozen=True)
class OfdmParams:
    """OFDM numerology; defaults give 340 ns symbols at 100 MHz sampling."""

    fft_size: int = 32
    cp_samples: int = 2
    sample_rate_hz: float = 1.0e8
    frame_symbols: int = 160       # alternating pilot/data
    pilot_seed: int = DEFAULT_PILOT_SEED

    def __post_init__(self):
        if self.fft_size < 4 or self.fft_size & (self.fft_size - 1):
            raise ContractError("fft_size must be a power of two >= 4")
        if self.cp_samples < 1:
            raise ContractError("cp_samples must be >= 1")
        if self.frame_symbols < 2 or self.frame_symbols % 2:
            raise ContractError("frame_symbols must be a positive even count")
        if self.sample_rate_hz <= 0:
            raise ContractError("sample_rate_hz must be positive")

    @property
    def data_pairs(self) -> int:
        """Unconstrained complex pairs per symbol (bins 0 and N/2 nulled)."""
        return self.fft_size // 2 - 1

    @property
    def n_subcarriers(self) -> int:
        """Subcarrier count used in throughput reporting."""
        return self.fft_size

    @property
    def samples_per_symbol(self) -> int:
        return self.fft_size + self.cp_samples

    @property
    def symbol_period_s(self) -> float:
        return self.samples_per_symbol / self.sample_rate_hz

    @property
    def data_symbols_per_frame(self) -> int:
        return self.frame_symbols // 2

    @property
    def tx_scale(self) -> float:
        """Time-domain scale giving unit average sample power at full load."""
        return self.fft_size / np.sqrt(2.0 * self.data_pairs)


@dataclass
class FrameWaveform:
    """Sampled waveform of one frame (or a slice of one) per stream.

    ``samples`` is (n_streams, n_symbols * samples_per_symbol); transmit
    waveforms are real, received ones complex.  ``first_data_symbol`` is the
    OFDM-symbol offset of the first data symbol within ``samples`` (1 for a
    full interlaced frame, 0 for a stored data-symbol capture).
    """

    samples: np.ndarray
    first_data_symbol: int = 1

    def n_symbols(self, ofdm: OfdmParams) -> int:
        return self.samples.shape[-1] // ofdm.samples_per_symbol

    def data_symbol_samples(self, ofdm: OfdmParams, index: int = 0) -> np.ndarray:
        """Samples of the index-th data symbol (data symbols alternate)."""
        sym = self.first_data_symbol + 2 * index
        if not 0 <= sym < self.n_symbols(ofdm):
            raise ContractError(f"waveform holds no data symbol {index}")
        spp = ofdm.samples_per_symbol
        return self.samples[..., sym * spp:(sym + 1) * spp]


# ---------------------------------------------------------------------------
# Spreading


def hadamard(order: int) -> np.ndarray:
    """Sylvester Hadamard matrix of the given power-of-two order."""
    if order < 1 or order & (order - 1):
        raise ContractError("Hadamard order must be a power of two")
    h = np.array([[1]], dtype=np.int64)
    while h.shape[0] < order:
        h = np.block([[h, h], [h, -h]])
    return h


@dataclass(frozen=True)
class SpreadingSpec:
    """Time-frequency spreading: code lengths and Hadamard row indices."""

    n_freq: int = 1
    n_time: int = 1
    freq_code_index: int = 0
    time_code_index: int = 0

    def __post_init__(self):
        for n, idx, label in ((self.n_freq, self.freq_code_index, "freq"),
                              (self.n_time, self.time_code_index, "time")):
            if n < 1 or n & (n - 1):
                raise ContractError(f"{label} spreading length must be a power of two")
            if not 0 <= idx < n:
                raise ContractError(f"{label} code index out of range")

    @property
    def factor(self) -> int:
        return self.n_freq * self.n_time

    @property
    def freq_code(self) -> np.ndarray:
        return hadamard(self.n_freq)[self.freq_code_index].astype(float)

    @property
    def time_code(self) -> np.ndarray:
        return hadamard(self.n_time)[self.time_code_index].astype(float)


def spread_capacity(spec: SpreadingSpec, ofdm: OfdmParams) -> int:
    """Constellation symbols that fit one frame after spreading.

    Data symbols are grouped into blocks of ``n_time``; each block offers the
    per-symbol pair slots as chip columns, and every constellation symbol
    consumes ``n_freq`` consecutive columns in row-major block order.
    """
    n_data = ofdm.data_symbols_per_frame
    if n_data % spec.n_time:
        raise ContractError("time spreading length must divide the data symbol count")
    n_columns = (n_data // spec.n_time) * ofdm.data_pairs
    return n_columns // spec.n_freq


def tf_spread(symbols: np.ndarray, spec: SpreadingSpec) -> np.ndarray:
    """Spread (..., n) symbols to chips of shape (..., n_time, n * n_freq)."""
    symbols = np.asarray(symbols)
    fchips = (symbols[..., :, None] * spec.freq_code).reshape(
        symbols.shape[:-1] + (symbols.shape[-1] * spec.n_freq,))
    return spec.time_code[:, None] * fchips[..., None, :]


def tf_despread(chips: np.ndarray, spec: SpreadingSpec) -> np.ndarray:
    """Matched despreading; exact inverse of :func:`tf_spread` on its image.

    ``chips`` has shape (..., n_time, m) with m a multiple of n_freq; the
    result is the (..., m / n_freq) symbol estimate, code-matched and scaled
    by 1 / (n_freq * n_time).
    """
    chips = np.asarray(chips)
    m = chips.shape[-1]
    if chips.shape[-2] != spec.n_time or m % spec.n_freq:
        raise ContractError("chip array shape does not match the spreading spec")
    collapsed = np.einsum("t,...tm->...m", spec.time_code, chips)
    grouped = collapsed.reshape(chips.shape[:-2] + (m // spec.n_freq, spec.n_freq))
    return grouped @ spec.freq_code / spec.factor


def place_chips(chips: np.ndarray, spec: SpreadingSpec,
                ofdm: OfdmParams) -> np.ndarray:
    """Place (..., n_time, m) chips onto the (..., data_symbols, pairs) grid.

    Unused trailing columns are zero-filled.  Within a block of ``n_time``
    consecutive data symbols, chip row j lands on the block's j-th symbol.
    """
    chips = np.asarray(chips)
    n_data = ofdm.data_symbols_per_frame
    pairs = ofdm.data_pairs
    n_blocks = n_data // spec.n_time
    m = chips.shape[-1]
    if chips.shape[-2] != spec.n_time or m > n_blocks * pairs:
        raise ContractError("chips exceed the frame chip capacity")
    lead = chips.shape[:-2]
    full = np.zeros(lead + (spec.n_time, n_blocks * pairs), dtype=complex)
    full[..., :m] = chips
    grid = full.reshape(lead + (spec.n_time, n_blocks, pairs))
    grid = np.swapaxes(grid, -3, -2)
    return grid.reshape(lead + (n_data, pairs))


def gather_chips(grid: np.ndarray, spec: SpreadingSpec,
                 ofdm: OfdmParams) -> np.ndarray:
    """Inverse of :func:`place_chips`: (..., data_symbols, pairs) -> chips."""
    grid = np.asarray(grid)
    n_data = ofdm.data_symbols_per_frame
    pairs = ofdm.data_pairs
    n_blocks = n_data // spec.n_time
    lead = grid.shape[:-2]
    blocks = grid.reshape(lead + (n_blocks, spec.n_time, pairs))
    blocks = np.swapaxes(blocks, -3, -2)
    return blocks.reshape(lead + (spec.n_time, n_blocks * pairs))


# ---------------------------------------------------------------------------
# QPSK


def qpsk_map(bits: np.ndarray) -> np.ndarray:
    """Gray-map bit pairs to unit-energy QPSK; 00 -> (1 + 1j)/sqrt(2)."""
    bits = np.asarray(bits)
    if bits.shape[-1] % 2:
        raise ContractError("QPSK needs an even number of bits")
    pairs = bits.reshape(bits.shape[:-1] + (bits.shape[-1] // 2, 2))
    return ((1.0 - 2.0 * pairs[..., 0]) + 1j * (1.0 - 2.0 * pairs[..., 1])) / SQRT2


def qpsk_llr(symbols: np.ndarray, noise_var) -> np.ndarray:
    """Exact Gray-QPSK LLRs; positive means bit 0.

    ``noise_var`` is the total complex noise variance per symbol (scalar or
    broadcastable); the independent I/Q components give
    LLR = 2 sqrt(2) * component / noise_var.
    """
    symbols = np.asarray(symbols)
    noise_var = np.asarray(noise_var, dtype=float)
    if np.any(noise_var <= 0):
        raise ContractError("noise variance must be positive")
    scale = 2.0 * SQRT2 / noise_var
    llrs = np.stack([scale * symbols.real, scale * symbols.imag], axis=-1)
    return llrs.reshape(symbols.shape[:-1] + (2 * symbols.shape[-1],))


def qpsk_hard(symbols: np.ndarray) -> np.ndarray:
    """Hard bit decisions for Gray QPSK (inverse of qpsk_map sans noise)."""
    symbols = np.asarray(symbols)
    bits = np.stack([symbols.real < 0, symbols.imag < 0], axis=-1)
    return bits.reshape(symbols.shape[:-1] + (2 * symbols.shape[-1],)).astype(np.int8)


# ---------------------------------------------------------------------------
# OFDM modulation


def hermitian_load(pairs: np.ndarray, ofdm: OfdmParams) -> np.ndarray:
    """Build the conjugate-symmetric spectrum from (..., data_pairs) values."""
    pairs = np.asarray(pairs, dtype=complex)
    if pairs.shape[-1] != ofdm.data_pairs:
        raise ContractError(f"expected {ofdm.data_pairs} pair values")
    if not np.all(np.isfinite(pairs)):
        raise ContractError("pair values must be finite")
    n = ofdm.fft_size
    spec = np.zeros(pairs.shape[:-1] + (n,), dtype=complex)
    spec[..., 1:n // 2] = pairs
    spec[..., n // 2 + 1:] = np.conj(pairs[..., ::-1])
    return spec


def ofdm_modulate(pairs: np.ndarray, ofdm: OfdmParams) -> np.ndarray:
    """Pairs -> real time-domain symbol with cyclic prefix, (..., fft+cp).

    The Hermitian spectrum guarantees a real signal; the residual imaginary
    part is checked against 1e-12 of the RMS before the real cast.  Output is
    scaled so a fully loaded unit-energy constellation yields unit average
    sample power.
    """
    spec = hermitian_load(pairs, ofdm)
    body = np.fft.ifft(spec, axis=-1) * ofdm.tx_scale
    rms = np.sqrt(np.mean(np.abs(body) ** 2))
    if rms > 0 and np.max(np.abs(body.imag)) > 1e-12 * rms:
        raise ContractError("Hermitian loading failed to produce a real signal")
    body = body.real
    return np.concatenate([body[..., -ofdm.cp_samples:], body], axis=-1)


def ofdm_demodulate(samples: np.ndarray, ofdm: OfdmParams) -> np.ndarray:
    """Strip the cyclic prefix and DFT back to (..., fft_size) bins."""
    samples = np.asarray(samples)
    if samples.shape[-1] != ofdm.samples_per_symbol:
        raise ContractError(f"expected {ofdm.samples_per_symbol} samples per symbol")
    return np.fft.fft(samples[..., ofdm.cp_samples:], axis=-1) / ofdm.tx_scale


def symbol_from_bins(bins: np.ndarray, ofdm: OfdmParams) -> np.ndarray:
    """Inverse of :func:`ofdm_demodulate`; keeps complex content (RX side)."""
    bins = np.asarray(bins, dtype=complex)
    body = np.fft.ifft(bins * ofdm.tx_scale, axis=-1)
    return np.concatenate([body[..., -ofdm.cp_samples:], body], axis=-1)


def conj_combine(bins: np.ndarray, ofdm: OfdmParams) -> np.ndarray:
    """Average each data bin with the conjugate of its mirror bin.

    Returns (X[k] + conj(X[N-k])) / 2 for k = 1 .. N/2 - 1; halves the noise
    variance when the mirrored noises are independent.
    """
    bins = np.asarray(bins)
    n = ofdm.fft_size
    return (bins[..., 1:n // 2] + np.conj(bins[..., n // 2 + 1:][..., ::-1])) / 2.0


def pilot_pairs(ofdm: OfdmParams, seed: int = None) -> np.ndarray:
    """Fixed unit-magnitude QPSK pilot sequence known to the receiver."""
    if seed is None:
        seed = ofdm.pilot_seed
    rng = np.random.Generator(np.random.PCG64(seed))
    return qpsk_map(rng.integers(0, 2, 2 * ofdm.data_pairs))


def build_frame(data_grid: np.ndarray, pilot: np.ndarray,
                ofdm: OfdmParams) -> np.ndarray:
    """Assemble the transmit waveform: alternating pilot and data symbols.

    ``data_grid`` is (data_symbols_per_frame, data_pairs) complex; the same
    pilot occupies every even symbol slot.  Returns the real sample vector of
    length frame_symbols * (fft + cp).
    """
    data_grid = np.asarray(data_grid, dtype=complex)
    n_data = ofdm.data_symbols_per_frame
    if data_grid.shape != (n_data, ofdm.data_pairs):
        raise ContractError(
            f"data grid must be {(n_data, ofdm.data_pairs)}, got {data_grid.shape}")
    pilot_wave = ofdm_modulate(np.asarray(pilot, dtype=complex), ofdm)
    data_waves = ofdm_modulate(data_grid, ofdm)
    frame = np.empty((ofdm.frame_symbols, ofdm.samples_per_symbol))
    frame[0::2] = pilot_wave
    frame[1::2] = data_waves
    return frame.reshape(-1)


# ---------------------------------------------------------------------------
# Channel estimation and detection


def estimate_channel_ls(rx_pilot_bins: np.ndarray,
                        pilot: np.ndarray) -> np.ndarray:
    """Least-squares per-pair estimate H = Y / X from one pilot symbol."""
    pilot = np.asarray(pilot)
    if np.any(pilot == 0):
        raise ContractError("pilot bins must be nonzero")
    return np.asarray(rx_pilot_bins) / pilot


def detect(rx_bins: np.ndarray, h_est: np.ndarray, noise_var: float,
            mode: str = "mrc-mmse"):
    """Maximum-ratio combine detectors, then equalize each pair.

    ``rx_bins`` and ``h_est`` are (..., n_rx, n_pairs); combining runs over
    the detector axis.  Returns ``(symbols, noise_var_out, amplitude)`` where
    ``amplitude`` is the multiplicative bias on the true symbol (1 for ZF;
    G / (G + noise_var) for MMSE) and ``noise_var_out`` the variance of the
    additive noise in the equalized output.  A zero combined gain under ZF
    yields an erased symbol: value 0 with infinite variance (LLR 0).
    """
    rx_bins = np.asarray(rx_bins)
    h_est = np.asarray(h_est)
    if rx_bins.shape != h_est.shape:
        raise ContractError("rx bins and channel estimates must share a shape")
    if mode not in ("mrc-mmse", "mrc-zf"):
        raise ContractError(f"unknown detection mode {mode!r}")
    if mode == "mrc-mmse" and noise_var <= 0:
        raise ContractError("MMSE needs a positive noise variance")
    z = np.sum(np.conj(h_est) * rx_bins, axis=-2)
    gain = np.sum(np.abs(h_est) ** 2, axis=-2)
    if mode == "mrc-zf":
        with np.errstate(divide="ignore", invalid="ignore"):
            symbols = np.where(gain > 0, z / np.where(gain > 0, gain, 1.0), 0.0)
            var = np.where(gain > 0, noise_var / np.where(gain > 0, gain, 1.0), np.inf)
        return symbols, var, np.ones_like(gain)
    denom = gain + noise_var
    symbols = z / denom
    amplitude = gain / denom
    var = gain * noise_var / denom ** 2
    return symbols, var, amplitude
