"""Transmitter and receiver chains: mapping, pulse shaping, framing, metrics.

Two transceivers are provided.  The Nyquist chain interpolates symbols
with ideal sinc pulses (a frequency-domain brick wall over the symbol
band), so each symbol instant carries exactly its constellation point.
The OFDM chain synthesizes blocks of subcarriers by inverse FFT with
zero-stuffed oversampling and no cyclic prefix.  Framing surrounds the
payload with a guard sized by the link's dispersion memory and zero-pads
to a power-of-two processing window.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcinv

from .errors import (
    GuardTooShortWarning,
    InvalidConfigError,
    UndefinedQFactorError,
    WindowMismatchError,
)
from .normcoord import PhysicalSignal

_QPSK_POINTS = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) / np.sqrt(2.0)

# 3-bit reflected Gray code in ascending level order
_GRAY3 = np.array([0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100])
_LEVELS8 = (2.0 * np.arange(8) - 7.0) / np.sqrt(42.0)
_GRAY3_TO_LEVEL = np.zeros(8, dtype=np.int64)
_GRAY3_TO_LEVEL[_GRAY3] = np.arange(8)

_FORMATS = {"qpsk": 2, "64qam": 6}


def constellation(fmt: str) -> np.ndarray:
    """Unit-average-power constellation indexed by the bit label."""
    if fmt == "qpsk":
        return _QPSK_POINTS.copy()
    if fmt == "64qam":
        labels = np.arange(64)
        i_lev = _GRAY3_TO_LEVEL[labels >> 3]
        q_lev = _GRAY3_TO_LEVEL[labels & 0b111]
        return _LEVELS8[i_lev] + 1j * _LEVELS8[q_lev]
    raise InvalidConfigError(f"unknown format {fmt!r}")


def bits_per_symbol(fmt: str) -> int:
    try:
        return _FORMATS[fmt]
    except KeyError:
        raise InvalidConfigError(f"unknown format {fmt!r}") from None


def map_bits(bits: np.ndarray, fmt: str) -> np.ndarray:
    """Gray-map a bit stream onto constellation symbols."""
    b = np.asarray(bits).astype(np.int64)
    if np.any((b != 0) & (b != 1)):
        raise InvalidConfigError("bits must be 0 or 1")
    k = bits_per_symbol(fmt)
    if len(b) % k:
        raise InvalidConfigError(f"bit count must be a multiple of {k}")
    groups = b.reshape(-1, k)
    labels = np.zeros(len(groups), dtype=np.int64)
    for j in range(k):
        labels = (labels << 1) | groups[:, j]
    if fmt == "qpsk":
        # label b0 b1: b0 flips the in-phase sign, b1 the quadrature sign
        return _QPSK_POINTS[labels]
    return constellation(fmt)[labels]


def demap_symbols(symbols: np.ndarray, fmt: str) -> np.ndarray:
    """Nearest-neighbor decision back to bits."""
    pts = constellation(fmt)
    s = np.asarray(symbols, dtype=np.complex128)
    idx = np.argmin(np.abs(s[:, None] - pts[None, :]), axis=1)
    k = bits_per_symbol(fmt)
    out = np.zeros((len(s), k), dtype=np.int64)
    for j in range(k):
        out[:, k - 1 - j] = (idx >> j) & 1
    return out.reshape(-1)


@dataclass(frozen=True)
class NyquistConfig:
    baud: float = 56e9
    symbols_per_packet: int = 256
    oversampling: int = 8

    def __post_init__(self):
        if self.baud <= 0 or self.symbols_per_packet < 1 or self.oversampling < 2:
            raise InvalidConfigError("bad Nyquist configuration")

    @property
    def sample_rate(self) -> float:
        return self.baud * self.oversampling

    @property
    def packet_duration(self) -> float:
        return self.symbols_per_packet / self.baud

    @property
    def bandwidth(self) -> float:
        return self.baud


@dataclass(frozen=True)
class OfdmConfig:
    ifft_size: int = 128
    active_subcarriers: int = 112
    symbol_duration: float = 2e-9
    num_symbols: int = 2
    oversampling: int = 8

    def __post_init__(self):
        if self.active_subcarriers > self.ifft_size:
            raise InvalidConfigError("active subcarriers exceed the IFFT size")
        if self.ifft_size < 2 or self.active_subcarriers < 1 or self.num_symbols < 1:
            raise InvalidConfigError("bad OFDM configuration")
        if self.symbol_duration <= 0 or self.oversampling < 2:
            raise InvalidConfigError("bad OFDM configuration")

    @property
    def samples_per_symbol(self) -> int:
        # oversampling is relative to the active band
        return self.oversampling * self.active_subcarriers

    @property
    def sample_rate(self) -> float:
        return self.samples_per_symbol / self.symbol_duration

    @property
    def packet_duration(self) -> float:
        return self.num_symbols * self.symbol_duration

    @property
    def bandwidth(self) -> float:
        return self.active_subcarriers / self.symbol_duration


def nyquist_modulate(symbols: np.ndarray, cfg: NyquistConfig) -> PhysicalSignal:
    """Ideal sinc superposition on the oversampled grid.

    Built as a brick-wall low-pass of the symbol impulse train: the train's
    spectrum repeats the symbol spectrum every baud interval, and keeping
    one central replica leaves the unique band-limited interpolant.  The
    waveform then equals each symbol exactly at its instant.
    """
    s = np.asarray(symbols, dtype=np.complex128)
    n_sym = len(s)
    if n_sym != cfg.symbols_per_packet:
        raise InvalidConfigError("symbol count does not match the packet size")
    ov = cfg.oversampling
    total = n_sym * ov
    train = np.zeros(total, dtype=np.complex128)
    train[::ov] = s
    spec = np.fft.fft(train)
    keep = np.zeros(total, dtype=bool)
    half = n_sym // 2
    keep[:half] = True
    keep[total - (n_sym - half):] = True
    wave = np.fft.ifft(np.where(keep, spec, 0.0)) * ov
    return PhysicalSignal(samples=wave, sample_interval=1.0 / cfg.sample_rate)


def nyquist_demodulate(sig: PhysicalSignal, cfg: NyquistConfig) -> np.ndarray:
    """Brick-wall filter back to the symbol band, then sample the instants."""
    ov = cfg.oversampling
    n_sym = cfg.symbols_per_packet
    total = n_sym * ov
    if len(sig.samples) != total:
        raise WindowMismatchError("waveform length does not match the packet")
    spec = np.fft.fft(sig.samples)
    keep = np.zeros(total, dtype=bool)
    half = n_sym // 2
    keep[:half] = True
    keep[total - (n_sym - half):] = True
    wave = np.fft.ifft(np.where(keep, spec, 0.0))
    return wave[::ov]


def ofdm_modulate(symbols: np.ndarray, cfg: OfdmConfig) -> PhysicalSignal:
    """Subcarrier synthesis with zero-stuffed spectral oversampling.

    Data occupy ``active_subcarriers`` centered bins (DC included, band
    edges zeroed); each OFDM symbol becomes ``samples_per_symbol`` time
    samples.  Scaling keeps unit data power mapping to unit waveform power.
    """
    s = np.asarray(symbols, dtype=np.complex128)
    n_act = cfg.active_subcarriers
    if len(s) != n_act * cfg.num_symbols:
        raise InvalidConfigError("symbol count does not match the OFDM packet")
    nsamp = cfg.samples_per_symbol
    blocks = s.reshape(cfg.num_symbols, n_act)
    spec = np.zeros((cfg.num_symbols, nsamp), dtype=np.complex128)
    half_lo = n_act // 2          # negative-frequency carriers
    half_hi = n_act - half_lo     # DC and positive-frequency carriers
    spec[:, :half_hi] = blocks[:, half_lo:]
    spec[:, nsamp - half_lo:] = blocks[:, :half_lo]
    wave = np.fft.ifft(spec, axis=1) * np.sqrt(nsamp**2 / n_act)
    return PhysicalSignal(samples=wave.reshape(-1), sample_interval=1.0 / cfg.sample_rate)


def ofdm_demodulate(sig: PhysicalSignal, cfg: OfdmConfig) -> np.ndarray:
    """FFT per symbol block and extraction of the active bins."""
    nsamp = cfg.samples_per_symbol
    n_act = cfg.active_subcarriers
    if len(sig.samples) != nsamp * cfg.num_symbols:
        raise WindowMismatchError("waveform length does not match the OFDM packet")
    blocks = sig.samples.reshape(cfg.num_symbols, nsamp)
    spec = np.fft.fft(blocks, axis=1) / np.sqrt(nsamp**2 / n_act)
    half_lo = n_act // 2
    half_hi = n_act - half_lo
    out = np.zeros((cfg.num_symbols, n_act), dtype=np.complex128)
    out[:, half_lo:] = spec[:, :half_hi]
    out[:, :half_lo] = spec[:, nsamp - half_lo:]
    return out.reshape(-1)


def dispersion_memory(bandwidth: float, beta2: float, length: float) -> float:
    """Temporal spread 2 pi B |beta2| L accumulated over the link."""
    return 2.0 * np.pi * bandwidth * abs(beta2) * length


@dataclass(frozen=True)
class BurstFrame:
    """One burst: payload symbols plus placement inside its window."""

    payload: np.ndarray           # reference symbols
    guard_time: float             # s
    window_size: int              # samples, power of two
    sample_rate: float            # Hz
    payload_start: int            # index of the first payload sample
    payload_len: int              # payload samples

    @property
    def payload_span(self) -> tuple[int, int]:
        return self.payload_start, self.payload_start + self.payload_len

    @property
    def burst_span(self) -> tuple[int, int]:
        """Payload plus guard region, centered like the payload."""
        guard = int(round(self.guard_time * self.sample_rate))
        lo = self.payload_start - guard // 2
        hi = self.payload_start + self.payload_len + (guard - guard // 2)
        return max(lo, 0), min(hi, self.window_size)


def frame_burst(
    payload_wave: PhysicalSignal,
    payload_symbols: np.ndarray,
    guard_time: float,
    window_size: int,
    min_guard: float | None = None,
    strict: bool = False,
) -> tuple[BurstFrame, PhysicalSignal]:
    """Center a payload waveform in a zero-padded processing window.

    The guard (half on each side) must absorb the link's dispersion
    memory; when ``min_guard`` is given and exceeds ``guard_time`` a
    warning is emitted, upgraded to an error with ``strict``.
    """
    if window_size < 2 or window_size & (window_size - 1):
        raise InvalidConfigError("window_size must be a power of two >= 2")
    if guard_time < 0:
        raise InvalidConfigError("guard_time must be >= 0")
    if min_guard is not None and guard_time < min_guard:
        msg = (
            f"guard {guard_time * 1e9:.3g} ns shorter than dispersion memory "
            f"{min_guard * 1e9:.3g} ns"
        )
        if strict:
            raise InvalidConfigError(msg)
        warnings.warn(msg, GuardTooShortWarning)
    n_pay = len(payload_wave.samples)
    rate = 1.0 / payload_wave.sample_interval
    n_burst = n_pay + int(round(guard_time * rate))
    if n_burst > window_size:
        raise WindowMismatchError(
            f"burst ({n_burst} samples) does not fit the window ({window_size})"
        )
    start = (window_size - n_pay) // 2
    wave = np.zeros(window_size, dtype=np.complex128)
    wave[start : start + n_pay] = payload_wave.samples
    frame = BurstFrame(
        payload=np.asarray(payload_symbols, dtype=np.complex128),
        guard_time=guard_time,
        window_size=window_size,
        sample_rate=rate,
        payload_start=start,
        payload_len=n_pay,
    )
    window = PhysicalSignal(samples=wave, sample_interval=payload_wave.sample_interval)
    return frame, window


def extract_burst(received: PhysicalSignal, frame: BurstFrame) -> PhysicalSignal:
    """Validate and return the windowed burst the frame describes."""
    if len(received.samples) != frame.window_size:
        raise WindowMismatchError("received window length does not match the frame")
    return received


def window_leak_fraction(received: PhysicalSignal, frame: BurstFrame) -> float:
    """Energy fraction that escaped the payload+guard region of the window."""
    lo, hi = frame.burst_span
    total = float(np.sum(np.abs(received.samples) ** 2))
    if total == 0.0:
        return 0.0
    inside = float(np.sum(np.abs(received.samples[lo:hi]) ** 2))
    return (total - inside) / total


def payload_waveform(window: PhysicalSignal, frame: BurstFrame) -> PhysicalSignal:
    """Trim the payload span back out of a processing window."""
    lo, hi = frame.payload_span
    return PhysicalSignal(
        samples=window.samples[lo:hi],
        sample_interval=window.sample_interval,
        t_start=window.t_start + lo * window.sample_interval,
    )


def evm(rx_symbols: np.ndarray, ref_symbols: np.ndarray) -> float:
    """Error vector magnitude after one complex least-squares gain.

    The received symbols are scaled by the single complex g minimizing
    sum |g rx - ref|^2, then EVM = sqrt(sum |g rx - ref|^2 / sum |ref|^2).
    Insensitive to any common complex gain of the receiver chain.
    """
    rx = np.asarray(rx_symbols, dtype=np.complex128)
    ref = np.asarray(ref_symbols, dtype=np.complex128)
    if rx.shape != ref.shape or len(rx) == 0:
        raise InvalidConfigError("symbol arrays must be nonempty and congruent")
    ref_energy = float(np.sum(np.abs(ref) ** 2))
    if ref_energy == 0.0:
        raise InvalidConfigError("reference symbols have zero energy")
    rx_energy = float(np.sum(np.abs(rx) ** 2))
    if rx_energy == 0.0:
        return 1.0
    g = np.sum(ref * np.conj(rx)) / rx_energy
    err = g * rx - ref
    return float(np.sqrt(np.sum(np.abs(err) ** 2) / ref_energy))


def ber_from_evm(evm_value: float, fmt: str) -> float:
    """Gaussian-error bit error rate of square M-QAM at a measured EVM.

    Treats the error vector as additive Gaussian noise with SNR = 1/EVM^2
    and applies the standard Gray-coded square-QAM approximation

        BER = 2 (1 - 1/sqrt(M)) / log2(sqrt(M)) * Q( sqrt(3 SNR/(M-1)) ).
    """
    if evm_value < 0:
        raise InvalidConfigError("EVM must be >= 0")
    m = 2 ** bits_per_symbol(fmt)
    if evm_value == 0.0:
        return 0.0
    factor = 2.0 * (1.0 - 1.0 / np.sqrt(m)) / np.log2(np.sqrt(m))
    arg = np.sqrt(3.0 / (2.0 * (m - 1.0))) / evm_value
    return float(factor * 0.5 * erfc(arg))


def q_factor(ber: float) -> float:
    """Gaussian-equivalent quality factor 20 log10(sqrt(2) erfcinv(2 BER))."""
    if not 0.0 < ber < 0.5:
        raise UndefinedQFactorError(f"Q factor undefined for BER {ber!r}")
    q_lin = np.sqrt(2.0) * erfcinv(2.0 * ber)
    return float(20.0 * np.log10(q_lin))
