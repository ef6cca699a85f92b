"""Fiber link model: split-step propagation and amplifier noise.

Propagation between amplifiers uses the lossless path-averaged model in
normalized units; attenuation enters only through the noise added at each
span's amplifier.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import h as H_PLANCK

from .errors import InvalidConfigError
from .normcoord import (
    NormalizedSignal,
    PhysicalSignal,
    derive_normalization,
    from_normalized,
    normalized_distance,
    to_normalized,
)

LN10 = float(np.log(10.0))


def loss_coeff_from_db(loss_db_per_km: float) -> float:
    """Field-power attenuation coefficient in 1/m from dB/km."""
    return loss_db_per_km * LN10 / 10.0 / 1e3


def beta2_from_dispersion(disp_ps_nm_km: float, wavelength_m: float = 1550e-9) -> float:
    """Group velocity dispersion beta2 (s^2/m) from D (ps/(nm km)).

    Positive D is anomalous dispersion, giving negative beta2.
    """
    d_si = disp_ps_nm_km * 1e-6  # s/m^2
    return -d_si * wavelength_m**2 / (2.0 * np.pi * C_LIGHT)


@dataclass(frozen=True)
class LinkConfig:
    """Span-uniform fiber link in SI units."""

    span_length: float        # m
    num_spans: int
    loss_coeff: float         # 1/m (power)
    beta2: float              # s^2/m, signed
    gamma_nl: float           # 1/(W m)
    pump_freq: float = 206e12     # Hz, Raman pump
    photon_occupancy: float = 4.0  # K_T

    def __post_init__(self):
        if self.span_length <= 0:
            raise InvalidConfigError("span_length must be positive")
        if self.num_spans < 0:
            raise InvalidConfigError("num_spans must be >= 0")
        if self.loss_coeff < 0 or self.photon_occupancy < 0:
            raise InvalidConfigError("loss and photon occupancy must be >= 0")
        if self.beta2 == 0:
            raise InvalidConfigError("beta2 must be nonzero")
        if self.gamma_nl <= 0:
            raise InvalidConfigError("gamma_nl must be positive")

    @property
    def total_length(self) -> float:
        return self.span_length * self.num_spans

    @classmethod
    def from_engineering(
        cls,
        span_km: float = 80.0,
        num_spans: int = 50,
        loss_db_per_km: float = 0.2,
        dispersion_ps_nm_km: float = 16.0,
        gamma_per_w_km: float = 1.22,
        pump_freq_thz: float = 206.0,
        photon_occupancy: float = 4.0,
        wavelength_nm: float = 1550.0,
    ) -> "LinkConfig":
        return cls(
            span_length=span_km * 1e3,
            num_spans=num_spans,
            loss_coeff=loss_coeff_from_db(loss_db_per_km),
            beta2=beta2_from_dispersion(dispersion_ps_nm_km, wavelength_nm * 1e-9),
            gamma_nl=gamma_per_w_km * 1e-3,
            pump_freq=pump_freq_thz * 1e12,
            photon_occupancy=photon_occupancy,
        )


@dataclass(frozen=True)
class StepConfig:
    """Split-step resolution for forward propagation."""

    steps_per_span: int = 80
    scheme: str = "symmetric"

    def __post_init__(self):
        if self.steps_per_span < 1:
            raise InvalidConfigError("steps_per_span must be >= 1")
        if self.scheme not in ("symmetric", "asymmetric"):
            raise InvalidConfigError("scheme must be symmetric or asymmetric")


def ssfm_propagate(
    sig: NormalizedSignal,
    x_total: float,
    steps: int,
    scheme: str = "symmetric",
) -> NormalizedSignal:
    """Integrate i E_x + E_tt + 2 kappa |E|^2 E = 0 over ``x_total``.

    Symmetric (Strang) splitting alternates the exact spectral solution of
    the linear part, multiplier exp(-i (2 pi f)^2 dx), with the exact
    constant-modulus solution of the nonlinear part, multiplier
    exp(2 i kappa |E|^2 dx).  ``x_total`` may be negative, which undoes a
    forward run with the same magnitude.
    """
    if steps < 1:
        raise InvalidConfigError("steps must be >= 1")
    if x_total == 0.0:
        return replace(sig, samples=sig.samples.copy())
    d = sig.d
    dx = x_total / steps
    freqs = np.fft.fftfreq(d, d=1.0 / d)
    lin_phase = -1j * (2.0 * np.pi * freqs) ** 2
    field = sig.samples.copy()
    kappa = sig.kappa

    def nl(e, h):
        return e * np.exp(2j * kappa * np.abs(e) ** 2 * h)

    if scheme == "symmetric":
        field = np.fft.ifft(np.fft.fft(field) * np.exp(lin_phase * dx / 2))
        for k in range(steps):
            field = nl(field, dx)
            h = dx if k < steps - 1 else dx / 2
            field = np.fft.ifft(np.fft.fft(field) * np.exp(lin_phase * h))
    elif scheme == "asymmetric":
        lin_full = np.exp(lin_phase * dx)
        for _ in range(steps):
            field = np.fft.ifft(np.fft.fft(field) * lin_full)
            field = nl(field, dx)
    else:
        raise InvalidConfigError(f"unknown scheme {scheme!r}")
    return replace(sig, samples=field, x=sig.x + x_total)


def ase_psd_per_span(link: LinkConfig) -> float:
    """One-sided ASE power spectral density added per span, W/Hz.

    Distributed Raman amplification with full loss compensation injects
    noise of density loss * span_length * h * pump_freq * K_T.
    """
    return (
        link.loss_coeff
        * link.span_length
        * H_PLANCK
        * link.pump_freq
        * link.photon_occupancy
    )


def add_ase(sig: PhysicalSignal, psd: float, rng) -> PhysicalSignal:
    """Add circular complex Gaussian noise of the given spectral density.

    Per-sample variance is psd / sample_interval, split evenly between the
    quadratures.  ``rng`` is a seed or a numpy Generator.
    """
    if psd < 0:
        raise InvalidConfigError("psd must be >= 0")
    if psd == 0.0:
        return sig
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    sigma2 = psd / sig.sample_interval
    scale = np.sqrt(sigma2 / 2.0)
    n = len(sig.samples)
    noise = rng.normal(scale=scale, size=n) + 1j * rng.normal(scale=scale, size=n)
    return replace(sig, samples=sig.samples + noise)


def propagate_link(
    sig: PhysicalSignal,
    link: LinkConfig,
    steps: StepConfig = StepConfig(),
    rng_seed=0,
) -> PhysicalSignal:
    """Send a windowed burst through the full link.

    Each span runs the lossless normalized split-step model over the span's
    normalized length, then deposits that span's ASE in physical units.
    Deterministic for a fixed seed; rng_seed=None disables the noise.
    """
    if link.num_spans == 0:
        return replace(sig, samples=sig.samples.copy())
    p = derive_normalization(link, sig.duration)
    span_x = normalized_distance(link.span_length, p)
    psd = ase_psd_per_span(link)
    rng = None
    if rng_seed is not None:
        rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    out = sig
    for _ in range(link.num_spans):
        norm = to_normalized(out, p)
        norm = ssfm_propagate(norm, span_x, steps.steps_per_span, steps.scheme)
        out = from_normalized(norm, p, t_start=out.t_start)
        if rng is not None:
            out = add_ase(out, psd, rng)
    return out
