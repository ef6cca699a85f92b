"""Conversion between physical fiber units and the dimensionless frame.

The propagation model used throughout the package is the normalized
Schroedinger equation

    i dE/dx + d2E/dt2 + 2*kappa*|E|^2 E = 0,      kappa in {+1, -1},

posed on the unit time window [-1, 0].  A physical envelope A(z, T) in
sqrt(W) obeying

    dA/dz = -i*(beta2/2) d2A/dT2 + i*gamma_nl*|A|^2 A

maps onto it by scaling time with the processing window T0, distance with
|beta2| / (2*T0^2) and the field with sqrt(gamma_nl*T0^2/|beta2|).  For
normal dispersion (beta2 > 0) the field is conjugated so that the same
equation holds with kappa = -1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidConfigError, WindowMismatchError


@dataclass(frozen=True)
class PhysicalSignal:
    """Complex baseband envelope on a uniform time grid.

    Attributes
    ----------
    samples : np.ndarray
        Complex field samples in sqrt(W).
    sample_interval : float
        Grid spacing in seconds.
    t_start : float
        Absolute time of the first sample in seconds.
    """

    samples: np.ndarray
    sample_interval: float
    t_start: float = 0.0

    def __post_init__(self):
        if self.sample_interval <= 0:
            raise InvalidConfigError("sample_interval must be positive")
        arr = np.asarray(self.samples, dtype=np.complex128)
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return self.n_samples * self.sample_interval


@dataclass(frozen=True)
class NormalizationParams:
    """Fixed scale factors tying a physical link to the unit-window model."""

    t_window: float
    power_scale: float      # 1/W, multiplies |A|^2
    distance_scale: float   # 1/m, multiplies z
    kappa: int              # +1 anomalous (beta2 < 0), -1 normal
    conjugate_field: bool

    def __post_init__(self):
        if self.t_window <= 0 or self.power_scale <= 0 or self.distance_scale <= 0:
            raise InvalidConfigError("normalization scales must be positive")
        if self.kappa not in (+1, -1):
            raise InvalidConfigError("kappa must be +1 or -1")


@dataclass(frozen=True)
class NormalizedSignal:
    """Dimensionless field on the window [-1, 0].

    Sample n (0-indexed) sits at t = -1 + (n + 1/2)/D, the midpoint grid
    used by the scattering discretization.  ``x`` tags the position along
    the fiber in normalized units.
    """

    samples: np.ndarray
    kappa: int
    x: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.complex128)
        object.__setattr__(self, "samples", arr)
        if self.kappa not in (+1, -1):
            raise InvalidConfigError("kappa must be +1 or -1")

    @property
    def d(self) -> int:
        return len(self.samples)

    @property
    def eps(self) -> float:
        return 1.0 / self.d

    def grid(self) -> np.ndarray:
        """Time positions of the samples inside [-1, 0]."""
        d = self.d
        return -1.0 + (np.arange(d) + 0.5) / d


def derive_normalization(link, t_window: float) -> NormalizationParams:
    """Build the scale factors for ``link`` and a processing window.

    ``link`` only needs ``beta2`` (s^2/m, signed) and ``gamma_nl``
    (1/(W m)) attributes.  The window duration becomes the unit of time.
    """
    beta2 = float(link.beta2)
    gamma_nl = float(link.gamma_nl)
    if beta2 == 0.0:
        raise InvalidConfigError("beta2 must be nonzero")
    if gamma_nl <= 0.0:
        raise InvalidConfigError("gamma_nl must be positive")
    if t_window <= 0.0:
        raise InvalidConfigError("t_window must be positive")
    abs_b2 = abs(beta2)
    return NormalizationParams(
        t_window=t_window,
        power_scale=gamma_nl * t_window**2 / abs_b2,
        distance_scale=abs_b2 / (2.0 * t_window**2),
        kappa=+1 if beta2 < 0 else -1,
        conjugate_field=beta2 > 0,
    )


def to_normalized(sig: PhysicalSignal, p: NormalizationParams, x: float = 0.0) -> NormalizedSignal:
    """Map a physical window onto the unit-window model.

    The signal duration must equal ``p.t_window`` within one sample.  The
    field is scaled by sqrt(power_scale) and conjugated when the link has
    normal dispersion.
    """
    if abs(sig.duration - p.t_window) > sig.sample_interval:
        raise WindowMismatchError(
            f"signal duration {sig.duration:.6g} s != window {p.t_window:.6g} s"
        )
    field = sig.samples * np.sqrt(p.power_scale)
    if p.conjugate_field:
        field = np.conj(field)
    return NormalizedSignal(samples=field, kappa=p.kappa, x=x)


def from_normalized(sig: NormalizedSignal, p: NormalizationParams, t_start: float = 0.0) -> PhysicalSignal:
    """Inverse of :func:`to_normalized`; exact round trip."""
    field = sig.samples / np.sqrt(p.power_scale)
    if p.conjugate_field:
        field = np.conj(field)
    return PhysicalSignal(
        samples=field,
        sample_interval=p.t_window / sig.d,
        t_start=t_start,
    )


def normalized_distance(length_m: float, p: NormalizationParams) -> float:
    """Normalized position x for a physical length in meters."""
    if length_m < 0:
        raise InvalidConfigError("length must be nonnegative")
    return length_m * p.distance_scale


def resample_normalized(sig: NormalizedSignal, new_d: int) -> NormalizedSignal:
    """Band-limited resampling onto a coarser or finer midpoint grid.

    Used to decimate large windows before the eigenvalue detector.  The
    half-sample offset between the two grids is absorbed with a spectral
    phase ramp, so smooth well-contained bursts resample to spectral
    accuracy.
    """
    d = sig.d
    if new_d == d:
        return sig
    if new_d < 1:
        raise InvalidConfigError("new_d must be >= 1")
    spec = np.fft.fft(sig.samples)
    m = min(d, new_d)
    npos = (m + 1) // 2          # kept bins 0 .. npos-1
    nneg = (m - 1) // 2          # kept bins -nneg .. -1
    # midpoint grids start at eps/2; absorb the offset between them
    shift = 0.5 * (1.0 / new_d - 1.0 / d)
    fpos = np.arange(npos)
    fneg = np.arange(-nneg, 0)
    out_spec = np.zeros(new_d, dtype=np.complex128)
    out_spec[:npos] = spec[:npos] * np.exp(2j * np.pi * fpos * shift)
    if nneg:
        out_spec[new_d - nneg:] = spec[d - nneg:] * np.exp(2j * np.pi * fneg * shift)
    out = np.fft.ifft(out_spec) * (new_d / d)
    return replace(sig, samples=out)
