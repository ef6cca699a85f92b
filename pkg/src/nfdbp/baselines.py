"""Reference equalizers: split-step backpropagation and linear dispersion removal.

Both operate on the received physical waveform.  Split-step DBP reuses
the channel propagator with negated distance, span by span in reverse,
so forward and backward paths share one splitting implementation and
comparisons carry no systematic asymmetry.  CDC applies the single
all-pass spectral phase that exactly undoes the link's linear part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LinkConfig, ssfm_propagate
from .errors import InvalidConfigError
from .normcoord import (
    PhysicalSignal,
    derive_normalization,
    from_normalized,
    normalized_distance,
    to_normalized,
)


@dataclass(frozen=True)
class BaselineConfig:
    kind: str = "dbp_ssfm"
    steps_per_span: int = 20

    def __post_init__(self):
        if self.kind not in ("dbp_ssfm", "cdc"):
            raise InvalidConfigError(f"unknown baseline kind {self.kind!r}")
        if self.steps_per_span < 1:
            raise InvalidConfigError("steps_per_span must be >= 1")


def dbp_ssfm(
    received: PhysicalSignal, link: LinkConfig, steps_per_span: int = 20
) -> PhysicalSignal:
    """Undo the lossless link model by split-step runs with negated distance."""
    if steps_per_span < 1:
        raise InvalidConfigError("steps_per_span must be >= 1")
    params = derive_normalization(link, received.duration)
    span_x = normalized_distance(link.span_length, params)
    sig = received
    for _ in range(link.num_spans):
        norm = to_normalized(sig, params)
        norm = ssfm_propagate(norm, -span_x, steps_per_span)
        sig = from_normalized(norm, params, t_start=sig.t_start)
    return sig


def cdc(received: PhysicalSignal, link: LinkConfig) -> PhysicalSignal:
    """Remove accumulated chromatic dispersion with one spectral phase.

    The forward linear step multiplies the spectrum (numpy FFT sign
    convention) by exp(+i (beta2/2) omega^2 z); this applies the exact
    inverse over the total length and touches nothing else.
    """
    n = received.n_samples
    omega = 2.0 * np.pi * np.fft.fftfreq(n, received.sample_interval)
    phase = -0.5 * link.beta2 * omega**2 * link.total_length
    spec = np.fft.fft(received.samples) * np.exp(1j * phase)
    return PhysicalSignal(
        samples=np.fft.ifft(spec),
        sample_interval=received.sample_interval,
        t_start=received.t_start,
    )
