"""Backpropagation in the scattering domain: rotate, then invert.

A burst received at normalized position x1 is scattered into (a, b)
polynomials, the spatial evolution is undone analytically on b, and the
transmitted burst is recovered by layer peeling.  Under the propagation
model of :mod:`nfdbp.channel` the scattering data evolve as

    a(x, z) = a(0, z),
    b(x, z_m) = exp(+4 i lambda_m^2 x) b(0, z_m),

at the root-of-unity nodes z_m = exp(-2 pi i m / D), where
lambda_m = pi * k_m and k_m is the integer m folded into [-D/2, D/2)
(the node inherits the spectral parameter of the aliased baseband
branch, exactly as DFT bins do).  On these nodes the law is exact in
the small-amplitude limit: there b's node values reduce to conjugated
DFT bins of the burst, which the split-step linear factor multiplies by
exactly these phases.  Backrotation therefore multiplies node m by
exp(-4 i lambda_m^2 x1); it is a unit-modulus rotation, so |b| at every
node is untouched and the rotations form a group in x1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import warnings

import numpy as np

from .errors import (
    DegeneratePairError,
    InvalidConfigError,
    NonContractivePairError,
    SolitonicContentWarning,
)
from .normcoord import NormalizedSignal
from .zscatter import (
    ScatteringPair,
    coeffs_from_shifted_values,
    eval_shifted_roots,
    scatter_fast,
    scatter_signal,
    transfer_product,
    unit_circle_residual,
)

_FAST_PEEL_LEAF = 64


@dataclass(frozen=True)
class DbpNfdConfig:
    """Settings for one backpropagation run."""

    x1: float                      # normalized distance to undo
    window_pad: int = 0            # zero samples added per side before Step A
    inverse_mode: str = "reference"  # "reference" (O(D^2)) or "fast"

    def __post_init__(self):
        if self.window_pad < 0:
            raise InvalidConfigError("window_pad must be >= 0")
        if self.inverse_mode not in ("reference", "fast"):
            raise InvalidConfigError("inverse_mode must be reference or fast")


def node_frequencies(d: int) -> np.ndarray:
    """Folded integer node frequencies k_m, m = 0..D-1, DFT-bin order."""
    return np.fft.fftfreq(d, 1.0 / d)


def backrotate(pair: ScatteringPair, x1: float) -> ScatteringPair:
    """Undo the spatial phase evolution of b over a distance x1.

    a is untouched.  b is evaluated at the D roots of unity, each value
    is multiplied by exp(-4 i lambda_m^2 x1), and the coefficients are
    read back off the same grid.  Negating x1 applies the forward
    evolution, so backrotate(backrotate(p, u), -u) is the identity.
    """
    d = len(pair.b_coeffs)
    if x1 == 0.0:
        return replace(pair, b_coeffs=pair.b_coeffs.copy())
    k = node_frequencies(d)
    lam2 = (np.pi * k) ** 2
    values = eval_shifted_roots(pair.b_coeffs, half_shift=False)
    rotated = values * np.exp(-4j * lam2 * x1)
    b0 = coeffs_from_shifted_values(rotated, half_shift=False)
    return replace(pair, b_coeffs=b0, x=pair.x - x1)


def invert_layer(a_coeffs: np.ndarray, b_coeffs: np.ndarray, kappa: int):
    """Strip the last sample's transfer factor from an n-step pair.

    The constant coefficients fix the sample, conj(q_n) = -kappa b_0/a_0,
    after which multiplying by the inverse one-step matrix

        gamma_n^-1 [[1, -q_n], [kappa conj(q_n) z, z]]

    drops both polynomial degrees by one.  Returns (q_n, a', b') where the
    primed arrays are one entry shorter.
    """
    a = np.asarray(a_coeffs, dtype=np.complex128)
    b = np.asarray(b_coeffs, dtype=np.complex128)
    m = len(a)
    if m < 1 or len(b) != m:
        raise InvalidConfigError("pair arrays must be nonempty and equal length")
    a0 = a[0]
    if a0 == 0 or not np.isfinite(a0):
        raise DegeneratePairError("leading a-coefficient vanishes")
    qbar = -kappa * b[0] / a0
    qn = np.conj(qbar)
    mag2 = np.abs(qn) ** 2
    if kappa == -1 and mag2 >= 1.0:
        raise NonContractivePairError(
            f"|b0/a0| = {np.sqrt(mag2):.6g} >= 1 in the defocusing case"
        )
    g = np.sqrt(1.0 + kappa * mag2)
    a_prev = (a[: m - 1] - qn * b[: m - 1]) / g
    b_prev = (kappa * qbar * a[1:] + b[1:]) / g
    return qn, a_prev, b_prev


def _peel_reference(a: np.ndarray, b: np.ndarray, kappa: int) -> np.ndarray:
    d = len(a)
    out = np.empty(d, dtype=np.complex128)
    for n in range(d, 0, -1):
        qn, a, b = invert_layer(a, b, kappa)
        out[n - 1] = qn
    return out


def _peel_fast(a: np.ndarray, b: np.ndarray, kappa: int) -> np.ndarray:
    """Divide-and-conquer peeling.

    Peeling only ever reads coefficient j at depth <= j, so the last h
    samples follow from the lowest h coefficients alone.  Recovering them,
    rebuilding their transfer product T_hi, and applying z^h adj(T_hi)
    (det T_hi = z^-h) reduces the problem to the first half.
    """
    m = len(a)
    if m <= _FAST_PEEL_LEAF:
        return _peel_reference(a, b, kappa)
    h = m // 2
    s_hi = _peel_fast(a[:h].copy(), b[:h].copy(), kappa)
    t = transfer_product(s_hi, kappa)
    nfft = 1 << (m + h).bit_length()
    fa = np.fft.fft(a, n=nfft)
    fb = np.fft.fft(b, n=nfft)
    f00 = np.fft.fft(t[0, 0], n=nfft)
    f01 = np.fft.fft(t[0, 1], n=nfft)
    f10 = np.fft.fft(t[1, 0], n=nfft)
    f11 = np.fft.fft(t[1, 1], n=nfft)
    a_prev = np.fft.ifft(f11 * fa - f01 * fb)[h : h + h]
    b_prev = np.fft.ifft(f00 * fb - f10 * fa)[h : h + h]
    s_lo = _peel_fast(a_prev, b_prev, kappa)
    return np.concatenate([s_lo, s_hi])


def inverse_scatter(pair: ScatteringPair, mode: str = "reference") -> NormalizedSignal:
    """Rebuild the burst whose forward scattering is ``pair``.

    Exact algebraic inverse of the forward recursion: peels one transfer
    factor per sample, regenerating the samples in reverse order.  The
    fast mode replaces the O(D^2) sweep with recursive halving; it
    requires a power-of-two length.
    """
    if mode not in ("reference", "fast"):
        raise InvalidConfigError("mode must be reference or fast")
    a = pair.a_coeffs.copy()
    b = pair.b_coeffs.copy()
    d = len(a)
    if mode == "fast" and (d & (d - 1)):
        raise InvalidConfigError("fast mode requires a power-of-two length")
    q = _peel_fast(a, b, pair.kappa) if mode == "fast" else _peel_reference(a, b, pair.kappa)
    samples = q / pair.eps
    return NormalizedSignal(samples=samples, kappa=pair.kappa, x=pair.x)


def dbp_nfd(
    received: NormalizedSignal,
    cfg: DbpNfdConfig,
    diagnostics: dict | None = None,
) -> NormalizedSignal:
    """Full scattering-domain backpropagation of one received burst.

    Scatter (Step A), rotate the b data back to the transmitter (Step B),
    peel back to samples (Step C).  Optional symmetric zero padding first
    widens the window; since normalized coordinates are tied to the window
    length, padding rescales the field by r = (D + 2 pad)/D and the
    distance by 1/r^2, and the pad samples are dropped again after
    inversion.  Pass a dict as ``diagnostics`` to receive the unit-circle
    residual and edge-energy fraction of the run.
    """
    sig = received
    d0 = sig.d
    scale = 1.0
    x1 = cfg.x1
    if cfg.window_pad:
        pad = cfg.window_pad
        dp = d0 + 2 * pad
        if dp & (dp - 1):
            raise InvalidConfigError("padded length must be a power of two")
        scale = dp / d0
        samples = np.concatenate([
            np.zeros(pad, dtype=np.complex128),
            sig.samples * scale,
            np.zeros(pad, dtype=np.complex128),
        ])
        sig = NormalizedSignal(samples=samples, kappa=sig.kappa, x=sig.x)
        x1 = cfg.x1 / scale**2

    if sig.kappa == +1:
        from .diagnostics import l1_norm  # local import, no cycle at module load

        if l1_norm(sig) >= np.pi / 2:
            warnings.warn(
                "burst L1 norm >= pi/2; discrete (solitonic) spectrum is possible "
                "and the reflection-only rotation may not fully invert the channel",
                SolitonicContentWarning,
            )

    edge = sig.d // 64 or 1
    energy = float(np.sum(np.abs(sig.samples) ** 2))
    edge_energy = float(
        np.sum(np.abs(sig.samples[:edge]) ** 2) + np.sum(np.abs(sig.samples[-edge:]) ** 2)
    )

    pair = scatter_signal(sig)
    rotated = backrotate(pair, x1)
    est = inverse_scatter(rotated, mode=cfg.inverse_mode)

    if diagnostics is not None:
        diagnostics["unit_circle_residual"] = unit_circle_residual(rotated)
        diagnostics["edge_energy_fraction"] = edge_energy / energy if energy > 0 else 0.0

    x_out = received.x - cfg.x1
    if cfg.window_pad:
        pad = cfg.window_pad
        core = est.samples[pad : pad + d0] / scale
        return NormalizedSignal(samples=core, kappa=received.kappa, x=x_out)
    return replace(est, x=x_out)
