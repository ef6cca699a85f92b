"""Solitonic-content diagnostics of a normalized burst.

Two cheap indicators of whether a focusing burst carries a discrete
spectrum: the L1 norm (below pi/2 no discrete eigenvalues can exist, a
one-directional bound) and the located eigenvalues themselves, read off
as roots of the a-polynomial outside the unit circle.  Each eigenvalue
lambda_k binds energy 4 Im(lambda_k), which against the total burst
energy gives the fraction of power travelling in solitonic form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegreeTooLargeError, InvalidConfigError
from .normcoord import NormalizedSignal
from .zscatter import ScatteringPair, scatter_signal


@dataclass(frozen=True)
class SpectrumDiag:
    """Discrete-spectrum summary of one burst."""

    eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.complex128))
    soliton_energy: float = 0.0
    total_energy: float = 0.0

    @property
    def soliton_ratio(self) -> float:
        if self.total_energy <= 0.0:
            return 0.0
        return float(min(max(self.soliton_energy / self.total_energy, 0.0), 1.0))


def l1_norm(sig: NormalizedSignal) -> float:
    """Riemann sum of |E| over the unit window, sum |E_n| / D."""
    return float(np.sum(np.abs(sig.samples)) / sig.d)


def _polish_roots(coeffs: np.ndarray, roots: np.ndarray, iters: int = 3) -> np.ndarray:
    """Newton refinement of roots of p(y) = sum c_i y^i (y = 1/z)."""
    c = coeffs
    dc = c[1:] * np.arange(1, len(c))
    y = roots.astype(np.complex128)
    for _ in range(iters):
        num = np.polyval(c[::-1], y)
        den = np.polyval(dc[::-1], y)
        ok = den != 0
        y = np.where(ok, y - num / np.where(ok, den, 1.0), y)
    return y


def find_discrete_eigenvalues(
    pair: ScatteringPair,
    max_degree: int = 4096,
    radius_tol: float = 1e-6,
    residual_tol: float = 1e-6,
) -> np.ndarray:
    """Zeros of a(z) outside the unit circle, mapped to the lambda plane.

    Roots are taken in y = 1/z via the companion matrix of the coefficient
    polynomial, Newton-polished, and accepted when |z| > 1 + radius_tol
    with a small relative residual.  lambda = log(z)/(-2 i eps) on the
    principal branch, so accepted eigenvalues have Im(lambda) > 0.
    Defocusing pairs have no discrete spectrum and return an empty array.
    """
    if pair.kappa == -1:
        return np.zeros(0, dtype=np.complex128)
    c = pair.a_coeffs
    # trim trailing numerically-dead coefficients; they only add spurious
    # roots at y ~ infinity (z ~ 0, harmless) and slow the companion solve
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return np.zeros(0, dtype=np.complex128)
    nz = np.nonzero(np.abs(c) > 1e-300)[0]
    deg = int(nz[-1]) if len(nz) else 0
    if deg > max_degree:
        raise DegreeTooLargeError(
            f"a-polynomial degree {deg} exceeds cap {max_degree}; decimate the burst first"
        )
    if deg == 0:
        return np.zeros(0, dtype=np.complex128)
    cc = c[: deg + 1] / scale
    y_roots = np.roots(cc[::-1])  # np.roots wants highest power first
    y_roots = y_roots[np.abs(y_roots) > 0]
    inside = y_roots[np.abs(y_roots) < 1.0 / (1.0 + radius_tol)]
    if len(inside) == 0:
        return np.zeros(0, dtype=np.complex128)
    inside = _polish_roots(cc, inside)
    z = 1.0 / inside
    keep = np.abs(z) > 1.0 + radius_tol
    res = np.abs(np.polyval(cc[::-1], 1.0 / z))
    keep &= res < residual_tol
    z = z[keep]
    lam = (1j * np.log(np.abs(z)) - np.angle(z)) / (2.0 * pair.eps)
    return lam[np.imag(lam) > 0]


def soliton_power_ratio(
    sig: NormalizedSignal,
    max_degree: int = 4096,
    radius_tol: float = 1e-6,
) -> SpectrumDiag:
    """Fraction of a burst's energy bound in discrete eigenvalues.

    Energy accounting uses the trace identity: each eigenvalue contributes
    4 Im(lambda_k), compared against the Riemann-sum energy sum |E|^2 / D.
    Large windows should be decimated (resample_normalized) before calling,
    keeping the companion solve inside ``max_degree``.
    """
    total = float(np.sum(np.abs(sig.samples) ** 2) / sig.d)
    if sig.kappa == -1 or total == 0.0:
        return SpectrumDiag(total_energy=total)
    pair = scatter_signal(sig)
    lam = find_discrete_eigenvalues(pair, max_degree=max_degree, radius_tol=radius_tol)
    bound = float(np.sum(4.0 * np.imag(lam)))
    return SpectrumDiag(eigenvalues=lam, soliton_energy=bound, total_energy=total)
