"""Forward scattering of a sampled burst into polynomial scattering data.

The burst E on the unit window is rescaled to q[n] = E[n] / D and fed to
the one-step transfer recursion

    phi[n] = z^(1/2) / sqrt(1 + kappa |q[n]|^2)
             * [[1,            z^-1 q[n]],
                [-kappa conj(q[n]), z^-1 ]] phi[n-1],
    phi[0] = z^(-D/2) [1, 0]^T.

After D steps the components are Laurent polynomials

    a(z) = sum_{i=0}^{D-1} a_i z^-i,     b(z) = sum_{i=0}^{D-1} b_i z^-i,

with z = exp(-2 i lambda / D) tying the unit circle to real spectral
parameters lambda.  ``scatter_sequential`` runs the recursion directly in
O(D^2); ``scatter_fast`` multiplies the one-step transfer matrices up a
balanced binary tree with FFT polynomial products in O(D log^2 D).

Key algebraic facts used by the tests:
  * |a(z)|^2 + kappa |b(z)|^2 = 1 exactly on |z| = 1;
  * a_0 = prod_n (1 + kappa |q_n|^2)^(-1/2);
  * as the amplitude vanishes, b_i -> -kappa conj(q[D - 1 - i]).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneratePairError,
    InvalidConfigError,
    NormalizerSingularityError,
)
from .normcoord import NormalizedSignal

_LEAF_SIZE = 32


@dataclass(frozen=True)
class ScatteringPair:
    """Polynomial scattering data of one burst.

    ``a_coeffs[i]`` and ``b_coeffs[i]`` hold the z^-i coefficients.
    ``eps`` is the sample spacing 1/D of the originating grid and ``x``
    the normalized position the data were measured at.
    """

    a_coeffs: np.ndarray
    b_coeffs: np.ndarray
    kappa: int
    eps: float
    x: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.a_coeffs, dtype=np.complex128)
        b = np.asarray(self.b_coeffs, dtype=np.complex128)
        if len(a) != len(b):
            raise InvalidConfigError("a and b must have equal length")
        if len(a) == 0:
            raise DegeneratePairError("empty scattering pair")
        object.__setattr__(self, "a_coeffs", a)
        object.__setattr__(self, "b_coeffs", b)
        if self.kappa not in (+1, -1):
            raise InvalidConfigError("kappa must be +1 or -1")
        if self.eps <= 0:
            raise InvalidConfigError("eps must be positive")

    @property
    def degree_bound(self) -> int:
        return len(self.a_coeffs)


def rescale_samples(sig: NormalizedSignal) -> np.ndarray:
    """Samples scaled by the grid spacing, q[n] = E[n] / D.

    In the defocusing case every rescaled sample must stay strictly below
    unit magnitude or the transfer normalizers are singular.
    """
    q = sig.samples / sig.d
    if sig.kappa == -1:
        peak = np.max(np.abs(q)) if len(q) else 0.0
        if peak >= 1.0:
            raise NormalizerSingularityError(
                f"defocusing sample magnitude {peak:.3g} >= 1 after rescaling"
            )
    return q


def scatter_sequential(samples: np.ndarray, kappa: int, x: float = 0.0) -> ScatteringPair:
    """Run the transfer recursion one sample at a time, O(D^2).

    ``samples`` are the rescaled q[n].  Kept as the trusted reference for
    the tree-structured fast path.
    """
    q = np.asarray(samples, dtype=np.complex128)
    d = len(q)
    if d < 1:
        raise InvalidConfigError("need at least one sample")
    if kappa not in (+1, -1):
        raise InvalidConfigError("kappa must be +1 or -1")
    gam2 = 1.0 + kappa * np.abs(q) ** 2
    if kappa == -1 and np.any(gam2 <= 0.0):
        raise NormalizerSingularityError("defocusing sample magnitude >= 1")
    gam = np.sqrt(gam2)
    a = np.zeros(d, dtype=np.complex128)
    b = np.zeros(d, dtype=np.complex128)
    sb = np.zeros(d, dtype=np.complex128)
    a[0] = 1.0
    for n in range(d):
        # z^-1 b, shifted one slot up; degree grows by at most one per step
        hi = n + 1 if n + 1 <= d else d
        sb[0] = 0.0
        sb[1:hi] = b[: hi - 1]
        qn = q[n]
        g = gam[n]
        b[:hi] = (-kappa * np.conj(qn) * a[:hi] + sb[:hi]) / g
        a[:hi] = (a[:hi] + qn * sb[:hi]) / g
    return ScatteringPair(a_coeffs=a, b_coeffs=b, kappa=kappa, eps=1.0 / d, x=x)


def _leaf_transfers(q: np.ndarray, kappa: int, leaf: int) -> np.ndarray:
    """Transfer products over consecutive blocks of ``leaf`` samples.

    Returns an array of shape (nblk, 2, 2, leaf + 1) holding polynomial
    coefficients of each block product, normalizers folded in.  The
    recursion is vectorized across blocks.
    """
    d = len(q)
    nblk = d // leaf
    blocks = q.reshape(nblk, leaf)
    gam = np.sqrt(1.0 + kappa * np.abs(blocks) ** 2)
    t = np.zeros((nblk, 2, 2, leaf + 1), dtype=np.complex128)
    t[:, 0, 0, 0] = 1.0
    t[:, 1, 1, 0] = 1.0
    for j in range(leaf):
        e = blocks[:, j][:, None]
        me = -kappa * np.conj(e)
        g = gam[:, j][:, None]
        s10 = np.zeros_like(t[:, 1, 0])
        s11 = np.zeros_like(t[:, 1, 1])
        s10[:, 1:] = t[:, 1, 0, :-1]
        s11[:, 1:] = t[:, 1, 1, :-1]
        new00 = (t[:, 0, 0] + e * s10) / g
        new01 = (t[:, 0, 1] + e * s11) / g
        new10 = (me * t[:, 0, 0] + s10) / g
        new11 = (me * t[:, 0, 1] + s11) / g
        t[:, 0, 0] = new00
        t[:, 0, 1] = new01
        t[:, 1, 0] = new10
        t[:, 1, 1] = new11
    return t


def _combine_level(t: np.ndarray) -> np.ndarray:
    """Multiply adjacent block transfers pairwise with FFT convolution.

    ``t`` has shape (nblk, 2, 2, w); block index grows with sample
    position, so the later block is the left matrix factor.
    """
    nblk, _, _, w = t.shape
    out_w = 2 * w - 1
    nfft = 1 << (out_w - 1).bit_length()
    left = np.fft.fft(t[1::2], n=nfft, axis=-1)
    right = np.fft.fft(t[0::2], n=nfft, axis=-1)
    prod = np.einsum("mijl,mjkl->mikl", left, right)
    vals = np.fft.ifft(prod, axis=-1)[..., :out_w]
    return vals


def transfer_product(samples: np.ndarray, kappa: int, leaf_size: int = _LEAF_SIZE) -> np.ndarray:
    """Full 2x2 transfer-matrix product of all samples, shape (2, 2, D + 1)."""
    q = np.asarray(samples, dtype=np.complex128)
    d = len(q)
    if d < 1:
        raise InvalidConfigError("need at least one sample")
    if d & (d - 1):
        raise InvalidConfigError("fast path requires a power-of-two length")
    if kappa == -1 and len(q) and np.max(np.abs(q)) >= 1.0:
        raise NormalizerSingularityError("defocusing sample magnitude >= 1")
    leaf = min(leaf_size, d)
    t = _leaf_transfers(q, kappa, leaf)
    while t.shape[0] > 1:
        t = _combine_level(t)
    return t[0]


def scatter_fast(samples: np.ndarray, kappa: int, x: float = 0.0) -> ScatteringPair:
    """Tree-structured forward scattering, O(D log^2 D).

    Matches :func:`scatter_sequential` to near machine precision; the
    length must be a power of two.
    """
    t = transfer_product(samples, kappa)
    d = len(samples)
    a = t[0, 0, :d].copy()
    b = t[1, 0, :d].copy()
    return ScatteringPair(a_coeffs=a, b_coeffs=b, kappa=kappa, eps=1.0 / d, x=x)


def scatter_signal(sig: NormalizedSignal, fast: bool = True) -> ScatteringPair:
    """Rescale a normalized burst and scatter it, tagging its position."""
    q = rescale_samples(sig)
    if fast and not (sig.d & (sig.d - 1)):
        return scatter_fast(q, sig.kappa, x=sig.x)
    return scatter_sequential(q, sig.kappa, x=sig.x)


def eval_shifted_roots(coeffs: np.ndarray, half_shift: bool = True) -> np.ndarray:
    """Evaluate p(z) = sum c_i z^-i on a roots-of-unity grid.

    With ``half_shift`` the nodes are w^(n - 1/2), n = 1..D, for
    w = exp(-2 pi i / D): a chirp premultiplication c_i * exp(-i pi i / D)
    followed by one length-D inverse DFT.  Without it the nodes are the
    plain w^(n-1), n = 1..D.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    d = len(c)
    if d < 1:
        raise InvalidConfigError("need at least one coefficient")
    idx = np.arange(d)
    if half_shift:
        pre = c * np.exp(-1j * np.pi * idx / d)
        u = np.fft.ifft(pre) * d
        return np.roll(u, -1)
    return np.fft.ifft(c) * d


def coeffs_from_shifted_values(values: np.ndarray, half_shift: bool = True) -> np.ndarray:
    """Exact inverse of :func:`eval_shifted_roots` on the same grid."""
    v = np.asarray(values, dtype=np.complex128)
    d = len(v)
    if d < 1:
        raise InvalidConfigError("need at least one value")
    idx = np.arange(d)
    if half_shift:
        u = np.roll(v, 1)
        return np.fft.fft(u) / d * np.exp(1j * np.pi * idx / d)
    return np.fft.fft(v) / d


def unit_circle_residual(pair: ScatteringPair) -> float:
    """Max deviation of |a|^2 + kappa |b|^2 from 1 on the shifted nodes."""
    av = eval_shifted_roots(pair.a_coeffs)
    bv = eval_shifted_roots(pair.b_coeffs)
    res = np.abs(av) ** 2 + pair.kappa * np.abs(bv) ** 2 - 1.0
    return float(np.max(np.abs(res)))
