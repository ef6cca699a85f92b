"""Shared builders for the test suite."""

import numpy as np
import pytest

from nfdbp.normcoord import NormalizedSignal


def rel_err(got, want):
    """Relative L2 distance between two complex arrays."""
    got = np.asarray(got)
    want = np.asarray(want)
    return float(np.linalg.norm(got - want) / np.linalg.norm(want))


def gaussian_burst(d, amp=1.0, sigma=0.1, f0=0.0, kappa=1, x=0.0):
    """Smooth carrier-modulated Gaussian centered in the unit window."""
    t = -1.0 + (np.arange(d) + 0.5) / d
    env = amp * np.exp(-((t + 0.5) ** 2) / (2.0 * sigma**2))
    return NormalizedSignal(env * np.exp(2j * np.pi * f0 * t), kappa=kappa, x=x)


def random_burst(d, kappa, amp=0.3, seed=0, x=0.0):
    """Complex white-noise burst; amp is the per-sample std deviation."""
    rng = np.random.default_rng(seed)
    samples = amp * (rng.standard_normal(d) + 1j * rng.standard_normal(d))
    return NormalizedSignal(samples, kappa=kappa, x=x)


def sech_burst(d, amp, width, kappa=1):
    """amp * sech(width * (t + 1/2)) on the unit window."""
    t = -1.0 + (np.arange(d) + 0.5) / d
    return NormalizedSignal(amp / np.cosh(width * (t + 0.5)), kappa=kappa)


@pytest.fixture(scope="session")
def desk_link_normal():
    from nfdbp.experiment import desk_preset

    return desk_preset("normal").link


@pytest.fixture(scope="session")
def desk_link_anomalous():
    from nfdbp.experiment import desk_preset

    return desk_preset("anomalous").link
