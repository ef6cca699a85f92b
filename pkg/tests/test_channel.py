"""Split-step propagation, link parameters, amplifier noise."""

import numpy as np
import pytest

from conftest import gaussian_burst, rel_err, sech_burst
from nfdbp.channel import (
    LinkConfig,
    StepConfig,
    add_ase,
    ase_psd_per_span,
    beta2_from_dispersion,
    loss_coeff_from_db,
    propagate_link,
    ssfm_propagate,
)
from nfdbp.errors import InvalidConfigError
from nfdbp.normcoord import NormalizedSignal, PhysicalSignal


def test_loss_coefficient_conversion():
    # 0.2 dB/km: alpha = 0.2 * ln(10) / 10 per km
    assert loss_coeff_from_db(0.2) == pytest.approx(4.605170185988093e-05, rel=1e-12)
    assert loss_coeff_from_db(0.0) == 0.0


def test_beta2_from_dispersion_sign_and_value():
    # 16 ps/(nm km) at 1550 nm is anomalous: beta2 ~ -20.4 ps^2/km
    b2 = beta2_from_dispersion(16.0)
    assert b2 == pytest.approx(-2.0407171191919898e-26, rel=1e-10)
    assert beta2_from_dispersion(-16.0) == pytest.approx(-b2, rel=1e-12)


def test_link_config_validation():
    ok = LinkConfig.from_engineering(num_spans=4)
    assert ok.total_length == pytest.approx(320e3)
    with pytest.raises(InvalidConfigError):
        LinkConfig(span_length=0.0, num_spans=1, loss_coeff=1e-5, beta2=1e-26, gamma_nl=1e-3)
    with pytest.raises(InvalidConfigError):
        LinkConfig(span_length=1e3, num_spans=1, loss_coeff=1e-5, beta2=0.0, gamma_nl=1e-3)
    with pytest.raises(InvalidConfigError):
        StepConfig(steps_per_span=0)
    with pytest.raises(InvalidConfigError):
        StepConfig(scheme="eulerish")


def test_ase_psd_spot_value():
    link = LinkConfig.from_engineering(num_spans=4, dispersion_ps_nm_km=-16.0)
    # alpha * L_span * h * f_pump * K_T for one fully pumped span
    assert ase_psd_per_span(link) == pytest.approx(2.011494792076609e-18, rel=1e-9)


def test_add_ase_statistics_and_determinism():
    n = 200000
    sig = PhysicalSignal(np.zeros(n, dtype=complex), sample_interval=1e-12)
    psd = 4e-18
    noisy = add_ase(sig, psd, rng=np.random.default_rng(3))
    # per-sample complex variance = psd / dt
    var = np.mean(np.abs(noisy.samples) ** 2)
    assert var == pytest.approx(psd / 1e-12, rel=0.02)
    again = add_ase(sig, psd, rng=np.random.default_rng(3))
    np.testing.assert_array_equal(noisy.samples, again.samples)
    assert add_ase(sig, 0.0, rng=1) is sig


def test_ssfm_zero_distance_is_identity():
    sig = gaussian_burst(256, amp=1.0)
    out = ssfm_propagate(sig, 0.0, 10)
    np.testing.assert_array_equal(out.samples, sig.samples)
    assert out.x == sig.x


def test_ssfm_plane_wave_is_exact():
    # a single Fourier mode solves the full equation: both split factors
    # are exact for it, so any step count reproduces the analytic phase
    d = 128
    t = -1.0 + (np.arange(d) + 0.5) / d
    k = 3
    amp = 0.8
    for kappa in (+1, -1):
        sig = NormalizedSignal(amp * np.exp(2j * np.pi * k * t), kappa=kappa)
        x = 0.37
        out = ssfm_propagate(sig, x, 7)
        phase = -((2 * np.pi * k) ** 2) * x + 2 * kappa * amp**2 * x
        expected = sig.samples * np.exp(1j * phase)
        assert rel_err(out.samples, expected) < 1e-12


def test_ssfm_forward_backward_inverts():
    sig = gaussian_burst(512, amp=1.2, sigma=0.1, f0=2.0, kappa=-1)
    fwd = ssfm_propagate(sig, 0.004, 400)
    back = ssfm_propagate(fwd, -0.004, 400)
    assert rel_err(back.samples, sig.samples) < 1e-9
    assert back.x == pytest.approx(sig.x, abs=1e-15)


def test_soliton_is_stationary_up_to_the_analytic_phase():
    # amp * sech(amp t) self-focuses exactly against dispersion; the field
    # only picks up exp(i amp^2 x)
    amp = 24.0
    sol = sech_burst(1024, amp, amp, kappa=+1)
    x = 0.01
    out = ssfm_propagate(sol, x, 1000)
    expected = sol.samples * np.exp(1j * amp**2 * x)
    assert rel_err(out.samples, expected) < 5e-4
    finer = ssfm_propagate(sol, x, 4000)
    assert rel_err(finer.samples, expected) < rel_err(out.samples, expected)


def test_ssfm_schemes_agree_at_high_resolution():
    sig = gaussian_burst(256, amp=1.0, sigma=0.1, kappa=+1)
    a = ssfm_propagate(sig, 0.003, 3000, scheme="symmetric")
    b = ssfm_propagate(sig, 0.003, 3000, scheme="asymmetric")
    assert rel_err(a.samples, b.samples) < 1e-4


def test_ssfm_validation():
    sig = gaussian_burst(64)
    with pytest.raises(InvalidConfigError):
        ssfm_propagate(sig, 0.1, 0)


def test_propagate_link_zero_spans_is_identity():
    link = LinkConfig.from_engineering(num_spans=0)
    sig = PhysicalSignal(np.ones(128, dtype=complex), 1e-12)
    out = propagate_link(sig, link)
    np.testing.assert_array_equal(out.samples, sig.samples)


def test_propagate_link_noiseless_is_deterministic_and_energy_preserving():
    link = LinkConfig.from_engineering(num_spans=4, dispersion_ps_nm_km=-16.0)
    rng = np.random.default_rng(11)
    n = 2048
    dt = 4.5714285714285713e-09 / n
    samples = np.zeros(n, dtype=complex)
    samples[800:1200] = 1e-2 * (rng.standard_normal(400) + 1j * rng.standard_normal(400))
    sig = PhysicalSignal(samples, dt)
    a = propagate_link(sig, link, StepConfig(40), rng_seed=None)
    b = propagate_link(sig, link, StepConfig(40), rng_seed=None)
    np.testing.assert_array_equal(a.samples, b.samples)
    # lossless path-averaged model: the windowed energy is conserved
    assert np.sum(np.abs(a.samples) ** 2) == pytest.approx(
        np.sum(np.abs(sig.samples) ** 2), rel=1e-9
    )


def test_propagate_link_seeded_noise_is_reproducible():
    link = LinkConfig.from_engineering(num_spans=2, dispersion_ps_nm_km=-16.0)
    sig = PhysicalSignal(np.ones(512, dtype=complex) * 1e-3, 1e-11)
    a = propagate_link(sig, link, StepConfig(10), rng_seed=42)
    b = propagate_link(sig, link, StepConfig(10), rng_seed=42)
    c = propagate_link(sig, link, StepConfig(10), rng_seed=43)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)
    quiet = propagate_link(sig, link, StepConfig(10), rng_seed=None)
    assert not np.array_equal(a.samples, quiet.samples)
