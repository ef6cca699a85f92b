"""Split-step backpropagation and linear compensation baselines."""

import numpy as np
import pytest

from conftest import rel_err
from nfdbp.baselines import BaselineConfig, cdc, dbp_ssfm
from nfdbp.channel import LinkConfig, StepConfig, propagate_link
from nfdbp.errors import InvalidConfigError
from nfdbp.normcoord import PhysicalSignal


def _windowed_burst(link, power_dbm=0.0, window=2048, seed=0):
    from nfdbp import txrx

    cfg = txrx.NyquistConfig(baud=56e9, symbols_per_packet=32, oversampling=8)
    rng = np.random.default_rng(seed)
    syms = txrx.map_bits(rng.integers(0, 2, 64), "qpsk")
    wave = txrx.nyquist_modulate(syms, cfg)
    scale = np.sqrt(10.0 ** (power_dbm / 10.0) * 1e-3)
    wave = PhysicalSignal(wave.samples * scale, wave.sample_interval)
    mem = txrx.dispersion_memory(cfg.baud, link.beta2, link.total_length)
    _, windowed = txrx.frame_burst(wave, syms, guard_time=1.1 * mem, window_size=window)
    return windowed


@pytest.fixture(scope="module")
def desk_link():
    return LinkConfig.from_engineering(num_spans=4, dispersion_ps_nm_km=-16.0)


def test_matched_step_dbp_inverts_the_forward_model(desk_link):
    tx = _windowed_burst(desk_link, power_dbm=2.0)
    rx = propagate_link(tx, desk_link, StepConfig(steps_per_span=40), rng_seed=None)
    est = dbp_ssfm(rx, desk_link, steps_per_span=40)
    assert rel_err(est.samples, tx.samples) < 1e-6
    assert est.t_start == tx.t_start
    assert est.sample_interval == tx.sample_interval


def test_cdc_exactly_inverts_a_linear_link(desk_link):
    linear = LinkConfig(
        span_length=desk_link.span_length,
        num_spans=desk_link.num_spans,
        loss_coeff=desk_link.loss_coeff,
        beta2=desk_link.beta2,
        gamma_nl=1e-12,  # effectively linear
    )
    tx = _windowed_burst(linear, power_dbm=-30.0)
    rx = propagate_link(tx, linear, StepConfig(steps_per_span=20), rng_seed=None)
    est = cdc(rx, linear)
    assert rel_err(est.samples, tx.samples) < 1e-8


def test_cdc_zero_spans_is_identity(desk_link):
    link = LinkConfig(
        span_length=80e3,
        num_spans=0,
        loss_coeff=desk_link.loss_coeff,
        beta2=desk_link.beta2,
        gamma_nl=desk_link.gamma_nl,
    )
    tx = _windowed_burst(desk_link)
    out = cdc(tx, link)
    assert rel_err(out.samples, tx.samples) < 1e-14


def test_cdc_is_unitary(desk_link):
    tx = _windowed_burst(desk_link)
    out = cdc(tx, desk_link)
    assert np.sum(np.abs(out.samples) ** 2) == pytest.approx(
        np.sum(np.abs(tx.samples) ** 2), rel=1e-12
    )


def test_dbp_accuracy_improves_with_step_count(desk_link):
    tx = _windowed_burst(desk_link, power_dbm=4.0)
    rx = propagate_link(tx, desk_link, StepConfig(steps_per_span=80), rng_seed=None)
    errs = [
        rel_err(dbp_ssfm(rx, desk_link, steps_per_span=s).samples, tx.samples)
        for s in (1, 5, 20, 80)
    ]
    assert errs[-1] < errs[0]
    assert errs[-1] < 1e-4
    # strictly better at each refinement until the matched-step floor
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_cdc_is_much_worse_than_dbp_at_high_power(desk_link):
    tx = _windowed_burst(desk_link, power_dbm=4.0)
    rx = propagate_link(tx, desk_link, StepConfig(steps_per_span=80), rng_seed=None)
    err_lin = rel_err(cdc(rx, desk_link).samples, tx.samples)
    err_dbp = rel_err(dbp_ssfm(rx, desk_link, steps_per_span=40).samples, tx.samples)
    assert err_lin > 10 * err_dbp


def test_baseline_config_validation():
    assert BaselineConfig().kind == "dbp_ssfm"
    with pytest.raises(InvalidConfigError):
        BaselineConfig(kind="mystery")
    with pytest.raises(InvalidConfigError):
        BaselineConfig(steps_per_span=0)
