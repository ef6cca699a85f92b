"""Scattering-domain backpropagation: rotation law, peeling, end to end."""

import numpy as np
import pytest

from conftest import gaussian_burst, random_burst, rel_err
from nfdbp.channel import ssfm_propagate
from nfdbp.errors import (
    DegeneratePairError,
    InvalidConfigError,
    NonContractivePairError,
    SolitonicContentWarning,
)
from nfdbp.nfddbp import (
    DbpNfdConfig,
    backrotate,
    dbp_nfd,
    inverse_scatter,
    invert_layer,
    node_frequencies,
)
from nfdbp.zscatter import scatter_signal


def test_node_frequencies_are_folded_integers():
    np.testing.assert_array_equal(node_frequencies(8), [0, 1, 2, 3, -4, -3, -2, -1])
    np.testing.assert_array_equal(node_frequencies(4), [0, 1, -2, -1])


def test_backrotate_identity_and_inverse():
    pair = scatter_signal(random_burst(256, +1, amp=0.3, seed=1))
    same = backrotate(pair, 0.0)
    np.testing.assert_array_equal(same.b_coeffs, pair.b_coeffs)
    there = backrotate(pair, 0.017)
    back = backrotate(there, -0.017)
    assert rel_err(back.b_coeffs, pair.b_coeffs) < 1e-12
    np.testing.assert_array_equal(there.a_coeffs, pair.a_coeffs)


def test_backrotate_composes_as_a_group():
    pair = scatter_signal(random_burst(512, -1, amp=0.3, seed=2))
    one = backrotate(backrotate(pair, 0.004), 0.009)
    two = backrotate(pair, 0.013)
    assert rel_err(one.b_coeffs, two.b_coeffs) < 1e-12


def test_backrotate_preserves_node_magnitudes_and_position_tag():
    from nfdbp.zscatter import eval_shifted_roots

    pair = scatter_signal(random_burst(256, +1, amp=0.4, seed=3, x=0.5))
    rot = backrotate(pair, 0.2)
    assert rot.x == pytest.approx(0.3)
    before = np.abs(eval_shifted_roots(pair.b_coeffs, half_shift=False))
    after = np.abs(eval_shifted_roots(rot.b_coeffs, half_shift=False))
    np.testing.assert_allclose(after, before, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("kappa", [+1, -1])
@pytest.mark.parametrize("mode", ["reference", "fast"])
def test_scatter_then_inverse_round_trips(kappa, mode):
    sig = random_burst(512, kappa, amp=0.3, seed=10 + kappa)
    pair = scatter_signal(sig)
    est = inverse_scatter(pair, mode=mode)
    assert rel_err(est.samples, sig.samples) < 1e-11
    assert est.kappa == kappa
    assert est.d == sig.d


def test_inverse_modes_agree_on_non_power_of_two_reference_only():
    sig = random_burst(300, +1, amp=0.2, seed=4)
    pair = scatter_signal(sig)
    est = inverse_scatter(pair, mode="reference")
    assert rel_err(est.samples, sig.samples) < 1e-11
    with pytest.raises(InvalidConfigError):
        inverse_scatter(pair, mode="fast")
    with pytest.raises(InvalidConfigError):
        inverse_scatter(pair, mode="banana")


def test_invert_layer_error_conditions():
    with pytest.raises(DegeneratePairError):
        invert_layer(np.array([0.0 + 0j, 1.0]), np.array([0.5 + 0j, 0.0]), +1)
    # defocusing reflection at or above unity cannot be peeled
    with pytest.raises(NonContractivePairError):
        invert_layer(np.array([0.5 + 0j]), np.array([0.5 + 0j]), -1)
    with pytest.raises(InvalidConfigError):
        invert_layer(np.zeros(2, dtype=complex), np.zeros(3, dtype=complex), +1)


def test_dbp_nfd_zero_distance_reproduces_input():
    for kappa in (+1, -1):
        sig = random_burst(512, kappa, amp=0.3, seed=20 + kappa, x=0.0)
        out = dbp_nfd(sig, DbpNfdConfig(x1=0.0, inverse_mode="fast"))
        assert rel_err(out.samples, sig.samples) < 1e-9


@pytest.mark.parametrize("kappa", [-1, +1])
def test_end_to_end_inverts_split_step_propagation(kappa):
    # forward-propagate a smooth burst, then undo it entirely in the
    # scattering domain; the reconstruction error is discretization bound
    d = 4096
    sig = gaussian_burst(d, amp=1.5, sigma=0.08, f0=0.0, kappa=kappa)
    x1 = 0.005
    rx = ssfm_propagate(sig, x1, 2000)
    for mode in ("fast", "reference"):
        est = dbp_nfd(rx, DbpNfdConfig(x1=x1, inverse_mode=mode))
        assert rel_err(est.samples, sig.samples) < 1e-3
        assert est.x == pytest.approx(0.0, abs=1e-15)


def test_end_to_end_error_shrinks_with_resolution():
    errs = []
    for d in (1024, 4096):
        sig = gaussian_burst(d, amp=1.0, sigma=0.08, kappa=-1)
        rx = ssfm_propagate(sig, 0.004, 1500)
        est = dbp_nfd(rx, DbpNfdConfig(x1=0.004, inverse_mode="fast"))
        errs.append(rel_err(est.samples, sig.samples))
    assert errs[1] < errs[0]


def test_window_padding_round_trips_and_rescales():
    d = 1024
    sig = gaussian_burst(d, amp=1.0, sigma=0.06, kappa=-1)
    x1 = 0.003
    rx = ssfm_propagate(sig, x1, 1000)
    plain = dbp_nfd(rx, DbpNfdConfig(x1=x1, inverse_mode="fast"))
    padded = dbp_nfd(rx, DbpNfdConfig(x1=x1, window_pad=512, inverse_mode="fast"))
    assert padded.d == d
    assert rel_err(padded.samples, sig.samples) < 1e-3
    assert rel_err(plain.samples, sig.samples) < 1e-3
    with pytest.raises(InvalidConfigError):
        dbp_nfd(rx, DbpNfdConfig(x1=x1, window_pad=100))  # 1224 not a power of two


def test_focusing_burst_above_threshold_warns():
    sig = gaussian_burst(512, amp=10.0, sigma=0.1, kappa=+1)  # L1 ~ 2.5
    with pytest.warns(SolitonicContentWarning):
        dbp_nfd(sig, DbpNfdConfig(x1=0.0))


def test_quiet_below_threshold():
    import warnings

    sig = gaussian_burst(512, amp=1.0, sigma=0.1, kappa=+1)  # L1 ~ 0.25
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dbp_nfd(sig, DbpNfdConfig(x1=0.0))


def test_diagnostics_dict_is_filled():
    sig = random_burst(256, -1, amp=0.2, seed=6)

    # no rotation: the scattering pair satisfies the identity to precision
    diag0 = {}
    dbp_nfd(sig, DbpNfdConfig(x1=0.0), diagnostics=diag0)
    assert diag0["unit_circle_residual"] < 1e-10

    # rotation introduces an O(discretization) violation, surfaced not hidden
    diag = {}
    dbp_nfd(sig, DbpNfdConfig(x1=0.001), diagnostics=diag)
    assert 1e-10 < diag["unit_circle_residual"] < 1e-2
    assert 0.0 <= diag["edge_energy_fraction"] <= 1.0


def test_config_validation():
    with pytest.raises(InvalidConfigError):
        DbpNfdConfig(x1=0.1, window_pad=-1)
    with pytest.raises(InvalidConfigError):
        DbpNfdConfig(x1=0.1, inverse_mode="quick")
