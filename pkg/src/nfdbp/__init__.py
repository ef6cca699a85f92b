"""Digital backpropagation of fiber signals in the nonlinear Fourier domain.

The pipeline recovers a transmitted burst from the received one by
scattering the waveform into polynomial data, undoing the fiber's spatial
evolution as an analytic phase rotation, and inverting the scattering
step.  Supporting modules simulate the coherent link the method is
benchmarked on and the conventional equalizers it is compared against.
"""

from .baselines import BaselineConfig, cdc, dbp_ssfm
from .channel import (
    LinkConfig,
    StepConfig,
    add_ase,
    ase_psd_per_span,
    beta2_from_dispersion,
    loss_coeff_from_db,
    propagate_link,
    ssfm_propagate,
)
from .diagnostics import (
    SpectrumDiag,
    find_discrete_eigenvalues,
    l1_norm,
    soliton_power_ratio,
)
from .errors import (
    DegeneratePairError,
    DegreeTooLargeError,
    GuardTooShortWarning,
    InvalidConfigError,
    NonContractivePairError,
    NormalizerSingularityError,
    SolitonicContentWarning,
    UndefinedQFactorError,
    WindowMismatchError,
)
from .experiment import (
    EqualizerSpec,
    ExperimentConfig,
    MetricsReport,
    ResultRow,
    bench_scaling,
    config_from_dict,
    config_from_file,
    config_hash,
    config_to_dict,
    desk_preset,
    emit_results,
    read_rows_csv,
    run_experiment,
)
from .nfddbp import DbpNfdConfig, backrotate, dbp_nfd, inverse_scatter
from .normcoord import (
    NormalizationParams,
    NormalizedSignal,
    PhysicalSignal,
    derive_normalization,
    from_normalized,
    normalized_distance,
    resample_normalized,
    to_normalized,
)
from .txrx import (
    BurstFrame,
    NyquistConfig,
    OfdmConfig,
    ber_from_evm,
    bits_per_symbol,
    constellation,
    demap_symbols,
    dispersion_memory,
    evm,
    extract_burst,
    frame_burst,
    map_bits,
    nyquist_demodulate,
    nyquist_modulate,
    ofdm_demodulate,
    ofdm_modulate,
    payload_waveform,
    q_factor,
    window_leak_fraction,
)
from .zscatter import (
    ScatteringPair,
    coeffs_from_shifted_values,
    eval_shifted_roots,
    rescale_samples,
    scatter_fast,
    scatter_sequential,
    scatter_signal,
    transfer_product,
    unit_circle_residual,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
