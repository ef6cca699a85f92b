"""Link-level Monte Carlo experiments: sweeps, persistence, benchmarks.

One experiment sweeps launch power, runs seeded trials through the
simulated link, applies every configured equalizer to the same received
waveform, and aggregates EVM/BER/Q plus nonlinear-spectrum diagnostics.
Seeds are derived per (power, trial) from the master seed, so serial and
parallel executions produce identical reports.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import baselines, diagnostics, txrx
from .channel import LinkConfig, StepConfig, propagate_link
from .errors import InvalidConfigError, UndefinedQFactorError
from .nfddbp import DbpNfdConfig, dbp_nfd
from .normcoord import (
    PhysicalSignal,
    derive_normalization,
    from_normalized,
    normalized_distance,
    resample_normalized,
    to_normalized,
)

SCHEMA_VERSION = 1

CSV_COLUMNS = (
    "power_dBm",
    "equalizer",
    "evm",
    "ber",
    "q_db",
    "l1_norm",
    "soliton_ratio",
    "runtime_ms",
    "trials",
)


@dataclass(frozen=True)
class EqualizerSpec:
    kind: str  # nfd | dbp_ssfm | cdc
    steps_per_span: int = 20

    def __post_init__(self):
        if self.kind not in ("nfd", "dbp_ssfm", "cdc"):
            raise InvalidConfigError(f"unknown equalizer {self.kind!r}")
        if self.steps_per_span < 1:
            raise InvalidConfigError("steps_per_span must be >= 1")

    @property
    def label(self) -> str:
        if self.kind == "dbp_ssfm":
            return f"dbp_ssfm_{self.steps_per_span}"
        return self.kind


@dataclass(frozen=True)
class ExperimentConfig:
    link: LinkConfig
    transceiver: txrx.NyquistConfig | txrx.OfdmConfig
    fmt: str = "qpsk"
    equalizers: tuple[EqualizerSpec, ...] = (EqualizerSpec("nfd"),)
    power_sweep_dbm: tuple[float, ...] = (-4.0, -2.0, 0.0)
    trials: int = 1
    seed: int = 0
    window_size: int = 4096
    guard_mult: float = 1.1
    ase: bool = True
    steps_per_span_forward: int = 80
    nfd_pad: int = 0
    nfd_inverse_mode: str = "fast"
    diag_degree: int = 512
    desk_scale: bool = False

    def __post_init__(self):
        txrx.bits_per_symbol(self.fmt)  # validates the format name
        if self.trials < 1:
            raise InvalidConfigError("trials must be >= 1")
        if not self.power_sweep_dbm:
            raise InvalidConfigError("power sweep must be nonempty")
        if not self.equalizers:
            raise InvalidConfigError("need at least one equalizer")
        if self.window_size < 2 or self.window_size & (self.window_size - 1):
            raise InvalidConfigError("window_size must be a power of two >= 2")
        if self.nfd_inverse_mode not in ("reference", "fast"):
            raise InvalidConfigError("nfd_inverse_mode must be reference or fast")
        if self.guard_mult < 0:
            raise InvalidConfigError("guard_mult must be >= 0")
        if self.steps_per_span_forward < 1:
            raise InvalidConfigError("steps_per_span_forward must be >= 1")
        if self.nfd_pad < 0:
            raise InvalidConfigError("nfd_pad must be >= 0")
        if self.diag_degree < 1:
            raise InvalidConfigError("diag_degree must be >= 1")

    @property
    def transceiver_kind(self) -> str:
        return "ofdm" if isinstance(self.transceiver, txrx.OfdmConfig) else "nyquist"


@dataclass(frozen=True)
class ResultRow:
    power_dbm: float
    equalizer: str
    evm: float            # RMS over trials
    ber: float
    q_db: float
    l1_norm: float        # launched burst, normalized units
    soliton_ratio: float
    runtime_ms: float     # mean per trial
    trials: int           # trials that completed for this cell
    evm_ci: float         # 95% half-width of the per-trial EVM mean


@dataclass
class MetricsReport:
    schema_version: int
    seed: int
    config: dict
    config_hash: str
    rows: list[ResultRow] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "link": asdict(cfg.link),
        "transceiver": {"kind": cfg.transceiver_kind, **asdict(cfg.transceiver)},
        "format": cfg.fmt,
        "equalizers": [asdict(e) for e in cfg.equalizers],
        "power_sweep_dbm": list(cfg.power_sweep_dbm),
        "trials": cfg.trials,
        "seed": cfg.seed,
        "window_size": cfg.window_size,
        "guard_mult": cfg.guard_mult,
        "ase": cfg.ase,
        "steps_per_span_forward": cfg.steps_per_span_forward,
        "nfd_pad": cfg.nfd_pad,
        "nfd_inverse_mode": cfg.nfd_inverse_mode,
        "diag_degree": cfg.diag_degree,
        "desk_scale": cfg.desk_scale,
    }


def config_from_dict(d: dict) -> ExperimentConfig:
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InvalidConfigError(f"unsupported config schema_version {version!r}")
    link = LinkConfig(**d["link"])
    tx = dict(d["transceiver"])
    kind = tx.pop("kind")
    if kind == "nyquist":
        trans = txrx.NyquistConfig(**tx)
    elif kind == "ofdm":
        trans = txrx.OfdmConfig(**tx)
    else:
        raise InvalidConfigError(f"unknown transceiver kind {kind!r}")
    return ExperimentConfig(
        link=link,
        transceiver=trans,
        fmt=d.get("format", "qpsk"),
        equalizers=tuple(EqualizerSpec(**e) for e in d.get("equalizers", [{"kind": "nfd"}])),
        power_sweep_dbm=tuple(d.get("power_sweep_dbm", (-4.0, -2.0, 0.0))),
        trials=d.get("trials", 1),
        seed=d.get("seed", 0),
        window_size=d.get("window_size", 4096),
        guard_mult=d.get("guard_mult", 1.1),
        ase=d.get("ase", True),
        steps_per_span_forward=d.get("steps_per_span_forward", 80),
        nfd_pad=d.get("nfd_pad", 0),
        nfd_inverse_mode=d.get("nfd_inverse_mode", "fast"),
        diag_degree=d.get("diag_degree", 512),
        desk_scale=d.get("desk_scale", False),
    )


def config_from_file(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def config_hash(cfg: ExperimentConfig) -> str:
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def desk_preset(dispersion_sign: str = "normal") -> ExperimentConfig:
    """Small, fast configuration preserving the full pipeline shape."""
    if dispersion_sign == "normal":
        disp = -16.0
    elif dispersion_sign == "anomalous":
        disp = 16.0
    else:
        raise InvalidConfigError("dispersion_sign must be normal or anomalous")
    link = LinkConfig.from_engineering(
        span_km=80.0, num_spans=4, dispersion_ps_nm_km=disp
    )
    trans = txrx.NyquistConfig(baud=56e9, symbols_per_packet=32, oversampling=8)
    return ExperimentConfig(
        link=link,
        transceiver=trans,
        fmt="qpsk",
        equalizers=(
            EqualizerSpec("nfd"),
            EqualizerSpec("dbp_ssfm", steps_per_span=40),
            EqualizerSpec("cdc"),
        ),
        power_sweep_dbm=tuple(float(p) for p in range(-8, 5, 2)),
        trials=20,
        seed=1234,
        window_size=2048,
        guard_mult=1.1,
        steps_per_span_forward=80,
        desk_scale=True,
    )


def _modulate(cfg: ExperimentConfig, rng: np.random.Generator):
    k = txrx.bits_per_symbol(cfg.fmt)
    if cfg.transceiver_kind == "nyquist":
        n_sym = cfg.transceiver.symbols_per_packet
    else:
        n_sym = cfg.transceiver.active_subcarriers * cfg.transceiver.num_symbols
    bits = rng.integers(0, 2, size=k * n_sym)
    symbols = txrx.map_bits(bits, cfg.fmt)
    if cfg.transceiver_kind == "nyquist":
        wave = txrx.nyquist_modulate(symbols, cfg.transceiver)
    else:
        wave = txrx.ofdm_modulate(symbols, cfg.transceiver)
    return symbols, wave


def _demodulate(cfg: ExperimentConfig, wave: PhysicalSignal) -> np.ndarray:
    if cfg.transceiver_kind == "nyquist":
        return txrx.nyquist_demodulate(wave, cfg.transceiver)
    return txrx.ofdm_demodulate(wave, cfg.transceiver)


def _apply_equalizer(
    spec: EqualizerSpec, received: PhysicalSignal, cfg: ExperimentConfig
) -> PhysicalSignal:
    if spec.kind == "cdc":
        return baselines.cdc(received, cfg.link)
    if spec.kind == "dbp_ssfm":
        return baselines.dbp_ssfm(received, cfg.link, spec.steps_per_span)
    params = derive_normalization(cfg.link, received.duration)
    x1 = normalized_distance(cfg.link.total_length, params)
    norm = to_normalized(received, params, x=x1)
    nfd_cfg = DbpNfdConfig(
        x1=x1, window_pad=cfg.nfd_pad, inverse_mode=cfg.nfd_inverse_mode
    )
    out = dbp_nfd(norm, nfd_cfg)
    return from_normalized(out, params, t_start=received.t_start)


def _launch_diagnostics(cfg: ExperimentConfig, windowed: PhysicalSignal) -> dict:
    params = derive_normalization(cfg.link, windowed.duration)
    norm = to_normalized(windowed, params)
    diag = {"l1_norm": diagnostics.l1_norm(norm), "soliton_ratio": 0.0}
    if norm.kappa == +1:
        small = norm if norm.d <= cfg.diag_degree else resample_normalized(norm, cfg.diag_degree)
        diag["soliton_ratio"] = diagnostics.soliton_power_ratio(small).soliton_ratio
    return diag


def _run_cell(cfg: ExperimentConfig, power_index: int, trial: int) -> dict:
    """One (power, trial) cell: everything from bits to per-equalizer EVM."""
    power_dbm = cfg.power_sweep_dbm[power_index]
    out: dict = {"power_index": power_index, "trial": trial, "evm": {}, "runtime_ms": {}, "errors": []}
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(power_index, trial))
    bits_seed, ase_seed = ss.spawn(2)
    rng_bits = np.random.default_rng(bits_seed)

    try:
        symbols, wave = _modulate(cfg, rng_bits)
        scale = math.sqrt(10.0 ** (power_dbm / 10.0) * 1e-3)
        scaled = PhysicalSignal(wave.samples * scale, wave.sample_interval)
        mem = txrx.dispersion_memory(
            cfg.transceiver.bandwidth, cfg.link.beta2, cfg.link.total_length
        )
        frame, windowed = txrx.frame_burst(
            scaled, symbols, guard_time=cfg.guard_mult * mem, window_size=cfg.window_size
        )
    except Exception as exc:  # the whole cell is lost; record it and move on
        out["errors"].append(
            {"power_dbm": power_dbm, "trial": trial, "equalizer": "cell",
             "message": f"{type(exc).__name__}: {exc}"}
        )
        return out

    if trial == 0:
        try:
            out["diag"] = _launch_diagnostics(cfg, windowed)
        except Exception as exc:  # diagnostics failure must not kill the sweep
            out["diag"] = {"l1_norm": float("nan"), "soliton_ratio": float("nan")}
            out["errors"].append(
                {"power_dbm": power_dbm, "trial": trial, "equalizer": "diagnostics",
                 "message": f"{type(exc).__name__}: {exc}"}
            )

    try:
        received = propagate_link(
            windowed,
            cfg.link,
            StepConfig(steps_per_span=cfg.steps_per_span_forward),
            rng_seed=np.random.default_rng(ase_seed) if cfg.ase else None,
        )
    except Exception as exc:
        out["errors"].append(
            {"power_dbm": power_dbm, "trial": trial, "equalizer": "cell",
             "message": f"{type(exc).__name__}: {exc}"}
        )
        return out

    for spec in cfg.equalizers:
        t0 = time.perf_counter()
        try:
            recovered = _apply_equalizer(spec, received, cfg)
            rx_syms = _demodulate(cfg, txrx.payload_waveform(recovered, frame))
            value = txrx.evm(rx_syms, symbols)
        except Exception as exc:
            out["errors"].append(
                {"power_dbm": power_dbm, "trial": trial, "equalizer": spec.label,
                 "message": f"{type(exc).__name__}: {exc}"}
            )
            continue
        out["evm"][spec.label] = value
        out["runtime_ms"][spec.label] = (time.perf_counter() - t0) * 1e3
    return out


def _cell_args(cfg):
    for i in range(len(cfg.power_sweep_dbm)):
        for t in range(cfg.trials):
            yield (cfg, i, t)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> MetricsReport:
    """Sweep launch power with seeded Monte Carlo trials.

    Every equalizer sees the identical received waveform within a trial
    (paired comparison).  Per-cell seeds come from the master seed, so the
    report is reproducible for any worker count.
    """
    report = MetricsReport(
        schema_version=SCHEMA_VERSION,
        seed=cfg.seed,
        config=config_to_dict(cfg),
        config_hash=config_hash(cfg),
    )
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell_star, _cell_args(cfg)))
    else:
        cells = [_run_cell(cfg, i, t) for (cfg, i, t) in _cell_args(cfg)]

    by_power: dict[int, list[dict]] = {}
    for cell in cells:
        by_power.setdefault(cell["power_index"], []).append(cell)
        report.errors.extend(cell["errors"])

    for i, power_dbm in enumerate(cfg.power_sweep_dbm):
        group = sorted(by_power.get(i, []), key=lambda c: c["trial"])
        diag = next((c["diag"] for c in group if "diag" in c), {})
        for spec in cfg.equalizers:
            evms = np.array([c["evm"][spec.label] for c in group if spec.label in c["evm"]])
            times = [c["runtime_ms"][spec.label] for c in group if spec.label in c["runtime_ms"]]
            if len(evms) == 0:
                continue  # every trial errored; the error list tells the story
            evm_rms = float(np.sqrt(np.mean(evms**2)))
            ber = txrx.ber_from_evm(evm_rms, cfg.fmt)
            try:
                q_db = txrx.q_factor(ber)
            except UndefinedQFactorError:
                q_db = float("inf") if ber <= 0.0 else float("-inf")
            ci = 0.0
            if len(evms) > 1:
                ci = float(1.96 * np.std(evms, ddof=1) / np.sqrt(len(evms)))
            report.rows.append(
                ResultRow(
                    power_dbm=float(power_dbm),
                    equalizer=spec.label,
                    evm=evm_rms,
                    ber=ber,
                    q_db=q_db,
                    l1_norm=float(diag.get("l1_norm", float("nan"))),
                    soliton_ratio=float(diag.get("soliton_ratio", float("nan"))),
                    runtime_ms=float(np.mean(times)),
                    trials=int(len(evms)),
                    evm_ci=ci,
                )
            )
    return report


def _run_cell_star(args):
    return _run_cell(*args)


def _fmt(x) -> str:
    # 17 significant digits: parses back to the identical float
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


_ROW_KEYS = {
    "power_dBm": "power_dbm",
    "equalizer": "equalizer",
    "evm": "evm",
    "ber": "ber",
    "q_db": "q_db",
    "l1_norm": "l1_norm",
    "soliton_ratio": "soliton_ratio",
    "runtime_ms": "runtime_ms",
    "trials": "trials",
}


def emit_results(report: MetricsReport, path: str, fmt: str = "csv") -> str:
    """Write the report; CSV rows carry the fixed column set, JSON everything."""
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in report.rows:
                writer.writerow([_fmt(getattr(row, _ROW_KEYS[col])) for col in CSV_COLUMNS])
    elif fmt == "json":
        doc = {
            "schema_version": report.schema_version,
            "seed": report.seed,
            "config_hash": report.config_hash,
            "config": report.config,
            "rows": [asdict(r) for r in report.rows],
            "errors": report.errors,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=True)
            fh.write("\n")
    else:
        raise InvalidConfigError(f"unknown output format {fmt!r}")
    return path


def read_rows_csv(path: str) -> list[dict]:
    """Parse an emitted CSV back into typed row dictionaries."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            row = dict(rec)
            for key in CSV_COLUMNS:
                if key in ("equalizer",):
                    continue
                row[key] = int(row[key]) if key == "trials" else float(row[key])
            out.append(row)
    return out


def _time_grid(calls: dict, repeats: int) -> dict:
    """Best-of-`repeats` wall time in ms for each entry of `calls`
    ({key: (fn, args)}).  Timed passes are interleaved round-robin so a
    stretch of background load cannot poison one entry's best pass
    while leaving its neighbours clean, which would skew their ratios.
    """
    for fn, args in calls.values():
        fn(*args)  # warm caches and FFT plans before the timed passes
    best = {key: math.inf for key in calls}
    for _ in range(repeats):
        for key, (fn, args) in calls.items():
            t0 = time.perf_counter()
            fn(*args)
            best[key] = min(best[key], time.perf_counter() - t0)
    return {key: val * 1e3 for key, val in best.items()}


def bench_scaling(
    sizes: tuple[int, ...] = (4096, 8192, 16384, 32768, 65536),
    span_counts: tuple[int, ...] = (2, 4, 8),
    repeats: int = 3,
    rng_seed: int = 0,
    heavy_repeats: int | None = None,
) -> dict:
    """Measure how the pipeline pieces scale.

    Forward scattering, phase backrotation and (fast-mode) inverse
    scattering are timed per transform size with doubling ratios; the
    full NFD equalizer and split-step DBP are timed against span count
    at fixed size to contrast flat versus linear cost in distance.
    Every stage takes the best of `repeats` timed passes except inverse
    scattering, which uses `heavy_repeats` (default: same as `repeats`)
    so its multi-second large-size calls can be sampled more sparingly.
    """
    from .nfddbp import backrotate, inverse_scatter
    from .normcoord import NormalizedSignal
    from .zscatter import scatter_fast

    for d in sizes:
        if d < 2 or d & (d - 1):
            raise InvalidConfigError("sizes must be powers of two")
    if repeats < 1 or (heavy_repeats is not None and heavy_repeats < 1):
        raise InvalidConfigError("repeats must be at least 1")
    heavy = repeats if heavy_repeats is None else heavy_repeats
    rng = np.random.default_rng(rng_seed)
    result: dict = {"sizes": [], "vs_spans": []}
    light_calls: dict = {}
    heavy_calls: dict = {}
    for d in sizes:
        env = 0.1 * (rng.standard_normal(d) + 1j * rng.standard_normal(d))
        q = NormalizedSignal(env, kappa=+1).samples / d
        pair = scatter_fast(q, +1)
        light_calls[(d, "scatter_ms")] = (scatter_fast, (q, +1))
        light_calls[(d, "rotate_ms")] = (backrotate, (pair, 1e-4))
        heavy_calls[(d, "inverse_ms")] = (inverse_scatter, (pair, "fast"))
    times = _time_grid(light_calls, repeats)
    times.update(_time_grid(heavy_calls, heavy))
    prev: dict[str, float] = {}
    for d in sizes:
        entry = {"d": d}
        for key in ("scatter_ms", "rotate_ms", "inverse_ms"):
            entry[key] = times[(d, key)]
            if prev:
                entry[key.replace("_ms", "_ratio")] = entry[key] / prev[key]
        prev = {k: entry[k] for k in ("scatter_ms", "rotate_ms", "inverse_ms")}
        result["sizes"].append(entry)

    base = desk_preset("normal")
    max_spans = max(span_counts)
    span_calls: dict = {}
    for spans in span_counts:
        link = replace(base.link, num_spans=spans)
        cfg = replace(
            base,
            link=link,
            power_sweep_dbm=(-2.0,),
            trials=1,
            ase=False,
            window_size=4096,
            equalizers=(EqualizerSpec("nfd"), EqualizerSpec("dbp_ssfm", steps_per_span=40)),
            # guard sized for the longest link so the burst geometry is fixed
            guard_mult=1.1 * max_spans / spans,
        )
        rng_cell = np.random.default_rng(rng_seed)
        symbols, wave = _modulate(cfg, rng_cell)
        scale = math.sqrt(10.0 ** (-2.0 / 10.0) * 1e-3)
        scaled = PhysicalSignal(wave.samples * scale, wave.sample_interval)
        mem = txrx.dispersion_memory(cfg.transceiver.bandwidth, link.beta2, link.total_length)
        _, windowed = txrx.frame_burst(
            scaled, symbols, guard_time=cfg.guard_mult * mem, window_size=cfg.window_size
        )
        received = propagate_link(
            windowed, link, StepConfig(steps_per_span=cfg.steps_per_span_forward), rng_seed=None
        )
        span_calls[(spans, "nfd_ms")] = (
            _apply_equalizer,
            (EqualizerSpec("nfd"), received, cfg),
        )
        span_calls[(spans, "dbp_ms")] = (
            _apply_equalizer,
            (EqualizerSpec("dbp_ssfm", steps_per_span=40), received, cfg),
        )
    span_times = _time_grid(span_calls, repeats)
    for spans in span_counts:
        result["vs_spans"].append(
            {
                "spans": spans,
                "nfd_ms": span_times[(spans, "nfd_ms")],
                "dbp_ms": span_times[(spans, "dbp_ms")],
            }
        )
    return result
