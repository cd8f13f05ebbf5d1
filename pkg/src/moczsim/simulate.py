"""End-to-end Monte Carlo experiments: BER sweeps, radar runs, CFAR calibration.

Every run is a pure function of its configuration, including the seed: each
batch or trial derives its own random stream from (seed, purpose, index), and
results are reduced by summation, so worker count and batching never change
the output.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import erfc

from .channel import (
    SPEED_OF_LIGHT,
    ArrayConfig,
    Beamformer,
    LinkBudget,
    RadarTarget,
    apply_radar_channel,
    awgn,
    make_beamformers,
    steering,
)
from .dizet import dizet_decode_batch
from .huffman import ModulationParams, encode_batch
from .radar import (
    CfarConfig,
    EstimateReport,
    cluster_detections,
    correlation_value_at,
    cross_correlate,
    detection_record,
    estimate_delay,
    estimate_doppler,
    music_angles,
    os_cfar,
    sample_covariance,
)

__all__ = [
    "TargetSpec",
    "FrameSchedule",
    "SimConfig",
    "MonteCarloResult",
    "run_ber",
    "run_radar",
    "run_cfar_calibration",
    "load_config",
    "config_from_dict",
    "config_to_dict",
    "write_result",
    "atomic_write_text",
]

CHANNEL_MODELS = ("awgn", "rayleigh_flat", "rician_selective")

# Stand-in frequency-selective profile: line-of-sight tap plus three delayed
# taps at whole sample periods, 3 dB per tap decay, every tap Rician.
_SELECTIVE_TAP_POWERS = np.array([1.0, 0.5, 0.25, 0.125])
_SELECTIVE_TAP_POWERS = _SELECTIVE_TAP_POWERS / _SELECTIVE_TAP_POWERS.sum()
_RICIAN_FACTOR = 10.0

BER_FIELDS = ("snr_db", "ber", "packets", "bit_errors", "bpsk_ref")
RADAR_FIELDS = (
    "range_m",
    "detection_rate",
    "rmse_range_m",
    "rmse_velocity_mps",
    "rmse_angle_deg",
    "false_alarm_rate",
    "trials",
)
CFAR_FIELDS = (
    "pfa_target",
    "pfa_empirical",
    "ci_low",
    "ci_high",
    "cells",
    "detections",
    "alpha",
)


@dataclass(frozen=True)
class TargetSpec:
    """Scenario-level target description in physical units."""

    range_m: float
    velocity_mps: float = 0.0
    angle_deg: float = 0.0
    rcs_dbsm: float = 10.0


@dataclass(frozen=True)
class FrameSchedule:
    """Beam segments and frame timing of one spatio-temporal sweep."""

    segments: tuple[tuple[float, float], ...]  # radians, non-overlapping
    frames_per_cpi: int = 16
    t_cpi: float = 16 * 1024e-8
    t_swc: float = 1e-6  # dead time between segments, no signal model impact

    def __post_init__(self):
        if self.frames_per_cpi < 1:
            raise ValueError("frames_per_cpi must be >= 1")
        if self.t_cpi <= 0 or self.t_swc < 0:
            raise ValueError("t_cpi must be positive and t_swc non-negative")
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        prev_hi = None
        for lo, hi in sorted(self.segments):
            if not (-np.pi / 2 <= lo < hi <= np.pi / 2):
                raise ValueError("segments must be ordered intervals within [-pi/2, pi/2]")
            if prev_hi is not None and lo < prev_hi:
                raise ValueError("segments must not overlap")
            prev_hi = hi

    @property
    def frame_period(self) -> float:
        return self.t_cpi / self.frames_per_cpi


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one simulation campaign."""

    modulation: ModulationParams
    array: ArrayConfig = ArrayConfig()
    link: LinkBudget = LinkBudget()
    schedule: FrameSchedule = FrameSchedule(segments=((-np.pi / 6, np.pi / 6),))
    channel_model: str = "awgn"
    snr_grid_db: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    trials: int = 10_000
    seed: int = 0
    frame_len: int = 1024
    batch_size: int = 16_384
    cfar: CfarConfig = CfarConfig()
    targets: tuple[TargetSpec, ...] = ()
    range_grid_m: tuple[float, ...] = ()
    angle_grid_deg: float = 0.5

    def __post_init__(self):
        if self.channel_model not in CHANNEL_MODELS:
            raise ValueError(f"channel_model must be one of {CHANNEL_MODELS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.snr_grid_db:
            raise ValueError("snr_grid_db must be non-empty")
        if self.frame_len < self.modulation.seq_len:
            raise ValueError("frame_len must cover the transmit sequence")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.range_grid_m and len(self.targets) != 1:
            raise ValueError("range_grid_m sweeps require exactly one target")


@dataclass
class MonteCarloResult:
    """Sweep records with fixed field order for regression-diffable output."""

    kind: str
    records: list[dict]
    extra: dict = field(default_factory=dict)

    _FIELDS = {"ber": BER_FIELDS, "radar": RADAR_FIELDS, "cfar": CFAR_FIELDS}

    @property
    def fields(self) -> tuple[str, ...]:
        return self._FIELDS[self.kind]

    def to_csv(self) -> str:
        lines = [",".join(self.fields)]
        for rec in self.records:
            lines.append(",".join(_format_cell(rec[f]) for f in self.fields))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {"kind": self.kind, "records": self.records}
        doc.update(self.extra)
        return json.dumps(doc, indent=2)


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _rng_for(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def _max_workers() -> int:
    try:
        return max(1, int(os.environ.get("MOCZSIM_THREADS", "1")))
    except ValueError:
        return 1


def _batch_sizes(total: int, batch: int) -> list[int]:
    full, rest = divmod(total, batch)
    return [batch] * full + ([rest] if rest else [])


def _fade_batch(tx: np.ndarray, model: str, rng: np.random.Generator) -> np.ndarray:
    """Apply the selected fading model to a (B, K+1) batch of packets."""
    if model == "awgn":
        return tx
    b = tx.shape[0]
    if model == "rayleigh_flat":
        h = (rng.standard_normal(b) + 1j * rng.standard_normal(b)) / math.sqrt(2.0)
        return tx * h[:, None]
    if model == "rician_selective":
        n_taps = _SELECTIVE_TAP_POWERS.size
        psi = rng.uniform(0.0, 2.0 * np.pi, (b, n_taps))
        los = math.sqrt(_RICIAN_FACTOR / (_RICIAN_FACTOR + 1.0)) * np.exp(1j * psi)
        diffuse = math.sqrt(1.0 / (2.0 * (_RICIAN_FACTOR + 1.0))) * (
            rng.standard_normal((b, n_taps)) + 1j * rng.standard_normal((b, n_taps))
        )
        taps = np.sqrt(_SELECTIVE_TAP_POWERS)[None, :] * (los + diffuse)
        n_out = tx.shape[1] + n_taps - 1
        spec = np.fft.fft(tx, n_out, axis=1) * np.fft.fft(taps, n_out, axis=1)
        return np.fft.ifft(spec, axis=1)
    raise ValueError(f"unknown channel model {model!r}")


def run_ber(cfg: SimConfig) -> MonteCarloResult:
    """Bit error rate sweep of the noncoherent decoder over cfg.snr_grid_db.

    SNR is Eb/N0 with Eb = 1/K (unit packet energy over K payload bits), so
    the per-sample complex noise variance at SNR s dB is 10^(-s/10) / K.  The
    coherent BPSK reference Q(sqrt(2 Eb/N0)) is emitted alongside each point.
    """
    params = cfg.modulation
    k = params.num_bits
    sizes = _batch_sizes(cfg.trials, cfg.batch_size)

    def point(point_idx: int, snr_db: float) -> dict:
        noise_var = 10.0 ** (-snr_db / 10.0) / k

        def batch_errors(batch_idx: int) -> int:
            rng = _rng_for(cfg.seed, 1, point_idx, batch_idx)
            msgs = rng.integers(0, 2, (sizes[batch_idx], k), dtype=np.int8)
            tx = encode_batch(msgs, params)
            rx = awgn(_fade_batch(tx, cfg.channel_model, rng), noise_var, rng)
            bits, _ = dizet_decode_batch(rx, params)
            return int(np.count_nonzero(bits != msgs))

        workers = _max_workers()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                errors = sum(pool.map(batch_errors, range(len(sizes))))
        else:
            errors = sum(batch_errors(i) for i in range(len(sizes)))
        snr_lin = 10.0 ** (snr_db / 10.0)
        return {
            "snr_db": float(snr_db),
            "ber": errors / (cfg.trials * k),
            "packets": cfg.trials,
            "bit_errors": errors,
            "bpsk_ref": float(0.5 * erfc(math.sqrt(snr_lin))),
        }

    records = [point(i, s) for i, s in enumerate(cfg.snr_grid_db)]
    return MonteCarloResult(kind="ber", records=records)


def _segment_for(schedule: FrameSchedule, angle_rad: float) -> tuple[float, float]:
    for lo, hi in schedule.segments:
        if lo <= angle_rad <= hi:
            return lo, hi
    # fall back to the nearest segment
    return min(
        schedule.segments,
        key=lambda seg: min(abs(angle_rad - seg[0]), abs(angle_rad - seg[1])),
    )


def _radar_trial(
    cfg: SimConfig,
    specs: tuple[TargetSpec, ...],
    bf: Beamformer,
    segment: tuple[float, float],
    sweep_idx: int,
    trial: int,
) -> dict:
    """One coherent processing interval: frames, detection, and estimation."""
    rng = _rng_for(cfg.seed, 3, sweep_idx, trial)
    params = cfg.modulation
    link = cfg.link
    t_sample = link.sample_period
    n_frames = cfg.schedule.frames_per_cpi
    frame_period = cfg.schedule.frame_period

    targets = [
        RadarTarget.from_geometry(
            link,
            spec.range_m,
            spec.velocity_mps,
            spec.angle_deg,
            spec.rcs_dbsm,
            phase_rad=rng.uniform(0.0, 2.0 * np.pi),
        )
        for spec in specs
    ]
    # EIRP = element power * array gain; scale so the packet's mean sample
    # power at the elements matches the budget.
    amp = math.sqrt(link.eirp_watts / cfg.array.num_antennas * params.seq_len)
    combiner = bf.rx_matrix.conj().T @ steering(
        (segment[0] + segment[1]) / 2.0, cfg.array.num_antennas
    )
    combiner = combiner / np.linalg.norm(combiner)

    msgs = rng.integers(0, 2, (n_frames, params.num_bits), dtype=np.int8)
    frames_tx = encode_batch(msgs, params)
    profiles = []
    cov = np.zeros((cfg.array.num_rf_chains,) * 2, dtype=complex)
    for j in range(n_frames):
        rx = apply_radar_channel(
            amp * frames_tx[j],
            targets,
            bf,
            t_sample,
            frame_len=cfg.frame_len,
            start_time=j * frame_period,
        )
        rx = awgn(rx, link.noise_variance, rng)
        cov += sample_covariance(rx)
        profiles.append(cross_correlate(frames_tx[j], combiner.conj() @ rx))
    cov /= n_frames

    detections = os_cfar(profiles[0], cfg.cfar)
    clusters = cluster_detections(detections)
    true_cells = [round(tg.delay_s / t_sample) % cfg.frame_len for tg in targets]

    def near_truth(cell: int) -> bool:
        return any(
            min(abs(cell - tc), cfg.frame_len - abs(cell - tc)) <= 2 for tc in true_cells
        )

    false_cells = sum(not near_truth(d.cell) for d in detections)
    out = {
        "false_cells": false_cells,
        "cells": cfg.frame_len,
        "per_target": [],
    }

    matched = [c for c in clusters if near_truth(c.cell)]
    num_sources = min(len(matched), cfg.array.num_rf_chains - 1)
    angles = (
        music_angles(cov, bf.rx_matrix, num_sources, cfg.angle_grid_deg, segment)
        if num_sources
        else np.empty(0)
    )

    frame_times = np.arange(n_frames) * frame_period
    for tg in targets:
        true_cell = round(tg.delay_s / t_sample) % cfg.frame_len
        best = None
        for c in matched:
            gap = min(abs(c.cell - true_cell), cfg.frame_len - abs(c.cell - true_cell))
            if gap <= 2 and (best is None or c.statistic > best.statistic):
                best = c
        if best is None:
            out["per_target"].append(None)
            continue
        delay_hat = estimate_delay(profiles[0], best.cell, t_sample, refine=64)
        if n_frames >= 2:
            phases = [
                float(np.angle(correlation_value_at(p, delay_hat / t_sample)))
                for p in profiles
            ]
            doppler_hat = estimate_doppler(phases, frame_times)
        else:
            doppler_hat = float("nan")
        angle_hat = (
            float(angles[np.argmin(np.abs(angles - tg.angle_rad))])
            if angles.size
            else float("nan")
        )
        report = EstimateReport.from_measurements(
            delay_hat, doppler_hat, angle_hat, link.carrier_hz
        )
        per = detection_record(best, report)
        per["range_err"] = report.range_m - SPEED_OF_LIGHT * tg.delay_s / 2.0
        per["velocity_err"] = report.velocity_mps - SPEED_OF_LIGHT * tg.doppler_hz / (
            2.0 * link.carrier_hz
        )
        per["angle_err_deg"] = math.degrees(angle_hat - tg.angle_rad)
        out["per_target"].append(per)
    return out


def run_radar(cfg: SimConfig, targets: tuple[TargetSpec, ...] | None = None) -> MonteCarloResult:
    """Monte Carlo radar runs: detect, then estimate delay, Doppler, and angle.

    Detection uses OS-CFAR on the first frame of the CPI (which keeps the
    per-cell false alarm probability at its calibrated value); delay comes
    from band-limited peak refinement, Doppler from the correlation-peak
    phases across the CPI frames, and the angle from beam-domain MUSIC on the
    CPI-averaged covariance.  One record per sweep point; with no
    range_grid_m configured there is a single point at the scenario ranges.
    """
    specs = tuple(targets) if targets is not None else cfg.targets
    if cfg.range_grid_m and len(specs) != 1:
        raise ValueError("range sweeps require exactly one target")
    sweep = (
        [
            tuple([replace(specs[0], range_m=r)])
            for r in cfg.range_grid_m
        ]
        if cfg.range_grid_m
        else [specs]
    )

    records = []
    sample_detections: list[list[dict]] = []
    detection_keys = ("cell", "range_m", "velocity_mps", "angle_deg", "statistic", "threshold")
    for sweep_idx, point_specs in enumerate(sweep):
        ref_angle = (
            math.radians(point_specs[0].angle_deg) if point_specs else 0.0
        )
        segment = _segment_for(cfg.schedule, ref_angle)
        bf = make_beamformers(
            (segment[0] + segment[1]) / 2.0, segment[1] - segment[0], cfg.array
        )

        def one_trial(trial: int) -> dict:
            return _radar_trial(cfg, point_specs, bf, segment, sweep_idx, trial)

        workers = _max_workers()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                trials = list(pool.map(one_trial, range(cfg.trials)))
        else:
            trials = [one_trial(t) for t in range(cfg.trials)]

        sample_detections.append(
            [
                {k: per[k] for k in detection_keys}
                for per in trials[0]["per_target"]
                if per is not None
            ]
        )

        range_sq, vel_sq, ang_sq = [], [], []
        detected = 0
        expected = cfg.trials * max(1, len(point_specs))
        false_cells = sum(t["false_cells"] for t in trials)
        scanned = sum(t["cells"] for t in trials)
        for t in trials:
            for per in t["per_target"]:
                if per is None:
                    continue
                detected += 1
                range_sq.append(per["range_err"] ** 2)
                if not math.isnan(per["velocity_err"]):
                    vel_sq.append(per["velocity_err"] ** 2)
                if not math.isnan(per["angle_err_deg"]):
                    ang_sq.append(per["angle_err_deg"] ** 2)

        def rmse(sq: list[float]) -> float:
            return math.sqrt(sum(sq) / len(sq)) if sq else float("nan")

        records.append(
            {
                "range_m": float(point_specs[0].range_m) if point_specs else float("nan"),
                "detection_rate": detected / expected if point_specs else 0.0,
                "rmse_range_m": rmse(range_sq),
                "rmse_velocity_mps": rmse(vel_sq),
                "rmse_angle_deg": rmse(ang_sq),
                "false_alarm_rate": false_cells / scanned,
                "trials": cfg.trials,
            }
        )
    return MonteCarloResult(
        kind="radar",
        records=records,
        extra={"sample_detections": sample_detections},
    )


def run_cfar_calibration(cfg: SimConfig, cells: int | None = None) -> MonteCarloResult:
    """Noise-only false-alarm rate of the configured OS-CFAR detector.

    Post-correlation noise power is exponential, so frames of unit-variance
    circular Gaussian cells are drawn directly.  Returns the empirical rate
    with a binomial 95% confidence interval.
    """
    total = int(cells) if cells is not None else cfg.trials * cfg.frame_len
    need = 100.0 / cfg.cfar.pfa
    if total < need:
        raise ValueError(
            f"insufficient cells: need at least {need:.0f} for pfa={cfg.cfar.pfa}"
        )
    chunk = 65_536
    n_chunks = -(-total // chunk)

    def chunk_hits(idx: int) -> int:
        rng = _rng_for(cfg.seed, 2, idx)
        frame = (
            rng.standard_normal(chunk) + 1j * rng.standard_normal(chunk)
        ) / math.sqrt(2.0)
        return len(os_cfar(frame, cfg.cfar))

    workers = _max_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(chunk_hits, range(n_chunks)))
    else:
        hits = sum(chunk_hits(i) for i in range(n_chunks))
    n_cells = n_chunks * chunk
    rate = hits / n_cells
    half = 1.96 * math.sqrt(max(rate * (1.0 - rate), 1e-300) / n_cells)
    record = {
        "pfa_target": cfg.cfar.pfa,
        "pfa_empirical": rate,
        "ci_low": max(0.0, rate - half),
        "ci_high": rate + half,
        "cells": n_cells,
        "detections": hits,
        "alpha": cfg.cfar.alpha,
    }
    return MonteCarloResult(kind="cfar", records=[record])


# --------------------------------------------------------------------------
# configuration files and result output
# --------------------------------------------------------------------------


def config_from_dict(doc: dict) -> SimConfig:
    """Build a SimConfig from the JSON schema documented in the README."""
    mod = doc.get("modulation", {})
    params = ModulationParams(
        num_bits=int(mod.get("k", 127)),
        radius_tuning=float(mod.get("lambda", 0.5)),
    )
    arr = doc.get("array", {})
    array_cfg = ArrayConfig(
        num_antennas=int(arr.get("n_a", 64)),
        num_rf_chains=int(arr.get("n_rf", 4)),
    )
    lnk = doc.get("link", {})
    link = LinkBudget(
        eirp_dbm=float(lnk.get("eirp", 35.0)),
        carrier_hz=float(lnk.get("f_c", 60.0e9)),
        bandwidth_hz=float(lnk.get("w", 100.0e6)),
        noise_psd=float(lnk.get("noise_psd", 2.0e-21)),
        range_m=float(lnk.get("range", 50.0)),
    )
    frame_len = int(doc.get("frame_len", 1024))
    sch = doc.get("schedule", {})
    segments_deg = sch.get("segments_deg", [[-30.0, 30.0]])
    frames_per_cpi = int(sch.get("frames_per_cpi", 16))
    default_cpi = frames_per_cpi * frame_len / link.bandwidth_hz
    schedule = FrameSchedule(
        segments=tuple(
            (math.radians(lo), math.radians(hi)) for lo, hi in segments_deg
        ),
        frames_per_cpi=frames_per_cpi,
        t_cpi=float(sch.get("t_cpi", default_cpi)),
        t_swc=float(sch.get("t_swc", 1e-6)),
    )
    cfar_doc = doc.get("cfar", {})
    cfar = CfarConfig(
        window=int(cfar_doc.get("window", 12)),
        guard=int(cfar_doc.get("guard", 2)),
        os_rank=int(cfar_doc.get("os_rank", 18)),
        pfa=float(cfar_doc.get("pfa", 1e-4)),
    )
    targets = tuple(
        TargetSpec(
            range_m=float(t["range_m"]),
            velocity_mps=float(t.get("velocity_mps", 0.0)),
            angle_deg=float(t.get("angle_deg", 0.0)),
            rcs_dbsm=float(t.get("rcs_dbsm", 10.0)),
        )
        for t in doc.get("targets", [])
    )
    return SimConfig(
        modulation=params,
        array=array_cfg,
        link=link,
        schedule=schedule,
        channel_model=str(doc.get("channel_model", "awgn")),
        snr_grid_db=tuple(float(s) for s in doc.get("snr_grid_db", [0, 2, 4, 6, 8, 10])),
        trials=int(doc.get("trials", 10_000)),
        seed=int(doc.get("seed", 0)),
        frame_len=frame_len,
        batch_size=int(doc.get("batch_size", 16_384)),
        cfar=cfar,
        targets=targets,
        range_grid_m=tuple(float(r) for r in doc.get("range_grid_m", [])),
        angle_grid_deg=float(doc.get("angle_grid_deg", 0.5)),
    )


def config_to_dict(cfg: SimConfig) -> dict:
    return {
        "modulation": {"k": cfg.modulation.num_bits, "lambda": cfg.modulation.radius_tuning},
        "array": {"n_a": cfg.array.num_antennas, "n_rf": cfg.array.num_rf_chains},
        "link": {
            "eirp": cfg.link.eirp_dbm,
            "f_c": cfg.link.carrier_hz,
            "w": cfg.link.bandwidth_hz,
            "noise_psd": cfg.link.noise_psd,
            "range": cfg.link.range_m,
        },
        "schedule": {
            "segments_deg": [
                [math.degrees(lo), math.degrees(hi)] for lo, hi in cfg.schedule.segments
            ],
            "frames_per_cpi": cfg.schedule.frames_per_cpi,
            "t_cpi": cfg.schedule.t_cpi,
            "t_swc": cfg.schedule.t_swc,
        },
        "channel_model": cfg.channel_model,
        "snr_grid_db": list(cfg.snr_grid_db),
        "trials": cfg.trials,
        "seed": cfg.seed,
        "frame_len": cfg.frame_len,
        "batch_size": cfg.batch_size,
        "cfar": {
            "window": cfg.cfar.window,
            "guard": cfg.cfar.guard,
            "os_rank": cfg.cfar.os_rank,
            "pfa": cfg.cfar.pfa,
        },
        "targets": [
            {
                "range_m": t.range_m,
                "velocity_mps": t.velocity_mps,
                "angle_deg": t.angle_deg,
                "rcs_dbsm": t.rcs_dbsm,
            }
            for t in cfg.targets
        ],
        "range_grid_m": list(cfg.range_grid_m),
        "angle_grid_deg": cfg.angle_grid_deg,
    }


def load_config(path: str | Path) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file and rename, so interrupted runs leave no partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_result(result: MonteCarloResult, out_dir: str | Path, basename: str, cfg: SimConfig | None = None) -> tuple[Path, Path]:
    """Write <basename>.csv and <basename>_summary.json atomically; returns the paths."""
    out_dir = Path(out_dir)
    csv_path = out_dir / f"{basename}.csv"
    json_path = out_dir / f"{basename}_summary.json"
    atomic_write_text(csv_path, result.to_csv())
    summary = {"kind": result.kind, "records": result.records}
    summary.update(result.extra)
    if cfg is not None:
        summary["config"] = config_to_dict(cfg)
    atomic_write_text(json_path, json.dumps(summary, indent=2))
    return csv_path, json_path
