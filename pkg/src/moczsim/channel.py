"""Uniform-linear-array steering, hybrid beamforming, and discrete-time channels.

The array is a half-wavelength ULA.  Transmit beamforming is a single matched
beam per angular segment; receive reduction selects a few orthonormal DFT
codebook beams around the segment.  Channel application realizes fractional
delays by a spectral phase ramp on the zero-padded frame (band-limited
interpolation under ideal Nyquist pulse shaping) and Doppler as a per-sample
phase ramp on the output grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

__all__ = [
    "SPEED_OF_LIGHT",
    "ArrayConfig",
    "Beamformer",
    "LinkBudget",
    "RadarTarget",
    "CommPath",
    "steering",
    "dft_codebook",
    "make_beamformers",
    "radar_gain",
    "comm_gain",
    "rician_gain",
    "fractional_delay",
    "apply_radar_channel",
    "apply_comm_channel",
    "awgn",
]

_ANGLE_TOL = 1e-12


def steering(angle_rad: float, num_antennas: int) -> np.ndarray:
    """ULA response a_n = exp(i*(n-1)*pi*sin(angle)), n = 1..N_a."""
    if abs(angle_rad) > np.pi / 2 + _ANGLE_TOL:
        raise ValueError(f"steering angle must lie in [-pi/2, pi/2], got {angle_rad}")
    if num_antennas < 1:
        raise ValueError("array needs at least one antenna")
    return np.exp(1j * np.pi * np.sin(angle_rad) * np.arange(num_antennas))


@dataclass(frozen=True)
class ArrayConfig:
    """Half-wavelength ULA with a reduced number of RF chains."""

    num_antennas: int = 64
    num_rf_chains: int = 4

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be positive")
        if not 1 <= self.num_rf_chains <= self.num_antennas:
            raise ValueError("need 1 <= num_rf_chains <= num_antennas")


@dataclass(frozen=True)
class Beamformer:
    """Unit-norm Tx beam and orthonormal Rx reduction matrix (N_a x N_rf)."""

    tx_beam: np.ndarray
    rx_matrix: np.ndarray
    beam_angles: tuple[float, ...] = ()


def dft_codebook(num_antennas: int):
    """Orthonormal DFT beam codebook of size D = N_a.

    Returns (broadside angles ascending, matrix of unit-norm columns).  Beam d
    points at sin(angle) = 2*d/D for d in [-D/2, D/2).
    """
    d = np.arange(num_antennas) - num_antennas // 2
    sin_dirs = 2.0 * d / num_antennas
    angles = np.arcsin(sin_dirs)
    n = np.arange(num_antennas)
    book = np.exp(1j * np.pi * np.outer(n, sin_dirs)) / math.sqrt(num_antennas)
    return angles, book


def make_beamformers(
    segment_center: float, segment_width: float, cfg: ArrayConfig
) -> Beamformer:
    """Matched Tx beam at the segment center plus the N_rf nearest DFT beams.

    Codebook beams are ranked by distance of their broadside direction to the
    segment interval, with ties broken by distance to the center and then by
    codebook index, so the selection is deterministic.
    """
    f = steering(segment_center, cfg.num_antennas) / math.sqrt(cfg.num_antennas)
    angles, book = dft_codebook(cfg.num_antennas)
    half = abs(segment_width) / 2.0
    dist_interval = np.maximum(0.0, np.abs(angles - segment_center) - half)
    dist_center = np.abs(angles - segment_center)
    order = np.lexsort((np.arange(angles.size), dist_center, dist_interval))
    chosen = np.sort(order[: cfg.num_rf_chains])
    return Beamformer(
        tx_beam=f,
        rx_matrix=book[:, chosen],
        beam_angles=tuple(float(a) for a in angles[chosen]),
    )


@dataclass(frozen=True)
class LinkBudget:
    """Physical-layer constants of one deployment."""

    eirp_dbm: float = 35.0
    carrier_hz: float = 60.0e9
    bandwidth_hz: float = 100.0e6
    noise_psd: float = 2.0e-21  # W/Hz
    range_m: float = 50.0

    def __post_init__(self):
        for name in ("carrier_hz", "bandwidth_hz", "noise_psd", "range_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def sample_period(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def eirp_watts(self) -> float:
        return 10.0 ** ((self.eirp_dbm - 30.0) / 10.0)

    @property
    def noise_variance(self) -> float:
        """Noise power per complex sample per RF chain, N0 * W."""
        return self.noise_psd * self.bandwidth_hz


def radar_gain(link: LinkBudget, rcs_dbsm: float, range_m: float | None = None) -> float:
    """Two-way power gain |rho|^2 = lambda^2 sigma / ((4 pi)^3 r^4)."""
    r = link.range_m if range_m is None else range_m
    if r <= 0:
        raise ValueError("target range must be positive")
    sigma = 10.0 ** (rcs_dbsm / 10.0)
    return link.wavelength**2 * sigma / ((4.0 * np.pi) ** 3 * r**4)


def comm_gain(link: LinkBudget, range_m: float) -> float:
    """One-way power gain lambda^2 / ((4 pi)^2 d^2); Rician factor applied by caller."""
    if range_m <= 0:
        raise ValueError("path length must be positive")
    return link.wavelength**2 / ((4.0 * np.pi) ** 2 * range_m**2)


@dataclass(frozen=True)
class RadarTarget:
    """Backscatter path: complex gain, angle, round-trip delay, Doppler shift."""

    gain: complex
    angle_rad: float
    delay_s: float
    doppler_hz: float
    rcs_dbsm: float = 10.0

    def __post_init__(self):
        if self.delay_s < 0:
            raise ValueError("delay must be non-negative")
        if abs(self.angle_rad) > np.pi / 2 + _ANGLE_TOL:
            raise ValueError("target angle must lie in [-pi/2, pi/2]")

    @classmethod
    def from_geometry(
        cls,
        link: LinkBudget,
        range_m: float,
        velocity_mps: float,
        angle_deg: float,
        rcs_dbsm: float = 10.0,
        phase_rad: float = 0.0,
    ) -> "RadarTarget":
        """Physical path from range/velocity/angle; Doppler is two-way 2 v f_c / c."""
        amp = math.sqrt(radar_gain(link, rcs_dbsm, range_m))
        return cls(
            gain=amp * np.exp(1j * phase_rad),
            angle_rad=math.radians(angle_deg),
            delay_s=2.0 * range_m / SPEED_OF_LIGHT,
            doppler_hz=2.0 * velocity_mps * link.carrier_hz / SPEED_OF_LIGHT,
            rcs_dbsm=rcs_dbsm,
        )


@dataclass(frozen=True)
class CommPath:
    """One-way propagation path toward the user (isotropic receive antenna)."""

    gain: complex
    aod_rad: float
    delay_s: float
    doppler_hz: float

    def __post_init__(self):
        if self.delay_s < 0:
            raise ValueError("delay must be non-negative")

    @classmethod
    def from_geometry(
        cls,
        link: LinkBudget,
        range_m: float,
        velocity_mps: float,
        aod_deg: float,
        gain_scale: complex = 1.0,
    ) -> "CommPath":
        amp = math.sqrt(comm_gain(link, range_m))
        return cls(
            gain=amp * gain_scale,
            aod_rad=math.radians(aod_deg),
            delay_s=range_m / SPEED_OF_LIGHT,
            doppler_hz=velocity_mps * link.carrier_hz / SPEED_OF_LIGHT,
        )


def rician_gain(rng: np.random.Generator, kappa: float, power: float = 1.0, phase_rad: float | None = None) -> complex:
    """Random tap with line-of-sight to diffuse power ratio kappa and mean power ``power``."""
    if kappa < 0 or power < 0:
        raise ValueError("kappa and power must be non-negative")
    psi = rng.uniform(0.0, 2.0 * np.pi) if phase_rad is None else phase_rad
    los = math.sqrt(kappa / (kappa + 1.0)) * np.exp(1j * psi)
    diffuse = math.sqrt(1.0 / (2.0 * (kappa + 1.0))) * (
        rng.standard_normal() + 1j * rng.standard_normal()
    )
    return complex(math.sqrt(power) * (los + diffuse))


def fractional_delay(samples, shift_samples: float, out_len: int | None = None) -> np.ndarray:
    """Band-limited delay by ``shift_samples`` on a frame of ``out_len`` samples.

    Implemented as a phase ramp on the spectrum of the zero-padded frame; the
    shift is circular on that frame, so energy is conserved exactly for any
    fractional shift.
    """
    x = np.asarray(samples, dtype=complex)
    n = x.size if out_len is None else int(out_len)
    if n < x.size:
        raise ValueError("out_len must not truncate the input")
    padded = np.zeros(n, dtype=complex)
    padded[: x.size] = x
    spec = np.fft.fft(padded)
    ramp = np.exp(-2j * np.pi * np.fft.fftfreq(n) * shift_samples)
    return np.fft.ifft(spec * ramp)


def apply_radar_channel(
    samples,
    targets,
    bf: Beamformer,
    sample_period: float,
    frame_len: int | None = None,
    start_time: float = 0.0,
) -> np.ndarray:
    """Backscatter response at the RF chains for one transmitted frame.

    Parameters
    ----------
    samples : array_like
        Transmit samples (already amplitude-scaled).
    targets : sequence of RadarTarget
        May be empty, in which case a zero frame is returned.
    bf : Beamformer
        Tx beam f and Rx reduction matrix U.
    sample_period : float
        T = 1/W in seconds.
    frame_len : int, optional
        Output frame length N (defaults to the input length).  Delays wrap
        circularly on this frame.
    start_time : float
        Absolute time of sample 0, so Doppler stays coherent across frames.

    Returns
    -------
    ndarray, shape (N_rf, N)
        y[n] = sum_q rho_q U^H a(phi_q) a^H(phi_q) f s(nT - tau_q) e^{2i pi nu_q t_n}.
    """
    if sample_period <= 0:
        raise ValueError("sample_period must be positive")
    x = np.asarray(samples, dtype=complex)
    n = x.size if frame_len is None else int(frame_len)
    n_rf = bf.rx_matrix.shape[1]
    out = np.zeros((n_rf, n), dtype=complex)
    if not targets:
        return out
    t = start_time + np.arange(n) * sample_period
    num_antennas = bf.rx_matrix.shape[0]
    for tg in targets:
        a = steering(tg.angle_rad, num_antennas)
        spatial = tg.gain * (bf.rx_matrix.conj().T @ a) * (a.conj() @ bf.tx_beam)
        delayed = fractional_delay(x, tg.delay_s / sample_period, n)
        delayed *= np.exp(2j * np.pi * tg.doppler_hz * t)
        out += spatial[:, None] * delayed[None, :]
    return out


def apply_comm_channel(samples, paths, tx_beam, sample_period: float) -> np.ndarray:
    """Scalar received sequence at the user over the given multipath set.

    The output spans the input plus the delay spread: length K+1 + L-1 where
    L is the number of whole sample periods covered by the largest delay.
    """
    if not paths:
        raise ValueError("at least one propagation path is required")
    if sample_period <= 0:
        raise ValueError("sample_period must be positive")
    x = np.asarray(samples, dtype=complex)
    tx_beam = np.asarray(tx_beam, dtype=complex)
    max_shift = max(p.delay_s / sample_period for p in paths)
    taps = int(math.ceil(max_shift - 1e-9)) + 1
    n = x.size + taps - 1
    t = np.arange(n) * sample_period
    out = np.zeros(n, dtype=complex)
    num_antennas = tx_beam.size
    for p in paths:
        a = steering(p.aod_rad, num_antennas)
        coeff = p.gain * (a.conj() @ tx_beam)
        delayed = fractional_delay(x, p.delay_s / sample_period, n)
        out += coeff * delayed * np.exp(2j * np.pi * p.doppler_hz * t)
    return out


def awgn(samples, noise_variance: float, rng=None) -> np.ndarray:
    """Add circular complex Gaussian noise with the given per-sample variance."""
    if noise_variance < 0:
        raise ValueError("noise variance must be non-negative")
    x = np.asarray(samples, dtype=complex)
    if noise_variance == 0:
        return x.copy()
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    scale = math.sqrt(noise_variance / 2.0)
    noise = gen.standard_normal(x.shape) + 1j * gen.standard_normal(x.shape)
    return x + scale * noise
