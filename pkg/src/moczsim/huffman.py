"""Huffman-sequence construction for binary modulation on conjugate-reciprocal zeros.

Each payload bit selects one zero from a conjugate-reciprocal pair sitting at
radius R (bit 1) or 1/R (bit 0) and angle 2*pi*(k-1)/K.  The transmit sequence
is the unit-energy coefficient vector of the polynomial with those zeros.  All
2^K such sequences share a single aperiodic autocorrelation: a central peak of
1 and two end side-peaks of magnitude eta = 1/(R^K + R^-K).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModulationParams",
    "derive_radius",
    "derive_side_peak",
    "encode_zeros",
    "encode",
    "encode_batch",
    "autocorrelation",
    "expected_end_energy",
    "sequence_to_csv",
    "sequence_from_csv",
]


def derive_radius(num_bits: int, radius_tuning: float = 0.5) -> float:
    """Outer zero-circle radius sqrt(1 + 2*lam*sin(pi/K)) for K zero pairs."""
    if num_bits < 1:
        raise ValueError(f"num_bits must be a positive integer, got {num_bits}")
    if radius_tuning <= 0.0:
        raise ValueError(f"radius_tuning must be positive, got {radius_tuning}")
    return float(np.sqrt(1.0 + 2.0 * radius_tuning * np.sin(np.pi / num_bits)))


def derive_side_peak(radius: float, num_bits: int) -> float:
    """Autocorrelation side-peak magnitude 1/(R^K + R^-K), in (0, 1/2)."""
    if radius <= 1.0:
        raise ValueError(
            f"radius must exceed 1 so zeros stay off the unit circle, got {radius}"
        )
    rk = radius**num_bits
    return float(1.0 / (rk + 1.0 / rk))


@dataclass(frozen=True)
class ModulationParams:
    """Codebook geometry for a K-bit packet.

    ``num_bits`` is the number of zero pairs (one payload bit each), so the
    transmit sequence has ``num_bits + 1`` samples.  ``outer_radius`` and
    ``side_peak`` are derived from the tuning constant and cached.
    """

    num_bits: int
    radius_tuning: float = 0.5
    outer_radius: float = field(init=False)
    side_peak: float = field(init=False)

    def __post_init__(self):
        if self.num_bits < 1:
            raise ValueError(f"num_bits must be >= 1, got {self.num_bits}")
        if not 0.0 < self.radius_tuning < 1.0:
            raise ValueError(
                f"radius_tuning must lie in (0, 1), got {self.radius_tuning}"
            )
        r = derive_radius(self.num_bits, self.radius_tuning)
        if r <= 1.0:
            # K = 1 collapses the radius rule to R = 1 and has no valid geometry.
            raise ValueError(f"degenerate geometry for num_bits={self.num_bits}")
        object.__setattr__(self, "outer_radius", r)
        object.__setattr__(self, "side_peak", derive_side_peak(r, self.num_bits))

    @property
    def base_angle(self) -> float:
        """Angular spacing 2*pi/K of the zero positions."""
        return 2.0 * np.pi / self.num_bits

    @property
    def seq_len(self) -> int:
        return self.num_bits + 1


def _as_bits(bits, num_bits: int | None = None) -> np.ndarray:
    m = np.atleast_1d(np.asarray(bits))
    if m.ndim != 1:
        raise ValueError("bit message must be one-dimensional")
    if num_bits is not None and m.size != num_bits:
        raise ValueError(f"expected {num_bits} bits, got {m.size}")
    mi = m.astype(np.int64)
    if np.any((mi != 0) & (mi != 1)) or not np.all(mi == m):
        raise ValueError("bit message entries must be 0 or 1")
    return mi


def encode_zeros(bits, params: ModulationParams) -> np.ndarray:
    """Zero pattern exp(2i*pi*(k-1)/K) * R^(2*m_k - 1) selected by the bits."""
    m = _as_bits(bits, params.num_bits)
    angles = 2.0 * np.pi * np.arange(params.num_bits) / params.num_bits
    return np.exp(1j * angles) * params.outer_radius ** (2 * m - 1)


def _leading_coeff(weights, params: ModulationParams):
    # -sqrt(eta * R^(K - 2*||m||_0)) makes the expanded polynomial unit energy.
    return -np.sqrt(
        params.side_peak * params.outer_radius ** (params.num_bits - 2.0 * weights)
    )


def encode_batch(messages, params: ModulationParams) -> np.ndarray:
    """Encode a batch of bit messages into transmit sequences.

    Parameters
    ----------
    messages : array_like, shape (B, K) or (K,)
        Rows of 0/1 payload bits.
    params : ModulationParams

    Returns
    -------
    ndarray, shape (B, K+1)
        Unit-energy sample sequences, first sample real and positive.

    Notes
    -----
    The polynomial is recovered from its values on the K+1 roots of unity
    rather than by expanding the zero product term by term.  Partial products
    of zeros clustered on an arc grow combinatorially large before cancelling,
    which destroys double precision for K beyond roughly 100; the evaluation
    route is exact up to rounding because the sequence spectrum is within
    [1 - 2*eta, 1 + 2*eta] of flat on the unit circle.
    """
    m = np.atleast_2d(np.asarray(messages))
    if m.ndim != 2 or m.shape[1] != params.num_bits:
        raise ValueError(f"messages must have {params.num_bits} columns")
    if np.any((m != 0) & (m != 1)):
        raise ValueError("bit message entries must be 0 or 1")
    m = m.astype(np.float64)

    K = params.num_bits
    R = params.outer_radius
    n_coef = K + 1
    grid = np.exp(2j * np.pi * np.arange(n_coef) / n_coef)
    pair_angles = np.exp(2j * np.pi * np.arange(K) / K)
    log_outer = np.log(grid[:, None] - R * pair_angles[None, :])
    log_inner = np.log(grid[:, None] - pair_angles[None, :] / R)
    # exp of summed logs equals the zero product; branch offsets cancel in exp.
    evals = np.exp(log_inner.sum(axis=1)[:, None] + (log_outer - log_inner) @ m.T)
    evals *= _leading_coeff(m.sum(axis=1), params)[None, :]

    x = (np.fft.fft(evals, axis=0) / n_coef).T
    x *= np.exp(-1j * np.angle(x[:, :1]))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x


def encode(bits, params: ModulationParams) -> np.ndarray:
    """Encode one bit message; returns the K+1 complex transmit samples."""
    m = _as_bits(bits, params.num_bits)
    return encode_batch(m[None, :], params)[0]


def autocorrelation(x) -> np.ndarray:
    """Aperiodic autocorrelation with index n holding lag n - K.

    For any Huffman sequence the result is (-eta, 0, ..., 1, ..., 0, -eta).
    """
    x = np.asarray(x, dtype=complex)
    if x.size == 0:
        raise ValueError("cannot correlate an empty sequence")
    return np.correlate(x, x, mode="full")


def expected_end_energy(params: ModulationParams) -> float:
    """Mean of |x_0|^2 (= |x_K|^2) over uniformly random messages.

    Closed form 2^-K (1 + R^2)^K / (1 + R^2K), evaluated in log space so the
    intermediate powers cannot overflow.
    """
    K = params.num_bits
    log_r = np.log(params.outer_radius)
    log_val = (
        K * np.log1p(params.outer_radius**2)
        - K * np.log(2.0)
        - np.logaddexp(0.0, 2.0 * K * log_r)
    )
    return float(np.exp(log_val))


def sequence_to_csv(x) -> str:
    """Serialize complex samples as one "re,im" pair per line."""
    x = np.asarray(x, dtype=complex)
    return "\n".join(f"{v.real:.12g},{v.imag:.12g}" for v in x) + "\n"


def sequence_from_csv(text: str) -> np.ndarray:
    """Parse the "re,im" per-line format produced by :func:`sequence_to_csv`."""
    samples = []
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"line {ln}: expected 're,im', got {line!r}")
        samples.append(complex(float(parts[0]), float(parts[1])))
    if not samples:
        raise ValueError("no samples found in CSV input")
    return np.asarray(samples, dtype=complex)
