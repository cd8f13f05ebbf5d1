"""Detection and estimation operators, each checked against an independent route."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moczsim import (
    ArrayConfig,
    CfarConfig,
    EstimateReport,
    ModulationParams,
    SPEED_OF_LIGHT,
    ambiguity_function,
    autocorrelation,
    calibrate_os_alpha,
    cluster_detections,
    correlation_value_at,
    cross_correlate,
    dft_codebook,
    encode,
    estimate_delay,
    estimate_doppler,
    fractional_delay,
    make_beamformers,
    music_angles,
    os_cfar,
    sample_covariance,
    steering,
)


def direct_cross_correlation(x, y):
    """O(N^2) double-sum oracle for the circular cross-correlation."""
    n = y.size
    xp = np.zeros(n, dtype=complex)
    xp[: x.size] = x
    out = np.empty(n, dtype=complex)
    for lag in range(n):
        out[lag] = sum(np.conj(xp[(m - lag) % n]) * y[m] for m in range(n))
    return out


class TestCrossCorrelate:
    def test_self_correlation_peaks_at_zero(self):
        x = encode([1, 0, 1, 1], ModulationParams(4))
        profile = cross_correlate(x, np.concatenate([x, np.zeros(11)]))
        assert int(np.argmax(np.abs(profile))) == 0
        assert abs(profile[0]) == pytest.approx(1.0, abs=1e-9)

    def test_circular_shift_moves_argmax(self):
        x = encode([0, 1, 1, 0, 1], ModulationParams(5))
        frame = np.roll(np.concatenate([x, np.zeros(10)]), 9)
        assert int(np.argmax(np.abs(cross_correlate(x, frame)))) == 9

    def test_matches_direct_double_sum(self):
        rng = np.random.default_rng(3)
        for n in (17, 64):
            x = rng.standard_normal(9) + 1j * rng.standard_normal(9)
            y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            got = cross_correlate(x, y)
            want = direct_cross_correlation(x, y)
            np.testing.assert_allclose(got, want, atol=1e-9 * np.max(np.abs(want)))

    def test_huffman_peak_sidelobe_ratio_is_side_peak(self):
        p = ModulationParams(31)
        x = encode(np.random.default_rng(0).integers(0, 2, 31), p)
        profile = np.abs(cross_correlate(x, np.concatenate([x, np.zeros(64 - 32)])))
        psl = np.max(profile[1:]) / profile[0]
        assert psl == pytest.approx(p.side_peak, abs=1e-9)

    def test_reference_longer_than_frame_raises(self):
        with pytest.raises(ValueError):
            cross_correlate(np.ones(8), np.ones(4))


class TestCalibration:
    def test_pfa_one_gives_zero_alpha(self):
        assert calibrate_os_alpha(12, 18, 1.0) == 0.0

    def test_alpha_decreases_with_pfa(self):
        alphas = [calibrate_os_alpha(12, 18, p) for p in (1e-6, 1e-4, 1e-2, 0.5)]
        assert all(a > b for a, b in zip(alphas, alphas[1:]))

    def test_self_consistency_m24_k18(self):
        alpha = calibrate_os_alpha(12, 18, 1e-4)
        i = np.arange(18)
        pfa = np.prod((24 - i) / (24 - i + alpha))
        assert pfa == pytest.approx(1e-4, rel=1e-9)

    def test_invalid_rank_raises(self):
        with pytest.raises(ValueError):
            calibrate_os_alpha(12, 25, 1e-4)
        with pytest.raises(ValueError):
            calibrate_os_alpha(12, 0, 1e-4)


class TestOsCfar:
    def test_zero_alpha_detects_every_nonzero_cell(self):
        cfg = CfarConfig(window=4, guard=1, os_rank=6, pfa=0.5, alpha=0.0)
        profile = np.ones(64, dtype=complex)
        detections = os_cfar(profile, cfg)
        assert len(detections) == 64

    def test_single_strong_target_in_flat_noise(self):
        cfg = CfarConfig()
        power = np.ones(256)
        power[100] = 100.0  # 20 dB above the flat floor
        detections = os_cfar(np.sqrt(power), cfg)
        assert len(detections) == 1
        assert detections[0].cell == 100
        assert detections[0].statistic > detections[0].threshold

    @settings(max_examples=25, deadline=None)
    @given(log_scale=st.floats(min_value=-6.0, max_value=6.0), seed=st.integers(0, 2**32 - 1))
    def test_scaling_invariance(self, log_scale, seed):
        cfg = CfarConfig(pfa=1e-2)
        rng = np.random.default_rng(seed)
        profile = rng.standard_normal(200) + 1j * rng.standard_normal(200)
        base = os_cfar(profile, cfg)
        scaled = os_cfar(np.exp(log_scale) * profile, cfg)
        assert [d.cell for d in base] == [d.cell for d in scaled]
        for b, s in zip(base, scaled):
            assert s.threshold == pytest.approx(np.exp(2 * log_scale) * b.threshold, rel=1e-9)

    def test_short_frame_raises(self):
        with pytest.raises(ValueError):
            os_cfar(np.ones(10), CfarConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CfarConfig(window=4, os_rank=9)
        with pytest.raises(ValueError):
            CfarConfig(pfa=0.0)

    def test_cluster_detections_keeps_strongest(self):
        dets = os_cfar(
            np.sqrt(np.array([1.0] * 30 + [50.0, 80.0, 60.0] + [1.0] * 31)),
            CfarConfig(window=8, guard=2, os_rank=12, pfa=1e-3),
        )
        clusters = cluster_detections(dets)
        assert len(clusters) == 1
        assert clusters[0].cell == 31


class TestDelayEstimation:
    def test_symmetric_neighbors_give_zero_offset(self):
        profile = np.zeros(32, dtype=complex)
        profile[9:12] = [0.5, 1.0, 0.5]
        assert estimate_delay(profile, 10, 1e-8) == pytest.approx(10e-8, abs=1e-18)

    @settings(max_examples=50, deadline=None)
    @given(
        offset=st.floats(min_value=-0.49, max_value=0.49),
        curvature=st.floats(min_value=0.1, max_value=5.0),
        headroom=st.floats(min_value=0.0, max_value=10.0),
    )
    def test_exact_on_true_quadratic_triples(self, offset, curvature, headroom):
        cells = np.arange(-1, 2)
        # keep all three samples non-negative: they stand in for magnitudes
        peak = 2.3 * curvature + headroom
        triple = peak - curvature * (cells - offset) ** 2
        profile = np.zeros(16)
        profile[4:7] = triple
        got = estimate_delay(profile.astype(complex), 5, 1.0)
        assert got == pytest.approx(5 + offset, abs=1e-9)

    def test_integer_delay_is_exact(self):
        x = encode(np.random.default_rng(1).integers(0, 2, 31), ModulationParams(31))
        frame = fractional_delay(x, 12.0, 128)
        profile = cross_correlate(x, frame)
        peak = int(np.argmax(np.abs(profile)))
        assert estimate_delay(profile, peak, 1e-8) == pytest.approx(12e-8, abs=1e-15)

    def test_fractional_delay_with_refinement(self):
        x = encode(np.random.default_rng(2).integers(0, 2, 127), ModulationParams(127))
        frame = fractional_delay(x, 40.25, 256)
        profile = cross_correlate(x, frame)
        peak = int(np.argmax(np.abs(profile)))
        got = estimate_delay(profile, peak, 1e-8, refine=64)
        assert got == pytest.approx(40.25e-8, abs=0.05e-8)

    def test_degenerate_curvature_returns_peak_cell(self):
        profile = np.ones(16, dtype=complex)
        assert estimate_delay(profile, 5, 1.0) == pytest.approx(5.0)

    def test_refine_must_be_positive(self):
        with pytest.raises(ValueError):
            estimate_delay(np.ones(16, dtype=complex), 5, 1.0, refine=0)

    def test_correlation_value_at_matches_cells(self):
        rng = np.random.default_rng(4)
        profile = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        for lag in (0, 5, 31):
            assert correlation_value_at(profile, lag) == pytest.approx(profile[lag], abs=1e-9)


class TestDopplerEstimation:
    def test_constant_phases_give_zero(self):
        times = np.arange(8) * 1e-3
        assert estimate_doppler(np.full(8, 0.7), times) == pytest.approx(0.0, abs=1e-12)

    def test_exact_linear_phase(self):
        times = np.arange(16) * 1e-3
        phases = 2 * np.pi * 100.0 * times + 0.3
        assert estimate_doppler(phases, times) == pytest.approx(100.0, abs=1e-6)

    def test_wraps_are_unwrapped(self):
        times = np.arange(16) * 1e-3
        phases = np.angle(np.exp(1j * 2 * np.pi * 230.0 * times))
        assert estimate_doppler(phases, times) == pytest.approx(230.0, abs=1e-6)

    def test_full_cycle_per_frame_aliases_to_zero(self):
        times = np.arange(16) * 1e-3
        phases = np.angle(np.exp(1j * 2 * np.pi * 1000.0 * times))
        assert estimate_doppler(phases, times) == pytest.approx(0.0, abs=1e-9)

    def test_weight_hook_matches_uniform_when_equal(self):
        times = np.arange(8) * 1e-3
        phases = 2 * np.pi * 55.0 * times
        uniform = estimate_doppler(phases, times)
        weighted = estimate_doppler(phases, times, weights=np.full(8, 3.0))
        assert weighted == pytest.approx(uniform, abs=1e-12)

    def test_too_few_frames_raise(self):
        with pytest.raises(ValueError):
            estimate_doppler([0.1], [0.0])


class TestCovariance:
    def test_constant_snapshot_is_rank_one(self):
        v = np.array([1.0, 1j, -0.5])
        cov = sample_covariance(np.tile(v[:, None], (1, 10)))
        np.testing.assert_allclose(cov, np.outer(v, v.conj()), atol=1e-12)
        assert np.linalg.matrix_rank(cov, tol=1e-9) == 1

    def test_white_noise_converges_to_identity(self):
        rng = np.random.default_rng(8)
        n = 1_000_000
        y = rng.standard_normal((4, n)) + 1j * rng.standard_normal((4, n))
        cov = sample_covariance(y)  # per-sample variance 2
        assert np.max(np.abs(cov - 2 * np.eye(4))) < 0.01 * 2

    def test_hermitian_psd(self):
        rng = np.random.default_rng(9)
        y = rng.standard_normal((3, 50)) + 1j * rng.standard_normal((3, 50))
        cov = sample_covariance(y)
        np.testing.assert_allclose(cov, cov.conj().T, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(cov)) > -1e-12


class TestMusic:
    def setup_method(self):
        self.cfg = ArrayConfig(64, 4)
        self.segment = (-np.radians(8.0), np.radians(8.0))
        self.bf = make_beamformers(0.0, self.segment[1] - self.segment[0], self.cfg)

    def _covariance(self, angles_rad, snr=100.0, snapshots=4096, seed=0):
        rng = np.random.default_rng(seed)
        y = np.zeros((4, snapshots), dtype=complex)
        for ang in angles_rad:
            b = self.bf.rx_matrix.conj().T @ steering(ang, 64)
            power = snr * 4 / np.linalg.norm(b) ** 2  # per-chain SNR vs unit noise
            s = np.sqrt(power / 2) * (
                rng.standard_normal(snapshots) + 1j * rng.standard_normal(snapshots)
            )
            y += np.outer(b, s)
        y += (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)) / np.sqrt(2)
        return sample_covariance(y)

    def test_single_noiseless_on_grid_target(self):
        angle = np.radians(2.0)
        b = self.bf.rx_matrix.conj().T @ steering(angle, 64)
        cov = np.outer(b, b.conj())
        got = music_angles(cov, self.bf.rx_matrix, 1, 0.5, self.segment)
        assert np.degrees(got[0]) == pytest.approx(2.0, abs=0.1)

    def test_single_noisy_target(self):
        cov = self._covariance([np.radians(1.3)], snr=100.0)
        got = music_angles(cov, self.bf.rx_matrix, 1, 0.5, self.segment)
        assert np.degrees(got[0]) == pytest.approx(1.3, abs=0.5)

    def test_two_targets_ten_degrees_apart(self):
        # spread beams chosen by hand to cover both targets
        _, book = dft_codebook(64)
        rx = book[:, [32 - 3, 32 - 1, 32 + 1, 32 + 3]]
        angles = [np.radians(-4.8), np.radians(5.2)]
        rng = np.random.default_rng(5)
        y = np.zeros((4, 8192), dtype=complex)
        for ang in angles:
            b = rx.conj().T @ steering(ang, 64)
            power = 100.0 * 4 / np.linalg.norm(b) ** 2
            s = np.sqrt(power / 2) * (
                rng.standard_normal(8192) + 1j * rng.standard_normal(8192)
            )
            y += np.outer(b, s)
        y += (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)) / np.sqrt(2)
        got = np.sort(music_angles(sample_covariance(y), rx, 2, 0.5, (-np.radians(9), np.radians(9))))
        assert np.degrees(got[0]) == pytest.approx(-4.8, abs=1.0)
        assert np.degrees(got[1]) == pytest.approx(5.2, abs=1.0)

    def test_zero_sources_gives_empty(self):
        cov = np.eye(4, dtype=complex)
        assert music_angles(cov, self.bf.rx_matrix, 0).size == 0

    def test_too_many_sources_raise(self):
        with pytest.raises(ValueError):
            music_angles(np.eye(4, dtype=complex), self.bf.rx_matrix, 4)

    def test_scale_invariance_of_argmax(self):
        cov = self._covariance([np.radians(-2.6)], snr=50.0, seed=3)
        a1 = music_angles(cov, self.bf.rx_matrix, 1, 0.5, self.segment)
        a2 = music_angles(5.0 * cov, self.bf.rx_matrix, 1, 0.5, self.segment)
        np.testing.assert_allclose(a1, a2, atol=1e-12)


class TestAmbiguityFunction:
    def test_unit_energy_origin(self):
        x = encode(np.random.default_rng(0).integers(0, 2, 31), ModulationParams(31))
        surf = ambiguity_function(x, 8, 16)
        lag0 = np.where(surf.lags == 0)[0][0]
        dop0 = np.where(surf.doppler_cycles == 0)[0][0]
        assert surf.values[lag0, dop0] == pytest.approx(1.0, abs=1e-9)

    def test_zero_doppler_cut_equals_autocorrelation(self):
        p = ModulationParams(31)
        x = encode(np.random.default_rng(1).integers(0, 2, 31), p)
        surf = ambiguity_function(x, 31, 32)
        dop0 = np.where(surf.doppler_cycles == 0)[0][0]
        a = np.abs(autocorrelation(x))
        np.testing.assert_allclose(surf.values[:, dop0], a, atol=1e-9)

    def test_symmetry_under_joint_negation(self):
        x = encode(np.random.default_rng(2).integers(0, 2, 15), ModulationParams(15))
        surf = ambiguity_function(x, 10, 16)
        dop0 = np.where(surf.doppler_cycles == 0)[0][0]
        for li in range(surf.lags.size):
            for pi in range(surf.doppler_cycles.size):
                lj = np.where(surf.lags == -surf.lags[li])[0]
                pj = np.where(surf.doppler_cycles == -surf.doppler_cycles[pi])[0]
                if lj.size and pj.size:
                    assert surf.values[li, pi] == pytest.approx(
                        surf.values[lj[0], pj[0]], abs=1e-9
                    )
        assert dop0 == surf.doppler_cycles.size // 2

    def test_max_lag_bounds(self):
        with pytest.raises(ValueError):
            ambiguity_function(np.ones(8, dtype=complex), 8, 16)


def test_estimate_report_unit_conversions():
    rep = EstimateReport.from_measurements(
        delay_s=1e-6, doppler_hz=4000.0, angle_rad=0.1, carrier_hz=60.0e9
    )
    assert rep.range_m == pytest.approx(SPEED_OF_LIGHT * 1e-6 / 2)
    assert rep.velocity_mps == pytest.approx(SPEED_OF_LIGHT * 4000.0 / (2 * 60.0e9))
    # one range cell at 100 MHz bandwidth is c/(2W)
    assert SPEED_OF_LIGHT / (2 * 100e6) == pytest.approx(1.499, abs=1e-3)


def test_detection_record_schema():
    import json

    from moczsim import Detection, detection_record

    det = Detection(cell=42, statistic=12.5, threshold=3.25)
    rep = EstimateReport.from_measurements(
        delay_s=4.2e-7, doppler_hz=8000.0, angle_rad=np.radians(1.5), carrier_hz=60.0e9
    )
    record = detection_record(det, rep)
    assert set(record) == {
        "cell",
        "range_m",
        "velocity_mps",
        "angle_deg",
        "statistic",
        "threshold",
    }
    assert record["cell"] == 42
    assert record["angle_deg"] == pytest.approx(1.5)
    json.dumps(record)  # must be JSON-serializable as-is
