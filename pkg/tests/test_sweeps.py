"""Scan machinery: grids, disorder averaging, determinism, checkpointing."""

import numpy as np
import pytest

import drivenaa.sweeps as sweeps
from drivenaa import (ModelParams, ScanAxis, ScanGrid, SweepSettings,
                      amplitude_disorder_scan, frequency_disorder_scan,
                      ipr_size_scaling, static_disorder_scan, uniform_phases)
from drivenaa.model import static_hamiltonian
from drivenaa.floquet import mean_mode_ipr
from drivenaa.sweeps import AMPLITUDE_AXIS, DISORDER_AXIS, OMEGA_AXIS, RATIO_AXIS


def template(n=20):
    return ModelParams(n_sites=n, hopping=1.0, disorder_strength=1.0)


def fast_settings(**kwargs):
    defaults = dict(n_periods=5, samples_per_period=4, static_t_final=50.0,
                    static_n_samples=100)
    defaults.update(kwargs)
    return SweepSettings(**defaults)


class TestGridTypes:
    def test_axis_validation(self):
        with pytest.raises(ValueError, match="ascending"):
            ScanAxis(name="x", values=[1.0, 1.0, 2.0])
        with pytest.raises(ValueError, match="non-empty"):
            ScanAxis(name="x", values=[])
        with pytest.raises(ValueError, match="finite"):
            ScanAxis(name="x", values=[0.0, float("inf")])

    def test_phase_validation(self):
        axis = ScanAxis(name=DISORDER_AXIS, values=[1.0, 2.0])
        with pytest.raises(ValueError, match="2 pi"):
            ScanGrid(axis1=axis, fixed=template(), phases=[0.0, 7.0])
        with pytest.raises(ValueError, match="2 pi"):
            ScanGrid(axis1=axis, fixed=template(), phases=[-0.1])

    def test_shapes_and_indices(self):
        g1 = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [1.0, 2.0, 3.0]),
                      fixed=template(), phases=uniform_phases(2))
        assert g1.shape == (3,)
        assert list(g1.indices()) == [(0,), (1,), (2,)]
        g2 = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [1.0, 2.0]),
                      axis2=ScanAxis(OMEGA_AXIS, [1.0, 2.0, 3.0]),
                      fixed=template(), phases=uniform_phases(2))
        assert g2.shape == (2, 3)
        assert g2.n_cells == 6

    def test_default_phase_set(self):
        phases = uniform_phases()
        assert phases.size == 20
        np.testing.assert_allclose(phases, 2 * np.pi * np.arange(20) / 20)

    def test_random_phases_seeded(self):
        a = sweeps.random_phases(8, 42)
        b = sweeps.random_phases(8, 42)
        np.testing.assert_array_equal(a, b)
        assert np.all((a >= 0) & (a < 2 * np.pi))


class TestStaticScan:
    def test_basic_invariants(self):
        grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [0.5, 3.0]),
                        fixed=template(), phases=uniform_phases(3))
        result = static_disorder_scan(grid, fast_settings())
        assert len(result.cells) == 2
        n = grid.fixed.n_sites
        for cell in result.cells:
            assert not cell.failed
            assert cell.n_phases == 3
            assert -1.0 <= cell.mean_imbalance <= 1.0
            assert 1.0 / n <= cell.mean_ipr <= 1.0
        # stronger disorder localizes more, by both diagnostics
        assert result.cells[1].mean_imbalance > result.cells[0].mean_imbalance
        assert result.cells[1].mean_ipr > result.cells[0].mean_ipr

    def test_metadata_recorded(self):
        grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [1.0]),
                        fixed=template(), phases=uniform_phases(2))
        result = static_disorder_scan(grid, fast_settings())
        assert result.metadata["code_version"]
        assert result.metadata["settings"]["static_t_final"] == 50.0
        assert "wall_time_s" in result.metadata

    def test_matrix_view(self):
        grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [1.0, 2.0]),
                        fixed=template(), phases=uniform_phases(2))
        result = static_disorder_scan(grid, fast_settings())
        mat = result.matrix("mean_imbalance")
        assert mat.shape == (2,)
        assert mat[0] == result.cell(0).mean_imbalance


class TestDeterminismAndPool:
    def test_worker_count_invariance(self):
        grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [1.0, 2.5, 4.0]),
                        fixed=template(), phases=uniform_phases(2))
        serial = static_disorder_scan(grid, fast_settings(workers=1))
        pooled = static_disorder_scan(grid, fast_settings(workers=2))
        for a, b in zip(serial.cells, pooled.cells):
            assert a.mean_imbalance == b.mean_imbalance
            assert a.mean_ipr == b.mean_ipr
            assert a.std_imbalance == b.std_imbalance

    def test_repeat_run_bit_identical(self):
        grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [1.0, 3.0]),
                        axis2=ScanAxis(OMEGA_AXIS, [2.0, 8.0]),
                        fixed=template(n=10), phases=uniform_phases(2))
        r1 = frequency_disorder_scan(grid, fast_settings())
        r2 = frequency_disorder_scan(grid, fast_settings())
        for a, b in zip(r1.cells, r2.cells):
            assert a.mean_imbalance == b.mean_imbalance
            assert a.mean_ipr == b.mean_ipr
            assert a.normalized_imbalance == b.normalized_imbalance


class TestCheckpointing:
    def test_resume_skips_finished_cells(self, tmp_path, monkeypatch):
        path = str(tmp_path / "scan.ckpt")
        grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [1.0, 2.0]),
                        fixed=template(), phases=uniform_phases(2))
        first = static_disorder_scan(grid, fast_settings(checkpoint_path=path))

        def boom(*args, **kwargs):
            raise AssertionError("cells must come from the checkpoint")

        monkeypatch.setattr(sweeps, "evaluate_phase", boom)
        second = static_disorder_scan(grid,
                                      fast_settings(checkpoint_path=path))
        for a, b in zip(first.cells, second.cells):
            assert a.mean_imbalance == b.mean_imbalance

    def test_signature_mismatch_recomputes(self, tmp_path):
        path = str(tmp_path / "scan.ckpt")
        grid1 = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [1.0]),
                         fixed=template(), phases=uniform_phases(2))
        static_disorder_scan(grid1, fast_settings(checkpoint_path=path))
        grid2 = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [2.0]),
                         fixed=template(), phases=uniform_phases(2))
        result = static_disorder_scan(grid2,
                                      fast_settings(checkpoint_path=path))
        assert not result.cells[0].failed
        assert result.cells[0].axis1_value == 2.0


class TestFailureIsolation:
    def test_failed_cell_recorded_not_fatal(self, monkeypatch):
        real = sweeps.evaluate_phase

        def flaky(params, settings):
            if params.disorder_strength == 2.0:
                raise RuntimeError("synthetic cell failure")
            return real(params, settings)

        monkeypatch.setattr(sweeps, "evaluate_phase", flaky)
        grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [1.0, 2.0, 3.0]),
                        fixed=template(), phases=uniform_phases(2))
        result = static_disorder_scan(grid, fast_settings())
        assert result.n_failed == 1
        assert result.cells[1].failed
        assert "synthetic cell failure" in result.cells[1].error
        assert not result.cells[0].failed
        assert not result.cells[2].failed


class TestFrequencyScan:
    def test_ratio_axis_resolves_frequency(self):
        grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [2.0, 4.0]),
                        axis2=ScanAxis(RATIO_AXIS, [0.5, 2.0]),
                        fixed=template(n=10), phases=uniform_phases(2))
        result = frequency_disorder_scan(grid, fast_settings())
        # w = lambda / ratio per cell
        assert result.cell(0, 0).drive_angular_frequency == 4.0
        assert result.cell(0, 1).drive_angular_frequency == 1.0
        assert result.cell(1, 0).drive_angular_frequency == 8.0

    def test_normalized_imbalance_present(self):
        grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [3.0]),
                        axis2=ScanAxis(OMEGA_AXIS, [20.0]),
                        fixed=template(n=10), phases=uniform_phases(2))
        result = frequency_disorder_scan(grid, fast_settings())
        cell = result.cell(0, 0)
        assert cell.baseline_imbalance is not None
        np.testing.assert_allclose(
            cell.normalized_imbalance,
            cell.mean_imbalance / cell.baseline_imbalance)

    def test_validation(self):
        bad = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [3.0]),
                       fixed=template(), phases=uniform_phases(2))
        with pytest.raises(ValueError, match="2-D"):
            frequency_disorder_scan(bad, fast_settings())
        wrong_axis = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [3.0]),
                              axis2=ScanAxis("bogus", [1.0]),
                              fixed=template(), phases=uniform_phases(2))
        with pytest.raises(ValueError, match="axis2"):
            frequency_disorder_scan(wrong_axis, fast_settings())


class TestAmplitudeScan:
    def test_zero_amplitude_column_uses_static_route(self):
        grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [4.0]),
                        axis2=ScanAxis(AMPLITUDE_AXIS, [0.0, 1.0]),
                        fixed=template(n=10), phases=uniform_phases(2))
        result = amplitude_disorder_scan(grid, fast_settings(),
                                         drive_frequency=0.05)
        undriven = result.cell(0, 0)
        assert undriven.drive_angular_frequency == 0.0
        # the A = 0 IPR equals the static eigenvector IPR
        oracle = np.mean([
            mean_mode_ipr(np.linalg.eigh(static_hamiltonian(
                ModelParams(n_sites=10, disorder_strength=4.0,
                            phase=float(phi))))[1])
            for phi in uniform_phases(2)])
        np.testing.assert_allclose(undriven.mean_ipr, oracle, rtol=1e-12)

    def test_validation(self):
        grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [1.0]),
                        axis2=ScanAxis(AMPLITUDE_AXIS, [0.0, 1.0]),
                        fixed=template(), phases=uniform_phases(2))
        with pytest.raises(ValueError, match="lambda >= 2J"):
            amplitude_disorder_scan(grid, fast_settings())


class TestIprSizeScaling:
    def test_single_size_row(self):
        rows = ipr_size_scaling([20], template(), uniform_phases(2))
        assert len(rows) == 1
        assert rows[0]["n_sites"] == 20
        assert 1.0 / 20 <= rows[0]["mean_ipr"] <= 1.0

    def test_validation(self):
        with pytest.raises(ValueError, match="even"):
            ipr_size_scaling([21], template())
        with pytest.raises(ValueError, match="ascending"):
            ipr_size_scaling([20, 20], template())
        with pytest.raises(ValueError, match="non-empty"):
            ipr_size_scaling([], template())

    def test_driven_template_uses_propagator_route(self):
        p = ModelParams(n_sites=10, disorder_strength=3.0, drive_amplitude=3.0,
                        drive_angular_frequency=5.0)
        rows = ipr_size_scaling([10, 12], p, uniform_phases(2))
        for row in rows:
            assert 1.0 / row["n_sites"] <= row["mean_ipr"] <= 1.0


class TestPhaseAverageStability:
    def test_doubling_phases_stays_within_std(self):
        # the 20-realization mean must be stable against doubling the
        # realization count in >= 90% of cells; a small lattice keeps the
        # statistics honest while staying fast
        lams = [2.5, 3.0, 3.5, 4.0, 5.0]
        omegas = [9.0, 15.0]
        settings = fast_settings(n_periods=100, samples_per_period=20)
        grid20 = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, lams),
                          axis2=ScanAxis(OMEGA_AXIS, omegas),
                          fixed=template(n=20), phases=uniform_phases(20))
        grid40 = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, lams),
                          axis2=ScanAxis(OMEGA_AXIS, omegas),
                          fixed=template(n=20), phases=uniform_phases(40))
        r20 = frequency_disorder_scan(grid20, settings)
        r40 = frequency_disorder_scan(grid40, settings)
        hits = 0
        for c20, c40 in zip(r20.cells, r40.cells):
            if abs(c40.mean_imbalance - c20.mean_imbalance) < c20.std_imbalance:
                hits += 1
        assert hits >= 0.9 * len(r20.cells)


class TestMonotoneFrontier:
    def test_ipr_increases_with_frequency(self):
        # coarse three-point check across the frequency transition
        values = []
        for omega in (0.5, 6.0, 18.0):
            grid = ScanGrid(axis1=ScanAxis(DISORDER_AXIS, [3.0]),
                            axis2=ScanAxis(OMEGA_AXIS, [omega]),
                            fixed=template(n=50), phases=uniform_phases(4))
            result = frequency_disorder_scan(
                grid, fast_settings(n_periods=100, samples_per_period=20))
            values.append(result.cell(0, 0).mean_ipr)
        assert values[0] < values[1] < values[2]
