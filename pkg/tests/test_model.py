"""Hamiltonian construction and parameter validation."""

import numpy as np
import pytest

from drivenaa import ModelParams, build_hamiltonian, hopping_matrix
from drivenaa.model import potential_profile, spectral_norm_bound


def params(**kwargs):
    defaults = dict(n_sites=50, hopping=1.0, disorder_strength=3.0)
    defaults.update(kwargs)
    return ModelParams(**defaults)


class TestHamiltonianExamples:
    def test_zero_disorder_ring(self):
        p = ModelParams(n_sites=4, hopping=1.0, disorder_strength=0.0)
        h = build_hamiltonian(p, 0.0).entries
        expected = np.array([
            [0, 1, 0, 1],
            [1, 0, 1, 0],
            [0, 1, 0, 1],
            [1, 0, 1, 0],
        ], dtype=float)
        np.testing.assert_array_equal(h, expected)

    def test_rational_incommensuration_diagonal(self):
        # beta = 1/3 forces diag_i = 2 cos(2 pi i / 3) = (-1, -1, 2)
        p = ModelParams(n_sites=3, hopping=1.0, disorder_strength=2.0,
                        incommensuration=1.0 / 3.0, phase=0.0)
        h = build_hamiltonian(p, 0.0).entries
        np.testing.assert_allclose(np.diag(h), [-1.0, -1.0, 2.0], atol=1e-12)

    def test_drive_cancels_disorder_at_half_period(self):
        # A = lambda and w t = pi: effective strength lambda + A cos(pi) = 0
        p = params(disorder_strength=3.0, drive_amplitude=3.0,
                   drive_angular_frequency=1.0)
        h = build_hamiltonian(p, np.pi).entries
        np.testing.assert_allclose(np.diag(h), 0.0, atol=1e-12)
        np.testing.assert_allclose(h, hopping_matrix(50, 1.0), atol=1e-12)

    def test_periodicity_one_period_apart(self):
        p = params(disorder_strength=3.0, drive_amplitude=3.0,
                    drive_angular_frequency=0.8)
        period = p.drive_period
        for t in (0.0, 0.37, 2.9, 11.0):
            h1 = build_hamiltonian(p, t).entries
            h2 = build_hamiltonian(p, t + period).entries
            assert np.abs(h1 - h2).max() <= 1e-14

    def test_static_when_undriven(self):
        p = params(drive_amplitude=0.0)
        h1 = build_hamiltonian(p, 0.0).entries
        h2 = build_hamiltonian(p, 123.4).entries
        np.testing.assert_array_equal(h1, h2)


class TestHamiltonianInvariants:
    @pytest.mark.parametrize("seed", range(5))
    def test_hermitian_for_random_draws(self, seed):
        rng = np.random.default_rng(seed)
        p = ModelParams(
            n_sites=int(rng.integers(3, 60)),
            hopping=float(rng.uniform(0.2, 2.0)),
            disorder_strength=float(rng.uniform(0.0, 6.0)),
            phase=float(rng.uniform(0.0, 2 * np.pi)),
            drive_amplitude=float(rng.uniform(0.0, 5.0)),
            drive_angular_frequency=float(rng.uniform(0.1, 20.0)),
        )
        h = build_hamiltonian(p, float(rng.uniform(0.0, 50.0))).entries
        scale = np.abs(h).max()
        assert np.abs(h - h.conj().T).max() <= 1e-12 * max(scale, 1.0)

    def test_offdiagonal_structure(self):
        p = params(n_sites=9, hopping=1.3)
        h = build_hamiltonian(p, 0.0).entries
        off = h - np.diag(np.diag(h))
        expected = hopping_matrix(9, 1.3)
        np.testing.assert_array_equal(off, expected)
        # first off-diagonals and the wrap corner only
        mask = np.zeros((9, 9), dtype=bool)
        idx = np.arange(8)
        mask[idx, idx + 1] = mask[idx + 1, idx] = True
        mask[0, -1] = mask[-1, 0] = True
        assert np.all((off != 0) == mask)

    def test_two_site_bonds_coincide(self):
        # N = 2: forward and wrap bond share one pair, coupling doubles
        h = hopping_matrix(2, 1.0)
        np.testing.assert_array_equal(h, [[0.0, 2.0], [2.0, 0.0]])

    def test_drive_linearity(self):
        p = params(disorder_strength=2.5, drive_amplitude=1.7,
                   drive_angular_frequency=3.1)
        t = 0.83
        diff = (build_hamiltonian(p, t).entries
                - build_hamiltonian(p.without_drive(), t).entries)
        expected = (1.7 * np.cos(3.1 * t)) * potential_profile(p)
        np.testing.assert_allclose(np.diag(diff), expected, atol=1e-14)
        np.testing.assert_allclose(diff - np.diag(np.diag(diff)), 0.0,
                                   atol=1e-15)

    def test_norm_bound_is_a_bound(self):
        p = params(disorder_strength=4.0, drive_amplitude=2.0,
                   drive_angular_frequency=1.0)
        bound = spectral_norm_bound(p)
        for t in np.linspace(0.0, p.drive_period, 7):
            h = build_hamiltonian(p, t).entries
            assert np.abs(np.linalg.eigvalsh(h)).max() <= bound + 1e-12


class TestModelParamsValidation:
    def test_rejects_small_lattice(self):
        with pytest.raises(ValueError, match="n_sites"):
            ModelParams(n_sites=1)

    def test_rejects_non_integer_sites(self):
        with pytest.raises(ValueError, match="n_sites"):
            ModelParams(n_sites=10.5)  # type: ignore[arg-type]

    @pytest.mark.parametrize("field,value", [
        ("hopping", float("nan")),
        ("disorder_strength", float("inf")),
        ("drive_amplitude", float("-inf")),
    ])
    def test_rejects_non_finite(self, field, value):
        with pytest.raises(ValueError, match="finite"):
            ModelParams(n_sites=4, **{field: value})

    @pytest.mark.parametrize("field,value,match", [
        ("hopping", 0.0, "hopping"),
        ("hopping", -1.0, "hopping"),
        ("disorder_strength", -0.1, "disorder_strength"),
        ("drive_amplitude", -2.0, "drive_amplitude"),
        ("drive_angular_frequency", -1.0, "drive_angular_frequency"),
    ])
    def test_rejects_out_of_range(self, field, value, match):
        with pytest.raises(ValueError, match=match):
            ModelParams(n_sites=4, **{field: value})

    def test_rejects_non_finite_time(self):
        with pytest.raises(ValueError, match="time"):
            build_hamiltonian(params(), float("nan"))

    def test_phase_normalized(self):
        p = ModelParams(n_sites=4, phase=-1.0)
        assert 0.0 <= p.phase < 2 * np.pi
        np.testing.assert_allclose(p.phase, 2 * np.pi - 1.0)

    def test_drive_period_rejects_undriven(self):
        with pytest.raises(ValueError, match="period"):
            _ = ModelParams(n_sites=4).drive_period

    def test_drive_period_value(self):
        p = ModelParams(n_sites=4, drive_angular_frequency=0.5)
        np.testing.assert_allclose(p.drive_period, 4 * np.pi)
