"""Floquet decomposition and averaged IPR, checked against Hermitian
diagonalization plus folding and against direct propagator powers."""

import numpy as np
import pytest

from drivenaa import (FloquetDecomposition, ModelParams, Propagator,
                      UnitarityError, WaveFunction, averaged_ipr,
                      floquet_decompose, fold_quasienergy, mean_mode_ipr,
                      one_period_propagator)
from drivenaa.model import static_hamiltonian


def random_unitary(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def residuals(decomposition, u):
    lam = decomposition.eigenvalues()
    return np.abs(u @ decomposition.modes
                  - decomposition.modes * lam[None, :]).max()


class TestDecomposition:
    def test_static_quasienergies_match_folded_spectrum(self):
        # A = 0: quasienergies are the H0 eigenvalues folded into the zone
        p = ModelParams(n_sites=50, disorder_strength=5.0, phase=0.3,
                        drive_angular_frequency=2.7)
        u = one_period_propagator(p, "stepwise-exponential")
        dec = floquet_decompose(u)
        oracle = np.sort(fold_quasienergy(np.linalg.eigvalsh(
            static_hamiltonian(p)), 2.7))
        np.testing.assert_allclose(dec.quasienergies, oracle, atol=1e-6)

    def test_identity_propagator(self):
        n = 12
        dec = floquet_decompose(Propagator(matrix=np.eye(n, dtype=complex),
                                           period=3.0))
        np.testing.assert_allclose(dec.quasienergies, 0.0, atol=1e-12)
        gram = dec.modes.conj().T @ dec.modes
        np.testing.assert_allclose(gram, np.eye(n), atol=1e-10)

    def test_reconstruction_matches_propagator_powers(self):
        # sum_n c_n e^{-i eps_n k T} u_n  ==  U^k psi(0)  up to k = 100
        p = ModelParams(n_sites=50, disorder_strength=3.0, drive_amplitude=3.0,
                        drive_angular_frequency=2.0, phase=0.9)
        prop = one_period_propagator(p, "stepwise-exponential")
        dec = floquet_decompose(prop)
        psi0 = WaveFunction.site_basis_state(50, 26).amplitudes
        coeffs = dec.modes.conj().T @ psi0
        direct = psi0.copy()
        for k in range(1, 101):
            direct = prop.matrix @ direct
            phases = np.exp(-1j * dec.quasienergies * k * dec.period)
            rebuilt = dec.modes @ (coeffs * phases)
            assert np.abs(rebuilt - direct).max() <= 1e-6

    @pytest.mark.parametrize("seed", range(4))
    def test_modes_are_eigenvectors_random_unitaries(self, seed):
        u = random_unitary(40, seed)
        dec = floquet_decompose(Propagator(matrix=u, period=2.0))
        assert residuals(dec, u) <= 1e-7
        gram_defect = np.abs(dec.modes.conj().T @ dec.modes
                             - np.eye(40)).max()
        assert gram_defect <= 1e-8

    def test_modes_for_nearly_degenerate_spectrum(self):
        # exp(-i H eps) has all eigenvalues within O(eps) of 1
        p = ModelParams(n_sites=30, disorder_strength=5.0, phase=0.2)
        h = static_hamiltonian(p)
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(-1j * w * 1e-9)) @ v.conj().T
        dec = floquet_decompose(Propagator(matrix=u, period=1.0))
        assert residuals(dec, u) <= 1e-7

    def test_quasienergy_zone(self):
        p = ModelParams(n_sites=50, disorder_strength=3.0, drive_amplitude=3.0,
                        drive_angular_frequency=2.0)
        dec = floquet_decompose(one_period_propagator(p))
        w = dec.drive_angular_frequency
        assert np.all(dec.quasienergies > -w / 2.0)
        assert np.all(dec.quasienergies <= w / 2.0)
        assert np.all(np.diff(dec.quasienergies) >= 0.0)

    def test_rejects_non_unitary(self):
        bad = np.eye(4, dtype=complex)
        bad[0, 0] = 1.0 + 1e-6
        with pytest.raises(UnitarityError):
            floquet_decompose(_force(bad))


def _force(matrix):
    """Propagator bypassing validation, to exercise downstream checks."""
    prop = Propagator.__new__(Propagator)
    object.__setattr__(prop, "matrix", matrix)
    object.__setattr__(prop, "period", 1.0)
    return prop


class TestFolding:
    def test_shift_invariance(self):
        # includes the adversarial tie value at exactly +w/2
        w = 1.7
        eps = np.array([-0.6, 0.0, 0.31, 0.85])
        for k in (-3, -1, 1, 2, 7):
            np.testing.assert_allclose(fold_quasienergy(eps + k * w, w),
                                       fold_quasienergy(eps, w), atol=1e-11)

    def test_branch_tie_resolves_up(self):
        w = 2.0
        assert fold_quasienergy(-1.0, w) == 1.0
        assert fold_quasienergy(1.0, w) == 1.0
        assert fold_quasienergy(3.0, w) == 1.0

    def test_phase_factor_unchanged_by_folding(self):
        w = 0.9
        period = 2 * np.pi / w
        eps = 0.37
        for k in (1, 4):
            shifted = eps + k * w
            np.testing.assert_allclose(np.exp(-1j * shifted * period),
                                       np.exp(-1j * eps * period), atol=1e-9)

    def test_rejects_bad_frequency(self):
        with pytest.raises(ValueError):
            fold_quasienergy(1.0, 0.0)


class TestAveragedIpr:
    def test_site_localized_modes_give_one(self):
        dec = FloquetDecomposition(quasienergies=np.zeros(8),
                                   modes=np.eye(8, dtype=complex), period=1.0)
        assert averaged_ipr(dec) == 1.0

    def test_uniform_modes_give_inverse_size(self):
        # discrete Fourier basis: every entry has modulus 1/sqrt(N)
        n = 50
        f = np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
        f /= np.sqrt(n)
        dec = FloquetDecomposition(quasienergies=np.zeros(n), modes=f,
                                   period=1.0)
        np.testing.assert_allclose(averaged_ipr(dec), 1.0 / n, rtol=1e-12)

    def test_deep_localized_static_modes(self):
        p = ModelParams(n_sites=50, disorder_strength=5.0, phase=0.7,
                        drive_angular_frequency=2.7)
        dec = floquet_decompose(one_period_propagator(p))
        assert averaged_ipr(dec) > 0.5

    @pytest.mark.parametrize("seed", range(3))
    def test_bounds_on_random_mode_sets(self, seed):
        n = 30
        u = random_unitary(n, 100 + seed)
        value = mean_mode_ipr(u)
        assert 1.0 / n <= value <= 1.0

    def test_invariant_under_mode_phases_and_permutation(self):
        n = 20
        u = random_unitary(n, 5)
        rng = np.random.default_rng(6)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        perm = rng.permutation(n)
        np.testing.assert_allclose(mean_mode_ipr(u * phases[None, :]),
                                   mean_mode_ipr(u), rtol=1e-12)
        np.testing.assert_allclose(mean_mode_ipr(u[:, perm]),
                                   mean_mode_ipr(u), rtol=1e-12)

    def test_rejects_non_orthonormal_modes(self):
        modes = np.ones((4, 4), dtype=complex)
        dec = FloquetDecomposition(quasienergies=np.zeros(4), modes=modes,
                                   period=1.0)
        with pytest.raises(ValueError, match="orthonormal"):
            averaged_ipr(dec)
