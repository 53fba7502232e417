"""Floquet analysis: quasienergies, periodic modes and their localization.

The modes come from a complex Schur decomposition of the (normal) one-period
propagator, which guarantees an orthonormal column set.  Numerically
degenerate eigenvalue clusters are re-diagonalized within their subspace so
the returned vectors stay simultaneous eigenvectors to rounding accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import UnitarityError
from .evolve import Propagator, unitarity_defect, UNITARITY_TOL

#: Eigenvalues closer than this are treated as one degenerate cluster.
CLUSTER_TOL = 1e-10

#: Tolerated deviation of the mode matrix from column orthonormality.
MODE_ORTHONORMALITY_TOL = 1e-8


@dataclass(frozen=True)
class FloquetDecomposition:
    """Eigenmodes of U(T, 0) and the matching quasienergies.

    Attributes
    ----------
    quasienergies : ndarray
        Real energies folded into (-w/2, w/2], ascending; ties at the branch
        cut sit at +w/2.
    modes : ndarray
        Column n is the periodic mode at the start of the cycle expanded in
        the Wannier basis; columns are orthonormal.
    period : float
        Drive period T the propagator was built for.
    """

    quasienergies: np.ndarray
    modes: np.ndarray
    period: float

    @property
    def n_modes(self) -> int:
        return self.modes.shape[1]

    @property
    def drive_angular_frequency(self) -> float:
        return 2.0 * math.pi / self.period

    def eigenvalues(self) -> np.ndarray:
        """Unit-circle eigenvalues exp(-i eps T) matching the modes."""
        return np.exp(-1j * self.quasienergies * self.period)


def fold_quasienergy(energy, angular_frequency: float):
    """Fold real energies into the principal zone (-w/2, w/2].

    Ties at the branch cut resolve to +w/2 so folded spectra are comparable
    across parameter sets; a relative guard band of 1e-12 w around the cut
    absorbs rounding noise from the modulo reduction.
    """
    w = float(angular_frequency)
    if w <= 0.0:
        raise ValueError("angular_frequency must be > 0")
    folded = np.asarray(energy, dtype=float) % w
    folded = np.where(folded > w / 2.0, folded - w, folded)
    folded = np.where(folded < -w / 2.0 + 1e-12 * w, folded + w, folded)
    if np.ndim(energy) == 0:
        return float(folded)
    return folded


def _refine_clusters(u: np.ndarray, eigvals: np.ndarray,
                     vecs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Re-diagonalize numerically degenerate eigenvalue clusters.

    Within a cluster any orthonormal basis of the invariant subspace is a
    valid mode set; rotating with the eigenbasis of the projected Hermitian
    part keeps the columns orthonormal while minimizing the residual.
    """
    n = eigvals.size
    angles = np.angle(eigvals)
    order = np.argsort(angles)
    # cut the circle at its widest angular gap so no cluster straddles the
    # start of the sorted sequence
    sorted_angles = angles[order]
    gaps = np.diff(sorted_angles, append=sorted_angles[0] + 2.0 * math.pi)
    cut = int(np.argmax(gaps)) + 1
    order = np.concatenate([order[cut:], order[:cut]])
    eigvals = eigvals[order]
    vecs = vecs[:, order]
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(eigvals[stop] - eigvals[stop - 1]) < CLUSTER_TOL:
            stop += 1
        if stop - start > 1:
            block = vecs[:, start:stop]
            projected = block.conj().T @ u @ block
            herm = (projected + projected.conj().T) / 2.0
            _, rot = np.linalg.eigh(herm)
            block = block @ rot
            q, _ = np.linalg.qr(block)
            vecs[:, start:stop] = q
            sub = q.conj().T @ u @ q
            eigvals[start:stop] = np.diag(sub)
        start = stop
    return eigvals, vecs


def floquet_decompose(propagator: Propagator) -> FloquetDecomposition:
    """Diagonalize the one-period propagator.

    Parameters
    ----------
    propagator : Propagator
        Must satisfy the unitarity contract (max |U^dag U - I| <= 1e-8).

    Returns
    -------
    FloquetDecomposition
        Modes sorted by ascending quasienergy.

    Raises
    ------
    UnitarityError
        If the input fails its unitarity check.
    RuntimeError
        If the Schur iteration does not converge.
    """
    u = propagator.matrix
    defect = unitarity_defect(u)
    if defect > UNITARITY_TOL:
        raise UnitarityError(f"propagator unitarity defect {defect:.3e} "
                             f"exceeds {UNITARITY_TOL:.0e}")
    try:
        t, q = scipy.linalg.schur(u, output="complex")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise RuntimeError(f"Schur decomposition failed to converge: {exc}")
    eigvals = np.diag(t).copy()
    eigvals, modes = _refine_clusters(u, eigvals, q.copy())

    w = 2.0 * math.pi / propagator.period
    # arg in (-pi, pi] maps to eps in [-w/2, w/2); push the branch tie to +w/2
    quasi = -np.angle(eigvals) / propagator.period
    quasi = np.where(quasi == -w / 2.0, w / 2.0, quasi)
    order = np.argsort(quasi, kind="stable")
    return FloquetDecomposition(quasienergies=quasi[order],
                                modes=modes[:, order],
                                period=propagator.period)


def mean_mode_ipr(modes: np.ndarray) -> float:
    """Average inverse participation ratio of a column-orthonormal mode set:
    (1/N) sum_{i,n} |modes[i, n]|^4."""
    m = np.asarray(modes)
    return float(np.mean(np.sum(np.abs(m) ** 4, axis=0)))


def averaged_ipr(decomposition: FloquetDecomposition) -> float:
    """Averaged IPR of the Floquet modes, in (0, 1].

    1 means every mode sits on a single site; 1/N means uniform spreading.

    Raises
    ------
    ValueError
        If the mode columns are not orthonormal to 1e-8.
    """
    modes = decomposition.modes
    gram_defect = float(np.abs(modes.conj().T @ modes
                               - np.eye(modes.shape[1])).max())
    if gram_defect > MODE_ORTHONORMALITY_TOL:
        raise ValueError(f"modes are not orthonormal: Gram defect "
                         f"{gram_defect:.3e}")
    return mean_mode_ipr(modes)
