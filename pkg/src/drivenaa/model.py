"""Model definition: parameters and the instantaneous Hamiltonian matrix.

The system is a 1-D tight-binding ring of ``n_sites`` Wannier states with a
quasiperiodic on-site potential whose strength is modulated in time,

    H(t) = J * sum_i (|i><i+1| + |i+1><i|)
           + (lambda + A cos(w t)) * sum_i cos(2 pi beta i + phi) |i><i|

with periodic boundary conditions (site n_sites+1 is site 1) and hbar = 1.
All energies are measured in units of the hopping J, times in 1/J and
angular frequencies in J.  Site indices are 1-based inside the cosine, so
the diagonal entry stored at array position ``i`` is evaluated at site
``i + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

#: Incommensuration ratio used by default; follows the optical-lattice
#: experiments that realize this model with a bichromatic potential.
DEFAULT_INCOMMENSURATION = 532 / 738.2

#: Golden-mean alternative, accepted anywhere a ratio is configurable.
GOLDEN_RATIO_INCOMMENSURATION = (math.sqrt(5.0) - 1.0) / 2.0

#: Static localization threshold of the undriven chain, in units of J.
STATIC_CRITICAL_DISORDER = 2.0

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the driven quasiperiodic chain.

    Parameters
    ----------
    n_sites : int
        Lattice size N, at least 2.
    hopping : float
        Hopping energy J > 0; the energy unit of every other parameter.
    disorder_strength : float
        Quasiperiodic potential strength, >= 0.
    incommensuration : float
        Spatial frequency ratio of the potential (beta).
    phase : float
        Potential offset phi; stored reduced into [0, 2 pi).  Varying it
        produces independent disorder realizations.
    drive_amplitude : float
        Modulation amplitude A >= 0.  A = 0 switches the drive off.
    drive_angular_frequency : float
        Modulation angular frequency w >= 0 (units J).  w = 0 is the legal
        undriven case; operations that need a drive period reject it.
    """

    n_sites: int
    hopping: float = 1.0
    disorder_strength: float = 0.0
    incommensuration: float = DEFAULT_INCOMMENSURATION
    phase: float = 0.0
    drive_amplitude: float = 0.0
    drive_angular_frequency: float = 0.0

    def __post_init__(self):
        if not isinstance(self.n_sites, (int, np.integer)):
            raise ValueError(f"n_sites must be an integer, got {self.n_sites!r}")
        if self.n_sites < 2:
            raise ValueError(f"n_sites must be >= 2, got {self.n_sites}")
        for name in ("hopping", "disorder_strength", "incommensuration",
                     "phase", "drive_amplitude", "drive_angular_frequency"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "n_sites", int(self.n_sites))
        if self.hopping <= 0.0:
            raise ValueError(f"hopping must be > 0, got {self.hopping}")
        if self.disorder_strength < 0.0:
            raise ValueError(
                f"disorder_strength must be >= 0, got {self.disorder_strength}")
        if self.drive_amplitude < 0.0:
            raise ValueError(
                f"drive_amplitude must be >= 0, got {self.drive_amplitude}")
        if self.drive_angular_frequency < 0.0:
            raise ValueError("drive_angular_frequency must be >= 0, got "
                             f"{self.drive_angular_frequency}")
        object.__setattr__(self, "phase", self.phase % TWO_PI)

    @property
    def drive_period(self) -> float:
        """Drive period 2 pi / w.  Raises for the undriven case w = 0."""
        if self.drive_angular_frequency <= 0.0:
            raise ValueError("no drive period exists: drive_angular_frequency "
                             "is 0 (undriven case)")
        return TWO_PI / self.drive_angular_frequency

    @property
    def is_driven(self) -> bool:
        """True when the potential actually varies in time."""
        return self.drive_amplitude > 0.0 and self.drive_angular_frequency > 0.0

    def with_phase(self, phase: float) -> "ModelParams":
        """Copy of these parameters at a different disorder realization."""
        return replace(self, phase=phase)

    def without_drive(self) -> "ModelParams":
        """Copy with the modulation switched off (A = 0, w = 0)."""
        return replace(self, drive_amplitude=0.0, drive_angular_frequency=0.0)


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense Hermitian matrix H(t) together with the time it was built at."""

    entries: np.ndarray
    time: float


def hopping_matrix(n_sites: int, hopping: float = 1.0) -> np.ndarray:
    """Ring hopping matrix: J on every nearest-neighbour bond including the
    (1, N) wrap bond.

    The bonds are accumulated site by site, so for N = 2 the forward and the
    wrap bond land on the same pair of sites and the effective coupling
    doubles to 2J.
    """
    if n_sites < 2:
        raise ValueError(f"n_sites must be >= 2, got {n_sites}")
    k = np.zeros((n_sites, n_sites))
    for i in range(n_sites):
        j = (i + 1) % n_sites
        k[i, j] += hopping
        k[j, i] += hopping
    return k


def potential_profile(params: ModelParams) -> np.ndarray:
    """Unit-strength on-site profile cos(2 pi beta i + phi) for i = 1..N."""
    sites = np.arange(1, params.n_sites + 1)
    return np.cos(TWO_PI * params.incommensuration * sites + params.phase)


def instantaneous_disorder(params: ModelParams, t: float) -> float:
    """Effective potential strength lambda + A cos(w t) at time t."""
    return (params.disorder_strength
            + params.drive_amplitude
            * math.cos(params.drive_angular_frequency * t))


def build_hamiltonian(params: ModelParams, t: float = 0.0) -> HamiltonianMatrix:
    """Assemble the dense Hamiltonian matrix H(t).

    For ``drive_amplitude == 0`` the result is independent of ``t``.

    Raises
    ------
    ValueError
        If ``t`` is not finite (parameter validity is enforced by
        :class:`ModelParams` itself).
    """
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t!r}")
    h = hopping_matrix(params.n_sites, params.hopping)
    diag = instantaneous_disorder(params, t) * potential_profile(params)
    h[np.diag_indices_from(h)] += diag
    return HamiltonianMatrix(entries=h, time=t)


def static_hamiltonian(params: ModelParams) -> np.ndarray:
    """Undriven part H0 alone: hopping plus lambda times the profile."""
    h = hopping_matrix(params.n_sites, params.hopping)
    h[np.diag_indices_from(h)] += params.disorder_strength * potential_profile(params)
    return h


def spectral_norm_bound(params: ModelParams) -> float:
    """Cheap Gershgorin bound on max |H(t)| over the drive cycle:
    2J + lambda + A."""
    return (2.0 * params.hopping + params.disorder_strength
            + params.drive_amplitude)
