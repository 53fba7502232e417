"""Localization diagnostics for the periodically driven Aubry-Andre chain.

The package simulates a 1-D tight-binding ring with a quasiperiodic on-site
potential whose strength is modulated periodically in time, and maps its
localization-delocalization phase diagram with two independent diagnostics:
the time-averaged even/odd density imbalance and the averaged inverse
participation ratio of the periodic (Floquet) modes of the one-cycle
evolution operator.
"""

from ._version import __version__
from .errors import (ConfigError, IntegrationError, NormDriftError,
                     UnitarityError)
from .model import (DEFAULT_INCOMMENSURATION, GOLDEN_RATIO_INCOMMENSURATION,
                    STATIC_CRITICAL_DISORDER, HamiltonianMatrix, ModelParams,
                    build_hamiltonian, hopping_matrix, potential_profile,
                    static_hamiltonian)
from .evolve import (Propagator, WaveFunction, default_step_count, evolve,
                     one_period_propagator, period_propagator_with_prefixes,
                     unitarity_defect)
from .floquet import (FloquetDecomposition, averaged_ipr, floquet_decompose,
                      fold_quasienergy, mean_mode_ipr)
from .observables import (CriticalAmplitude, DensityProfile, ImbalanceTrace,
                          aa_spectrum, critical_amplitude, density_profile,
                          imbalance_trace, propagator_at)
from .sweeps import (CellResult, ScanAxis, ScanGrid, ScanResult,
                     SweepSettings, amplitude_disorder_scan,
                     frequency_disorder_scan, ipr_size_scaling,
                     random_phases, static_disorder_scan, uniform_phases)

__all__ = [
    "__version__",
    "ConfigError", "IntegrationError", "NormDriftError", "UnitarityError",
    "DEFAULT_INCOMMENSURATION", "GOLDEN_RATIO_INCOMMENSURATION",
    "STATIC_CRITICAL_DISORDER", "HamiltonianMatrix", "ModelParams",
    "build_hamiltonian", "hopping_matrix", "potential_profile",
    "static_hamiltonian",
    "Propagator", "WaveFunction", "default_step_count", "evolve",
    "one_period_propagator", "period_propagator_with_prefixes",
    "unitarity_defect",
    "FloquetDecomposition", "averaged_ipr", "floquet_decompose",
    "fold_quasienergy", "mean_mode_ipr",
    "CriticalAmplitude", "DensityProfile", "ImbalanceTrace", "aa_spectrum",
    "critical_amplitude", "density_profile", "imbalance_trace",
    "propagator_at",
    "CellResult", "ScanAxis", "ScanGrid", "ScanResult", "SweepSettings",
    "amplitude_disorder_scan", "frequency_disorder_scan", "ipr_size_scaling",
    "random_phases", "static_disorder_scan", "uniform_phases",
]
