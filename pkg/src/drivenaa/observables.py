"""Localization diagnostics built from density dynamics and the spectrum.

The even/odd imbalance protocol starts one realization per even site
(N/2 of them for even N), evolves each under the full H(t), sums the
site-resolved densities and tracks

    I(t) = (N_e(t) - N_o(t)) / (N_e(t) + N_o(t)),

where N_e and N_o weigh the summed density on even and odd sites.  The
reported number is the running time average of I over [0, t_final], which
approximates the infinite-time limit.  Sites are 1-based: even sites are
2, 4, ..., N (the initially occupied ones).

Propagation routes, chosen per parameter set:

* time-independent H (A = 0 or w = 0): exact spectral propagation,
* driven with the sample grid aligned to the drive period: one-period
  propagator powers combined with intra-period prefix propagators,
* driven, arbitrary grid: a stepwise-exponential sweep across the window
  that records the propagator at every sample time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .evolve import default_step_count, period_propagator_with_prefixes
from .model import (ModelParams, STATIC_CRITICAL_DISORDER, hopping_matrix,
                    potential_profile, static_hamiltonian)

#: Tolerated violation of total density conservation (sum n = N/2).
DENSITY_TOL = 1e-6


@dataclass(frozen=True)
class DensityProfile:
    """Site-resolved density summed over all even-site realizations."""

    site_density: np.ndarray
    time: float

    def __post_init__(self):
        dens = np.asarray(self.site_density, dtype=float)
        n = dens.size
        if np.any(dens < -DENSITY_TOL):
            raise ValueError("site densities must be nonnegative")
        total = float(dens.sum())
        if abs(total - n / 2.0) > DENSITY_TOL * n:
            raise ValueError(f"total density {total} deviates from N/2 = "
                             f"{n / 2.0}; norm was lost along the way")
        object.__setattr__(self, "site_density", dens)
        object.__setattr__(self, "time", float(self.time))


@dataclass(frozen=True)
class ImbalanceTrace:
    """Instantaneous even/odd imbalance samples and their time average."""

    sample_times: np.ndarray
    instantaneous: np.ndarray
    time_average: float


class CriticalAmplitude(NamedTuple):
    """Minimum drive amplitude that sweeps the chain through delocalization.

    ``static_delocalized`` flags inputs below the static transition, where
    the undriven chain is already delocalized and the threshold is 0 by
    convention.
    """

    value: float
    static_delocalized: bool


def critical_amplitude(disorder_strength: float,
                       hopping: float = 1.0) -> CriticalAmplitude:
    """Adiabatic delocalization threshold: A_c = lambda - 2J.

    The slow drive sweeps the effective strength lambda + A cos(w t); the
    chain delocalizes once the sweep reaches the static critical point 2J,
    i.e. for A above lambda - 2J.  For lambda < 2J the static chain is
    already delocalized; the returned value is 0 and the flag is set
    instead of raising.
    """
    lam = float(disorder_strength)
    hop = float(hopping)
    if not (math.isfinite(lam) and math.isfinite(hop)) or hop <= 0 or lam < 0:
        raise ValueError("disorder_strength must be >= 0 and hopping > 0")
    threshold = STATIC_CRITICAL_DISORDER * hop
    if lam < threshold:
        return CriticalAmplitude(value=0.0, static_delocalized=True)
    return CriticalAmplitude(value=lam - threshold, static_delocalized=False)


def aa_spectrum(params: ModelParams) -> np.ndarray:
    """Eigenvalues of the undriven Hamiltonian H0, ascending.

    Drive parameters in ``params`` are ignored.
    """
    return np.linalg.eigvalsh(static_hamiltonian(params))


def _even_odd_split(n_sites: int) -> tuple[np.ndarray, np.ndarray]:
    """0-based row indices of even (2, 4, ..., N) and odd (1, 3, ..., N-1)
    sites."""
    even = np.arange(1, n_sites, 2)
    odd = np.arange(0, n_sites, 2)
    return even, odd


def effective_static_hamiltonian(params: ModelParams) -> np.ndarray:
    """H for time-independent parameter sets.

    With w = 0 but A > 0 the modulation term is the constant A, which simply
    shifts the potential strength.
    """
    h = static_hamiltonian(params)
    if params.drive_angular_frequency == 0.0 and params.drive_amplitude > 0.0:
        h[np.diag_indices_from(h)] += (params.drive_amplitude
                                       * potential_profile(params))
    return h


def _sweep_propagator(params: ModelParams, t_grid: np.ndarray,
                      steps: int | None):
    """Yield U(t, 0) at each requested grid time via midpoint exponentials.

    ``t_grid`` must be ascending and start after 0.  Each inter-sample
    interval is subdivided uniformly at the per-period resolution, so the
    grid points are exact step boundaries.
    """
    n = params.n_sites
    if steps is None:
        steps = default_step_count(params)
    per_unit = steps / params.drive_period
    kin = hopping_matrix(n, params.hopping)
    profile = potential_profile(params)
    diag_idx = np.diag_indices(n)
    u = np.eye(n, dtype=complex)
    t_prev = 0.0
    for t_next in t_grid:
        sub = max(1, math.ceil((t_next - t_prev) * per_unit))
        dt = (t_next - t_prev) / sub
        mids = t_prev + (np.arange(sub) + 0.5) * dt
        strengths = (params.disorder_strength + params.drive_amplitude
                     * np.cos(params.drive_angular_frequency * mids))
        for s in range(sub):
            h = kin.copy()
            h[diag_idx] += strengths[s] * profile
            ew, ev = np.linalg.eigh(h)
            u = (ev * np.exp(-1j * ew * dt)) @ ev.conj().T @ u
        t_prev = t_next
        yield u


def propagator_at(params: ModelParams, t: float, *,
                  steps: int | None = None) -> np.ndarray:
    """Full evolution operator U(t, 0) as a dense matrix."""
    t = float(t)
    if not (math.isfinite(t) and t >= 0.0):
        raise ValueError(f"t must be >= 0 and finite, got {t}")
    n = params.n_sites
    if t == 0.0:
        return np.eye(n, dtype=complex)
    if not params.is_driven:
        w, v = np.linalg.eigh(effective_static_hamiltonian(params))
        return (v * np.exp(-1j * w * t)) @ v.conj().T
    return next(iter(_sweep_propagator(params, np.array([t]), steps)))


def density_profile(params: ModelParams, t: float, *,
                    steps: int | None = None) -> DensityProfile:
    """Summed density of all even-site realizations at one time."""
    n = params.n_sites
    if n % 2 != 0:
        raise ValueError(f"n_sites must be even, got {n}")
    even_cols, _ = _even_odd_split(n)
    u = propagator_at(params, t, steps=steps)
    dens = np.sum(np.abs(u[:, even_cols]) ** 2, axis=1)
    return DensityProfile(site_density=dens, time=t)


def _imbalance_from_block(block: np.ndarray, even_rows: np.ndarray,
                          odd_rows: np.ndarray) -> float:
    dens = np.sum(np.abs(block) ** 2, axis=1)
    n_even = float(dens[even_rows].sum())
    n_odd = float(dens[odd_rows].sum())
    return (n_even - n_odd) / (n_even + n_odd)


def imbalance_trace(params: ModelParams, t_final: float, n_samples: int, *,
                    steps: int | None = None) -> ImbalanceTrace:
    """Even/odd imbalance trace of the density-wave protocol.

    Parameters
    ----------
    params : ModelParams
        ``n_sites`` must be even so the even/odd pattern is defined.
    t_final : float
        Averaging window length, > 0.
    n_samples : int
        Number of uniformly spaced samples in (0, t_final]; the trace also
        includes the exact t = 0 point, where the imbalance is 1.  At least
        2.
    steps : int, optional
        Stepwise-exponential resolution per drive period for the driven
        routes; defaults to :func:`drivenaa.evolve.default_step_count`.

    Returns
    -------
    ImbalanceTrace
        The ``time_average`` field is the trapezoidal mean over
        [0, t_final].
    """
    n = params.n_sites
    if n % 2 != 0:
        raise ValueError(f"n_sites must be even for the even/odd imbalance, "
                         f"got {n}")
    t_final = float(t_final)
    if not (math.isfinite(t_final) and t_final > 0.0):
        raise ValueError(f"t_final must be positive and finite, got {t_final}")
    n_samples = int(n_samples)
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")

    even_rows, odd_rows = _even_odd_split(n)
    even_cols = even_rows  # realizations start on the even sites

    if not params.is_driven:
        times, values = _static_trace(params, t_final, n_samples,
                                      even_rows, odd_rows, even_cols)
    else:
        period = params.drive_period
        n_periods = t_final / period
        aligned = (abs(n_periods - round(n_periods)) < 1e-9 * max(1.0, n_periods)
                   and round(n_periods) >= 1
                   and n_samples % round(n_periods) == 0)
        if aligned:
            times, values = _periodic_trace(params, int(round(n_periods)),
                                            n_samples, steps,
                                            even_rows, odd_rows, even_cols)
        else:
            times, values = _generic_trace(params, t_final, n_samples, steps,
                                           even_rows, odd_rows, even_cols)

    average = float(np.trapezoid(values, times) / (times[-1] - times[0]))
    return ImbalanceTrace(sample_times=times, instantaneous=values,
                          time_average=average)


def _static_trace(params, t_final, n_samples, even_rows, odd_rows, even_cols):
    """Exact spectral propagation for time-independent parameters."""
    w, v = np.linalg.eigh(effective_static_hamiltonian(params))
    v_cols = v.conj().T[:, even_cols]
    times = np.linspace(0.0, t_final, n_samples + 1)
    values = np.empty(times.size)
    values[0] = 1.0
    for k in range(1, times.size):
        block = (v * np.exp(-1j * w * times[k])) @ v_cols
        values[k] = _imbalance_from_block(block, even_rows, odd_rows)
    return times, values


def aligned_imbalance_trace(propagator, prefixes,
                            n_periods: int) -> tuple[np.ndarray, np.ndarray]:
    """Imbalance samples over ``n_periods`` drive cycles from a prebuilt
    one-period propagator and its intra-period prefixes.

    Sample times are k T + s T / len(prefixes); the t = 0 point (value 1) is
    prepended.  Sharing the propagator between this and the Floquet
    diagnostics keeps the two exactly consistent per parameter cell.
    """
    n = propagator.n_sites
    period = propagator.period
    per_period = len(prefixes)
    even_rows, odd_rows = _even_odd_split(n)
    even_cols = even_rows
    n_samples = n_periods * per_period
    times = np.empty(n_samples + 1)
    values = np.empty(n_samples + 1)
    times[0] = 0.0
    values[0] = 1.0
    power = np.eye(n, dtype=complex)
    idx = 1
    for k in range(n_periods):
        for s, prefix in enumerate(prefixes):
            block = (prefix @ power)[:, even_cols]
            values[idx] = _imbalance_from_block(block, even_rows, odd_rows)
            times[idx] = k * period + (s + 1) * period / per_period
            idx += 1
        power = propagator.matrix @ power
    return times, values


def _periodic_trace(params, n_periods, n_samples, steps, even_rows, odd_rows,
                    even_cols):
    """Propagator powers plus intra-period prefixes on an aligned grid."""
    per_period = n_samples // n_periods
    prop, prefixes = period_propagator_with_prefixes(params, per_period,
                                                     steps=steps)
    return aligned_imbalance_trace(prop, prefixes, n_periods)


def _generic_trace(params, t_final, n_samples, steps, even_rows, odd_rows,
                   even_cols):
    """Stepwise sweep for sample grids not aligned with the drive period."""
    times = np.linspace(0.0, t_final, n_samples + 1)
    values = np.empty(times.size)
    values[0] = 1.0
    for k, u in enumerate(_sweep_propagator(params, times[1:], steps), start=1):
        values[k] = _imbalance_from_block(u[:, even_cols], even_rows, odd_rows)
    return times, values
