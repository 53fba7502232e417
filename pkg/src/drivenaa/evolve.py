"""Time evolution: Schrodinger integration and the one-period propagator.

Two independent constructions of the time-ordered propagator U(T, 0) are
provided and cross-checked against each other in the test suite:

``column-integration``
    Adaptive RK45 integration of the matrix equation dU/dt = -i H(t) U.
    This integrates all N basis columns under one shared step controller.
    Its unitarity defect tracks the integration error, so very long periods
    need tighter tolerances than the defaults.

``stepwise-exponential``
    Split [0, T] into M uniform steps, exponentiate the Hermitian midpoint
    Hamiltonian of each step through its spectral decomposition and multiply
    the factors in time order.  Every factor is exactly unitary, so the
    product is unitary to rounding regardless of M; only its accuracy
    depends on M.

The default step count resolves both the spectral scale of H (phase per
step) and the curvature of the drive.  The second term was calibrated
against reference integrations: the leading product error behaves like
0.006 * A * w^2 * T * dt^2, so steps are chosen to keep it a safe factor
below the 1e-6 cross-method agreement contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, NormDriftError, UnitarityError
from .model import (ModelParams, hopping_matrix, potential_profile,
                    instantaneous_disorder, spectral_norm_bound)

#: Default relative/absolute tolerances for adaptive integration.  Chosen so
#: that a tau = 1000 state evolution keeps norm drift near 4e-8 and a
#: moderate-period propagator keeps its unitarity defect near 1e-9.
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12

#: Maximum tolerated unitarity defect max|U^dag U - I| of a propagator.
UNITARITY_TOL = 1e-8

#: Maximum tolerated |norm - 1| of an evolved state.
NORM_TOL = 1e-6

PROPAGATOR_METHODS = ("stepwise-exponential", "column-integration")


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes over the N Wannier sites at a given time."""

    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.ndim != 1 or amp.size < 2:
            raise ValueError("amplitudes must be a 1-D vector of length >= 2")
        if not np.all(np.isfinite(amp)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} deviates from 1 by more than "
                             f"{NORM_TOL}")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def site_basis_state(cls, n_sites: int, site: int,
                         time: float = 0.0) -> "WaveFunction":
        """State localized on one Wannier site (1-based site index)."""
        if not 1 <= site <= n_sites:
            raise ValueError(f"site must be in 1..{n_sites}, got {site}")
        amp = np.zeros(n_sites, dtype=complex)
        amp[site - 1] = 1.0
        return cls(amplitudes=amp, time=time)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def ipr(self) -> float:
        """Inverse participation ratio sum_i |psi_i|^4 of this state."""
        return float(np.sum(self.density ** 2))


@dataclass(frozen=True)
class Propagator:
    """One-period evolution operator U(T, 0) of the driven chain."""

    matrix: np.ndarray
    period: float

    def __post_init__(self):
        u = np.asarray(self.matrix, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError("propagator matrix must be square")
        defect = unitarity_defect(u)
        if defect > UNITARITY_TOL:
            raise UnitarityError(
                f"propagator unitarity defect {defect:.3e} exceeds "
                f"{UNITARITY_TOL:.0e}; tighten the construction tolerances")
        object.__setattr__(self, "matrix", u)
        object.__setattr__(self, "period", float(self.period))

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[0]

    def unitarity_defect(self) -> float:
        return unitarity_defect(self.matrix)


def unitarity_defect(u: np.ndarray) -> float:
    """max |U^dag U - I|."""
    n = u.shape[0]
    return float(np.abs(u.conj().T @ u - np.eye(n)).max())


def _rhs_state(params: ModelParams):
    kin = hopping_matrix(params.n_sites, params.hopping)
    profile = potential_profile(params)

    def rhs(t, y):
        strength = instantaneous_disorder(params, t)
        return -1j * (kin @ y + strength * (profile * y))

    return rhs


def _rhs_matrix(params: ModelParams):
    n = params.n_sites
    kin = hopping_matrix(n, params.hopping)
    profile = potential_profile(params)[:, None]

    def rhs(t, y):
        u = y.reshape(n, n)
        strength = instantaneous_disorder(params, t)
        return (-1j * (kin @ u + strength * (profile * u))).ravel()

    return rhs


def evolve(state: WaveFunction, params: ModelParams, t_final: float, *,
           sample_times: Sequence[float] | None = None,
           rtol: float = DEFAULT_RTOL,
           atol: float = DEFAULT_ATOL) -> list[WaveFunction]:
    """Integrate i d psi/dt = H(t) psi from ``state.time`` to ``t_final``.

    Parameters
    ----------
    state : WaveFunction
        Initial state; its ``time`` attribute sets the start of integration.
    params : ModelParams
        Model parameters (must match the state dimension).
    t_final : float
        End of integration, strictly greater than ``state.time``.
    sample_times : sequence of float, optional
        Ascending times in (state.time, t_final] at which to return the
        state; the last entry must equal ``t_final``.  Defaults to
        ``[t_final]``.
    rtol, atol : float
        Integrator tolerances; both must be positive.

    Returns
    -------
    list of WaveFunction
        One entry per requested sample time.

    Raises
    ------
    IntegrationError
        If the step-size controller fails; the exception carries the time
        reached.
    NormDriftError
        If any sampled norm deviates from 1 by more than 1e-6.
    """
    if state.amplitudes.size != params.n_sites:
        raise ValueError("state dimension does not match params.n_sites")
    t_final = float(t_final)
    if not t_final > state.time:
        raise ValueError(f"t_final ({t_final}) must exceed the state time "
                         f"({state.time})")
    if rtol <= 0.0 or atol <= 0.0:
        raise ValueError("tolerances must be positive")
    if sample_times is None:
        samples = np.array([t_final])
    else:
        samples = np.asarray(sample_times, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("sample_times must be a non-empty 1-D sequence")
        if np.any(np.diff(samples) <= 0.0):
            raise ValueError("sample_times must be strictly ascending")
        if samples[0] <= state.time or samples[-1] != t_final:
            raise ValueError("sample_times must lie in (state.time, t_final] "
                             "and end exactly at t_final")

    sol = solve_ivp(_rhs_state(params), (state.time, t_final),
                    state.amplitudes, method="RK45", t_eval=samples,
                    rtol=rtol, atol=atol)
    if not sol.success:
        reached = float(sol.t[-1]) if sol.t.size else state.time
        raise IntegrationError(
            f"integration failed at t = {reached}: {sol.message}", time=reached)

    out = []
    for k in range(samples.size):
        amp = sol.y[:, k]
        drift = abs(np.linalg.norm(amp) - 1.0)
        if drift > NORM_TOL:
            raise NormDriftError(
                f"norm drift {drift:.3e} at t = {samples[k]} exceeds "
                f"{NORM_TOL:.0e}; tighten rtol/atol", time=float(samples[k]))
        out.append(WaveFunction(amplitudes=amp, time=float(samples[k])))
    return out


def default_step_count(params: ModelParams) -> int:
    """Default number of uniform midpoint steps over one drive period.

    Combines a phase-resolution term (40 steps per unit of T * |H|) with a
    drive-curvature term calibrated against reference integrations so the
    product error stays near 1e-7, an order of magnitude inside the 1e-6
    cross-method agreement contract.
    """
    period = params.drive_period
    phase_res = 40.0 * period * spectral_norm_bound(params)
    drive_res = (250.0 * params.drive_angular_frequency
                 * math.sqrt(params.drive_amplitude) * period ** 1.5)
    return max(200, math.ceil(phase_res), math.ceil(drive_res))


def _midpoint_product(params: ModelParams, steps: int,
                      record_every: int = 0) -> tuple[np.ndarray, list[np.ndarray]]:
    """Time-ordered product of midpoint exponentials over one period.

    Returns the full product and, when ``record_every > 0``, the running
    prefix products U(k * record_every * dt, 0).  The drive is symmetric
    about mid-period, so mirrored steps share one spectral decomposition.
    """
    n = params.n_sites
    period = params.drive_period
    dt = period / steps
    kin = hopping_matrix(n, params.hopping)
    profile = potential_profile(params)
    t_mid = (np.arange(steps) + 0.5) * dt
    strengths = (params.disorder_strength + params.drive_amplitude
                 * np.cos(params.drive_angular_frequency * t_mid))

    u = np.eye(n, dtype=complex)
    prefixes: list[np.ndarray] = []
    cache: dict[int, np.ndarray] = {}
    diag_idx = np.diag_indices(n)
    for k in range(steps):
        key = min(k, steps - 1 - k)
        factor = cache.get(key)
        if factor is None:
            h = kin.copy()
            h[diag_idx] += strengths[k] * profile
            w, v = np.linalg.eigh(h)
            factor = (v * np.exp(-1j * w * dt)) @ v.conj().T
            cache[key] = factor
        u = factor @ u
        if record_every and (k + 1) % record_every == 0:
            prefixes.append(u.copy())
    return u, prefixes


def _column_integration(params: ModelParams, rtol: float,
                        atol: float) -> np.ndarray:
    n = params.n_sites
    y0 = np.eye(n, dtype=complex).ravel()
    sol = solve_ivp(_rhs_matrix(params), (0.0, params.drive_period), y0,
                    method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        reached = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(
            f"propagator integration failed at t = {reached}: {sol.message}",
            time=reached)
    return sol.y[:, -1].reshape(n, n)


def one_period_propagator(params: ModelParams,
                          method: str = "stepwise-exponential", *,
                          steps: int | None = None,
                          rtol: float = DEFAULT_RTOL,
                          atol: float = DEFAULT_ATOL) -> Propagator:
    """Build the one-period propagator U(T, 0).

    Parameters
    ----------
    params : ModelParams
        Must have ``drive_angular_frequency > 0`` so a period exists; the
        undriven case is rejected explicitly.
    method : str
        "stepwise-exponential" (default) or "column-integration".
    steps : int, optional
        Step count for the stepwise method; defaults to
        :func:`default_step_count`.
    rtol, atol : float
        Tolerances for the column method.

    Raises
    ------
    ValueError
        For w = 0 or an unknown method.
    UnitarityError
        If the constructed matrix misses the 1e-8 unitarity contract, which
        for the column method signals that tighter tolerances are needed.
    """
    if params.drive_angular_frequency <= 0.0:
        raise ValueError("one_period_propagator requires "
                         "drive_angular_frequency > 0; no period exists for "
                         "the undriven case")
    if method == "stepwise-exponential":
        if steps is None:
            steps = default_step_count(params)
        if steps < 1:
            raise ValueError(f"steps must be >= 1, got {steps}")
        u, _ = _midpoint_product(params, int(steps))
    elif method == "column-integration":
        u = _column_integration(params, rtol, atol)
    else:
        raise ValueError(f"unknown method {method!r}; expected one of "
                         f"{PROPAGATOR_METHODS}")
    return Propagator(matrix=u, period=params.drive_period)


def period_propagator_with_prefixes(params: ModelParams, n_offsets: int, *,
                                    steps: int | None = None
                                    ) -> tuple[Propagator, list[np.ndarray]]:
    """U(T, 0) plus the intra-period prefixes U(s T / n_offsets, 0).

    The step count is rounded up to a multiple of ``n_offsets`` so the
    requested offsets fall exactly on step boundaries.  The last prefix is
    the full period propagator.
    """
    if n_offsets < 1:
        raise ValueError(f"n_offsets must be >= 1, got {n_offsets}")
    if steps is None:
        steps = default_step_count(params)
    steps = int(math.ceil(steps / n_offsets)) * n_offsets
    u, prefixes = _midpoint_product(params, steps, record_every=steps // n_offsets)
    return Propagator(matrix=u, period=params.drive_period), prefixes
