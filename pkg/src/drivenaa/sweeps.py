"""Disorder-averaged parameter scans over the phase diagram.

Every scan cell evaluates both localization diagnostics for each disorder
realization (one realization per potential offset in the phase list):

* the time-averaged even/odd imbalance of the density-wave protocol, and
* the averaged inverse participation ratio of the periodic modes.

Driven cells build one one-period propagator per (cell, phase) and reuse it
for both diagnostics: the imbalance comes from propagator powers plus
intra-period prefixes, the IPR from diagonalizing the same propagator.
Undriven cells (A = 0 or w = 0) use exact spectral propagation and the
eigenvectors of the static Hamiltonian instead.

Cells are an independent task set executed either serially or on a process
pool; results land in per-cell slots keyed by grid index, so the output is
bit-identical regardless of worker count.  A JSON-lines checkpoint file can
record finished cells and lets an interrupted scan resume.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._version import __version__
from .evolve import period_propagator_with_prefixes
from .floquet import floquet_decompose, averaged_ipr, mean_mode_ipr
from .model import ModelParams
from .observables import (aligned_imbalance_trace, effective_static_hamiltonian,
                          imbalance_trace)

TWO_PI = 2.0 * math.pi

#: Number of disorder realizations used throughout unless overridden.
DEFAULT_PHASE_COUNT = 20

#: Canonical axis names; RATIO_AXIS is a frequency axis expressed as the
#: disorder-to-drive-quantum ratio lambda / w.
RATIO_AXIS = "lambda_over_homega"
OMEGA_AXIS = "drive_angular_frequency"
AMPLITUDE_AXIS = "drive_amplitude"
DISORDER_AXIS = "disorder_strength"


def uniform_phases(count: int = DEFAULT_PHASE_COUNT) -> np.ndarray:
    """Deterministic potential offsets 2 pi k / count, k = 0..count-1."""
    if count < 1:
        raise ValueError(f"phase count must be >= 1, got {count}")
    return TWO_PI * np.arange(count) / count


def random_phases(count: int, seed: int) -> np.ndarray:
    """Seeded uniform offsets in [0, 2 pi), for ensemble robustness checks."""
    if count < 1:
        raise ValueError(f"phase count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, TWO_PI, size=count)


@dataclass(frozen=True)
class ScanAxis:
    """One scan dimension: a named, ascending list of values."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError(f"axis {self.name!r} needs a non-empty 1-D value "
                             "list")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"axis {self.name!r} has non-finite values")
        if np.any(np.diff(values) <= 0.0):
            raise ValueError(f"axis {self.name!r} values must be strictly "
                             "ascending")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class ScanGrid:
    """Scan specification: one or two axes over a fixed parameter template."""

    axis1: ScanAxis
    fixed: ModelParams
    axis2: ScanAxis | None = None
    phases: np.ndarray = field(default_factory=uniform_phases)

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float)
        if phases.ndim != 1 or phases.size == 0:
            raise ValueError("phases must be a non-empty 1-D list")
        if not np.all(np.isfinite(phases)):
            raise ValueError("phases must be finite")
        if np.any((phases < 0.0) | (phases >= TWO_PI)):
            raise ValueError("phases must lie in [0, 2 pi)")
        object.__setattr__(self, "phases", phases)

    @property
    def shape(self) -> tuple[int, ...]:
        if self.axis2 is None:
            return (self.axis1.values.size,)
        return (self.axis1.values.size, self.axis2.values.size)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    def indices(self):
        if self.axis2 is None:
            for i in range(self.axis1.values.size):
                yield (i,)
        else:
            for i in range(self.axis1.values.size):
                for j in range(self.axis2.values.size):
                    yield (i, j)


@dataclass(frozen=True)
class SweepSettings:
    """Protocol and execution knobs shared by the scan operations."""

    n_periods: int = 100
    samples_per_period: int = 20
    propagator_steps: int | None = None
    static_t_final: float = 1000.0
    static_n_samples: int = 2000
    workers: int = 1
    checkpoint_path: str | None = None

    def __post_init__(self):
        if self.n_periods < 1 or self.samples_per_period < 1:
            raise ValueError("n_periods and samples_per_period must be >= 1")
        if self.static_t_final <= 0.0 or self.static_n_samples < 2:
            raise ValueError("static protocol needs t_final > 0 and "
                             "n_samples >= 2")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class CellResult:
    """Disorder-averaged diagnostics of one grid cell."""

    index: tuple[int, ...]
    axis1_value: float
    axis2_value: float | None
    mean_imbalance: float = math.nan
    std_imbalance: float = math.nan
    mean_ipr: float = math.nan
    std_ipr: float = math.nan
    n_phases: int = 0
    drive_angular_frequency: float | None = None
    baseline_imbalance: float | None = None
    normalized_imbalance: float | None = None
    failed: bool = False
    error: str | None = None


@dataclass
class ScanResult:
    """Grid, per-cell records in row-major order, and run metadata."""

    grid: ScanGrid
    cells: list[CellResult]
    metadata: dict

    def cell(self, *index: int) -> CellResult:
        shape = self.grid.shape
        if len(index) != len(shape):
            raise ValueError(f"expected {len(shape)} indices, got {len(index)}")
        flat = index[0] if len(shape) == 1 else index[0] * shape[1] + index[1]
        return self.cells[flat]

    @property
    def n_failed(self) -> int:
        return sum(1 for c in self.cells if c.failed)

    def matrix(self, attribute: str) -> np.ndarray:
        """Cell attribute reshaped to the grid shape (NaN for failed cells)."""
        values = np.array([getattr(c, attribute) if not c.failed else math.nan
                           for c in self.cells], dtype=float)
        return values.reshape(self.grid.shape)


def evaluate_phase(params: ModelParams, settings: SweepSettings
                   ) -> tuple[float, float]:
    """Both diagnostics for a single disorder realization.

    Returns
    -------
    (imbalance, ipr) : tuple of float
        Time-averaged imbalance and averaged mode IPR.
    """
    if params.is_driven:
        prop, prefixes = period_propagator_with_prefixes(
            params, settings.samples_per_period,
            steps=settings.propagator_steps)
        times, values = aligned_imbalance_trace(prop, prefixes,
                                                settings.n_periods)
        imbalance = float(np.trapezoid(values, times) / (times[-1] - times[0]))
        ipr = averaged_ipr(floquet_decompose(prop))
    else:
        trace = imbalance_trace(params, settings.static_t_final,
                                settings.static_n_samples)
        imbalance = trace.time_average
        _, vecs = np.linalg.eigh(effective_static_hamiltonian(params))
        ipr = mean_mode_ipr(vecs)
    return imbalance, ipr


def _evaluate_cell(task):
    """Worker entry point: disorder-average one cell.  Never raises; failures
    are recorded in the returned mapping so a scan survives bad cells."""
    index, params, phases, settings = task
    try:
        imbalances = np.empty(len(phases))
        iprs = np.empty(len(phases))
        for k, phi in enumerate(phases):
            imbalances[k], iprs[k] = evaluate_phase(params.with_phase(phi),
                                                    settings)
        return {
            "index": list(index),
            "mean_imbalance": float(np.mean(imbalances)),
            "std_imbalance": float(np.std(imbalances)),
            "mean_ipr": float(np.mean(iprs)),
            "std_ipr": float(np.std(iprs)),
            "n_phases": len(phases),
            "failed": False,
            "error": None,
        }
    except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
        return {
            "index": list(index),
            "n_phases": len(phases),
            "failed": True,
            "error": f"{type(exc).__name__}: {exc}",
        }


class _Checkpoint:
    """JSON-lines record of finished cells, guarded by a grid signature."""

    def __init__(self, path: str | None, signature: str):
        self.path = path
        self.signature = signature
        self.done: dict[tuple[int, ...], dict] = {}
        if path and os.path.exists(path):
            self._load()

    def _load(self):
        with open(self.path, "r", encoding="utf-8") as fh:
            lines = [line for line in fh if line.strip()]
        if not lines:
            return
        head = json.loads(lines[0])
        if head.get("signature") != self.signature:
            return  # different scan; start over
        for line in lines[1:]:
            record = json.loads(line)
            self.done[tuple(record["index"])] = record

    def start(self):
        if self.path and not self.done:
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps({"signature": self.signature}) + "\n")

    def record(self, result: dict):
        self.done[tuple(result["index"])] = result
        if self.path:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(result) + "\n")


def _grid_signature(grid: ScanGrid, settings: SweepSettings,
                    kind: str) -> str:
    payload = {
        "kind": kind,
        "axis1": [grid.axis1.name, grid.axis1.values.tolist()],
        "axis2": None if grid.axis2 is None else [grid.axis2.name,
                                                  grid.axis2.values.tolist()],
        "fixed": asdict(grid.fixed),
        "phases": grid.phases.tolist(),
        "settings": {k: v for k, v in asdict(settings).items()
                     if k not in ("workers", "checkpoint_path")},
    }
    return json.dumps(payload, sort_keys=True)


def _run_cells(tasks, settings: SweepSettings, checkpoint: _Checkpoint):
    """Execute cell tasks, serially or on a process pool."""
    pending = [t for t in tasks if tuple(t[0]) not in checkpoint.done]
    checkpoint.start()
    if settings.workers == 1 or len(pending) <= 1:
        for task in pending:
            checkpoint.record(_evaluate_cell(task))
    else:
        with ProcessPoolExecutor(max_workers=settings.workers) as pool:
            futures = [pool.submit(_evaluate_cell, task) for task in pending]
            for future in as_completed(futures):
                checkpoint.record(future.result())
    return checkpoint.done


def _collect(grid: ScanGrid, done: dict, cell_params) -> list[CellResult]:
    cells = []
    for index in grid.indices():
        params = cell_params(index)
        record = done[tuple(index)]
        cell = CellResult(
            index=tuple(index),
            axis1_value=float(grid.axis1.values[index[0]]),
            axis2_value=(None if grid.axis2 is None
                         else float(grid.axis2.values[index[1]])),
            n_phases=record["n_phases"],
            failed=record["failed"],
            error=record["error"],
            drive_angular_frequency=params.drive_angular_frequency,
        )
        if not record["failed"]:
            cell.mean_imbalance = record["mean_imbalance"]
            cell.std_imbalance = record["std_imbalance"]
            cell.mean_ipr = record["mean_ipr"]
            cell.std_ipr = record["std_ipr"]
        cells.append(cell)
    return cells


def _metadata(settings: SweepSettings, wall_time: float, **extra) -> dict:
    meta = {
        "code_version": __version__,
        "wall_time_s": wall_time,
        "settings": asdict(settings),
    }
    meta.update(extra)
    return meta


def static_disorder_scan(grid: ScanGrid,
                         settings: SweepSettings = SweepSettings()
                         ) -> ScanResult:
    """1-D scan of the undriven chain over disorder strength.

    ``grid.axis1`` holds the disorder values; the drive is forced off in
    every cell and the static protocol (t_final, sample count from
    ``settings``) is used.
    """
    if grid.axis2 is not None:
        raise ValueError("static_disorder_scan takes a 1-D grid")

    def cell_params(index) -> ModelParams:
        lam = float(grid.axis1.values[index[0]])
        return replace(grid.fixed, disorder_strength=lam,
                       drive_amplitude=0.0, drive_angular_frequency=0.0)

    started = time.perf_counter()
    tasks = [(index, cell_params(index), grid.phases, settings)
             for index in grid.indices()]
    checkpoint = _Checkpoint(settings.checkpoint_path,
                             _grid_signature(grid, settings, "static"))
    done = _run_cells(tasks, settings, checkpoint)
    cells = _collect(grid, done, cell_params)
    meta = _metadata(settings, time.perf_counter() - started,
                     scan="static_disorder")
    return ScanResult(grid=grid, cells=cells, metadata=meta)


def frequency_disorder_scan(grid: ScanGrid,
                            settings: SweepSettings = SweepSettings()
                            ) -> ScanResult:
    """Scan disorder strength against drive frequency at strong drive A = lambda.

    ``grid.axis1`` must be the disorder strengths (all > 0).  ``grid.axis2``
    is either the angular frequency axis (name ``drive_angular_frequency``,
    values > 0) or the ratio axis ``lambda_over_homega``, in which case each
    cell resolves its own frequency w = lambda / ratio.

    Each driven cell runs ``n_periods`` drive cycles.  The result also
    carries the undriven reference imbalance per disorder value (static
    protocol, same phases) and each cell's imbalance normalized to it.
    """
    if grid.axis2 is None:
        raise ValueError("frequency_disorder_scan needs a 2-D grid")
    if np.any(grid.axis1.values <= 0.0):
        raise ValueError("disorder values must be > 0 for the strong-drive "
                         "scan (A = lambda)")
    if grid.axis2.name not in (OMEGA_AXIS, RATIO_AXIS):
        raise ValueError(f"axis2 must be {OMEGA_AXIS!r} or {RATIO_AXIS!r}, "
                         f"got {grid.axis2.name!r}")
    if np.any(grid.axis2.values <= 0.0):
        raise ValueError("frequency (or ratio) values must be > 0")

    def cell_params(index) -> ModelParams:
        lam = float(grid.axis1.values[index[0]])
        value = float(grid.axis2.values[index[1]])
        omega = value if grid.axis2.name == OMEGA_AXIS else lam / value
        return replace(grid.fixed, disorder_strength=lam,
                       drive_amplitude=lam, drive_angular_frequency=omega)

    started = time.perf_counter()
    tasks = [(index, cell_params(index), grid.phases, settings)
             for index in grid.indices()]
    checkpoint = _Checkpoint(settings.checkpoint_path,
                             _grid_signature(grid, settings, "freq"))
    done = _run_cells(tasks, settings, checkpoint)
    cells = _collect(grid, done, cell_params)

    # undriven reference per disorder value, same phase set
    baselines = {}
    for i, lam in enumerate(grid.axis1.values):
        base_params = replace(grid.fixed, disorder_strength=float(lam),
                              drive_amplitude=0.0, drive_angular_frequency=0.0)
        values = [imbalance_trace(base_params.with_phase(phi),
                                  settings.static_t_final,
                                  settings.static_n_samples).time_average
                  for phi in grid.phases]
        baselines[i] = float(np.mean(values))
    for cell in cells:
        cell.baseline_imbalance = baselines[cell.index[0]]
        if not cell.failed and cell.baseline_imbalance != 0.0:
            cell.normalized_imbalance = (cell.mean_imbalance
                                         / cell.baseline_imbalance)

    meta = _metadata(settings, time.perf_counter() - started,
                     scan="frequency_disorder",
                     baseline_imbalance={str(grid.axis1.values[i]): b
                                         for i, b in baselines.items()})
    return ScanResult(grid=grid, cells=cells, metadata=meta)


def amplitude_disorder_scan(grid: ScanGrid,
                            settings: SweepSettings = SweepSettings(),
                            drive_frequency: float = 0.005) -> ScanResult:
    """Scan disorder strength against drive amplitude at a fixed frequency.

    ``grid.axis1`` holds the disorder strengths (>= 2, i.e. statically
    localized), ``grid.axis2`` the amplitudes (>= 0; A = 0 cells use the
    static route).  ``drive_frequency`` is the linear frequency nu in units
    of J; the default matches the adiabatic operating point 0.005.
    """
    if grid.axis2 is None:
        raise ValueError("amplitude_disorder_scan needs a 2-D grid")
    if grid.axis2.name != AMPLITUDE_AXIS:
        raise ValueError(f"axis2 must be {AMPLITUDE_AXIS!r}, got "
                         f"{grid.axis2.name!r}")
    if drive_frequency <= 0.0:
        raise ValueError("drive_frequency must be > 0")
    if np.any(grid.axis1.values < 2.0 * grid.fixed.hopping):
        raise ValueError("amplitude scan expects statically localized "
                         "disorder values (lambda >= 2J)")
    if np.any(grid.axis2.values < 0.0):
        raise ValueError("amplitudes must be >= 0")
    omega = TWO_PI * drive_frequency

    def cell_params(index) -> ModelParams:
        lam = float(grid.axis1.values[index[0]])
        amp = float(grid.axis2.values[index[1]])
        return replace(grid.fixed, disorder_strength=lam,
                       drive_amplitude=amp,
                       drive_angular_frequency=omega if amp > 0.0 else 0.0)

    started = time.perf_counter()
    tasks = [(index, cell_params(index), grid.phases, settings)
             for index in grid.indices()]
    checkpoint = _Checkpoint(settings.checkpoint_path,
                             _grid_signature(grid, settings,
                                             f"amp:{drive_frequency}"))
    done = _run_cells(tasks, settings, checkpoint)
    cells = _collect(grid, done, cell_params)
    meta = _metadata(settings, time.perf_counter() - started,
                     scan="amplitude_disorder",
                     drive_frequency=drive_frequency)
    return ScanResult(grid=grid, cells=cells, metadata=meta)


def ipr_size_scaling(sizes, params: ModelParams,
                     phases: np.ndarray | None = None,
                     settings: SweepSettings = SweepSettings()) -> list[dict]:
    """Mean mode IPR as a function of lattice size at fixed parameters.

    Sizes must be even and ascending.  Returns one row per size:
    ``{"n_sites", "mean_ipr", "std_ipr", "n_phases"}``.  In a delocalized
    regime the mean IPR falls off like 1 / n_sites; in a localized one it is
    size-independent.
    """
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ValueError("sizes must be non-empty")
    if any(s % 2 != 0 for s in sizes):
        raise ValueError("sizes must all be even")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly ascending")
    if phases is None:
        phases = uniform_phases()
    rows = []
    for n in sizes:
        sized = replace(params, n_sites=n)
        iprs = []
        for phi in phases:
            p = sized.with_phase(phi)
            if p.is_driven:
                prop = period_propagator_with_prefixes(
                    p, 1, steps=settings.propagator_steps)[0]
                iprs.append(averaged_ipr(floquet_decompose(prop)))
            else:
                _, vecs = np.linalg.eigh(effective_static_hamiltonian(p))
                iprs.append(mean_mode_ipr(vecs))
        rows.append({"n_sites": n,
                     "mean_ipr": float(np.mean(iprs)),
                     "std_ipr": float(np.std(iprs)),
                     "n_phases": len(phases)})
    return rows
