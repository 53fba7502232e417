"""Result persistence: CSV tables, gnuplot matrices and metadata records.

Tables are comma-separated with a commented header block that names the
columns (energies in J, times in 1/J, angular frequencies in J) and embeds
the fully resolved run configuration as one JSON line, so any result file
can be re-run exactly.  Floats are written with shortest round-trip
precision.
"""

from __future__ import annotations

import json
import os

import numpy as np

from ._version import __version__
from .errors import ConfigError

CONFIG_MARKER = "# config: "


def format_value(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def header_comments(config: dict | None, units: str | None = None) -> list[str]:
    lines = [f"generated by drivenaa {__version__}"]
    if units:
        lines.append(units)
    if config is not None:
        lines.append(CONFIG_MARKER[2:]
                     + json.dumps(config, sort_keys=True, separators=(",", ":")))
    return lines


def write_table(path: str, comments: list[str], columns: list[str],
                rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for comment in comments:
            fh.write(f"# {comment}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def read_embedded_config(path: str) -> dict:
    """Recover the resolved configuration embedded in a result table."""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith(CONFIG_MARKER):
                return json.loads(line[len(CONFIG_MARKER):])
            if not line.startswith("#"):
                break
    raise ConfigError(f"{path}: no embedded config line found")


def write_metadata(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return str(obj)


def write_axis_file(path: str, values: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in np.asarray(values).ravel():
            fh.write(format_value(float(v)) + "\n")


def write_matrix_file(path: str, matrix: np.ndarray) -> None:
    """Whitespace-separated matrix, one axis1 value per row."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        for row in matrix:
            fh.write(" ".join(format_value(float(v)) for v in row) + "\n")


def write_scan_outputs(outdir: str, name: str, result, config: dict,
                       units: str, heatmaps: bool) -> dict[str, str]:
    """Write the cell table, metadata and optional heatmap matrices.

    Returns a mapping of logical output names to paths.
    """
    os.makedirs(outdir, exist_ok=True)
    written: dict[str, str] = {}

    columns = ["axis1_" + result.grid.axis1.name]
    two_d = result.grid.axis2 is not None
    if two_d:
        columns.append("axis2_" + result.grid.axis2.name)
    columns += ["drive_angular_frequency", "mean_imbalance", "std_imbalance",
                "mean_ipr", "std_ipr", "n_phases", "failed"]
    has_baseline = any(c.baseline_imbalance is not None for c in result.cells)
    if has_baseline:
        columns += ["baseline_imbalance", "normalized_imbalance"]

    rows = []
    for cell in result.cells:
        row = [cell.axis1_value]
        if two_d:
            row.append(cell.axis2_value)
        row += [cell.drive_angular_frequency, cell.mean_imbalance,
                cell.std_imbalance, cell.mean_ipr, cell.std_ipr,
                cell.n_phases, cell.failed]
        if has_baseline:
            row += [cell.baseline_imbalance, cell.normalized_imbalance]
        rows.append(row)

    table_path = os.path.join(outdir, f"{name}.csv")
    write_table(table_path, header_comments(config, units), columns, rows)
    written["table"] = table_path

    meta_path = os.path.join(outdir, f"{name}_metadata.json")
    write_metadata(meta_path, {"config": config, "metadata": result.metadata,
                               "n_failed": result.n_failed})
    written["metadata"] = meta_path

    if heatmaps and two_d:
        ax1 = os.path.join(outdir, f"{name}_axis1.dat")
        ax2 = os.path.join(outdir, f"{name}_axis2.dat")
        write_axis_file(ax1, result.grid.axis1.values)
        write_axis_file(ax2, result.grid.axis2.values)
        written["axis1"] = ax1
        written["axis2"] = ax2
        for attribute in ("mean_imbalance", "mean_ipr"):
            path = os.path.join(outdir, f"{name}_{attribute}.dat")
            write_matrix_file(path, result.matrix(attribute))
            written[attribute] = path
    return written
