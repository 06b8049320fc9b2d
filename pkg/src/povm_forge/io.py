"""File formats: CSV/JSON serialization for matrices, probes, datasets,
reconstructed POVMs, and Wigner fields.

All CSV output uses '.' as the decimal separator, UTF-8, LF line endings,
and a header row; floats are written with %.17g so round-trips are exact.
The formats are documented in docs/formats.md.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .calibration import CoherentProbe, ProbeSet
from .detectors import PovmElement, PovmSet
from .reconstruct import ReconstructedPovm
from .simulate import TomographyDataset
from .wigner import WignerField


def _fmt(value: float) -> str:
    return f"{float(value):.17g}"


def _open_writer(path):
    return open(path, "w", encoding="utf-8", newline="\n")


def write_matrix_csv(path, matrix: np.ndarray, row_label: str = "k") -> None:
    """Matrix with a photon-number header row; rows indexed by click count."""
    matrix = np.asarray(matrix)
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([row_label] + [str(n) for n in range(matrix.shape[1])])
        for k, row in enumerate(matrix):
            writer.writerow([str(k)] + [_fmt(v) for v in row])


def write_povm_csv(path, povm: PovmSet) -> None:
    """One row per outcome, one column per photon number."""
    write_matrix_csv(path, povm.as_matrix(), row_label="outcome")


def read_povm_csv(path) -> PovmSet:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        rows = [[float(v) for v in row[1:]] for row in reader if row]
    return PovmSet(tuple(
        PovmElement(np.array(row), outcome_label=j) for j, row in enumerate(rows)
    ))


def write_povm_json(path, result: ReconstructedPovm) -> None:
    payload = {
        "elements": [list(map(float, e.diag)) for e in result.povm.elements],
        "residual": result.residual,
        "iterations": result.iterations,
        "converged": result.converged,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def write_probes_csv(path, probes: ProbeSet) -> None:
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["index", "mean_photon", "avg_power_W", "wavelength_m", "rep_rate_Hz"]
        )
        for i, p in enumerate(probes.probes):
            writer.writerow([
                str(i),
                _fmt(p.mean_photon),
                _fmt(p.avg_power),
                _fmt(p.wavelength),
                _fmt(p.rep_rate),
            ])


def read_probes_csv(path, dimension: int) -> ProbeSet:
    probes = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        for row in reader:
            if not row:
                continue
            _, mean, _power, wavelength, rep_rate = row
            probes.append(
                CoherentProbe.from_mean_photon(
                    float(mean), float(wavelength), float(rep_rate)
                )
            )
    return ProbeSet(tuple(probes), dimension)


def write_dataset_csv(path, dataset: TomographyDataset) -> None:
    """Header row, then one row per probe: mean_photon, shots, frequencies."""
    n_out = dataset.n_outcomes
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["mean_photon", "shots"] + [f"freq_outcome_{j}" for j in range(n_out)]
        )
        means = dataset.probes.mean_photons
        for i in range(len(dataset.probes)):
            writer.writerow(
                [_fmt(means[i]), str(dataset.shots_per_probe)]
                + [_fmt(v) for v in dataset.frequencies[i]]
            )


def read_dataset_csv(
    path, wavelength: float = 800e-9, rep_rate: float = 1e5, dimension: int = 30
) -> TomographyDataset:
    means, frequencies = [], []
    shots = 0
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        for row in reader:
            if not row:
                continue
            means.append(float(row[0]))
            shots = int(row[1])
            frequencies.append([float(v) for v in row[2:]])
    probes = ProbeSet(
        tuple(
            CoherentProbe.from_mean_photon(m, wavelength, rep_rate) for m in means
        ),
        dimension,
    )
    return TomographyDataset(probes, np.array(frequencies), shots_per_probe=shots)


def write_wigner_csv(path, field: WignerField) -> None:
    """(x, p, W) triples, x-major order."""
    x_axis = field.grid.x_axis()
    p_axis = field.grid.p_axis()
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "p", "W"])
        for i, x in enumerate(x_axis):
            for j, p in enumerate(p_axis):
                writer.writerow([_fmt(x), _fmt(p), _fmt(field.values[i, j])])


def write_wigner_gnuplot(path, field: WignerField) -> None:
    """Space-separated value matrix with blank lines between x blocks,
    directly plottable with gnuplot's splot."""
    x_axis = field.grid.x_axis()
    p_axis = field.grid.p_axis()
    lines = []
    for i, x in enumerate(x_axis):
        for j, p in enumerate(p_axis):
            lines.append(f"{_fmt(x)} {_fmt(p)} {_fmt(field.values[i, j])}")
        lines.append("")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_cross_section_csv(path, r: np.ndarray, values: np.ndarray) -> None:
    """(r, W(r, 0)) pairs for radial cross-section plots."""
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["r", "W"])
        for ri, vi in zip(r, values):
            writer.writerow([_fmt(ri), _fmt(vi)])


def write_response_csv(path, curves) -> None:
    """Response curves on a shared grid: mean_photon, then one column per curve."""
    curves = list(curves)
    grid = curves[0].mean_photons
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["mean_photon"] + [f"p_outcome_{c.outcome_label}" for c in curves]
        )
        for i in range(grid.size):
            writer.writerow(
                [_fmt(grid[i])] + [_fmt(c.probability[i]) for c in curves]
            )
