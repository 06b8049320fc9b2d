"""Command-line frontend.

Subcommands: model, completeness, simulate, reconstruct, wigner. Detector
and probe specs use a compact kind:params grammar, e.g.

    povm-forge model --detector apd:0.5 --truncation 8
    povm-forge model --detector builtin:paper-tmd-8bin --loss 0.48
    povm-forge completeness --probes linspace:1,10,10 --dim 10
    povm-forge simulate --detector builtin:paper-tmd-8bin --loss 0.48 \
        --probes linspace:0,40,400 --shots 0 -o out/
    povm-forge wigner --detector builtin:paper-tmd-8bin --loss 0.48 --outcome 1

Exit codes: 0 success, 2 usage error, 3 completeness failure, 4 I/O
error, 5 solver did not converge (best iterate still written).

Every command is deterministic given its full flag set; the environment
variable POVM_FORGE_SEED, when set, overrides --seed.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import calibration, detectors, io, plots, simulate, wigner
from .reconstruct import build_problem, reconstruct as run_reconstruction
from .fock import default_truncation

EXIT_COMPLETENESS = 3
EXIT_IO = 4
EXIT_NO_CONVERGENCE = 5


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """A command name plus its parameter record; JSON round-trippable."""

    command: str
    params: dict

    def to_json(self) -> str:
        return json.dumps(
            {"command": self.command, "params": self.params}, sort_keys=True
        )

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        raw = json.loads(text)
        return cls(raw["command"], raw["params"])


def _apply_config(ctx: click.Context, config_path) -> None:
    """Use values from a JSON config file for flags left at their defaults."""
    if config_path is None:
        return
    try:
        config = RunConfig.from_json(Path(config_path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        click.echo(f"error: config file not found: {config_path}", err=True)
        sys.exit(EXIT_IO)
    except (json.JSONDecodeError, KeyError) as exc:
        raise click.UsageError(f"malformed config file: {exc}")
    if config.command != ctx.command.name:
        raise click.UsageError(
            f"config is for command {config.command!r}, not {ctx.command.name!r}"
        )
    for key, value in config.params.items():
        if key not in ctx.params:
            raise click.UsageError(f"unknown config parameter {key!r}")
        source = ctx.get_parameter_source(key)
        if source == click.core.ParameterSource.DEFAULT:
            ctx.params[key] = value


def _parse_detector(spec: str, loss: float, truncation: int):
    """Build a PovmSet from a kind:params detector spec string."""
    try:
        kind, _, params = spec.partition(":")
        if kind == "apd":
            return detectors.apd_povm(float(params), truncation)
        if kind == "tmd":
            bin_probs = np.array([float(v) for v in params.split(",")])
            conv = detectors.convolution_matrix(bin_probs, truncation)
            return detectors.tmd_povm(conv, detectors.loss_matrix(loss, truncation))
        if kind == "builtin":
            conv = detectors.builtin_convolution_matrix(params, truncation)
            return detectors.tmd_povm(conv, detectors.loss_matrix(loss, truncation))
    except (ValueError, IndexError) as exc:
        raise click.UsageError(f"invalid detector spec {spec!r}: {exc}")
    raise click.UsageError(
        f"invalid detector spec {spec!r}: expected apd:eta, tmd:p1,p2,... "
        "or builtin:paper-tmd-8bin"
    )


def _parse_probes(spec: str, dim: int) -> calibration.ProbeSet:
    """Build a ProbeSet from linspace:start,stop,count or const:value,count."""
    try:
        kind, _, params = spec.partition(":")
        if kind == "linspace":
            start, stop, count = params.split(",")
            return calibration.linspace_probes(
                float(start), float(stop), int(count), dim
            )
        if kind == "const":
            value, count = params.split(",")
            return calibration.constant_probes(float(value), int(count), dim)
    except (ValueError, IndexError) as exc:
        raise click.UsageError(f"invalid probe spec {spec!r}: {exc}")
    raise click.UsageError(
        f"invalid probe spec {spec!r}: expected linspace:start,stop,count "
        "or const:value,count"
    )


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        click.echo(f"error: cannot create output directory: {exc}", err=True)
        sys.exit(EXIT_IO)
    return out


_common = [
    click.option("--config", type=click.Path(), default=None,
                 help="JSON file with default parameter values."),
    click.option("--threads", type=int, default=1, show_default=True,
                 help="Worker threads (only 1 is currently used; kept for "
                      "bitwise-reproducible interfaces)."),
    click.option("--format", "out_format", type=click.Choice(["csv", "json"]),
                 default="csv", show_default=True),
    click.option("-o", "--output", type=click.Path(), default=".",
                 show_default=True, help="Output directory."),
]


def _with_common(func):
    for decorator in reversed(_common):
        func = decorator(func)
    return func


@click.group()
def main():
    """Detector tomography toolkit: forward models, probe calibration,
    simulated datasets, POVM reconstruction, and Wigner visualization."""


@main.command()
@click.option("--detector", required=True, help="apd:eta | tmd:p1,p2,... | builtin:paper-tmd-8bin")
@click.option("--loss", type=float, default=0.0, show_default=True,
              help="Loss fraction for TMD models.")
@click.option("--truncation", type=int, default=8, show_default=True)
@_with_common
@click.pass_context
def model(ctx, detector, loss, truncation, config, threads, out_format, output):
    """Build a detector model and write its matrices and POVM diagonals."""
    _apply_config(ctx, config)
    detector, loss, truncation, out_format, output = (
        ctx.params["detector"], ctx.params["loss"], ctx.params["truncation"],
        ctx.params["out_format"], ctx.params["output"],
    )
    povm = _parse_detector(detector, loss, truncation)
    out = _out_dir(output)
    kind = detector.partition(":")[0]
    if kind in ("tmd", "builtin"):
        if kind == "tmd":
            conv = detectors.convolution_matrix(
                np.array([float(v) for v in detector.partition(":")[2].split(",")]),
                truncation,
            )
        else:
            conv = detectors.builtin_convolution_matrix(
                detector.partition(":")[2], truncation
            )
        loss_mat = detectors.loss_matrix(loss, truncation)
        io.write_matrix_csv(out / "convolution_matrix.csv", conv.entries)
        io.write_matrix_csv(out / "loss_matrix.csv", loss_mat.entries, row_label="n_out")
        conv_dev = float(np.max(np.abs(conv.entries.sum(axis=0) - 1)))
        loss_dev = float(np.max(np.abs(loss_mat.entries.sum(axis=0) - 1)))
        click.echo(f"column sums: C within {conv_dev:.2e}, L within {loss_dev:.2e} of 1")
    if out_format == "json":
        payload = {"elements": [list(map(float, e.diag)) for e in povm.elements]}
        (out / "povm.json").write_text(json.dumps(payload, indent=2) + "\n")
    else:
        io.write_povm_csv(out / "povm.csv", povm)
    completeness_dev = float(np.max(np.abs(povm.as_matrix().sum(axis=0) - 1)))
    click.echo(
        f"{povm.n_outcomes}-outcome POVM, truncation {truncation}; "
        f"element sums within {completeness_dev:.2e} of 1"
    )


@main.command()
@click.option("--probes", "probe_spec", required=True,
              help="linspace:start,stop,count | const:value,count")
@click.option("--dim", type=int, required=True, help="Fock-space dimension d.")
@_with_common
@click.pass_context
def completeness(ctx, probe_spec, dim, config, threads, out_format, output):
    """Determinant test of tomographic completeness for a probe set."""
    _apply_config(ctx, config)
    probe_spec, dim = ctx.params["probe_spec"], ctx.params["dim"]
    probes = _parse_probes(probe_spec, dim)
    if len(probes) != dim:
        subset = calibration.ProbeSet(probes.probes[:dim], dim)
        if len(subset) != dim:
            raise click.UsageError(
                f"need at least {dim} probes for a d={dim} completeness test"
            )
        click.echo(f"using the first {dim} of {len(probes)} probes")
        probes = subset
    report = calibration.completeness_check(probes)
    verdict = "complete" if report.complete else "NOT complete"
    click.echo(f"determinant      {report.determinant:.6e}")
    click.echo(f"condition number {report.condition_number:.6e}")
    click.echo(f"verdict          {verdict}")
    if not report.complete:
        sys.exit(EXIT_COMPLETENESS)


@main.command(name="simulate")
@click.option("--detector", required=True)
@click.option("--loss", type=float, default=0.0, show_default=True)
@click.option("--truncation", type=int, default=None,
              help="Detector truncation [default: auto from the probe grid].")
@click.option("--probes", "probe_spec", default="linspace:0,40,400", show_default=True)
@click.option("--dim", type=int, default=30, show_default=True,
              help="Dimension recorded with the dataset for later reconstruction.")
@click.option("--shots", type=int, default=0, show_default=True,
              help="Shots per probe; 0 means exact probabilities.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--renormalize", is_flag=True, default=False,
              help="Renormalize probe distributions at the detector "
                   "truncation (disables the tail-mass guard); gives a "
                   "truncation-consistent dataset for tight truncations.")
@click.option("--figure", type=click.Path(), default=None,
              help="Also render the dataset to this PNG.")
@_with_common
@click.pass_context
def simulate_cmd(ctx, detector, loss, truncation, probe_spec, dim, shots, seed,
                 renormalize, figure, config, threads, out_format, output):
    """Simulate a tomography dataset and write it as CSV."""
    _apply_config(ctx, config)
    p = ctx.params
    seed = int(os.environ.get("POVM_FORGE_SEED", p["seed"]))
    probes = _parse_probes(p["probe_spec"], p["dim"])
    truncation = p["truncation"]
    if truncation is None:
        truncation = default_truncation(float(probes.mean_photons.max()))
    povm = _parse_detector(p["detector"], p["loss"], truncation)
    tail_guard = 1.0 if p["renormalize"] else 1e-6
    if p["shots"] == 0:
        dataset = simulate.exact_dataset(
            povm, probes, max_tail_mass=tail_guard, renormalize=p["renormalize"]
        )
    else:
        dataset = simulate.sample_dataset(
            povm, probes, p["shots"], seed,
            max_tail_mass=tail_guard, renormalize=p["renormalize"],
        )
    out = _out_dir(p["output"])
    io.write_dataset_csv(out / "dataset.csv", dataset)
    if p["figure"] is not None:
        plots.save_dataset_figure(p["figure"], dataset)
    click.echo(
        f"wrote {len(probes)} probes x {dataset.n_outcomes} outcomes "
        f"({'exact' if p['shots'] == 0 else str(p['shots']) + ' shots'}) "
        f"to {out / 'dataset.csv'}"
    )


@main.command(name="reconstruct")
@click.option("--input", "input_path", required=True, type=click.Path(),
              help="Dataset CSV produced by the simulate command.")
@click.option("--dim", type=int, default=30, show_default=True)
@click.option("--smoothing", type=float, default=0.0, show_default=True)
@click.option("--renormalize", is_flag=True, default=False,
              help="Renormalize the truncated probe distributions in the "
                   "design matrix (matches simulate --renormalize).")
@_with_common
@click.pass_context
def reconstruct_cmd(ctx, input_path, dim, smoothing, renormalize, config,
                    threads, out_format, output):
    """Reconstruct POVM diagonals from a dataset under positivity and
    completeness constraints."""
    _apply_config(ctx, config)
    p = ctx.params
    try:
        dataset = io.read_dataset_csv(p["input_path"], dimension=p["dim"])
    except FileNotFoundError:
        click.echo(f"error: no such file: {p['input_path']}", err=True)
        sys.exit(EXIT_IO)
    problem = build_problem(
        dataset, p["dim"], p["smoothing"], renormalize=p["renormalize"]
    )
    result = run_reconstruction(problem)
    out = _out_dir(p["output"])
    if p["out_format"] == "json":
        io.write_povm_json(out / "povm.json", result)
    else:
        io.write_povm_csv(out / "povm.csv", result.povm)
        io.write_povm_json(out / "povm_meta.json", result)
    click.echo(
        f"residual {result.residual:.3e} after {result.iterations} iterations "
        f"({'converged' if result.converged else 'NOT converged'})"
    )
    if not result.converged:
        sys.exit(EXIT_NO_CONVERGENCE)


@main.command(name="wigner")
@click.option("--detector", required=True)
@click.option("--loss", type=float, default=0.0, show_default=True)
@click.option("--truncation", type=int, default=60, show_default=True)
@click.option("--outcome", type=int, required=True)
@click.option("--extent", type=float, default=6.0, show_default=True,
              help="Grid covers x, p in [-extent, extent].")
@click.option("--points", type=int, default=301, show_default=True)
@click.option("--figure", type=click.Path(), default=None,
              help="Also render the field to this PNG.")
@_with_common
@click.pass_context
def wigner_cmd(ctx, detector, loss, truncation, outcome, extent, points,
               figure, config, threads, out_format, output):
    """Evaluate the Wigner field of one POVM element and write field,
    gnuplot matrix, and radial cross-section files."""
    _apply_config(ctx, config)
    p = ctx.params
    povm = _parse_detector(p["detector"], p["loss"], p["truncation"])
    if not 0 <= p["outcome"] < povm.n_outcomes:
        raise click.UsageError(
            f"outcome {p['outcome']} out of range 0..{povm.n_outcomes - 1}"
        )
    element = povm.elements[p["outcome"]]
    grid = wigner.WignerGrid(
        -p["extent"], p["extent"], -p["extent"], p["extent"], p["points"]
    )
    field = wigner.povm_wigner(element, grid)
    r, cross = wigner.radial_profile(element.diag, p["extent"], p["points"])
    out = _out_dir(p["output"])
    io.write_wigner_csv(out / "wigner.csv", field)
    io.write_wigner_gnuplot(out / "wigner.gnuplot", field)
    io.write_cross_section_csv(out / "cross_section.csv", r, cross)
    if p["figure"] is not None:
        plots.save_wigner_figure(p["figure"], field, r, cross)
    click.echo(
        f"W at origin {field.values[p['points'] // 2, p['points'] // 2]:.6f}, "
        f"volume {field.volume():.6f}"
    )


if __name__ == "__main__":
    main()
