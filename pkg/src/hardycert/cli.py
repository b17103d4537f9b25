"""Command-line front end: file-based pipelines with plot-ready CSV/JSON output.

Exit codes: 0 success/certified, 1 domain-negative result, 2 usage or I/O
error, 3 boundary verdict.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .blockdiag import BlockModel, isometry_extract, mixture_behavior, verify_lemma2
from .envelope import (
    DEFAULT_EPS,
    DEFAULT_ETA,
    GridSpec,
    NuObjective,
    build_cover,
    concavity_region,
    equality_region,
    lemma1_region,
    sweep_union,
)
from .hardy import Behavior, HardyPoint, hardy_behavior, hardy_state, is_local
from .qcore import behavior_from_model, projector, qubit_observables
from .selftest import VERDICT_BOUNDARY, VERDICT_CERTIFIED, certify as run_certify
from .hardy import angles_from_point

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_BOUNDARY = 3


def _interior_float(name):
    def validate(ctx, param, value):
        if not 0.0 < value < 1.0:
            raise click.UsageError(f"{name} out of range: {value} not in (0, 1)")
        return value
    return validate


def _load_behavior(path: str) -> Behavior:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise click.ClickException(f"cannot read {path}: {exc}") from exc
    try:
        if path.endswith(".csv"):
            row = text.strip().splitlines()[-1]
            return Behavior.from_csv_row(row, validate=False)
        return Behavior.from_json(text, validate=False)
    except (ValueError, IndexError) as exc:
        raise click.ClickException(f"malformed behavior file {path}: {exc}") from exc


def _load_model(path: str) -> BlockModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise click.ClickException(f"cannot read {path}: {exc}") from exc
    try:
        return BlockModel.from_json(text)
    except ValueError as exc:
        raise click.ClickException(f"malformed block model {path}: {exc}") from exc


def _write_behavior(b: Behavior, out: str | None):
    if out is None:
        click.echo(b.to_json())
    elif out.endswith(".csv"):
        Path(out).write_text(b.to_csv_row() + "\n")
    else:
        Path(out).write_text(b.to_json() + "\n")


def _outdir(path: str) -> Path:
    d = Path(path)
    try:
        d.mkdir(parents=True, exist_ok=True)
        probe = d / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise click.ClickException(f"output directory {path} not writable: {exc}") from exc
    return d


def _objective(star: bool, nu: float | None):
    from .hardy import omega_star

    if nu is not None:
        return NuObjective(nu), f"nu={nu:g}"
    return (lambda r, s: omega_star(r, s)), "star"


@click.group()
@click.version_option(version=__version__)
def main():
    """Hardy nonlocality toolkit."""


@main.command("gen-behavior")
@click.option("--r", "r", type=float, required=True, callback=_interior_float("r"))
@click.option("--s", "s", type=float, required=True, callback=_interior_float("s"))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Behavior file (.json or .csv); stdout if omitted.")
def gen_behavior(r, s, out):
    """Closed-form Hardy behavior at (r,s)."""
    b = hardy_behavior(HardyPoint(r, s))
    click.echo(f"p_Hardy = {b.p(0, 0, 0, 0):.10g}", err=out is None)
    _write_behavior(b, out)


@main.command("simulate")
@click.option("--r", "r", type=float, required=True, callback=_interior_float("r"))
@click.option("--s", "s", type=float, required=True, callback=_interior_float("s"))
@click.option("--phi", type=float, default=0.0)
@click.option("--xi", type=float, default=0.0)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def simulate(r, s, phi, xi, out):
    """Born-rule behavior of the Hardy state and measurements at (r,s)."""
    pt = HardyPoint(r, s)
    psi = hardy_state(pt, phi=phi, xi=xi)
    alice, bob = qubit_observables(angles_from_point(pt, phi=phi, xi=xi))
    b = behavior_from_model(projector(psi), alice, bob)
    dev = b.max_deviation(hardy_behavior(pt))
    click.echo(f"max deviation from closed form = {dev:.3g}", err=out is None)
    _write_behavior(b, out)


@main.command("certify")
@click.option("--in", "infile", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def certify_cmd(infile, tol, out):
    """Self-test a behavior file; exit 0 certified, 1 rejected, 3 boundary."""
    b = _load_behavior(infile)
    cert = run_certify(b, tol=tol)
    text = cert.to_json()
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)
    if cert.verdict == VERDICT_CERTIFIED:
        sys.exit(EXIT_OK)
    sys.exit(EXIT_BOUNDARY if cert.verdict == VERDICT_BOUNDARY else EXIT_NEGATIVE)


@main.command("chsh")
@click.option("--in", "infile", type=click.Path(exists=True, dir_okay=False), required=True)
def chsh(infile):
    """All eight CHSH values; exit 0 if nonlocal, 1 if local."""
    b = _load_behavior(infile)
    errors = b.validity_errors()
    if errors:
        raise click.ClickException("invalid behavior: " + "; ".join(errors))
    res = is_local(b)
    click.echo(f"chsh_max = {res.chsh_max:.10g} ({'local' if res.local else 'nonlocal'})")
    sys.exit(EXIT_NEGATIVE if res.local else EXIT_OK)


@main.command("cover")
@click.option("--star/--no-star", default=True, help="Use the Hardy success objective.")
@click.option("--nu", type=click.FloatRange(0.0, 1.0), default=None,
              help="Use the tilted family member at this nu instead.")
@click.option("--grid", "n", type=click.IntRange(min=3), default=201, show_default=True)
@click.option("--delta", type=float, default=0.005, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
def cover_cmd(star, nu, n, delta, out, plot):
    """Concave cover of an objective: facet JSON plus a surface figure."""
    f, label = _objective(star, nu)
    grid = GridSpec(n=n, delta=delta)
    cov = build_cover(f, grid)
    outdir = _outdir(out)
    (outdir / f"cover_{label}.json").write_text(cov.to_json() + "\n")
    click.echo(f"objective {label}: {len(cov.planes)} upper facets")
    if plot:
        from .plotting import plot_surface

        plot_surface(f, grid, str(outdir / f"cover_{label}.png"), cover=cov,
                     title=f"objective {label} and its concave cover")


@main.command("regions")
@click.option("--star/--no-star", default=True)
@click.option("--nu", type=click.FloatRange(0.0, 1.0), default=None)
@click.option("--grid", "n", type=click.IntRange(min=3), default=201, show_default=True)
@click.option("--delta", type=float, default=0.005, show_default=True)
@click.option("--eps", type=float, default=DEFAULT_EPS, show_default=True)
@click.option("--eta", type=float, default=DEFAULT_ETA, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
def regions_cmd(star, nu, n, delta, eps, eta, out, plot):
    """Equality, concavity, and certified-region masks for one objective."""
    f, label = _objective(star, nu)
    grid = GridSpec(n=n, delta=delta)
    cov = build_cover(f, grid)
    eq = equality_region(f, cov, eps)
    conc = concavity_region(f, grid, eta)
    cert = eq.intersection(conc)
    outdir = _outdir(out)
    for name, mask in (("equality", eq), ("concavity", conc), ("certified", cert)):
        (outdir / f"{name}_{label}.csv").write_text(mask.to_csv())
        (outdir / f"{name}_{label}.json").write_text(mask.to_json() + "\n")
        click.echo(f"{name}: {mask.mask.sum()} of {mask.mask.size} grid points")
    if plot:
        from .plotting import plot_region

        plot_region(cert, str(outdir / f"regions_{label}.png"), overlay=conc,
                    title=f"certified region, objective {label}")


@main.command("sweep")
@click.option("--N", "N", type=click.IntRange(min=2), required=True)
@click.option("--grid", "n", type=click.IntRange(min=11), required=True)
@click.option("--delta", type=float, default=0.02, show_default=True)
@click.option("--eps", type=float, default=DEFAULT_EPS, show_default=True)
@click.option("--eta", type=float, default=DEFAULT_ETA, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
def sweep_cmd(N, n, delta, eps, eta, out, plot):
    """Union of certified regions over nu in {k/N}; per-nu masks plus summary."""
    outdir = _outdir(out)
    result = sweep_union(N, GridSpec(n=n, delta=delta), eps=eps, eta=eta)
    for k, nu in enumerate(result.nus, start=1):
        (outdir / f"region_nu_{k}_of_{N}.csv").write_text(result.regions[nu].to_csv())
    (outdir / "union.csv").write_text(result.union.to_csv())
    (outdir / "union.json").write_text(result.union.to_json() + "\n")
    summary = result.summary()
    (outdir / "summary.txt").write_text(summary + "\n")
    click.echo(summary)
    if plot:
        from .plotting import plot_union

        plot_union(result.union, str(outdir / "union.png"),
                   title=f"certified-region union, N={N}")


@main.command("blocks")
@click.option("--in", "infile", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the mixture behavior here.")
def blocks_cmd(infile, tol, out):
    """Mixture behavior and rigidity report for a block model file."""
    model = _load_model(infile)
    report = verify_lemma2(model, tol=tol)
    b = mixture_behavior(model)
    if out:
        _write_behavior(b, out)
    bary = report.barycenter
    click.echo(f"barycenter (r,s) = ({bary.r:.10g}, {bary.s:.10g})")
    click.echo(f"hardy_form {'pass' if report.hardy_form_ok else 'fail'}, "
               f"residual = {report.form_residual:.10g}")
    for note in report.notes:
        click.echo(f"note: {note}")
    sys.exit(EXIT_OK if report.hardy_form_ok else EXIT_NEGATIVE)


@main.command("extract")
@click.option("--in", "infile", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def extract_cmd(infile, out):
    """Isometry extraction from a common-point block model."""
    model = _load_model(infile)
    try:
        result = isometry_extract(model)
    except ValueError as exc:
        click.echo(f"extraction not applicable: {exc}", err=True)
        sys.exit(EXIT_NEGATIVE)
    click.echo(f"fidelity with target state = {result.fidelity:.15g}")
    if out:
        data = {
            "schema": "hardycert.extraction/1",
            "fidelity": result.fidelity,
            "target_state": [[z.real, z.imag] for z in result.target_state],
            "junk_diagonal": [float(v.real) for v in np.diag(result.junk)],
        }
        Path(out).write_text(json.dumps(data, indent=2) + "\n")


if __name__ == "__main__":
    main()
