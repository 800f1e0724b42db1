"""Command-line front end.

Subcommands reproduce the stability tables and both tensor-product
experiments, print or export coarsening operators, and apply refinement or
coarsening to coefficient grids stored as CSV files.

Exit codes: 0 success, 2 invalid configuration, 3 dimension or size errors,
4 I/O errors.
"""

import functools
import json
import sys
from fractions import Fraction

import click
import numpy as np

from .analysis import (
    DEFAULT_BREAKPOINTS_1D,
    DEFAULT_BREAKPOINTS_2D,
    NormReport,
    norm_report,
    norm_report_2d,
)
from .errors import (
    DimensionMismatchError,
    MismatchedSpacesError,
    NoValidConfigurationError,
    RankDeficientError,
    SizeCapExceededError,
    TooSmallSpaceError,
    UnsupportedWidthError,
)
from .experiments import (
    PROJECTION_METHOD,
    arctan_ring,
    coarsening_curve,
    disk_region_mask,
    localized_coarsening,
)
from .left_inverse import (
    TABULATED_WIDTHS,
    assemble_left_inverse,
    build_left_inverse,
    compute_omega_exact,
    lookup_parameters,
)
from .splines import SplineSpace
from .subdivision import build_subdivision_matrix
from .tensor import grid_from_csv, grid_to_csv

_SIZE_ERRORS = (DimensionMismatchError, MismatchedSpacesError, TooSmallSpaceError,
                SizeCapExceededError)
_CONFIG_ERRORS = (UnsupportedWidthError, NoValidConfigurationError, RankDeficientError,
                  ValueError)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _SIZE_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except _CONFIG_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except OSError as exc:
            click.echo(f"i/o error: {exc}", err=True)
            sys.exit(4)
    return wrapper


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _write_rows(path, header, rows, meta=None):
    lines = []
    if meta:
        lines.append("# " + meta)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        click.echo(text, nl=False)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit(path, text):
    if path is None:
        click.echo(text, nl=False)
    else:
        with open(path, "w") as fh:
            fh.write(text)


@click.group()
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for auxiliary randomized computations "
                   "(the shipped commands are deterministic).")
def main(seed):
    """Local coarsening operators for uniform B-spline spaces."""
    np.random.seed(seed)


def _rationalize(values, check):
    """Continued-fraction rationalization, verified exactly; None when unverifiable."""
    fracs = [Fraction(float(v)).limit_denominator(10 ** 7) for v in values]
    return fracs if check(fracs) else None


@main.command("show-operator")
@click.option("--degree", "-p", type=int, required=True)
@click.option("--width", "-r", type=int, required=True)
@_guarded
def cmd_show_operator(degree, width):
    """Print block parameters, the interior stencil, and the corner blocks."""
    params = lookup_parameters(degree, width)
    _, B = build_left_inverse(degree, width, max(2 * params.ell + 2 - degree, degree + 2))
    click.echo(f"parameters: p={params.p} r={params.r} k={params.k} q={params.q} "
               f"t={params.t} l={params.l} ell={params.ell} z={params.z}")

    exact = compute_omega_exact(degree, width, params)
    omega_fracs = _rationalize(B.omega, lambda fr: fr == exact)
    click.echo("omega (decimals): " + "  ".join(_fmt(v) for v in B.omega))
    if omega_fracs is not None:
        click.echo("omega (exact):    " + "  ".join(str(f) for f in omega_fracs))
    for name, block in (("B_tl", B.B_tl), ("B_br", B.B_br)):
        click.echo(f"{name}:")
        for row in block:
            click.echo("  " + "  ".join(f"{v:>14.10f}" for v in row))


@main.command("export-operator")
@click.option("--degree", "-p", type=int, required=True)
@click.option("--width", "-r", type=int, required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output path (stdout when omitted).")
@_guarded
def cmd_export_operator(degree, width, out):
    """Export an operator as JSON: {p, r, params, omega, B_tl, B_br}."""
    params = lookup_parameters(degree, width)
    _, B = build_left_inverse(degree, width, max(2 * params.ell + 2 - degree, degree + 2))
    _emit(out, B.to_json() + "\n")


def _norm_rows(degrees, dims, breakpoints):
    rows = []
    for p in degrees:
        for r in TABULATED_WIDTHS[p]:
            rep = (norm_report(p, r, breakpoints) if dims == 1
                   else norm_report_2d(p, r, breakpoints))
            if dims == 1:
                rows.append((p, r, rep.norm_B_inf, rep.norm_omega_2,
                             rep.norm_residual_2, rep.norm_residual_inf))
            else:
                rows.append((p, r, rep.norm_B_inf,
                             rep.norm_residual_2, rep.norm_residual_inf))
    return rows


@main.command("norm-table")
@click.option("--degree", "-p", "degree", default="all", show_default=True,
              help="Degree 1..4 or 'all'.")
@click.option("--dims", type=click.Choice(["1", "2"]), default="1", show_default=True)
@click.option("--breakpoints", "-N", type=int, default=None,
              help="Breakpoints per direction (defaults: 50 in 1D, 25 in 2D).")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@_guarded
def cmd_norm_table(degree, dims, breakpoints, out, fmt):
    """Stability table: operator norms per locality width."""
    dims = int(dims)
    degrees = (1, 2, 3, 4) if degree == "all" else (int(degree),)
    for p in degrees:
        if p not in TABULATED_WIDTHS:
            raise UnsupportedWidthError(f"no tabulated widths for degree {p}")
    N = breakpoints or (DEFAULT_BREAKPOINTS_1D if dims == 1 else DEFAULT_BREAKPOINTS_2D)
    rows = _norm_rows(degrees, dims, N)
    header = (("p", "r", "norm_B_inf", "norm_omega_2", "norm_I_AB_2", "norm_I_AB_inf")
              if dims == 1 else ("p", "r", "norm_B_inf", "norm_I_AB_2", "norm_I_AB_inf"))
    meta = f"dims={dims} breakpoints={N}"
    if fmt == "csv":
        _write_rows(out, header, rows, meta=meta)
    else:
        payload = [dict(zip(header, row)) for row in rows]
        _emit(out, json.dumps({"meta": meta, "rows": payload}, indent=1, sort_keys=True) + "\n")


@main.command("coarsen-curve")
@click.option("--degree", "-p", type=int, required=True)
@click.option("--widths", "-r", type=int, multiple=True, required=True)
@click.option("--elements", type=int, default=128, show_default=True,
              help="Elements per direction of the finest space.")
@click.option("--levels", type=int, default=4, show_default=True)
@click.option("--function", "function_id", type=click.Choice(["arctan-ring"]),
              default="arctan-ring", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@_guarded
def cmd_coarsen_curve(degree, widths, elements, levels, function_id, out, fmt):
    """Successive-coarsening L2 error curves against the projection baseline."""
    curves = coarsening_curve(degree, list(widths), elements=elements, levels=levels)
    meta = (f"domain=[0,1]^2 function={function_id} degree={degree} "
            f"elements={elements} levels={levels}")
    rows = []
    for curve in curves:
        for level, (dofs, err) in enumerate(curve.entries, start=1):
            rows.append((curve.method, level, dofs, float(err)))
    if fmt == "csv":
        _write_rows(out, ("method", "level", "dofs", "l2_error"), rows, meta=meta)
    else:
        payload = [{"method": m, "level": lv, "dofs": d, "l2_error": e}
                   for m, lv, d, e in rows]
        _emit(out, json.dumps({"meta": meta, "rows": payload}, indent=1, sort_keys=True) + "\n")


@main.command("localized")
@click.option("--degree", "-p", type=int, default=2, show_default=True)
@click.option("--widths", "-r", type=int, multiple=True, default=(6, 8), show_default=True)
@click.option("--elements", type=int, default=40, show_default=True)
@click.option("--region-center", type=(float, float), default=None,
              help="Disk center in coefficient-index space (default: grid middle).")
@click.option("--region-radius", type=float, default=7.8, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None,
              help="Directory for sample/error grid CSVs (stats only when omitted).")
@_guarded
def cmd_localized(degree, widths, elements, region_center, region_radius, out_dir):
    """Single coarsening of a localized 0/1-coefficient spline (40x40 -> 20x20)."""
    p = degree
    shape = (p + elements, p + elements)
    mask = disk_region_mask(shape, center=region_center, radius=region_radius)
    result = localized_coarsening(p=p, widths=list(widths), elements=elements,
                                  region_mask=mask)
    click.echo(f"# region=disk center={region_center or 'middle'} radius={_fmt(region_radius)} "
               f"elements={elements} degree={p} (region-sensitive; see README)")
    click.echo("method,modified_fraction,rel_linf_error")
    for m in result.methods:
        click.echo(f"{m.method},{_fmt(m.modified_fraction)},{_fmt(m.rel_linf_error)}")
    if out_dir is not None:
        import os
        os.makedirs(out_dir, exist_ok=True)
        grid_to_csv(result.original_samples, os.path.join(out_dir, "localized_original_samples.csv"))
        for m in result.methods:
            tag = m.method.replace("-", "_")
            grid_to_csv(m.samples, os.path.join(out_dir, f"localized_{tag}_samples.csv"))
            grid_to_csv(m.fine_error_coeffs,
                        os.path.join(out_dir, f"localized_{tag}_error_coeffs.csv"))
        click.echo(f"grids written to {out_dir}")


@main.command("refine")
@click.option("--in", "path_in", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "path_out", type=click.Path(dir_okay=False), required=True)
@click.option("--degree", "-p", type=int, required=True)
@click.option("--dims", type=click.Choice(["1", "2"]), default="2", show_default=True)
@_guarded
def cmd_refine(path_in, path_out, degree, dims):
    """Refine a coarse coefficient grid (CSV) by one dyadic step per direction."""
    data = grid_from_csv(path_in)
    dims = int(dims)
    p = degree
    if dims == 1:
        data = data[:, :1]
    mats = []
    for d in range(dims):
        n_hat = data.shape[d]
        N_hat = n_hat - p + 1
        if N_hat < 2:
            raise DimensionMismatchError(f"axis {d}: {n_hat} coefficients invalid for degree {p}")
        coarse = SplineSpace.uniform(0.0, 1.0, N_hat, p)
        mats.append(build_subdivision_matrix(coarse, coarse.refine()))
    out = mats[0].apply(data)
    if dims == 2:
        out = mats[1].apply(out.T).T
    grid_to_csv(out if dims == 2 else out[:, 0], path_out)


@main.command("coarsen")
@click.option("--in", "path_in", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "path_out", type=click.Path(dir_okay=False), required=True)
@click.option("--degree", "-p", type=int, required=True)
@click.option("--width", "-r", type=int, required=True)
@click.option("--dims", type=click.Choice(["1", "2"]), default="2", show_default=True)
@_guarded
def cmd_coarsen(path_in, path_out, degree, width, dims):
    """Coarsen a fine coefficient grid (CSV) by one dyadic step per direction."""
    data = grid_from_csv(path_in)
    dims = int(dims)
    p = degree
    if dims == 1:
        data = data[:, :1]
    ops = []
    params = lookup_parameters(p, width)
    for d in range(dims):
        n = data.shape[d]
        # fine n = 2*nhat - p
        if (n + p) % 2 != 0:
            raise DimensionMismatchError(f"axis {d}: {n} coefficients invalid for degree {p}")
        n_hat = (n + p) // 2
        N_hat = n_hat - p + 1
        if N_hat < 2:
            raise DimensionMismatchError(f"axis {d}: {n} coefficients too few for degree {p}")
        coarse = SplineSpace.uniform(0.0, 1.0, N_hat, p)
        A = build_subdivision_matrix(coarse, coarse.refine())
        ops.append(assemble_left_inverse(A, params))
    out = ops[0].apply(data)
    if dims == 2:
        out = ops[1].apply(out.T).T
    grid_to_csv(out if dims == 2 else out[:, 0], path_out)


@main.command("export-matrix")
@click.option("--degree", "-p", type=int, required=True)
@click.option("--breakpoints", "-N", type=int, required=True,
              help="Coarse breakpoints per direction.")
@click.option("--what", type=click.Choice(["A", "B"]), required=True)
@click.option("--width", "-r", type=int, default=None,
              help="Locality width (required for B).")
@click.option("--format", "fmt", type=click.Choice(["mm", "csv"]), default="mm",
              show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@_guarded
def cmd_export_matrix(degree, breakpoints, what, width, fmt, out):
    """Export the subdivision matrix (A) or a dense left inverse (B)."""
    coarse = SplineSpace.uniform(0.0, 1.0, breakpoints, degree)
    A = build_subdivision_matrix(coarse, coarse.refine())
    if what == "A":
        M = A.toarray()
    else:
        if width is None:
            raise UnsupportedWidthError("--width is required when exporting B")
        M = assemble_left_inverse(A, lookup_parameters(degree, width)).toarray()
    if fmt == "mm":
        import scipy.io
        import scipy.sparse
        scipy.io.mmwrite(out, scipy.sparse.coo_matrix(M))
    else:
        grid_to_csv(M, out)


if __name__ == "__main__":
    main()
