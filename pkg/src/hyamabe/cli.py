"""Command-line interface: ``hyamabe constants|solve|q|sweep|certify``.

Exit codes: 0 success, 1 certification failed, 2 usage error, 3 solver failure.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from .certify import CERTIFIED, certify, check_trace, markdown_report
from .dimension import Dimensions, lambda_of_r, lambda_of_scalar, regime, sphere_yamabe
from .errors import HYamabeError, Indeterminate, UnknownQ0
from .ode import OdeParams, integrate
from .shooting import classify, find_ground_state
from .svg import line_chart
from .yamabe import SolverSettings, boundary_constants, compute_q, scaling_upper_bound

log = logging.getLogger("hyamabe")

EXIT_FAILED = 1
EXIT_SOLVER = 3
SCHEMA = 1
# relative slack for the scaling-inequality check on sweeps
SCALING_SLACK = 1e-6


class ExactNumber(click.ParamType):
    """Decimal or rational literal kept as a Fraction, so 1, -1/2 or 0.46075
    give exact lambda values."""

    name = "number"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a number", param, ctx)


class AlphaList(click.ParamType):
    name = "a1,a2,..."

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        try:
            vals = [float(v) for v in str(value).split(",") if v.strip()]
        except ValueError:
            self.fail(f"{value!r} is not a comma-separated list of numbers", param, ctx)
        if not vals or any(not v > 0 for v in vals):
            self.fail("initial values must be positive", param, ctx)
        return vals


EXACT = ExactNumber()


def _dims(n: int, m: int) -> Dimensions:
    try:
        return Dimensions(n, m)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def dims_options(f):
    f = click.option("--m", "m", type=int, required=True, help="Dimension of the sphere factor (>= 2).")(f)
    f = click.option("--n", "n", type=int, required=True, help="Dimension of H^n (>= 2).")(f)
    return f


def solver_options(f):
    opts = [
        click.option("--rel-tol", type=click.FloatRange(min=0, min_open=True), default=None,
                      help="Integrator relative tolerance."),
        click.option("--abs-tol", type=click.FloatRange(min=0, min_open=True), default=None,
                      help="Integrator absolute tolerance."),
        click.option("--width-tol", type=click.FloatRange(min=0, min_open=True), default=None,
                      help="Relative bracket width at which bisection stops."),
        click.option("--t-max", type=click.FloatRange(min=0, min_open=True), default=None,
                      help="Integration horizon."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _settings(rel_tol=None, abs_tol=None, width_tol=None, t_max=None) -> SolverSettings:
    base = SolverSettings()
    ctl = base.controls
    try:
        ctl = replace(ctl, rel_tol=rel_tol or ctl.rel_tol, abs_tol=abs_tol or ctl.abs_tol,
                      t_max=t_max or ctl.t_max)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    return replace(base, controls=ctl, width_tol=width_tol or base.width_tol)


def _solver_failure(exc: Exception):
    click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
    sys.exit(EXIT_SOLVER)


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x) if x.denominator == 1 else f"{x} = {float(x):.10g}"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool):
    """H^n-Yamabe constants of H^n x S^m by ODE shooting."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@dims_options
def constants(n: int, m: int):
    """Print the dimensional constants for H^n x S^m."""
    dims = _dims(n, m)
    d = dims.derived
    rows = [
        ("n", n), ("m", m), ("k = n+m", dims.k),
        ("a", d.a), ("p", d.p), ("q", d.q), ("c", d.c), ("D", d.d),
        ("V(S^m)", d.vol_sphere_m), ("V(S^(n-1))", d.vol_sphere_n_minus_1),
    ]
    rows.append(("Y(S^(n+m))", sphere_yamabe(dims.k)))
    rows.append(("regime at r=1", regime(m * (m - 1), dims).value))
    rows.append(("regime boundary s_g", d.c))
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        click.echo(f"{name:<{width}}  {_fmt(value)}")


def _run_record(params, traj, verdict) -> dict:
    return {
        "alpha": traj.alpha,
        "family": verdict,
        "termination": traj.termination.value,
        "zero_crossing": traj.zero_crossing,
        "t_end": traj.t_end,
        "steps": int(traj.t.size - 1),
        "events": [{"kind": ev.kind.value, "t": ev.t, "phi": ev.phi, "dphi": ev.dphi}
                   for ev in traj.events],
    }


@main.command()
@dims_options
@click.option("--r", "r", type=EXACT, default=None, help="Sphere radius parameter r in (0, 1].")
@click.option("--s", "s", type=EXACT, default=None,
              help="Total scalar curvature s; lambda = s / a. Alternative to --r.")
@click.option("--alpha", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Single initial value phi(0).")
@click.option("--family", type=AlphaList(), default=None,
              help="Comma-separated initial values, one CSV each.")
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), default=Path("."),
              show_default=True)
@solver_options
def solve(n, m, r, s, alpha, family, out_dir, rel_tol, abs_tol, width_tol, t_max):
    """Integrate shots (or the ground state) and write (t, phi, dphi, energy) CSVs.

    When lambda > 0 the normalized form phi'' + (n-1)coth(t)phi' = lambda(phi - phi^q)
    is integrated and initial values refer to it.
    """
    dims = _dims(n, m)
    if (r is None) == (s is None):
        raise click.UsageError("give exactly one of --r and --s")
    if alpha is not None and family is not None:
        raise click.UsageError("--alpha and --family are mutually exclusive")
    if r is not None:
        if not 0 < r <= 1:
            raise click.BadParameter("r must lie in (0, 1]", param_hint="--r")
        lam = lambda_of_r(dims, r)
    else:
        lam = lambda_of_scalar(dims, s)
    settings = _settings(rel_tol, abs_tol, width_tol, t_max)
    params = OdeParams(lam=float(lam), n=n, q=float(dims.derived.q), normalized=lam > 0)
    out_dir.mkdir(parents=True, exist_ok=True)

    records = []
    try:
        if alpha is None and family is None:
            gs = find_ground_state(params, settings.controls, settings.width_tol,
                                   smallness=settings.smallness)
            traj = gs.trajectory
            path = out_dir / "ground_state.csv"
            with open(path, "w", newline="") as fh:
                traj.to_csv(fh)
            rec = _run_record(params, traj, "GroundState")
            rec["bracket"] = [gs.bracket.alpha_lo, gs.bracket.alpha_hi]
            rec["file"] = path.name
            records.append(rec)
            click.echo(f"ground state alpha = {gs.alpha:.15g} -> {path}")
        else:
            alphas = [alpha] if alpha is not None else family
            trajs = [integrate(params, a, settings.controls) for a in alphas]
            # the p-norm test for lambda <= 0 compares against the nearest
            # larger initial value that crossed zero
            for a, traj in zip(alphas, trajs):
                refs = [float(t.accumulator[-1]) for b, t in zip(alphas, trajs)
                        if b > a and t.crossed_zero]
                ref = refs[-1] if refs else None
                try:
                    verdict = classify(params, traj, ref, settings.smallness).tag.value
                except Indeterminate:
                    verdict = "Undetermined"
                path = out_dir / f"alpha_{a:g}.csv"
                with open(path, "w", newline="") as fh:
                    traj.to_csv(fh)
                rec = _run_record(params, traj, verdict)
                rec["file"] = path.name
                records.append(rec)
                zc = traj.zero_crossing
                where = f"crosses zero at t = {zc:.6g}" if zc is not None else "no zero crossing"
                click.echo(f"alpha = {a:g}: {where}, family {verdict} -> {path}")
    except HYamabeError as exc:
        _solver_failure(exc)

    _write_json(out_dir / "events.json", {
        "schema": SCHEMA, "n": n, "m": m,
        "r": None if r is None else str(r), "s": None if s is None else str(s),
        "lambda": str(lam), "q": str(dims.derived.q), "normalized_form": params.normalized,
        "runs": records,
    })


@main.command("q")
@dims_options
@click.option("--r", "r", type=EXACT, required=True, help="r in (0, 1].")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Also write the JSON to this file.")
@solver_options
def q_cmd(n, m, r, out, rel_tol, abs_tol, width_tol, t_max):
    """Compute Q_{n,m}(r) and print it as JSON."""
    dims = _dims(n, m)
    if not 0 < r <= 1:
        raise click.BadParameter("r must lie in (0, 1]", param_hint="--r")
    try:
        res = compute_q(dims, r, _settings(rel_tol, abs_tol, width_tol, t_max))
    except HYamabeError as exc:
        _solver_failure(exc)
    payload = {"schema": SCHEMA, **res.to_dict()}
    click.echo(json.dumps(payload, indent=2, sort_keys=True))
    if out is not None:
        _write_json(out, payload)


def _sweep_point(args):
    dims, r, settings = args
    try:
        res = compute_q(dims, r, settings)
    except HYamabeError as exc:
        return r, None, f"{type(exc).__name__}: {exc}"
    return r, res, None


def _grid(r_min: float, r_max: float, steps: int, spacing: str) -> list[float]:
    if steps == 1:
        return [r_max]
    if spacing == "log":
        return [float(x) for x in np.geomspace(r_min, r_max, steps)]
    return [float(x) for x in np.linspace(r_min, r_max, steps)]


def _default_jobs() -> int:
    env = os.environ.get("HYAMABE_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise click.UsageError(f"HYAMABE_JOBS={env!r} is not an integer")
    return os.cpu_count() or 1


@main.command()
@dims_options
@click.option("--r-min", type=click.FloatRange(min=0, min_open=True, max=1), required=True)
@click.option("--r-max", type=click.FloatRange(min=0, min_open=True, max=1), required=True)
@click.option("--steps", type=click.IntRange(min=1), required=True)
@click.option("--spacing", type=click.Choice(["linear", "log"]), default="linear", show_default=True)
@click.option("--include-zero", is_flag=True, help="Prepend the stored r = 0 value.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True,
              help="CSV output path.")
@click.option("--svg", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Also write a line plot of Q against r.")
@click.option("--jobs", type=click.IntRange(min=1), default=None,
              help="Worker processes (default: $HYAMABE_JOBS or the CPU count).")
@solver_options
def sweep(n, m, r_min, r_max, steps, spacing, include_zero, out, svg, jobs, rel_tol, abs_tol,
          width_tol, t_max):
    """Tabulate Q_{n,m}(r) on a grid and check the scaling inequality between neighbours."""
    dims = _dims(n, m)
    if r_min > r_max:
        raise click.UsageError("--r-min must not exceed --r-max")
    settings = _settings(rel_tol, abs_tol, width_tol, t_max)
    grid = _grid(r_min, r_max, steps, spacing)
    jobs = jobs or _default_jobs()
    tasks = [(dims, r, settings) for r in grid]
    if jobs == 1 or len(tasks) == 1:
        results = [_sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(_sweep_point, tasks))
    failures = [(r, err) for r, res, err in results if err is not None]
    for r, err in failures:
        click.echo(f"error at r = {r:.10g}: {err}", err=True)
    if failures:
        sys.exit(EXIT_SOLVER)

    rows = []
    if include_zero:
        try:
            rows.append((0.0, boundary_constants(dims).q0, 0.0, None))
        except UnknownQ0 as exc:
            raise click.UsageError(f"--include-zero: {exc}") from exc
    rows.extend((r, res.q_value, res.uncertainty, res.alpha_lambda) for r, res, _ in results)

    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["r", "q", "uncertainty", "alpha"])
        for r, q, unc, alpha in rows:
            writer.writerow([f"{r:.17g}", f"{q:.17g}", f"{unc:.17g}",
                             "" if alpha is None else f"{alpha:.17g}"])
    click.echo(f"wrote {len(rows)} rows -> {out}")

    bad = 0
    pts = [(r, res.q_value) for r, res, _ in results]
    for (r0, q0), (r1, q1) in zip(pts, pts[1:]):
        if r1 > r0 and q1 > scaling_upper_bound(q0, r0, r1, dims) * (1 + SCALING_SLACK):
            bad += 1
            click.echo(f"scaling inequality violated between r = {r0:.6g} and {r1:.6g}", err=True)
    click.echo(f"scaling inequality: {len(pts) - 1 - bad}/{max(len(pts) - 1, 0)} neighbour pairs ok")

    if svg is not None:
        svg.parent.mkdir(parents=True, exist_ok=True)
        svg.write_text(line_chart([r for r, *_ in rows], [q for _, q, *_ in rows],
                                  title=f"Q_{{{n},{m}}}(r)", x_label="r", y_label="Q"),
                       encoding="utf-8")
        click.echo(f"plot -> {svg}")
    if bad:
        sys.exit(EXIT_SOLVER)


@main.command("certify")
@dims_options
@click.option("--mu", type=click.FloatRange(min=0, max=1, min_open=True, max_open=True),
              default=0.99, show_default=True)
@click.option("--q0", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Q_{n,m}(0) for dimensions without a stored value.")
@click.option("--out-json", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--out-md", type=click.Path(dir_okay=False, path_type=Path), default=None)
@solver_options
def certify_cmd(n, m, mu, q0, out_json, out_md, rel_tol, abs_tol, width_tol, t_max):
    """Certify Q_{n,m}(r) >= mu Q_{n,m}(0) on [0, 1]."""
    dims = _dims(n, m)
    settings = _settings(rel_tol, abs_tol, width_tol, t_max)

    def progress(step):
        log.info("step %d: s = %.6g, Q = %.6f", step.i, step.s, step.q)

    try:
        trace = certify(dims, mu, settings, q0=q0, progress=progress)
    except UnknownQ0 as exc:
        raise click.UsageError(f"{exc}; pass --q0") from exc
    except HYamabeError as exc:
        _solver_failure(exc)
    recheck = check_trace(trace)
    if out_json is not None:
        _write_json(out_json, {**trace.to_dict(), "recheck": recheck})
    if out_md is not None:
        out_md.parent.mkdir(parents=True, exist_ok=True)
        out_md.write_text(markdown_report(trace), encoding="utf-8")
    click.echo(f"{trace.verdict}: {trace.step_count} steps, final s = {trace.final_s:.6g} "
               f"(threshold {trace.threshold:.6g}), independent recheck {recheck}")
    if trace.verdict != CERTIFIED or recheck != CERTIFIED:
        if trace.failed_step is not None:
            st = trace.steps[trace.failed_step - 1]
            click.echo(f"failed at step {st.i}: s = {st.s:.6g}, deflated Q = {st.q_used:.6f} "
                       f"<= {mu * trace.q0:.6f}", err=True)
        sys.exit(EXIT_FAILED)


if __name__ == "__main__":
    main()
