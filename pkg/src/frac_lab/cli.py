"""Command-line front end.

Exit codes: 0 success, 1 failed checks (verify), 2 invalid input,
3 numerical non-convergence, 4 file errors.  FRAC_LAB_THREADS caps the
worker threads used by sweeps and restarts; results never depend on it.
"""

from __future__ import annotations

import functools
import json
import math
import os
import sys

import click

from .constants import CriticalParams, SeriesError, alpha_star, bbm_constant, gamma_series, surface_measure
from .functionals import WeightSpec, blowup_scan, write_scan_csv
from .funcspace import (
    QuadratureError,
    QuadratureSpec,
    even_extension,
    gagliardo_1d,
    gagliardo_radial,
    lq_norm,
    moser_profile,
    read_function_csv,
    read_profile_csv,
    rearrange,
    write_profile_csv,
)
from .poincare import (
    IntervalUnionDomain,
    load_domain,
    ls_sections,
    rayleigh_estimate,
    results_json,
    section_lower_bound,
    uniform_poincare_check,
)

EXIT_FAILED, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 1, 2, 3, 4


class NonConvergence(RuntimeError):
    pass


def _threads() -> int:
    raw = os.environ.get("FRAC_LAB_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"FRAC_LAB_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"FRAC_LAB_THREADS must be a positive integer, got {raw!r}")
    return value


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (OSError, UnicodeDecodeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)
        except (QuadratureError, SeriesError, NonConvergence, ArithmeticError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)
        except (ValueError, TypeError, KeyError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INVALID)

    return wrapper


def _emit(text: str, output):
    if output is None:
        click.echo(text, nl=False)
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text)


def _params(n, p, s):
    if p is None and s is None:
        raise ValueError("give --p or --s")
    if p is not None and not p > 1:
        raise ValueError(f"p must be > 1, got {p}")
    if p is None:
        return CriticalParams.from_ns(n, s)
    if s is None:
        return CriticalParams.from_np(n, p)
    return CriticalParams(n, s, p)


def _floats(text: str):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValueError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _quad(cells, rel_err):
    return QuadratureSpec(cells_per_dim=cells, target_rel_err=rel_err)


common_np = [
    click.option("--n", type=int, default=1, show_default=True, help="dimension"),
    click.option("--p", type=float, default=None, help="integrability exponent"),
    click.option("--s", type=float, default=None, help="order; s p = n is required"),
]


def with_np(fn):
    for opt in reversed(common_np):
        fn = opt(fn)
    return fn


output_opt = click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="write here instead of stdout")


@click.group()
def main():
    """Numerical experiments for fractional Moser-Trudinger and Poincare inequalities."""


@main.command("constants")
@with_np
@click.option("--tol", type=float, default=1e-12, show_default=True)
@output_opt
@_guarded
def cmd_constants(n, p, s, tol, output):
    """omega_{n-1}, K(p, n), gamma_{s,n} and alpha*."""
    params = _params(n, p, s)
    series = gamma_series(params.n, params.p, tol=tol)
    out = {
        "n": params.n,
        "s": params.s,
        "p": params.p,
        "omega": surface_measure(params.n),
        "K": bbm_constant(params.p, params.n),
        "gamma": series.value,
        "alpha_star": alpha_star(params),
        "terms_used": series.terms_used,
        "tail_bound": series.tail_bound,
    }
    _emit(_json(out), output)


@main.command("moser")
@with_np
@click.option("--eps-grid", default="1e-1,1e-2,1e-3,1e-4", show_default=True)
@click.option("--nodes", type=int, default=400, show_default=True)
@output_opt
@_guarded
def cmd_moser(n, p, s, eps_grid, nodes, output):
    """Seminorm and L^p norm of the Moser sequence along an eps grid."""
    params = _params(n, p, s)
    eps = _floats(eps_grid)
    if any(not 0 < e < 1 for e in eps):
        raise ValueError("eps values must lie in (0, 1)")
    gamma = gamma_series(params.n, params.p).value
    lines = ["eps,seminorm_p,lp_norm_p,ratio"]
    for e in eps:
        u = moser_profile(params, e, nodes)
        if params.n == 1:
            semi = gagliardo_1d(even_extension(u), params.s, params.p)
        else:
            semi = gagliardo_radial(u, params)
        lp = lq_norm(u, params.p, params.n) ** params.p
        lines.append(f"{e!r},{semi!r},{lp!r},{semi / gamma!r}")
    _emit("\n".join(lines) + "\n", output)


@main.command("seminorm")
@click.option("--input", "path", required=True, type=click.Path(dir_okay=False))
@with_np
@click.option("--cells", type=int, default=32, show_default=True, help="minimum cells per support interval")
@click.option("--rel-err", type=float, default=1e-6, show_default=True)
@output_opt
@_guarded
def cmd_seminorm(path, n, p, s, cells, rel_err, output):
    """[u]^p of a profile CSV (r,value: radial on R^n) or function CSV (x,value: on R)."""
    with open(path) as fh:
        header = fh.readline().strip()
        fh.seek(0)
        if header == "x,value":
            u = read_function_csv(fh)
            if n != 1:
                raise ValueError("an x,value function lives on R; use --n 1")
            kind = "function"
        else:
            u = read_profile_csv(fh)
            kind = "radial"
    quad = _quad(cells, rel_err)
    if kind == "function" or n == 1:
        if p is None or s is None:
            params = _params(1, p, s)
            s_, p_ = params.s, params.p
        else:
            s_, p_ = s, p
        f = u if kind == "function" else even_extension(u)
        value, err = gagliardo_1d(f, s_, p_, quad, with_error=True)
        lp = lq_norm(f, p_, 1) ** p_
    else:
        params = _params(n, p, s)
        s_, p_ = params.s, params.p
        value, err = gagliardo_radial(u, params, quad, with_error=True)
        lp = lq_norm(u, p_, n) ** p_
    _emit(_json({"n": n, "s": s_, "p": p_, "seminorm_p": value, "error_estimate": err, "lp_norm_p": lp}), output)


@main.command("rearrange")
@click.option("--input", "path", required=True, type=click.Path(dir_okay=False))
@click.option("--n", type=int, default=1, show_default=True)
@click.option("--refine", type=int, default=None, help="extra levels per gap (default 0 for n = 1, 16 otherwise)")
@output_opt
@_guarded
def cmd_rearrange(path, n, refine, output):
    """Symmetric decreasing rearrangement, written as an r,value profile."""
    with open(path) as fh:
        header = fh.readline().strip()
        fh.seek(0)
        u = read_function_csv(fh) if header == "x,value" else read_profile_csv(fh)
    _emit(write_profile_csv(rearrange(u, n, refine)), output)


@main.command("poincare")
@click.option("--domain", "path", required=True, type=click.Path(dir_okay=False))
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--s", type=float, default=None, help="default 1/p (s p = 1)")
@click.option("--q", type=float, default=None, help="default p")
@click.option("--grid-n", type=int, default=64, show_default=True)
@click.option("--restarts", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@output_opt
@_guarded
def cmd_poincare(path, p, s, q, grid_n, restarts, seed, output):
    """Rayleigh estimate and closed-form lower bound on an interval-union domain."""
    domain = load_domain(path)
    if not isinstance(domain, IntervalUnionDomain):
        raise ValueError("poincare needs an intervals domain; use ls-check for planar domains")
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p}")
    s = 1.0 / p if s is None else s
    q = p if q is None else q
    est = rayleigh_estimate(domain, s, p, q, grid_n, restarts=restarts, seed=seed, threads=_threads())
    lower = section_lower_bound(domain, s, p) if q == p else None
    _emit(results_json(est, lower), output)
    if not est.converged:
        raise NonConvergence(f"descent did not converge (residual {est.residual:.3e})")


@main.command("ls-check")
@click.option("--domain", "path", required=True, type=click.Path(dir_okay=False))
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--s", type=float, default=None, help="default 1/p")
@click.option("--q", type=float, default=None, help="default p")
@click.option("--directions", type=int, default=8, show_default=True)
@click.option("--offsets", default="-0.5,0,0.5", show_default=True)
@click.option("--grid-n", type=int, default=None, help="also compute Rayleigh estimates per section")
@output_opt
@_guarded
def cmd_ls_check(path, p, s, q, directions, offsets, grid_n, output):
    """Uniform one-dimensional bound over line sections of a strips or between-graphs domain."""
    domain = load_domain(path)
    if isinstance(domain, IntervalUnionDomain):
        raise ValueError("ls-check needs a strips or between_graphs domain")
    if directions < 1:
        raise ValueError("directions must be >= 1")
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p}")
    s = 1.0 / p if s is None else s
    offs = _floats(offsets)
    angles = [math.pi * (j + 0.5) / directions for j in range(directions)]
    fams = [ls_sections(domain, a, offs) for a in angles]
    res = uniform_poincare_check(fams, s, p, q, grid_n=grid_n, threads=_threads())
    per_dir, k = [], 0
    for a, fam in zip(angles, fams):
        if "parallel" in fam.flags:
            per_dir.append({"angle": a, "bound": None, "flags": fam.flags})
            continue
        b = res.bounds[k : k + len(fam.sections)]
        k += len(fam.sections)
        per_dir.append({"angle": a, "bound": min(b), "flags": fam.flags})
    out = {"value": res.value, "directions": per_dir, "flags": res.flags}
    if res.estimates:
        out["min_estimate"] = min(res.estimates)
    _emit(_json(out), output)


def _weight(name):
    return WeightSpec({"t": "identity"}.get(name, name))


@main.command("blowup")
@with_np
@click.option("--alpha-frac", type=float, default=1.0, show_default=True)
@click.option("--weight", type=click.Choice(["one", "t", "identity", "log1p"]), default="t", show_default=True)
@click.option("--eps-grid", default="1e-1,3.16227766016838e-2,1e-2,3.16227766016838e-3,1e-3,3.16227766016838e-4,1e-4",
              show_default=True)
@click.option("--normalization", type=click.Choice(["seminorm_ball", "full_norm_ball", "lp_normalized"]),
              default="seminorm_ball", show_default=True)
@click.option("--domain-radius", type=float, default=None, help="ball radius; whole space when omitted")
@click.option("--k", type=int, default=None, help="order of the truncated exponential")
@click.option("--nodes", type=int, default=400, show_default=True)
@output_opt
@_guarded
def cmd_blowup(n, p, s, alpha_frac, weight, eps_grid, normalization, domain_radius, k, nodes, output):
    """Moser functional of the normalised Moser sequence along an eps grid."""
    params = _params(n, p if p is not None or s is not None else 2.0, s)
    rows = blowup_scan(alpha_frac, _weight(weight), _floats(eps_grid), params, normalization, domain_radius,
                       nodes=nodes, k=k, threads=_threads())
    _emit(write_scan_csv(rows), output)
    bad = [r.eps for r in rows if r.error]
    if bad:
        raise NonConvergence(f"quadrature failed at eps = {bad}")


@main.command("fa-scan")
@with_np
@click.option("--alpha-frac", type=float, default=1.0, show_default=True)
@click.option("--eps-grid", default="1e-1,1e-2,1e-3,1e-4", show_default=True)
@click.option("--nodes", type=int, default=400, show_default=True)
@output_opt
@_guarded
def cmd_fa_scan(n, p, s, alpha_frac, eps_grid, nodes, output):
    """Adachi-Tanaka quotient int Psi(alpha |u|^q) / ||u||_p^p over the Moser sequence with [u] = 1."""
    params = _params(n, p if p is not None or s is not None else 2.0, s)
    rows = blowup_scan(alpha_frac, WeightSpec("one"), _floats(eps_grid), params, "lp_normalized", None,
                       nodes=nodes, threads=_threads())
    _emit(write_scan_csv(rows), output)
    bad = [r.eps for r in rows if r.error]
    if bad:
        raise NonConvergence(f"quadrature failed at eps = {bad}")


@main.command("verify")
@click.option("--suite", type=click.Choice(["all", "quick"]), default="all", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@output_opt
@_guarded
def cmd_verify(suite, seed, output):
    """Run the acceptance checks; exit 0 iff all pass."""
    from .checks import SUITES, format_report, run_checks

    results = run_checks(SUITES[suite], seed=seed)
    _emit(format_report(results), output)
    if not all(r.passed for r in results):
        sys.exit(EXIT_FAILED)


if __name__ == "__main__":
    main()
