"""Batch command surface over the library with machine-readable outputs.

Exit codes: 0 success, 2 argument validation, 3 numeric failure (pole or
convergence), 4 cross-check mismatch.  JSON outputs follow the envelope
schema shipped in dyckmoments/schemas; numbers are serialized as strings
("num/den" in exact mode, full-precision decimal otherwise).
"""

from __future__ import annotations

import json
import os
import sys
from fractions import Fraction

import click
import mpmath as mp
import numpy as np

from . import __version__, backend, costs, moments, numerics, oracle, refdist, sampler, trees
from .errors import (
    ConvergenceError,
    DomainError,
    DyckMomentsError,
    HalfPointError,
    MismatchError,
    NoClosedForm,
    PoleError,
)

EXIT_NUMERIC = 3
EXIT_MISMATCH = 4


def _fraction(value: str) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.UsageError(f"not a rational number: {value!r}") from exc


def _fmt(x, bits=None) -> str:
    return numerics.to_digits(x, bits)


def _emit(command: str, params: dict, results: dict, output: str | None) -> None:
    payload = {
        "schema_version": 1,
        "command": command,
        "params": params,
        "results": results,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _cost_from(name: str, a: str | None, p: Fraction) -> costs.CostFunction:
    family = costs.CLI_NAMES.get(name)
    if family is None:
        raise click.UsageError(f"unknown cost family {name!r}; one of {sorted(costs.CLI_NAMES)}")
    if family == costs.GAMMA_RATIO:
        return costs.gamma_ratio(p, _fraction(a) if a else Fraction(1, 2))
    if family == costs.GAMMA_RATIO_32:
        if a is None:
            raise click.UsageError("gamma-ratio-32 needs --a")
        return costs.gamma_ratio_32(p, _fraction(a))
    if family == costs.POWER_HALF:
        return costs.power_half(p)
    if family == costs.POWER_ONE:
        return costs.power_one(p)
    if family == costs.PURE_POWER:
        return costs.pure_power(p)
    return costs.log_shift()


def _guard_half(p: Fraction, hint: str) -> None:
    if p == Fraction(1, 2):
        raise click.UsageError(f"p = 1/2 is the singular point of the recursions; {hint}")


class _Failure(SystemExit):
    pass


def _run(body):
    try:
        body()
    except click.UsageError:
        raise
    except (MismatchError,) as exc:
        click.echo(f"mismatch: {exc}", err=True)
        sys.exit(EXIT_MISMATCH)
    except (PoleError, HalfPointError, ConvergenceError) as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    except (DomainError, DyckMomentsError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)


def _bits_option(f):
    return click.option(
        "--bits",
        type=int,
        default=lambda: int(os.environ.get("DYCKMOMENTS_BITS", numerics.DEFAULT_PRECISION)),
        show_default="256 or $DYCKMOMENTS_BITS",
        help="working precision in bits",
    )(f)


@click.group()
@click.version_option(__version__)
def main():
    """Moment engines for deformed-area statistics of Dyck paths."""


@main.command("moments")
@click.option("--ensemble", type=click.Choice(["excursion", "bridge"]), default="excursion")
@click.option("--p", "p_str", required=True, help="exponent (rational, e.g. 1 or 3/4)")
@click.option("--smax", type=int, default=10, show_default=True)
@click.option("--shift", default="canonical", show_default=True,
              help="canonical | none | explicit value")
@_bits_option
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_moments(ensemble, p_str, smax, shift, bits, output):
    """Limit-law moments: mu, rescaled, canonical shift, shifted."""
    p = _fraction(p_str)
    _guard_half(p, "use `limit-half` for the p -> 1/2 moments")

    def body():
        table = moments.build_moment_table(ensemble, p, smax, bits, shift)
        results = {
            "mu": [_fmt(v, bits) for v in table.mu],
            "rescaled": [_fmt(v, bits) for v in table.rescaled],
            "shift_t": _fmt(table.shift_t, bits),
            "shifted": [_fmt(v, bits) for v in table.shifted],
            "rational_mode": isinstance(table.mu[0], Fraction),
        }
        _emit("moments", {"ensemble": ensemble, "p": str(p), "smax": smax,
                          "shift": str(shift), "bits": bits}, results, output)

    _run(body)


@main.command("alpha")
@click.option("--cost", "cost_name", required=True)
@click.option("--a", default=None, help="family parameter a (rational)")
@click.option("--p", "p_str", required=True)
@click.option("--method", type=click.Choice(["both", "closed", "numeric"]), default="both")
@click.option("--tol", default="1e-30", show_default=True)
@_bits_option
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_alpha(cost_name, a, p_str, method, tol, bits, output):
    """Non-universal constant alpha(omega_p), closed form and/or regularized."""
    p = _fraction(p_str)
    _guard_half(p, "alpha has a simple pole there (residue -1/(2 sqrt(pi)))")
    cf = _cost_from(cost_name, a, p)

    def body():
        results = {"cost": cf.describe()}
        closed = numeric = None
        if method in ("both", "closed"):
            try:
                closed = costs.alpha_closed_form(cf, bits)
                results["closed_form"] = _fmt(closed.value, bits)
            except NoClosedForm as exc:
                if method == "closed":
                    raise
                results["closed_form"] = None
        if method in ("both", "numeric"):
            numeric = costs.alpha_numeric(cf, mp.mpf(tol), bits)
            results["numeric"] = _fmt(numeric.value, bits)
            results["numeric_error_estimate"] = _fmt(numeric.estimated_error, bits)
        if closed is not None and numeric is not None:
            results["abs_difference"] = _fmt(abs(closed.value - numeric.value), bits)
        _emit("alpha", {"cost": cost_name, "a": a, "p": str(p), "method": method,
                        "tol": tol, "bits": bits}, results, output)

    _run(body)


@main.command("finite-n")
@click.option("--ensemble", type=click.Choice(["excursion", "bridge"]), default="excursion")
@click.option("--cost", "cost_name", default="gamma-ratio", show_default=True)
@click.option("--a", default=None)
@click.option("--p", "p_str", required=True)
@click.option("--eps", default="0", show_default=True, help="number, or 'alpha'")
@click.option("--nmax", type=int, default=1024, show_default=True)
@click.option("--smax", type=int, default=4, show_default=True)
@click.option("--mode", type=click.Choice(["float", "rat", "real"]), default="float")
@click.option("--csv", "csv_path", type=click.Path(), default=None,
              help="write the full table as CSV")
@click.option("--convergence/--no-convergence", default=False,
              help="report deviations from the limit moments (eps should be alpha)")
@_bits_option
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_finite_n(ensemble, cost_name, a, p_str, eps, nmax, smax, mode, csv_path,
                 convergence, bits, output):
    """Exact finite-size moments M_s(N) via the coefficient DP."""
    p = _fraction(p_str)
    cf = _cost_from(cost_name, a, p)
    if convergence:
        _guard_half(p, "the limit moments do not exist at p = 1/2")

    def body():
        if eps == "alpha":
            eps_v = costs.alpha(cf, bits=bits).value
        else:
            eps_v = _fraction(eps) if mode == "rat" else mp.mpf(eps)
        table = oracle.exact_moment_dp(ensemble, cf, eps_v, nmax, smax, mode, bits)
        sel = sorted({1, 2, 4, 8, nmax // 4, nmax // 2, nmax} & set(range(1, nmax + 1)))
        results = {
            "eps": _fmt(eps_v, bits),
            "mode": mode,
            "selected_N": sel,
            "moments": {str(s): {str(N): _fmt(table.values[s][N], bits) for N in sel}
                        for s in range(smax + 1)},
        }
        if csv_path:
            table.to_csv(csv_path, p)
            results["csv"] = csv_path
        if convergence:
            report = oracle.rescaled_convergence(table, p, bits)
            results["convergence"] = {
                "fitted_decay": [None if np.isnan(x) else x for x in report.fitted_decay],
                "deviation_at_nmax": [float(d[-1]) for d in report.deviations],
            }
        _emit("finite-n", {"ensemble": ensemble, "cost": cost_name, "a": a,
                           "p": str(p), "eps": eps, "nmax": nmax, "smax": smax,
                           "mode": mode, "bits": bits}, results, output)

    _run(body)


@main.command("sample")
@click.option("--ensemble", type=click.Choice(["excursion", "bridge"]), default="excursion")
@click.option("--cost", "cost_name", default="gamma-ratio", show_default=True)
@click.option("--a", default=None)
@click.option("--p", "p_str", required=True)
@click.option("--size", type=int, required=True, help="path size N")
@click.option("--count", type=int, required=True, help="number of sampled paths")
@click.option("--eps", default="0", show_default=True, help="number, or 'alpha'")
@click.option("--rescale-exponent", type=float, default=None,
              help="defaults to p + 1/2")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--smax", type=int, default=3, show_default=True)
@click.option("--bins", default="fd", show_default=True)
@click.option("--chains", type=int, default=1, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--hist-csv", type=click.Path(), default=None)
@_bits_option
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_sample(ensemble, cost_name, a, p_str, size, count, eps, rescale_exponent,
               seed, smax, bins, chains, threads, hist_csv, bits, output):
    """Monte Carlo summary of the rescaled statistic (JSON, optional CSV)."""
    p = _fraction(p_str)
    cf = _cost_from(cost_name, a, p)

    def body():
        eps_v = costs.alpha(cf, bits=bits).value if eps == "alpha" else _fraction(eps)
        bins_v = bins if bins == "fd" else int(bins)
        summary = sampler.run_experiment(
            ensemble, size, count, cf, eps_v, rescale_exponent, seed, smax,
            bins_v, chains, threads, bits,
        )
        if hist_csv:
            summary.histogram_csv(hist_csv)
        text = summary.to_json()
        if output:
            with open(output, "w") as fh:
                fh.write(text + "\n")
        else:
            click.echo(text)

    _run(body)


@main.command("tree-check")
@click.option("--p", "p_str", required=True)
@click.option("--smax", type=int, default=6, show_default=True)
@click.option("--order", type=int, default=None, help="X/Y identity order (default smax)")
@click.option("--tol", default=None, help="relative tolerance (default 2^-(bits/2))")
@_bits_option
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_tree_check(p_str, smax, order, tol, bits, output):
    """Cross-check the recursion against the tree expansion and Y = X + Y^2."""
    p = _fraction(p_str)
    _guard_half(p, "tree weights b(k) are singular at p = 1/2")

    def body():
        tolv = mp.mpf(tol) if tol else None
        rep = trees.check_mu_equals_tree_sum(smax, p, bits, tolv)
        xy = trees.check_xy_identity(order or smax, p, bits, tolv)
        _emit("tree-check", {"p": str(p), "smax": smax, "order": order or smax,
                             "bits": bits},
              {"max_rel_deviation": _fmt(rep.max_rel_deviation, bits),
               "xy_residual": _fmt(xy.max_abs_residual, bits),
               "composition_residual": _fmt(xy.max_abs_composition_residual, bits)},
              output)

    _run(body)


@main.command("bounds")
@click.option("--p", "p_str", required=True)
@click.option("--smax", type=int, default=40, show_default=True)
@_bits_option
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_bounds(p_str, smax, bits, output):
    """Verify the moment growth bounds |mu_s| <= R A^s Gamma(ps+1) C_(s-1)."""
    p = _fraction(p_str)
    _guard_half(p, "the bound constants diverge at p = 1/2")

    def body():
        rep = moments.verify_bounds(p, smax, bits)
        _emit("bounds", {"p": str(p), "smax": smax, "bits": bits},
              {"f_p": _fmt(rep.constants.f_p, bits),
               "A_p": _fmt(rep.constants.A_p, bits),
               "R_p": _fmt(rep.constants.R_p, bits),
               "min_excursion_margin": _fmt(min(rep.excursion_margins), bits),
               "min_bridge_margin": _fmt(min(rep.bridge_margins), bits),
               "ok": rep.ok},
              output)

    _run(body)


@main.command("limit-half")
@click.option("--smax", type=int, default=5, show_default=True)
@click.option("--deltas", default="1e-2,1e-3,1e-4", show_default=True)
@_bits_option
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_limit_half(smax, deltas, bits, output):
    """(2 sqrt(pi))^s-scaled shifted moments at p = 1/2 by extrapolation."""

    def body():
        ds = [mp.mpf(d) for d in deltas.split(",")]
        vals = moments.limit_half_moments(smax, ds, bits)
        _emit("limit-half", {"smax": smax, "deltas": deltas, "bits": bits},
              {"values": [_fmt(v, bits) for v, _ in vals],
               "error_estimates": [_fmt(e, bits) for _, e in vals]},
              output)

    _run(body)


@main.command("log-case")
@click.option("--smax", type=int, default=10, show_default=True)
@click.option("--nmax", type=int, default=0, show_default=True,
              help="if > 0, also run the DP variance estimate at this size")
@_bits_option
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_log_case(smax, nmax, bits, output):
    """Logarithmic-cost case: tau coefficients and Gaussian limit moments."""

    def body():
        taus = moments.tau_log(max(smax, 2), bits)
        closed = moments.tau_log_coefficients(max(smax, 2))
        gauss = moments.gaussian_log_moments(max(smax, 2), bits)
        results = {
            "tau": [_fmt(v, bits) for v in taus],
            "tau_rational_coefficients": [str(r) for r in closed],
            "gaussian_moments": [_fmt(v, bits) for v in gauss],
        }
        if nmax:
            cf = costs.log_shift()
            al = costs.alpha_numeric(cf, bits=bits)
            table = oracle.exact_moment_dp("excursion", cf, al.value, nmax, 2, "float", bits)
            variances = {}
            for N in [nmax // 8, nmax // 4, nmax // 2, nmax]:
                if N >= 2:
                    var = table.values[2][N] - table.values[1][N] ** 2
                    variances[str(N)] = var / (N * float(np.log(N)))
            results["alpha"] = _fmt(al.value, bits)
            results["variance_over_NlnN"] = variances
            xs = sorted(1 / np.log(int(N)) for N in variances)
            ys = [variances[N] for N in sorted(variances, key=lambda s: 1 / np.log(int(s)))]
            slope, intercept = np.polyfit(xs, ys, 1)
            results["variance_extrapolated"] = float(intercept)
        _emit("log-case", {"smax": smax, "nmax": nmax, "bits": bits}, results, output)

    _run(body)


@main.command("airy")
@click.option("--zeros", "n_zeros", type=int, default=10, show_default=True)
@click.option("--moments", "n_moments", type=int, default=4, show_default=True)
@click.option("--density-csv", type=click.Path(), default=None)
@click.option("--laplace-csv", type=click.Path(), default=None)
@_bits_option
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_airy(n_zeros, n_moments, density_csv, laplace_csv, bits, output):
    """Classical area-law reference: zeros, moments, density/Laplace curves."""

    def body():
        zeros = [refdist.airy_zero(k, bits) for k in range(1, n_zeros + 1)]
        mom = [moments.airy_moment(s, bits) for s in range(n_moments + 1)]
        results = {
            "airy_zero_magnitudes": [_fmt(z, bits) for z in zeros],
            "moments_from_recursion": [_fmt(m, bits) for m in mom],
        }
        if density_csv:
            with open(density_csv, "w") as fh:
                fh.write("x,density\n")
                for i in range(1, 161):
                    x = i * 0.025
                    fh.write(f"{x},{float(refdist.airy_density(x, bits=64)):.12g}\n")
            results["density_csv"] = density_csv
        if laplace_csv:
            with open(laplace_csv, "w") as fh:
                fh.write("lambda,laplace\n")
                for i in range(1, 81):
                    lam = i * 0.05
                    fh.write(f"{lam},{float(refdist.airy_laplace(lam, bits=64)):.12g}\n")
            results["laplace_csv"] = laplace_csv
        _emit("airy", {"zeros": n_zeros, "moments": n_moments, "bits": bits},
              results, output)

    _run(body)


@main.command("verify-all")
@click.option("--quick/--full", default=False, help="smaller sizes for CI smoke")
@_bits_option
def cmd_verify_all(quick, bits):
    """Run the cross-validation suite (recursion vs trees vs DP vs sampler)."""
    failures = []

    def check(name, fn):
        try:
            fn()
            click.echo(f"PASS {name}")
        except Exception as exc:  # report and continue
            click.echo(f"FAIL {name}: {exc}")
            failures.append(name)

    def takacs_vs_mu():
        smax = 15 if quick else 30
        mu = moments.mu_excursion(1, smax)
        K = moments.takacs_K(smax)
        if mu != K:
            raise MismatchError("mu(1) != classical recursion")

    def trees_vs_mu():
        smax = 5 if quick else 8
        for p in (Fraction(1, 4), Fraction(1),):
            trees.check_mu_equals_tree_sum(smax, p, bits)
            trees.check_xy_identity(smax, p, bits)

    def dp_vs_brute():
        nmax = 5 if quick else 8
        cf = costs.gamma_ratio(1, Fraction(1, 2))
        for ens in ("excursion", "bridge"):
            bf = oracle.brute_force_moments(ens, cf, Fraction(0), nmax, 3)
            dp = oracle.exact_moment_dp(ens, cf, Fraction(0), nmax, 3, "rat")
            if any(bf.values[s][N] != dp.values[s][N]
                   for s in range(4) for N in range(nmax + 1)):
                raise MismatchError(f"DP differs from enumeration ({ens})")

    def mc_vs_dp():
        n = 20_000 if quick else 100_000
        size = 50
        cf = costs.gamma_ratio(1, Fraction(1, 2))
        for ens in ("excursion", "bridge"):
            dp = oracle.exact_moment_dp(ens, cf, 0, size, 3, "float", bits)
            summary = sampler.run_experiment(ens, size, n, cf, 0, 0.0, seed=7, s_max=3, bits=bits)
            refs = [dp.values[s][size] for s in range(1, 4)]
            zs = sampler.compare_to_reference(summary, refs)
            bad = [f"s={s}: z={z:.2f}" for s, z in zs if abs(z) > 5]
            if bad:
                raise MismatchError("; ".join(bad))

    def limit_half_stable():
        vals = moments.limit_half_moments(3 if quick else 5, bits=bits)
        for s, (v, e) in enumerate(vals):
            if s >= 2 and not abs(e) < abs(v) * mp.mpf("1e-3"):
                raise MismatchError(f"s={s} extrapolation error {mp.nstr(e, 3)}")

    def alpha_cross():
        for cf in (costs.gamma_ratio(Fraction(3, 4), Fraction(1, 2)),
                   costs.gamma_ratio_32(Fraction(3, 4), Fraction(2))):
            closed = costs.alpha_closed_form(cf, bits).value
            numeric = costs.alpha_numeric(cf, mp.mpf("1e-25"), bits).value
            if abs(closed - numeric) > abs(closed) * mp.mpf("1e-12"):
                raise MismatchError(cf.describe())

    def bounds_hold():
        for p in (Fraction(1, 4), Fraction(1), Fraction(2)):
            moments.verify_bounds(p, 20 if quick else 40, bits)

    check("classical-recursion-equivalence", takacs_vs_mu)
    check("tree-expansion-equivalence", trees_vs_mu)
    check("dp-vs-enumeration", dp_vs_brute)
    check("monte-carlo-vs-dp", mc_vs_dp)
    check("limit-half-extrapolation", limit_half_stable)
    check("alpha-closed-vs-numeric", alpha_cross)
    check("moment-bounds", bounds_hold)

    if failures:
        click.echo(f"{len(failures)} check(s) failed", err=True)
        sys.exit(EXIT_MISMATCH)
    click.echo("all checks passed")


if __name__ == "__main__":
    main()
