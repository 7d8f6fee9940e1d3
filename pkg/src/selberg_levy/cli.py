"""Command-line front end: ``selberg-levy <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import levy, sim, verify, zeros
from .lfunc import INSTANCE_NAMES, MAX_HEIGHT, get_instance

log = logging.getLogger("selberg_levy")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
CHECKS = ("lk-nonpositivity", "integral-identity", "gk68", "real-zero-scan")


def fmt(x: float) -> str:
    return f"{x:.15g}"


def atomic_write(path: str | Path | None, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename; ``None`` or ``-`` means stdout."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, file_mode())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def file_mode() -> int:
    """Permissions a plain ``open`` would give; ``mkstemp`` alone yields 0600."""
    mask = os.umask(0)
    os.umask(mask)
    return 0o666 & ~mask


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------


def family(name: str) -> str:
    try:
        get_instance(name)
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"unknown family {name!r} (choose from {', '.join(INSTANCE_NAMES)})"
        ) from None
    return name


def height(text: str) -> float:
    T = float(text)
    if not 0 < T <= MAX_HEIGHT:
        raise argparse.ArgumentTypeError(f"T must lie in (0, {MAX_HEIGHT:g}]")
    return T


def complex_arg(text: str) -> complex:
    """Parse ``a+bi`` (also ``bi``, ``a-bi``, ``a``)."""
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def seed_arg(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _zero_list(args) -> zeros.ZeroList:
    return zeros.instance_zeros(args.family, args.T, args.zero_table)


def _triplet(args) -> levy.LevyTriplet:
    return levy.instance_triplet(args.family, args.T, args.zero_table)


def cmd_zeros(args) -> int:
    F = get_instance(args.family)
    zl = _zero_list(args)
    m0 = zeros.central_multiplicity(F).m0
    at_T, _ = zeros.count_mismatch(F, zl, m0)
    log.info("%s: %d zeros in (0, %g], counting-estimate delta %+.3f", args.family, zl.total, args.T, at_T)
    print(f"# {args.family}: {len(zl)} ordinates ({zl.total} with multiplicity) up to T={args.T:g}; "
          f"count minus estimate {at_T:+.3f}", file=sys.stderr)
    if args.format == "json":
        text = json.dumps({
            "family": args.family,
            "T": args.T,
            "provenance": zl.provenance,
            "count_delta": at_T,
            "zeros": [[float(g), int(m)] for g, m in zip(zl.ordinates, zl.multiplicities)],
        }, indent=1) + "\n"
    else:
        text = csv_text(["gamma", "multiplicity"], [[fmt(g), int(m)] for g, m in zip(zl.ordinates, zl.multiplicities)])
    atomic_write(args.output, text)
    return EXIT_OK


def cmd_triplet(args) -> int:
    tr = _triplet(args)
    if args.format == "csv":
        text = csv_text(["location", "mass"], [[fmt(x), fmt(m)] for x, m in tr.atoms])
        print(f"# a={fmt(tr.gaussian_cov)} b0={fmt(tr.drift)} tail={fmt(tr.tail_mass)} "
              f"classification={levy.classify(tr)}", file=sys.stderr)
    else:
        text = tr.to_json() + "\n"
    atomic_write(args.output, text)
    return EXIT_OK


def cmd_charfn(args) -> int:
    tr = _triplet(args)
    if max(abs(args.t_min), abs(args.t_max)) > 1e3:
        raise ValueError("|t| must be <= 1e3")
    t = np.linspace(args.t_min, args.t_max, args.points)
    g = levy.g_values(tr, t)
    cf = np.exp(g)
    tail = levy.tail_bound(tr, t)
    if args.format == "json":
        text = json.dumps({
            "family": args.family,
            "T": args.T,
            "rows": [{"t": float(a), "g": [float(b.real), float(b.imag)], "cf": [float(c.real), float(c.imag)],
                      "tail_bound": float(d)} for a, b, c, d in zip(t, g, cf, tail)],
        }, indent=1) + "\n"
    else:
        rows = [[fmt(a), fmt(b.real), fmt(b.imag), fmt(c.real), fmt(c.imag), fmt(d)]
                for a, b, c, d in zip(t, g, cf, tail)]
        text = csv_text(["t", "re_g", "im_g", "re_cf", "im_cf", "tail_bound"], rows)
    atomic_write(args.output, text)
    if args.plot:
        from .plotting import plot_charfn

        plot_charfn(t, cf, tail, f"{args.family}, T={args.T:g}", args.plot)
    return EXIT_OK


def cmd_simulate(args) -> int:
    tr = _triplet(args)
    spec = sim.PathSpec(args.t_max, args.steps, args.seed, args.paths, args.resolve_jumps)
    paths = sim.sample_path(tr, spec, workers=zeros._workers(None))
    rows = []
    for p in paths:
        rows += [[p.path_id, fmt(s), fmt(x)] for s, x in zip(p.times, p.values)]
    atomic_write(args.output, csv_text(["path_id", "time", "value"], rows))
    meta = {
        "family": args.family,
        "triplet": tr.to_dict(),
        "spec": {"t_max": spec.t_max, "n_steps": spec.n_steps, "seed": spec.seed,
                 "n_paths": spec.n_paths, "resolve_jumps": spec.resolve_jumps},
        "steps_used": int(paths[0].times.size - 1),
        "tail_mass": tr.tail_mass,
        "jumps": [p.n_jumps for p in paths],
        "generator": "Philox, SeedSequence(seed, spawn_key=(path_id,)); normals by inverse CDF",
    }
    meta_path = args.meta or (Path(args.output).with_suffix(".json") if args.output not in (None, "-") else None)
    if meta_path is not None:
        atomic_write(meta_path, json.dumps(meta, indent=1) + "\n")
    if args.plot:
        from .plotting import plot_paths

        plot_paths(paths, f"{args.family}: {levy.classify(tr)}", args.plot)
    return EXIT_OK


def cmd_verify(args) -> int:
    selected = list(dict.fromkeys(args.checks))
    reports = []
    families = [args.family] if args.family else None
    self_test = verify.kernel_self_test()
    reports.append(self_test)
    if not self_test.passed:
        log.error("quadrature self-test failed; skipping identity checks")
    for check in selected:
        if check == "lk-nonpositivity":
            for name in families or INSTANCE_NAMES:
                tr = levy.instance_triplet(name, args.T, args.zero_table)
                reports.append(verify.nonpositivity_check(tr))
        elif check == "integral-identity" and self_test.passed:
            name = args.family or "zeta"
            F = get_instance(name)
            tr = levy.instance_triplet(name, args.T, args.zero_table)
            z = args.z or list(verify.SELF_TEST_POINTS)
            reports.append(verify.integral_identity_check(
                F, tr, z, args.t_cutoff, tol=args.tol or 1e-4,
                allow_near_boundary=args.allow_near_boundary, tail_correction=not args.raw))
        elif check == "gk68":
            reports.append(verify.gk68_check(
                args.sigma, args.t_points, args.prime_bound, args.power_bound,
                tol=args.tol or 1e-8, tail_correction=not args.raw))
        elif check == "real-zero-scan":
            for name in families or ("cusp18", "cusp22", "cusp26"):
                reports.append(verify.real_zero_scan(get_instance(name), args.a, args.b, args.step))
    passed = all(r.passed for r in reports)
    for r in reports:
        tag = "PASS" if r.passed else "FAIL"
        where = r.details.get("instance", "")
        print(f"{tag} {r.name} {where} max_residual={r.max_residual:.3e} tol={r.tolerance:.1e}", file=sys.stderr)
    out = {"passed": passed, "reports": [r.to_dict() for r in reports]}
    atomic_write(args.output, json.dumps(out, indent=1) + "\n")
    return EXIT_OK if passed else EXIT_FAILED


def cmd_scan(args) -> int:
    F = get_instance(args.family)
    t = np.linspace(args.t_min, args.t_max, args.points)
    vals = zeros.real_line_function(F, t, scaled=True)
    zl = _zero_list(args) if args.T else None
    if args.format == "json":
        text = json.dumps({
            "family": args.family,
            "t": t.tolist(),
            "value": vals.tolist(),
            "zeros": zl.ordinates.tolist() if zl is not None else [],
        }, indent=1) + "\n"
    else:
        text = csv_text(["t", "value"], [[fmt(a), fmt(b)] for a, b in zip(t, vals)])
    atomic_write(args.output, text)
    if args.plot:
        from .plotting import plot_scan

        zs = zl.ordinates[(zl.ordinates >= args.t_min) & (zl.ordinates <= args.t_max)] if zl is not None else []
        plot_scan(t, vals, zs, f"{args.family} on the critical line", args.plot)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="selberg-levy", description=__doc__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, T_default=100.0, fmt_default="csv"):
        sp.add_argument("--family", type=family, default="zeta")
        sp.add_argument("--T", type=height, default=T_default, help="zero height (<= 1000)")
        sp.add_argument("--zero-table", metavar="FILE", help="use ordinates from FILE instead of computing them")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        sp.add_argument("-o", "--output", metavar="FILE", help="output file (default stdout)")

    sp = sub.add_parser("zeros", help="zeros of xi_F(1/2 - iz) up to height T")
    common(sp)
    sp.set_defaults(func=cmd_zeros)

    sp = sub.add_parser("triplet", help="Levy-Khintchine triplet")
    common(sp, fmt_default="json")
    sp.set_defaults(func=cmd_triplet)

    sp = sub.add_parser("charfn", help="g_F and exp(g_F) on a t-grid")
    common(sp)
    sp.add_argument("--t-min", type=float, default=-10.0)
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.add_argument("--points", type=positive_int, default=401)
    sp.add_argument("--plot", metavar="FILE", help="also render a figure")
    sp.set_defaults(func=cmd_charfn)

    sp = sub.add_parser("simulate", help="sample paths of the Levy process")
    common(sp)
    sp.add_argument("--t-max", type=float, default=1.0)
    sp.add_argument("--steps", type=positive_int, default=1000)
    sp.add_argument("--paths", type=positive_int, default=1)
    sp.add_argument("--seed", type=seed_arg, default=0)
    sp.add_argument("--resolve-jumps", action="store_true")
    sp.add_argument("--meta", metavar="FILE", help="metadata JSON (default: output with .json suffix)")
    sp.add_argument("--plot", metavar="FILE")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run numerical checks; exit 1 if any fails")
    sp.add_argument("checks", nargs="+", choices=CHECKS)
    sp.add_argument("--family", type=family, default=None)
    sp.add_argument("--T", type=height, default=200.0)
    sp.add_argument("--zero-table", metavar="FILE")
    sp.add_argument("--z", type=complex_arg, action="append", help="evaluation point a+bi (repeatable)")
    sp.add_argument("--t-cutoff", type=float, default=40.0)
    sp.add_argument("--allow-near-boundary", action="store_true",
                    help="permit 0 < Im z <= 0.6 for the integral identity")
    sp.add_argument("--raw", action="store_true", help="disable truncation-tail corrections")
    sp.add_argument("--sigma", type=float, default=2.0)
    sp.add_argument("--t-points", type=float, nargs="+", default=[0.5, 1.0, 2.0, 5.0, 10.0])
    sp.add_argument("--prime-bound", type=positive_int, default=100_000)
    sp.add_argument("--power-bound", type=positive_int, default=30)
    sp.add_argument("--a", type=float, default=0.5 + 1e-6)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--step", type=float, default=1e-3)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("-o", "--output", metavar="FILE")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("scan", help="scaled real-valued xi_F(1/2 + it) on a t-grid")
    sp.add_argument("--family", type=family, default="zeta")
    sp.add_argument("--t-min", type=float, default=0.0)
    sp.add_argument("--t-max", type=float, default=50.0)
    sp.add_argument("--points", type=positive_int, default=2001)
    sp.add_argument("--T", type=height, default=None, help="also locate zeros up to T for the figure")
    sp.add_argument("--zero-table", metavar="FILE")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("-o", "--output", metavar="FILE")
    sp.add_argument("--plot", metavar="FILE")
    sp.set_defaults(func=cmd_scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except verify.PreconditionError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (zeros.MissedZeroError, zeros.ZeroTableError, ArithmeticError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
