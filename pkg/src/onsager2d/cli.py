"""Command-line entry point.

Every command writes its outputs (field files or CSV) and a JSON manifest
next to the primary output (``<out>.manifest.json``). Exit codes: 0 on
success, 2 on validation errors, 3 on numerical failures (NaN, CFL).
"""

from __future__ import annotations

import argparse
import sys
import time

from . import __version__
from .errors import NumericalError, ValidationError
from .fieldio import read_field, write_csv, write_field, write_manifest
from .flux import CSV_COLUMNS, GRID, SPARSE, decay_summary, default_q_range, flux_profile, trilinear_sparse
from .littlewood_paley import PROFILES, besov_seminorm, get_profile, profile_table
from .mollify import REPORT_COLUMNS, convergence_report, energy_balance_residual
from .nse import SWEEP_COLUMNS, check_bounds, diagnostics_rows, load_config, run, viscosity_sweep
from .spectral import _next_pow2, lp_norms
from .zoo import (
    LatticeSpec,
    SkeletonSpec,
    dirichlet_lp_norm,
    lattice_field,
    lattice_triple,
    loglog_slope,
    power_law_field,
    shear_field,
    skeleton_field,
    taylor_green,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


def _ints(text):
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text):
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _q_range(text):
    """'a:b' (inclusive) or a comma list."""
    if ":" in text:
        a, b = text.split(":", 1)
        try:
            return list(range(int(a), int(b) + 1))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad q range {text!r}") from None
    return _ints(text)


def _manifest(args, command, params, outputs, t0, seeds=None, extra=None):
    path = f"{outputs[0]}.manifest.json"
    write_manifest(path, command, params, outputs, seeds=seeds, wall_time=time.perf_counter() - t0, extra=extra)
    return path


# ------------------------------------------------------------------ build


def cmd_build(args):
    t0 = time.perf_counter()
    kind = args.kind
    params = {"kind": kind}
    seeds = {}
    stats = {}
    if kind == "skeleton":
        spec = SkeletonSpec(tuple(args.q))
        F = skeleton_field(spec)
        params["q"] = list(spec.q_list)
    elif kind == "lattice":
        spec = LatticeSpec(tuple(args.q), args.eps)
        F = lattice_field(spec)
        params.update(q=list(spec.q_list), eps=args.eps)
        per_q = {}
        for q in spec.q_list:
            n_needed = _next_pow2(2 * lattice_triple(q, args.eps, project=False).max_freq + 1)
            if n_needed > args.norm_max_n:
                per_q[q] = {"skipped": f"needs n={n_needed} > norm_max_n={args.norm_max_n}"}
                continue
            vals = lp_norms(lattice_triple(q, args.eps), args.p, n=n_needed)
            per_q[q] = {f"L{p:g}": v for p, v in zip(args.p, vals)}
        stats["per_q_lp_norms"] = per_q
    elif kind == "power-law":
        F = power_law_field(args.gamma, args.max_freq, args.seed)
        params.update(gamma=args.gamma, max_freq=args.max_freq)
        seeds["field"] = args.seed
    elif kind == "shear":
        if len(args.k) != len(args.amp):
            raise ValidationError("--k and --amp need the same length")
        # f(x2) = sum amp_j cos(2 pi k_j x2)
        F = shear_field({k: a / 2 for k, a in zip(args.k, args.amp)})
        params.update(k=args.k, amp=args.amp)
    else:
        F = taylor_green()
    stats.update(modes=len(F), max_freq=F.max_freq, l2_norm=F.l2_norm(), divergence_residual=F.divergence_residual())
    write_field(args.out, F, header=f"{kind} {params}")
    _manifest(args, "build", params, [args.out], t0, seeds, {"statistics": stats})
    print(f"wrote {args.out}: {len(F)} modes, max_freq {F.max_freq}")
    return EXIT_OK


# ------------------------------------------------------------------- flux


def cmd_flux(args):
    t0 = time.perf_counter()
    u = read_field(args.field, check_divergence=True)
    prof = get_profile(args.profile)
    q_range = args.q or list(default_q_range(u))
    method = GRID if args.method == "grid" else SPARSE
    n = args.n
    if method == GRID and n is None:
        n = _next_pow2(3 * u.max_freq + 1)  # smallest alias-free power of two
    recs = flux_profile(u, q_range, prof, method, n)
    rows = [[r.row()[c] for c in CSV_COLUMNS] for r in recs]
    if args.no_timing:
        for row in rows:
            row[-1] = "0"
    write_csv(args.out, CSV_COLUMNS, rows)
    active = [r for r in recs if abs(r.value) > args.active_tol]
    summ = decay_summary(recs)
    _manifest(args, "flux", vars_of(args), [args.out], t0, extra={"decay": summ})
    print(f"active scales (|Pi_q| > {args.active_tol:g}):")
    for r in active:
        print(f"  q={r.q:3d}  Pi_q={r.value:+.15g}")
    if not active:
        print("  none")
    print(f"max |Pi_q| = {summ['overall_max']:.6g}; top-half max / overall max = {summ['ratio']:.4g}")
    return EXIT_OK


def cmd_trilinear(args):
    t0 = time.perf_counter()
    u = read_field(args.field, check_divergence=True)
    prof = get_profile(args.profile)
    q_range = args.q or list(default_q_range(u))
    rows = []
    worst = 0.0
    for q in q_range:
        val, scale = trilinear_sparse(u, q, prof)
        rel = abs(val) / scale if scale > 0 else 0.0
        worst = max(worst, rel)
        rows.append([q, 1 << q, val, scale, rel])
    write_csv(args.out, ["q", "lambda_q", "value", "scale", "relative"], rows)
    _manifest(args, "trilinear", vars_of(args), [args.out], t0)
    print(f"max relative trilinear term: {worst:.3g}")
    return EXIT_OK


def cmd_lp(args):
    t0 = time.perf_counter()
    F = read_field(args.field)
    prof = get_profile(args.profile)
    val, per_q = besov_seminorm(F, args.s, args.p, args.q_max, prof, args.n)
    rows = [[q, 1 << q, v] for q, v in enumerate(per_q)]
    write_csv(args.out, ["q", "lambda_q", "weighted_block_norm"], rows)
    _manifest(args, "lp", vars_of(args), [args.out], t0, extra={"seminorm": val})
    print(f"sup_q 2^(q s) ||Delta_q F||_{args.p:g} = {val:.10g}  (s={args.s:g})")
    return EXIT_OK


def cmd_mollify(args):
    t0 = time.perf_counter()
    u = read_field(args.field, check_divergence=True)
    rows = convergence_report(u, args.eps, n=args.n)
    write_csv(args.out, list(REPORT_COLUMNS), [[r[c] for c in REPORT_COLUMNS] for r in rows])
    _manifest(args, "mollify", vars_of(args), [args.out], t0)
    for r in rows:
        print("  ".join(f"{c}={r[c]:.4g}" for c in REPORT_COLUMNS))
    return EXIT_OK


def cmd_energy_balance(args):
    t0 = time.perf_counter()
    u = read_field(args.field, check_divergence=True)
    rows = []
    for eps in args.eps:
        res = energy_balance_residual(u, eps, n=args.n, time_derivative=args.time_derivative)
        rows.append([eps, res])
        print(f"eps={eps:g}  relative residual={res:.3e}")
    write_csv(args.out, ["eps", "relative_residual"], rows)
    _manifest(args, "energy-balance", vars_of(args), [args.out], t0)
    bad = [r for r in rows if r[1] >= args.tol]
    if bad:
        print(f"residual exceeds tolerance {args.tol:g}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# -------------------------------------------------------------------- NSE


def _bounds_rows(traj, p_list, slack):
    rows = []
    all_ok = True
    for p in p_list:
        for b in check_bounds(traj, p, slack):
            all_ok &= b.ok
            rows.append([traj.config.nu, p, b.t, b.max_principle_margin, b.gn_margin, b.enstrophy_margin,
                         b.energy_loss_margin, int(b.ok)])
    return rows, all_ok


BOUNDS_COLUMNS = ["nu", "p", "t", "max_principle", "gagliardo_nirenberg", "enstrophy_bound", "energy_loss_bound", "ok"]


def cmd_nse_run(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    traj = run(cfg)
    header, rows = diagnostics_rows(traj)
    outputs = [args.out]
    write_csv(args.out, header, rows)
    if cfg.nu > 0:
        p_list = [p for p in cfg.p if 1.1 <= p <= 1.9]
        brows, ok = _bounds_rows(traj, p_list, args.slack)
        bpath = args.out.rsplit(".", 1)[0] + "_bounds.csv"
        write_csv(bpath, BOUNDS_COLUMNS, brows)
        outputs.append(bpath)
        print(f"bounds hold at every sample: {ok}")
    if args.snapshots:
        import os

        from .spectral import to_sparse

        os.makedirs(args.snapshots, exist_ok=True)
        for t, w in traj.snapshots:
            path = os.path.join(args.snapshots, f"vorticity_t{t:.6f}.txt")
            write_field(path, to_sparse(w, 1e-15), header=f"t={t!r}")
            outputs.append(path)
    _manifest(args, "nse-run", {"config": _cfg_dict(cfg)}, outputs, t0, seeds={"ic": cfg.seed},
              extra={"steps": traj.steps, "energy_identity_residual": traj.energy_identity_residual()})
    print(f"{traj.steps} steps; energy identity residual {traj.energy_identity_residual():.3e}")
    return EXIT_OK


def cmd_nse_sweep(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    res = viscosity_sweep(cfg, args.nu, roughen=args.roughen, p_bound=args.p_bound)
    write_csv(args.out, list(SWEEP_COLUMNS), res.table())
    brows, ok = [], True
    for tr in res.trajectories:
        r, o = _bounds_rows(tr, [p for p in tr.config.p if 1.1 <= p <= 1.9], args.slack)
        brows += r
        ok &= o
    bpath = args.out.rsplit(".", 1)[0] + "_bounds.csv"
    write_csv(bpath, BOUNDS_COLUMNS, brows)
    target = 2 * (args.p_bound - 1) / args.p_bound
    _manifest(args, "nse-sweep", {"config": _cfg_dict(cfg), "nu": args.nu, "roughen": args.roughen,
                                  "p_bound": args.p_bound}, [args.out, bpath], t0, seeds={"ic": cfg.seed},
              extra={"fitted_slope": res.slope, "bounds_hold": ok})
    print(f"fitted slope of delta_E vs nu: {res.slope:.4f} (2(p-1)/p = {target:.4f} at p={args.p_bound:g})")
    print(f"bounds hold on every member: {ok}")
    return EXIT_OK


def _cfg_dict(cfg):
    from dataclasses import asdict

    return asdict(cfg)


# ------------------------------------------------------------ misc tables


def cmd_dirichlet(args):
    t0 = time.perf_counter()
    rows = []
    for p in args.p:
        norms = [dirichlet_lp_norm(n, p) for n in args.n]
        slope = loglog_slope(args.n, norms)
        expect = 1 - 1 / p
        for n, v in zip(args.n, norms):
            rows.append([n, p, v])
        print(f"p={p:g}: slope {slope:.4f}, expected {expect:.4f}, relative error {abs(slope - expect) / expect:.2%}")
    write_csv(args.out, ["n", "p", "lp_norm"], rows)
    _manifest(args, "dirichlet-norms", vars_of(args), [args.out], t0)
    return EXIT_OK


def cmd_profile(args):
    t0 = time.perf_counter()
    tab = profile_table(get_profile(args.profile), args.r_max, args.samples)
    write_csv(args.out, ["r", "chi", "phi"], tab.tolist())
    _manifest(args, "profile", vars_of(args), [args.out], t0)
    return EXIT_OK


def vars_of(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


# ----------------------------------------------------------------- parser


def build_parser():
    ap = argparse.ArgumentParser(prog="onsager2d", description="Energy flux, Besov and vanishing-viscosity experiments")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a test field")
    b.add_argument("kind", choices=["skeleton", "lattice", "power-law", "shear", "taylor-green"])
    b.add_argument("--q", type=_ints, default=[3, 8, 13], help="active scales, comma-separated")
    b.add_argument("--eps", type=float, default=1 / 16)
    b.add_argument("--p", type=_floats, default=[1.2, 1.4, 3.0], help="exponents for lattice norm statistics")
    b.add_argument("--norm-max-n", type=int, default=4096, help="largest grid used for lattice norm statistics")
    b.add_argument("--gamma", type=float, default=3.0)
    b.add_argument("--max-freq", type=int, default=16)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--k", type=_ints, default=[1])
    b.add_argument("--amp", type=_floats, default=[1.0])
    b.add_argument("--out", default="field.txt")
    b.set_defaults(func=cmd_build)

    def field_cmd(name, func, out, help):
        s = sub.add_parser(name, help=help)
        s.add_argument("--field", required=True)
        s.add_argument("--out", default=out)
        s.set_defaults(func=func)
        return s

    f = field_cmd("flux", cmd_flux, "flux.csv", "dyadic energy flux profile")
    f.add_argument("--q", type=_q_range, default=None, help="'a:b' or comma list (default: all resolved q)")
    f.add_argument("--profile", choices=sorted(PROFILES), default="exp-bump")
    f.add_argument("--method", choices=["sparse", "grid"], default="sparse")
    f.add_argument("--n", type=int, default=None, help="grid size for --method grid (default: smallest alias-free power of two)")
    f.add_argument("--active-tol", type=float, default=1e-9)
    f.add_argument("--no-timing", action="store_true", help="write wall_time_ms as 0 for byte-reproducible CSVs")

    t = field_cmd("trilinear", cmd_trilinear, "trilinear.csv", "trilinear cancellation check")
    t.add_argument("--q", type=_q_range, default=None)
    t.add_argument("--profile", choices=sorted(PROFILES), default="exp-bump")

    lp = field_cmd("lp", cmd_lp, "besov.csv", "per-q Besov table")
    lp.add_argument("--s", type=float, required=True)
    lp.add_argument("--p", type=float, required=True)
    lp.add_argument("--q-max", type=int, default=None)
    lp.add_argument("--n", type=int, default=None)
    lp.add_argument("--profile", choices=sorted(PROFILES), default="exp-bump")

    m = field_cmd("mollify", cmd_mollify, "mollify.csv", "mollification convergence report")
    m.add_argument("--eps", type=_floats, default=[0.125, 0.0625, 0.03125])
    m.add_argument("--n", type=int, default=None)

    e = field_cmd("energy-balance", cmd_energy_balance, "energy_balance.csv", "mollified local energy balance residual")
    e.add_argument("--eps", type=_floats, default=[0.0625])
    e.add_argument("--n", type=int, default=None)
    e.add_argument("--time-derivative", choices=["euler", "zero"], default="euler")
    e.add_argument("--tol", type=float, default=1e-8)

    r = sub.add_parser("nse-run", help="run the vorticity solver")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default="diagnostics.csv")
    r.add_argument("--snapshots", default=None, help="directory for vorticity snapshots (needs snapshots = true)")
    r.add_argument("--slack", type=float, default=1.05)
    r.set_defaults(func=cmd_nse_run)

    s = sub.add_parser("nse-sweep", help="viscosity sweep with energy-loss fit")
    s.add_argument("--config", required=True)
    s.add_argument("--nu", type=_floats, default=[1e-2, 3e-3, 1e-3, 3e-4])
    s.add_argument("--roughen", action="store_true")
    s.add_argument("--p-bound", type=float, default=1.5)
    s.add_argument("--slack", type=float, default=1.05)
    s.add_argument("--out", default="sweep.csv")
    s.set_defaults(func=cmd_nse_sweep)

    d = sub.add_parser("dirichlet-norms", help="L^p norms of Dirichlet kernels")
    d.add_argument("--n", type=_ints, default=[8, 16, 32, 64, 128, 256])
    d.add_argument("--p", type=_floats, default=[1.5, 2.0, 3.0])
    d.add_argument("--out", default="dirichlet.csv")
    d.set_defaults(func=cmd_dirichlet)

    pr = sub.add_parser("profile", help="dump the cutoff profile (r, chi, phi)")
    pr.add_argument("--profile", choices=sorted(PROFILES), default="exp-bump")
    pr.add_argument("--r-max", type=float, default=2.5)
    pr.add_argument("--samples", type=int, default=251)
    pr.add_argument("--out", default="profile.csv")
    pr.set_defaults(func=cmd_profile)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
