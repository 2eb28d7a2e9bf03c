"""Reproducible experiment driver.

Subcommands wrap every part of the library and write CSV (point sets,
profiles) or JSON (reports) artifacts. Each artifact embeds the sha256
hash of the resolved run configuration, the seed, and the measure
conventions, so identical configs reproduce byte-identical data files.
Report paths also render a PNG next to the data artifact unless
``--no-figures`` is given.

    feketefield droplet --potential ellipse --t 0.5 --out droplet.json
    feketefield fekete solve --potential ginibre --n 100 --seed 1 --out pts.csv
    feketefield gas sample --potential ginibre --n 64 --sweeps 2000 --out gas.csv
    feketefield kernel profile --potential ginibre --n 400 --center 1,0 \\
        --axis x --range -3:3:0.05 --out profile.csv
    feketefield ward check --m 0 --grid-radius 2 --out residual.csv
    feketefield density scan --potential ginibre --plan bulk \\
        --n 100,200,400 --lambda 4,6,8 --out density.json
    feketefield traces --potential ginibre --n 200 --lambda 4,6,8 --out tr.json
    feketefield paper-check --quick

A JSON file passed as ``--config`` supplies defaults for any flag
(dashes become underscores); explicit command-line flags win. Thread
count for the compiled sampler kernels honors FEKETEFIELD_THREADS.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CONVENTIONS = "laplacian=quarter-nabla2, area=d2z/pi (unit-mass disk)"

_PLUMBING_KEYS = {"out", "figures", "config", "func"}


@dataclass
class ExperimentConfig:
    """Resolved parameters of one CLI run.

    ``params`` holds every scientific argument (potential choice, sizes,
    grids); plumbing (output paths, figure toggle) stays out of the hash
    so moving an artifact does not change its identity.
    """

    command: str
    params: dict
    seed: int = 0

    def to_dict(self) -> dict:
        return {"command": self.command, "params": self.params,
                "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(command=d["command"], params=dict(d["params"]),
                   seed=int(d.get("seed", 0)))

    @property
    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def meta(self) -> dict:
        return {"config_hash": self.hash, "seed": self.seed,
                "conventions": CONVENTIONS}


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):   # before int: bool is an int subclass
        return bool(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _write_json(path, payload: dict) -> str:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text)
    return str(path)


def _write_csv(path, columns, rows, meta: dict) -> str:
    lines = [f"# {k}: {meta[k]}" for k in sorted(meta)]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
    return str(path)


def _fig_path(out) -> str:
    return str(Path(out).with_suffix(".png"))


# -- argument parsing helpers ----------------------------------------------

def _complex_arg(s: str) -> complex:
    parts = s.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected re,im, got {s!r}")
    return complex(float(parts[0]), float(parts[1]))


def _range_arg(s: str):
    try:
        a, b, step = (float(p) for p in s.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {s!r}")
    if step <= 0 or b <= a:
        raise argparse.ArgumentTypeError("need stop > start and step > 0")
    return np.arange(a, b + step / 2, step)


def _int_list(s: str):
    return [int(p) for p in s.split(",")]


def _float_list(s: str):
    return [float(p) for p in s.split(",")]


def _m_arg(s: str) -> float:
    v = float(s)
    if v < 0:
        raise argparse.ArgumentTypeError("m must be >= 0 (inf for the bulk)")
    return v


def _add_potential_args(p: argparse.ArgumentParser):
    p.add_argument("--potential", default="ginibre",
                   choices=("ginibre", "ml", "ellipse"))
    p.add_argument("--p", type=float, default=1.5,
                   help="exponent for --potential ml")
    p.add_argument("--t", type=float, default=0.5,
                   help="anisotropy for --potential ellipse")


def _potential_of(args):
    from feketefield.potentials import (ellipse_potential, ginibre,
                                        mittag_leffler)
    if args.potential == "ginibre":
        return ginibre()
    if args.potential == "ml":
        return mittag_leffler(args.p)
    return ellipse_potential(args.t)


def _pot_params(args) -> dict:
    d = {"potential": args.potential}
    if args.potential == "ml":
        d["p"] = args.p
    elif args.potential == "ellipse":
        d["t"] = args.t
    return d


def _config_of(args, command: str, keys) -> ExperimentConfig:
    params = _pot_params(args) if "potential" in keys else {}
    for k in keys:
        if k == "potential":
            continue
        params[k] = _jsonable(getattr(args, k))
    return ExperimentConfig(command=command, params=params,
                            seed=getattr(args, "seed", 0))


# -- subcommand bodies -------------------------------------------------------

def _cmd_droplet(args, artifacts):
    from feketefield.equilibrium import (droplet_for, equilibrium_measure,
                                         equilibrium_residual, robin_constant)
    pot = _potential_of(args)
    cfg = _config_of(args, "droplet", ("potential",))
    drop = droplet_for(pot)
    mu = equilibrium_measure(pot, drop)
    gamma = robin_constant(pot, mu)
    residual = equilibrium_residual(pot, mu)

    if drop.shape == "disk":
        geometry = {"radius": drop.radius,
                    "center": [drop.center.real, drop.center.imag]}
    elif drop.shape == "ellipse":
        geometry = {"a": drop.a, "b": drop.b}
    else:
        geometry = {"inner": drop.inner, "outer": drop.outer,
                    "center": [drop.center.real, drop.center.imag]}
    payload = {
        "shape": drop.shape,
        "parameters": geometry,
        "mass_residual": abs(mu.mass - 1.0),
        "equilibrium_residual": residual,
        "robin_gamma": gamma,
        "meta": cfg.meta(),
    }
    artifacts.append(_write_json(args.out, payload))
    if args.figures:
        from feketefield import figures
        artifacts.append(figures.droplet_figure(drop, _fig_path(args.out)))
    print(f"droplet: shape={drop.shape} gamma={gamma:.6f} "
          f"residual={residual:.2e} -> {args.out}")
    return 0


def _cmd_fekete_solve(args, artifacts):
    from feketefield.equilibrium import droplet_for
    from feketefield.fekete import SolverConfig, separation, solve_fekete
    pot = _potential_of(args)
    cfg = _config_of(args, "fekete solve",
                     ("potential", "n", "restarts", "max_iter"))
    sc = SolverConfig(seed=args.seed, restarts=args.restarts,
                      max_iter=args.max_iter)
    configuration, report = solve_fekete(pot, args.n, sc)
    delta, _ = separation(pot, configuration)

    meta = cfg.meta()
    rows = [(z.real, z.imag) for z in configuration.points]
    artifacts.append(_write_csv(args.out, ("re", "im"), rows, meta))
    report_path = str(Path(args.out).with_suffix(".report.json"))
    artifacts.append(_write_json(report_path, {
        "energy": report.energy,
        "delta_n": delta,
        "iterations": report.iterations,
        "converged": report.converged,
        "max_grad": report.max_grad,
        "meta": meta,
    }))
    if args.figures:
        from feketefield import figures
        artifacts.append(figures.points_figure(
            configuration.points, droplet_for(pot), _fig_path(args.out),
            title=f"Fekete configuration, n={args.n}"))
    print(f"fekete solve: n={args.n} energy={report.energy:.6f} "
          f"delta_n={delta:.4f} converged={report.converged} -> {args.out}")
    return 0 if report.converged else 1


def _cmd_gas_sample(args, artifacts):
    from feketefield.fekete import metropolis_sample
    pot = _potential_of(args)
    cfg = _config_of(args, "gas sample",
                     ("potential", "n", "beta", "sweeps", "burn",
                      "record_every"))
    configuration, report = metropolis_sample(
        pot, args.n, beta=args.beta, sweeps=args.sweeps, seed=args.seed,
        burn=args.burn, record_every=args.record_every)

    meta = cfg.meta()
    if report.recorded is not None:
        rows = [(k, xy[0], xy[1])
                for k, state in enumerate(report.recorded) for xy in state]
    else:
        rows = [(0, z.real, z.imag) for z in configuration.points]
    artifacts.append(_write_csv(args.out, ("record", "re", "im"), rows, meta))
    report_path = str(Path(args.out).with_suffix(".report.json"))
    artifacts.append(_write_json(report_path, {
        "acceptance": report.acceptance,
        "beta": report.beta,
        "sweeps": report.sweeps,
        "step": report.step,
        "records": 0 if report.recorded is None else len(report.recorded),
        "meta": meta,
    }))
    if args.figures:
        _gas_figure(pot, args, configuration, report, artifacts)
    print(f"gas sample: n={args.n} beta={args.beta} "
          f"acceptance={report.acceptance:.2f} -> {args.out}")
    return 0


def _gas_figure(pot, args, configuration, report, artifacts):
    from feketefield import figures
    from feketefield.equilibrium import droplet_for
    from feketefield.kernels import kernel_model, one_point_function
    from feketefield.quadrature import gauss_legendre
    if report.recorded is None or args.n > 256 or args.beta != 1.0:
        artifacts.append(figures.points_figure(
            configuration.points, droplet_for(pot), _fig_path(args.out),
            title=f"chain state, n={args.n}"))
        return
    rec = report.recorded
    radii = np.hypot(rec[..., 0], rec[..., 1])
    edges = np.linspace(0.0, droplet_for(pot).outer_radius * 1.15, 9)
    observed = np.histogram(radii.ravel(), bins=edges)[0] / radii.shape[0]
    km = kernel_model(pot, args.n)
    expected = np.empty(edges.size - 1)
    for k in range(edges.size - 1):
        q = gauss_legendre(48, edges[k], edges[k + 1])
        expected[k] = np.sum(
            q.weights * one_point_function(km, q.nodes.astype(complex))
            * 2.0 * q.nodes)
    artifacts.append(figures.histogram_figure(
        edges, observed, expected, _fig_path(args.out),
        ylabel="points per state"))


def _cmd_kernel_profile(args, artifacts):
    from feketefield.equilibrium import droplet_for
    from feketefield.kernels import (kernel_model, rescale_frame,
                                     rescaled_one_point)
    pot = _potential_of(args)
    cfg = _config_of(args, "kernel profile",
                     ("potential", "n", "center", "axis", "range"))
    drop = droplet_for(pot)
    km = kernel_model(pot, args.n)
    frame = rescale_frame(pot, drop, args.center, args.n)
    x = args.range
    local = x.astype(complex) if args.axis == "x" else 1j * x
    prof = rescaled_one_point(km, frame, local)

    meta = cfg.meta()
    artifacts.append(_write_csv(args.out, ("x", "R"), zip(x, prof), meta))
    if args.figures:
        from feketefield import figures
        overlay = None
        label = None
        depth = float(drop.distance(np.atleast_1d(args.center))[0]) * frame.scale
        if depth <= 1.0:
            from scipy.special import erfc
            overlay = 0.5 * erfc(np.sqrt(2.0) * x)
            label = "erfc boundary profile"
        artifacts.append(figures.profile_figure(
            x, prof, _fig_path(args.out), overlay=overlay,
            overlay_label=label))
    print(f"kernel profile: n={args.n} center={args.center:.3g} "
          f"axis={args.axis} {x.size} samples -> {args.out}")
    return 0


def _cmd_ward_check(args, artifacts):
    from feketefield.limits import (PlasmaParams, default_ward_points,
                                    ward_residual)
    cfg = _config_of(args, "ward check",
                     ("m", "grid_radius", "side", "rmax", "nr", "ntheta"))
    params = PlasmaParams(m=args.m)
    z = default_ward_points(extent=args.grid_radius, side=args.side)
    rep = ward_residual(params, z=z, rmax=args.rmax, nr=args.nr,
                        ntheta=args.ntheta)
    res = np.abs(rep.residual)
    meta = cfg.meta()
    meta["max_residual"] = repr(float(rep.max_residual))
    rows = zip(rep.z.real, rep.z.imag, res)
    artifacts.append(_write_csv(args.out, ("re", "im", "residual"), rows, meta))
    if args.figures:
        from feketefield import figures
        artifacts.append(figures.ward_figure(rep.z, res, _fig_path(args.out)))
    print(f"ward check: m={args.m:g} max residual {rep.max_residual:.3e} "
          f"over {rep.z.size} points -> {args.out}")
    if not np.all(np.isfinite(res)):
        print("ward check: non-finite residuals", file=sys.stderr)
        return 1
    return 0


def _cmd_density_scan(args, artifacts):
    from feketefield.density import MovingPointPlan, bl_density
    from feketefield.equilibrium import droplet_for
    from feketefield.fekete import SolverConfig, solve_fekete
    pot = _potential_of(args)
    cfg = _config_of(args, "density scan",
                     ("potential", "plan", "n", "lam"))
    drop = droplet_for(pot)
    if args.plan == "bulk":
        plan = MovingPointPlan(rule="fixed-point", anchor=0j,
                               n_values=tuple(args.n), label="bulk")
    else:
        plan = MovingPointPlan(rule="boundary-anchored",
                               anchor=complex(2.0 * drop.outer_radius),
                               n_values=tuple(args.n), tau=0.0,
                               label="boundary")
    family = []
    for n in args.n:
        configuration, report = solve_fekete(pot, n,
                                             SolverConfig(seed=args.seed))
        if not report.converged:
            raise RuntimeError(f"Fekete solve at n={n} did not converge")
        family.append(configuration)
    est = bl_density(family, plan, args.lam)

    table = [{"n": n, "lambda": lam, "count": int(est.counts[i, j]),
              "ratio": float(est.ratios[i, j])}
             for i, n in enumerate(args.n)
             for j, lam in enumerate(args.lam)]
    payload = {"plan": args.plan, "table": table, "d_plus": est.d_plus,
               "d_minus": est.d_minus, "meta": cfg.meta()}
    artifacts.append(_write_json(args.out, payload))
    if args.figures:
        from feketefield import figures
        artifacts.append(figures.density_figure(table, _fig_path(args.out)))
    print(f"density scan: plan={args.plan} d+={est.d_plus:.3f} "
          f"d-={est.d_minus:.3f} -> {args.out}")
    return 0


def _cmd_traces(args, artifacts):
    from feketefield.density import (concentration_spectrum, counting_bounds,
                                     trace_defect)
    from feketefield.kernels import build_basis
    pot = _potential_of(args)
    cfg = _config_of(args, "traces", ("potential", "n", "rho", "point", "lam"))
    basis = build_basis(pot, int(round(args.n * args.rho)))
    table = []
    spectra = []
    for lam in args.lam:
        spec = concentration_spectrum(basis, pot, args.point, args.n,
                                      args.rho, lam)
        cb = counting_bounds(spec)
        table.append({
            "lambda": lam,
            "tr_T": spec.tr_T,
            "tr_T2": spec.tr_T2,
            "tr_over_lambda2": spec.tr_T / lam**2,
            "defect_over_lambda2": trace_defect(spec),
            "counting_lower_ok": cb["lower_ok"],
            "counting_upper_ok": cb["upper_ok"],
        })
        spectra.append((lam, spec.eigenvalues))
    payload = {"n": args.n, "rho": args.rho,
               "point": [args.point.real, args.point.imag],
               "table": table, "meta": cfg.meta()}
    artifacts.append(_write_json(args.out, payload))
    if args.figures:
        from feketefield import figures
        artifacts.append(figures.spectrum_figure(spectra, _fig_path(args.out)))
    print(f"traces: n={args.n} rho={args.rho} {len(table)} windows "
          f"-> {args.out}")
    return 0


def _cmd_paper_check(args, artifacts):
    from feketefield import acceptance
    cfg = _config_of(args, "paper-check", ("quick", "only"))
    results = acceptance.run_all(
        quick=args.quick, indices=args.only,
        progress=lambda r: print(r.line + f"  ({r.seconds:.1f}s)", flush=True))
    all_passed = all(r.passed for r in results)
    payload = {
        "quick": args.quick,
        "all_passed": all_passed,
        "results": [{"index": r.index, "name": r.name, "passed": r.passed,
                     "detail": r.detail, "values": r.values}
                    for r in results],
        "meta": cfg.meta(),
    }
    artifacts.append(_write_json(args.out, payload))
    if args.figures:
        from feketefield import figures
        artifacts.append(figures.matrix_figure(payload["results"],
                                               _fig_path(args.out)))
    total = sum(r.seconds for r in results)
    print(f"{'all checks passed' if all_passed else 'FAILURES present'} "
          f"({len(results)} checks, {total:.0f}s) -> {args.out}")
    return 0 if all_passed else 1


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="feketefield",
        description="Fekete configurations, droplets, correlation kernels, "
                    "and sampling-density diagnostics.")
    ap.add_argument("--config", default=None,
                    help="JSON file of flag defaults (flags override)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, default_out):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=default_out)
        p.add_argument("--figures", dest="figures", action="store_true",
                       default=True)
        p.add_argument("--no-figures", dest="figures", action="store_false")

    p = sub.add_parser("droplet", help="droplet geometry and equilibrium data")
    _add_potential_args(p)
    common(p, "droplet.json")
    p.set_defaults(func=_cmd_droplet)

    fk = sub.add_parser("fekete", help="energy minimization").add_subparsers(
        dest="subcommand", required=True)
    p = fk.add_parser("solve", help="descend to a Fekete configuration")
    _add_potential_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--max-iter", type=int, default=4000)
    common(p, "points.csv")
    p.set_defaults(func=_cmd_fekete_solve)

    gas = sub.add_parser("gas", help="Coulomb gas sampling").add_subparsers(
        dest="subcommand", required=True)
    p = gas.add_parser("sample", help="Metropolis chain for the Gibbs law")
    _add_potential_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--burn", type=int, default=500)
    p.add_argument("--record-every", type=int, default=25)
    common(p, "samples.csv")
    p.set_defaults(func=_cmd_gas_sample)

    kp = sub.add_parser("kernel", help="correlation kernels").add_subparsers(
        dest="subcommand", required=True)
    p = kp.add_parser("profile", help="rescaled one-point profile on a line")
    _add_potential_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--center", type=_complex_arg, default=0j,
                   help="blow-up point as re,im")
    p.add_argument("--axis", choices=("x", "y"), default="x")
    p.add_argument("--range", type=_range_arg, default="-3:3:0.05",
                   help="start:stop:step in rescaled units")
    common(p, "profile.csv")
    p.set_defaults(func=_cmd_kernel_profile)

    wd = sub.add_parser("ward", help="limit-kernel identities").add_subparsers(
        dest="subcommand", required=True)
    p = wd.add_parser("check", help="Ward identity residual on a point grid")
    p.add_argument("--m", type=_m_arg, default=0.0,
                   help="hard-wall position (inf for the bulk kernel)")
    p.add_argument("--grid-radius", type=float, default=2.0)
    p.add_argument("--side", type=int, default=7)
    p.add_argument("--rmax", type=float, default=20.0)
    p.add_argument("--nr", type=int, default=280)
    p.add_argument("--ntheta", type=int, default=320)
    common(p, "residual.csv")
    p.set_defaults(func=_cmd_ward_check)

    dn = sub.add_parser("density", help="counting densities").add_subparsers(
        dest="subcommand", required=True)
    p = dn.add_parser("scan", help="N/Lambda^2 table over (n, Lambda)")
    _add_potential_args(p)
    p.add_argument("--plan", choices=("bulk", "boundary"), required=True)
    p.add_argument("--n", type=_int_list, required=True,
                   help="comma-separated configuration sizes")
    p.add_argument("--lambda", dest="lam", type=_float_list, required=True,
                   help="comma-separated window sizes")
    common(p, "density.json")
    p.set_defaults(func=_cmd_density_scan)

    p = sub.add_parser("traces", help="concentration-operator spectra")
    _add_potential_args(p)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--point", type=_complex_arg, default=0j)
    p.add_argument("--lambda", dest="lam", type=_float_list,
                   default="4,6,8")
    common(p, "traces.json")
    p.set_defaults(func=_cmd_traces)

    p = sub.add_parser("paper-check", help="run the full acceptance matrix")
    p.add_argument("--quick", action="store_true",
                   help="cap n at 100 and trim grids (CI smoke run)")
    p.add_argument("--only", type=_int_list, default=None,
                   help="comma-separated 1-based check indices")
    common(p, "paper_check.json")
    p.set_defaults(func=_cmd_paper_check)

    return ap


_DASH_VALUE_FLAGS = {"--range", "--center", "--point", "--anchor"}


def _apply_config(parser, loaded: dict, seen: set | None = None):
    """Install config-file values as defaults on every (sub)parser.

    Subparsers parse into a fresh namespace, so defaults must be set on
    the parser that owns each flag; flags covered by the config also stop
    being mandatory on the command line.  Values are checked against the
    owning action's ``choices`` here because argparse only validates
    values it parsed from the command line, never defaults.

    Returns the set of config keys claimed by some parser; ``main`` uses
    it to reject typoed keys that no flag owns.
    """
    if seen is None:
        seen = set()
    hits = {}
    for action in parser._actions:
        if action.dest not in loaded:
            continue
        seen.add(action.dest)
        value = loaded[action.dest]
        if action.choices is not None and value not in action.choices:
            raise ValueError(
                f"config value {value!r} for {action.dest!r} is not one of "
                f"{tuple(action.choices)}")
        hits[action.dest] = value
        if action.required:
            action.required = False
    if hits:
        parser.set_defaults(**hits)
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                _apply_config(sub, loaded, seen)
    return seen


def _merge_dash_values(argv):
    """Join flag/value pairs whose value legitimately starts with '-'.

    argparse would otherwise read ``--range -3:3:0.05`` as two flags.
    """
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok in _DASH_VALUE_FLAGS and i + 1 < len(argv)
                and argv[i + 1].startswith("-")):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    argv = _merge_dash_values(argv)
    threads = os.environ.get("FEKETEFIELD_THREADS")
    if threads:
        try:
            import numba
            numba.set_num_threads(int(threads))
        except (ImportError, ValueError):
            pass

    ap = build_parser()
    if "--config" in argv:
        idx = argv.index("--config")
        try:
            loaded = json.loads(Path(argv[idx + 1]).read_text())
        except (IndexError, OSError, json.JSONDecodeError) as e:
            print(f"error: cannot read config: {e}", file=sys.stderr)
            return 2
        if not isinstance(loaded, dict):
            print("error: config must be a JSON object", file=sys.stderr)
            return 2
        try:
            claimed = _apply_config(ap, loaded)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        unknown = sorted(set(loaded) - claimed)
        if unknown:
            print("error: unknown config keys: " + ", ".join(unknown),
                  file=sys.stderr)
            return 2

    args = ap.parse_args(argv)
    if not hasattr(args, "func"):
        ap.print_usage(sys.stderr)
        return 2
    artifacts: list = []
    try:
        return args.func(args, artifacts)
    except (ValueError, RuntimeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        if artifacts:
            marker = str(Path(artifacts[0]).with_suffix(".partial.json"))
            try:
                _write_json(marker, {"status": "failed", "error": str(e),
                                     "written": artifacts})
            except OSError:
                return 1
            print(f"partial artifacts flagged in {marker}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
