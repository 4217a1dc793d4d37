"""Command-line interface.

Subcommands: analyze, track, brackets, orbit, algebroid, serve.
Exit codes: 0 success, 1 validation error, 2 numerical failure
(singular stop, exhausted search budget, identity violation), 64 usage error.
The CHARM_LOG environment variable sets the log level (DEBUG/INFO/...).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .algebroid import (SectionField, anchor, g_bracket, jacobi_defect,
                        section_bracket, structure_constants)
from .control import (LOOP_BRACKET_SIGN, FlowSchedule, TargetError,
                      commutator_loop, composite_flow, reach_probe, track)
from .endpoint import endpoint, gram, singularity
from .frames import (GVector, PolyField, bracket_field, dbar_rank,
                     pointwise_commutator, predicted_kernel_dim, v_subspace)
from .geometry import (Configuration, DegeneracyError, LayoutError,
                       random_configuration)
from .scenario import (Scenario, ScenarioError, build_target, dumps_canonical,
                       export_matrix_csv, export_trajectory, format_float,
                       load_scenario, parse_target_preset, save_report)

log = logging.getLogger("snakecharm")


class _Parser(argparse.ArgumentParser):
    """argparse that exits 64 on usage errors (unknown flag, bad value)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def _setup_logging() -> None:
    level = os.environ.get("CHARM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


# -- analyze ---------------------------------------------------------------------


def analysis_report(u: Configuration, *, tol_singular=None, tol_rank=1e-9) -> dict:
    """Gram spectrum, singularity classification, v-subspace, and dbar rank.

    A non-finite condition number (exactly singular Gram complement) is
    reported as null rather than breaking strict-JSON serialization.
    """
    gd = gram(u)
    sing = singularity(u, tol_singular)
    basis = v_subspace(u)
    rank = dbar_rank(u, tol_rank=tol_rank)
    cond = gd.condition_number
    return {
        "dimension": u.d,
        "representation": u.kind,
        "total_length": u.total_length,
        "head": endpoint(u).tolist(),
        "gram": {
            "gamma": gd.gamma.tolist(),
            "a_op": gd.a_op.tolist(),
            "eigenvalues": gd.eigenvalues.tolist(),
            "margin": gd.margin,
            "condition_number": cond if np.isfinite(cond) else None,
        },
        "singularity": {
            "is_singular": sing.is_singular,
            "margin": sing.margin,
            "axis": None if sing.axis is None else sing.axis.tolist(),
            "collinearity_residual": sing.collinearity_residual,
            "tol_singular": sing.tol_singular,
        },
        "v_subspace": {
            "dim": basis.shape[1],
            "basis": basis.T.tolist(),
        },
        "dbar_rank": {
            "rank": rank.rank,
            "kernel_dim": len(rank.kernel_basis),
            "v_dim": rank.v_dim,
            "predicted_kernel_dim": predicted_kernel_dim(
                u.d, rank.v_dim, sing.is_singular),
            "singular_values": rank.singular_values.tolist(),
            "model": rank.model,
        },
    }


def _cmd_analyze(args) -> int:
    scenario = load_scenario(args.scenario)
    u = scenario.configuration()
    report = analysis_report(u, tol_singular=scenario.tolerances.tol_singular,
                             tol_rank=scenario.tolerances.tol_rank)
    report["seed"] = scenario.seed
    if args.out:
        save_report(report, args.out, created=args.created)
        log.info("analysis report written to %s", args.out)
    else:
        print(dumps_canonical({k: v for k, v in report.items()}))
    if args.csv_dir:
        os.makedirs(args.csv_dir, exist_ok=True)
        gd = gram(u)
        export_matrix_csv(gd.gamma, os.path.join(args.csv_dir, "gamma.csv"))
        export_matrix_csv(gd.a_op, os.path.join(args.csv_dir, "a_op.csv"))
        export_matrix_csv(np.asarray(report["dbar_rank"]["singular_values"]),
                          os.path.join(args.csv_dir, "singular_values.csv"))
    return 0


# -- track -----------------------------------------------------------------------


def _cmd_track(args) -> int:
    scenario = load_scenario(args.scenario)
    u0 = scenario.configuration()
    if args.target:
        spec = parse_target_preset(args.target)
        curve = build_target(spec, u0.total_length, u0.d)
    else:
        curve = scenario.target_curve()
    if curve is None:
        raise ScenarioError("track needs a target (scenario field or --target)")
    integ = scenario.integrator
    scheme = args.scheme or integ.scheme
    dt = args.dt if args.dt is not None else integ.dt
    gain = args.gain if args.gain is not None else integ.feedback_gain
    try:
        traj = track(u0, curve, scheme=scheme, dt=dt, feedback_gain=gain,
                     duration=args.duration,
                     tol_singular=scenario.tolerances.tol_singular)
    except TargetError as err:
        raise ScenarioError(str(err))
    if args.out:
        export_trajectory(traj, args.out)
        log.info("trajectory written to %s (%d records)", args.out,
                 traj.n_steps)
    print(f"status {traj.status}  steps {traj.n_steps - 1}  "
          f"energy {format_float(float(traj.energies[-1]))}  "
          f"final_error {format_float(float(traj.tracking_errors[-1]))}")
    return 2 if traj.status == "singular-stop" else 0


# -- brackets --------------------------------------------------------------------


def _sup(arr: np.ndarray) -> float:
    return float(np.linalg.norm(arr, axis=1).max())


def _ladder_error(d: int, rng: np.random.Generator) -> float:
    """Max pointwise defect of the three bracket identities at random points."""
    pts = rng.normal(size=(24, d))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    worst = 0.0
    for i in range(d):
        for j in range(i + 1, d):
            ei = PolyField.frame(d, i)
            ej = PolyField.frame(d, j)
            bij = PolyField.rotation(d, i, j)
            worst = max(
                worst,
                _sup(pointwise_commutator(ei, ej, pts) - bij(pts)),
                _sup(pointwise_commutator(ei, bij, pts) - ej(pts)))
            if d > 2:
                k = next(x for x in range(d) if x not in (i, j))
                worst = max(worst, _sup(
                    pointwise_commutator(bij, PolyField.rotation(d, j, k), pts)
                    - PolyField.rotation(d, i, k)(pts)))
    return worst


def _cmd_brackets(args) -> int:
    rng = np.random.default_rng(args.seed)
    d = args.d
    identity_err = max(_ladder_error(d, rng) for _ in range(args.trials))
    print(f"identity suite: d={d} trials={args.trials} "
          f"max defect {identity_err:.3e}")

    ts = (1e-2, 5e-3, 2.5e-3)
    rows = []
    for trial in range(args.trials):
        u = random_configuration(rng, d, int(rng.integers(2, 6)))
        i, j = rng.choice(d, size=2, replace=False)
        exact = bracket_field(u, int(i), int(j)).values * LOOP_BRACKET_SIGN
        errs = [_sup(commutator_loop(u, int(i), int(j), t)[1].values - exact)
                for t in ts]
        rows.append(errs)
    med = np.median(np.asarray(rows), axis=0)
    orders = np.log2(med[:-1] / med[1:])
    print("t            median loop error   order")
    for k, t in enumerate(ts):
        order = f"{orders[k - 1]:.3f}" if k else "  -  "
        print(f"{t:<12g} {med[k]:<19.6e} {order}")
    decreasing = bool(np.all(np.diff(med) < 0))
    ok = identity_err <= 1e-12 and decreasing and np.all(orders >= 0.9)
    if args.out:
        save_report({
            "d": d, "trials": args.trials, "seed": args.seed,
            "identity_max_defect": float(identity_err),
            "loop_t": list(ts), "loop_median_errors": med.tolist(),
            "loop_orders": orders.tolist(),
        }, args.out, created=args.created)
    return 0 if ok else 2


# -- orbit -----------------------------------------------------------------------


def _cmd_orbit(args) -> int:
    scenario = load_scenario(args.scenario)
    u0 = scenario.configuration()
    rng = np.random.default_rng(args.seed if args.seed is not None
                                else scenario.seed)
    schedule = FlowSchedule.random(rng, u0.d, args.legs)
    v = composite_flow(u0, schedule)
    result = reach_probe(u0, v, budget=args.budget,
                         tol_reach=scenario.tolerances.tol_reach,
                         seed=int(rng.integers(2**31)))
    print(f"orbit probe: success={result.success} steps={result.steps_used} "
          f"final_distance {result.distances[-1]:.6e}")
    if args.out:
        save_report({
            "success": result.success,
            "steps_used": result.steps_used,
            "budget": args.budget,
            "tol_reach": scenario.tolerances.tol_reach,
            "distances": result.distances.tolist(),
        }, args.out, created=args.created)
    return 0 if result.success else 2


# -- algebroid -------------------------------------------------------------------


def _cmd_algebroid(args) -> int:
    d = args.d
    rng = np.random.default_rng(args.seed)
    sc = structure_constants(d)
    dense = sc.dense()
    defect = (np.einsum("qrs,pst->pqrt", dense, dense)
              + np.einsum("rps,qst->pqrt", dense, dense)
              + np.einsum("pqs,rst->pqrt", dense, dense))
    jacobi_max = int(np.abs(defect).max())
    print(f"g_{d}: dim {sc.dim}, exhaustive Jacobi defect {jacobi_max}")

    anchor_worst = 0.0
    for _ in range(args.trials):
        u = random_configuration(rng, d, int(rng.integers(2, 6)))
        a = GVector.from_concat(rng.normal(size=sc.dim), d)
        b = GVector.from_concat(rng.normal(size=sc.dim), d)
        lhs = anchor(u, g_bracket(a, b))
        rhs = pointwise_commutator(PolyField.of_gvector(a),
                                   PolyField.of_gvector(b), u.values)
        anchor_worst = max(anchor_worst, float(np.abs(lhs.values - rhs).max()))
    print(f"anchor morphism residual over {args.trials} trials: "
          f"{anchor_worst:.3e}")

    u = random_configuration(rng, d, 3)
    phi = SectionField.constant(GVector.from_concat(rng.normal(size=sc.dim), d))
    psi_s = SectionField.constant(GVector.from_concat(rng.normal(size=sc.dim), d))
    sb = section_bracket(phi, psi_s, u)
    resid = float(jacobi_defect(phi.value(u), psi_s.value(u),
                                GVector.zero(d)).norm)
    print(f"constant-section bracket norm {sb.norm:.6e}, "
          f"degenerate Jacobi residual {resid:.1e}")

    ok = jacobi_max == 0 and anchor_worst <= 1e-8
    if args.out:
        save_report({
            "d": d, "dim": sc.dim, "jacobi_defect": jacobi_max,
            "anchor_residual": anchor_worst, "trials": args.trials,
            "seed": args.seed,
        }, args.out, created=args.created)
    return 0 if ok else 2


# -- serve -----------------------------------------------------------------------


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    level = os.environ.get("CHARM_LOG", "info").lower()
    uvicorn.run(create_app(), host=args.host, port=args.port, log_level=level)
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="snakecharm",
                     description="numerics for charming a snake")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def _common_out(p):
        p.add_argument("--out", help="write a JSON report here")
        p.add_argument("--created", help=argparse.SUPPRESS)  # report timestamp

    p = sub.add_parser("analyze", help="gram spectrum, singularity, rank")
    p.add_argument("--scenario", required=True)
    p.add_argument("--csv-dir", help="also write gamma/a_op/singular_values CSVs")
    _common_out(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("track", help="integrate a tracking run")
    p.add_argument("--scenario", required=True)
    p.add_argument("--target", help="preset kind:param=value,...")
    p.add_argument("--scheme", choices=("euler", "rk4"))
    p.add_argument("--dt", type=float)
    p.add_argument("--gain", type=float, help="feedback gain K")
    p.add_argument("--duration", type=float)
    p.add_argument("--out", help="write the trajectory JSONL here")
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("brackets", help="identity suite + loop convergence")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    _common_out(p)
    p.set_defaults(func=_cmd_brackets)

    p = sub.add_parser("orbit", help="reachability probe toward a flow target")
    p.add_argument("--scenario", required=True)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--legs", type=int, default=4)
    p.add_argument("--seed", type=int)
    _common_out(p)
    p.set_defaults(func=_cmd_orbit)

    p = sub.add_parser("algebroid", help="Jacobi and anchor-morphism suites")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    _common_out(p)
    p.set_defaults(func=_cmd_algebroid)

    p = sub.add_parser("serve", help="run the live tracking service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def cli_dispatch(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 64
    try:
        return args.func(args)
    except (ScenarioError, TargetError, LayoutError, DegeneracyError,
            FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
