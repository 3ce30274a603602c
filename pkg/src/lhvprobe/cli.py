"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 usage or input error,
3 a certificate was requested but the table has a local model.
"""

import argparse
import datetime as _dt
import json
import logging
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from . import __version__, io, lhv, lp
from . import linalg as la
from . import states
from .measurements import probability_table
from .search import AmoebaConfig, CampaignConfig, minimize_F, run_campaign

log = logging.getLogger("lhvprobe")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_FEASIBLE = 0, 1, 2, 3

CSV_HELP = (
    "per-trial CSV columns: index (trial number), feasible (1/0), value (max marginal "
    "residual of the local model when feasible, certificate margin when infeasible)"
)


class UsageError(Exception):
    pass


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _manifest(command, config, seeds, inputs, outputs, started):
    return {
        "schema_version": io.SCHEMA_VERSION,
        "command": command,
        "config": config,
        "seeds": seeds,
        "tool_version": __version__,
        "started": started,
        "finished": _now(),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
    }


def _write_with_manifest(path, document, command, config, seeds, inputs, started, extra_outputs=()):
    path = Path(path)
    io.write_json(path, document)
    outputs = [path, *extra_outputs]
    manifest_path = path.with_name(path.stem + ".manifest.json")
    io.write_json(manifest_path, _manifest(command, config, seeds, inputs, outputs, started))
    return manifest_path


def _resolve_seed(seed):
    if seed is None:
        seed = secrets.randbits(32)
        print(f"seed: {seed}", file=sys.stderr)
    return seed


def _resolve_workers(flag):
    if flag is not None:
        return flag
    env = os.environ.get("LHVPROBE_WORKERS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"LHVPROBE_WORKERS must be an integer, got {env!r}")
    return 1


def _load_psi(path):
    """A pure state file: either 9 [re, im] amplitude pairs or a state-angles object."""
    data = io.read_json(path)
    if isinstance(data, dict):
        if "amplitudes" in data:
            psi = io.pure_state_from_json(data["amplitudes"], where=str(path))
        else:
            psi = states.state_from_angles(io.state_angles_from_json(data, where=str(path)))
    else:
        psi = io.pure_state_from_json(data, where=str(path))
    if not psi.is_normalized(1e-9):
        raise io.FormatError(f"{path}: state is not normalized (norm {psi.norm:.12g})")
    return states.PureState(psi.amplitudes / psi.norm)


# ---------------------------------------------------------------- verify


def state_checks(v4_coefficient=1.0 / 3.0, overlap_restarts=40):
    """The construction checks behind ``verify``; each entry reports measured vs allowed."""
    checks = []

    def add(name, measured, limit, ok):
        checks.append({"name": name, "measured": float(measured), "limit": float(limit), "passed": bool(ok)})

    basis = states.full_basis(v4_coefficient)
    vecs = np.array([v.amplitudes for v in basis])
    gram_err = la.max_abs_diff(vecs.conj() @ vecs.T, np.eye(9))
    add("orthonormal_basis", gram_err, 1e-12, gram_err <= 1e-12)

    ranks = [np.linalg.matrix_rank(v.as_matrix(), tol=1e-10) for v in basis[:5]]
    add("upb_product_vectors", max(ranks), 1, all(r == 1 for r in ranks))

    rho = (np.eye(9) - states.upb_projector(v4_coefficient)) / 4.0
    spectrum = la.hermitian_eig(rho).eigenvalues
    spec_err = float(np.max(np.abs(spectrum - np.array([0.25] * 4 + [0.0] * 5))))
    add("rho_b_spectrum", spec_err, 1e-10, spec_err <= 1e-10)

    complement = sum(v.projector() for v in basis[5:]) / 4.0
    mix_err = la.max_abs_diff(complement, rho)
    add("rho_b_equals_complement_mixture", mix_err, 1e-12, mix_err <= 1e-12)

    ppt_min = la.min_eigenvalue(la.partial_transpose_B(rho))
    add("rho_b_ppt_min_eigenvalue", ppt_min, -1e-10, ppt_min >= -1e-10)

    overlap = states.min_product_overlap(restarts=overlap_restarts)
    add("unextendibility_min_product_overlap", overlap, 1e-6, overlap > 1e-6)

    degree = states.linear_entanglement_degree(states.canonical_psi())
    add("canonical_psi_entanglement_degree", abs(degree - 15.0 / 16.0), 1e-12, abs(degree - 15 / 16) <= 1e-12)
    return checks


def cmd_verify(args):
    started = _now()
    coeff = 1.0 / np.sqrt(2.0) if args.literal_v4 else 1.0 / 3.0
    checks = state_checks(coeff)
    ok = all(c["passed"] for c in checks)
    report = {
        "schema_version": io.SCHEMA_VERSION,
        "passed": ok,
        "v4_coefficient": coeff,
        "checks": checks,
    }
    if args.out:
        _write_with_manifest(args.out, report, "verify", {"literal_v4": args.literal_v4}, {}, [], started)
    print(json.dumps(report, indent=2))
    if not ok:
        failed = ", ".join(c["name"] for c in checks if not c["passed"])
        print(f"failed checks: {failed}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------- sample


def cmd_sample(args):
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    if args.f is not None and args.state != "mixture":
        raise UsageError("--f requires --state mixture")
    if args.psi is not None and args.state != "mixture":
        raise UsageError("--psi requires --state mixture")
    if args.state == "mixture" and args.f is None:
        raise UsageError("--state mixture requires --f")
    if args.f is not None and not 0.0 <= args.f <= 1.0:
        raise UsageError("--f must lie in [0, 1]")
    workers = _resolve_workers(args.workers)
    if workers < 1:
        raise UsageError("--workers must be positive")
    psi = _load_psi(args.psi).amplitudes if args.psi else None
    seed = _resolve_seed(args.seed)
    started = _now()
    config = CampaignConfig(
        trials=args.trials,
        seed=seed,
        sampling_mode=args.mode,
        state_source=args.state,
        admixture_F=args.f,
        psi=psi,
        worker_count=workers,
    )
    report = run_campaign(config)
    out = Path(args.out)
    csv_path = out / "trials.csv"
    io.write_trial_csv(csv_path, report.rows)
    _write_with_manifest(
        out / "campaign.json",
        io.campaign_report_to_json(report),
        "sample",
        config.echo(),
        {"seed": seed},
        [args.psi] if args.psi else [],
        started,
        extra_outputs=[csv_path],
    )
    print(
        f"{report.feasible_count}/{report.trials_run} feasible, "
        f"{len(report.infeasible_records)} infeasible, {len(report.error_records)} solver errors "
        f"({report.wall_time:.1f} s)"
    )
    return EXIT_OK if not report.error_records else EXIT_CHECK_FAILED


# ---------------------------------------------------------------- fmax / certificate


def _settings_arg(path):
    return io.settings_from_json(io.read_json(path), where=str(path))


def cmd_fmax(args):
    if args.psi_canonical == (args.state_angles is not None):
        raise UsageError("give exactly one of --state-angles or --psi-canonical")
    settings = _settings_arg(args.settings)
    if args.psi_canonical:
        angles = states.CANONICAL_ANGLES
    else:
        angles = io.state_angles_from_json(io.read_json(args.state_angles), where=args.state_angles)
    started = _now()
    threshold = lhv.critical_admixture(settings, angles)
    document = io.threshold_to_json(threshold)
    inputs = [args.settings] + ([args.state_angles] if args.state_angles else [])
    if args.dump_lp:
        psi = states.state_from_angles(angles)
        problem = lhv.build_admixture_lp(
            probability_table(states.bound_entangled_state(), settings),
            probability_table(psi.projector(), settings),
        )
        document["lp"] = {"problem": problem.to_dict(), "outcome": lp.solve(problem).to_dict()}
    _write_with_manifest(args.out, document, "fmax", {"psi_canonical": args.psi_canonical}, {}, inputs, started)
    print(f"F = {threshold.value:.9f}")
    return EXIT_OK


def cmd_certificate(args):
    if args.state != "mixture":
        raise UsageError("certificate currently requires --state mixture")
    if args.f is None or not 0.0 <= args.f <= 1.0:
        raise UsageError("--f in [0, 1] is required")
    if args.psi_canonical == (args.psi is not None):
        raise UsageError("give exactly one of --psi or --psi-canonical")
    settings = _settings_arg(args.settings)
    psi = states.canonical_psi() if args.psi_canonical else _load_psi(args.psi)
    started = _now()
    rho = states.admixture(args.f, psi)
    table = probability_table(rho, settings)
    verdict = lhv.lhv_feasible(table)
    inputs = [args.settings] + ([args.psi] if args.psi else [])
    config = {"state": args.state, "f": args.f, "psi_canonical": args.psi_canonical}
    if isinstance(verdict, lhv.JointDistribution):
        print(
            "table has a local model; no certificate exists. witnessing distribution:",
            file=sys.stderr,
        )
        print(json.dumps({"witness_distribution": io.distribution_to_json(verdict)}))
        return EXIT_FEASIBLE
    document = io.certificate_to_json(verdict, table)
    if args.dump_lp:
        problem = lhv.build_feasibility(table)
        document["lp"] = {"problem": problem.to_dict(), "outcome": lp.solve(problem).to_dict()}
    _write_with_manifest(args.out, document, "certificate", config, {}, inputs, started)
    print(f"violation margin {verdict.margin:.6e} (bound {verdict.lhv_bound:.6f})")
    return EXIT_OK


# ---------------------------------------------------------------- fmin


def cmd_fmin(args):
    if args.restarts < 1:
        raise UsageError("--restarts must be at least 1")
    if args.max_iter < 1:
        raise UsageError("--max-iter must be at least 1")
    workers = _resolve_workers(args.workers)
    if workers < 1:
        raise UsageError("--workers must be positive")
    seed = _resolve_seed(args.seed)
    started = _now()
    config = AmoebaConfig(
        restarts=args.restarts,
        seed=seed,
        max_iterations=args.max_iter,
        fixed_state=states.CANONICAL_ANGLES if args.fix_psi_canonical else None,
        worker_count=workers,
    )

    def progress(rec):
        log.info("restart %d: F = %.6f (%d evaluations)", rec.restart, rec.best_F, rec.evaluations)

    result = minimize_F(config, progress=progress)
    out = Path(args.out)
    settings_path = out / "best_settings.json"
    io.write_json(settings_path, io.settings_to_json(result.best_settings))
    angles_path = out / "best_state_angles.json"
    io.write_json(angles_path, io.state_angles_to_json(result.best_state_angles))
    _write_with_manifest(
        out / "fmin.json",
        io.minimization_to_json(result),
        "fmin",
        config.echo(),
        {"seed": seed},
        [],
        started,
        extra_outputs=[settings_path, angles_path],
    )
    print(f"best F = {result.best_F:.9f} over {args.restarts} restarts")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser():
    parser = argparse.ArgumentParser(prog="lhvprobe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    # also accepted after the subcommand; SUPPRESS keeps the top-level value when absent
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="check the UPB and bound entangled state construction")
    p.add_argument("--out", help="also write the JSON report here")
    p.add_argument(
        "--literal-v4",
        action="store_true",
        help="debug: use the unnormalized 1/sqrt(2) prefactor on |v4> (checks must fail)",
    )
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", parents=[common], help="random-settings LHV campaign", epilog=CSV_HELP)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=("haar", "uniform-angles"), default="haar")
    p.add_argument("--state", choices=("rho_b", "mixture"), default="rho_b")
    p.add_argument("--f", type=float, help="admixture fraction (with --state mixture)")
    p.add_argument("--psi", help="admixed pure state JSON (default: (|v5>+|v6>)/sqrt 2)")
    p.add_argument("--workers", type=int, help="worker processes (overrides LHVPROBE_WORKERS)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fmax", parents=[common], help="critical admixture F for fixed settings and state")
    p.add_argument("--settings", required=True)
    p.add_argument("--state-angles")
    p.add_argument("--psi-canonical", action="store_true")
    p.add_argument("--dump-lp", action="store_true", help="embed the LP and solver outcome")
    p.add_argument("--out", required=True, help="output JSON file")
    p.set_defaults(func=cmd_fmax)

    p = sub.add_parser("fmin", parents=[common], help="downhill-simplex minimization of the critical admixture")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=int)
    p.add_argument("--fix-psi-canonical", action="store_true")
    p.add_argument("--max-iter", type=int, default=20_000)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_fmin)

    p = sub.add_parser("certificate", parents=[common], help="Bell-type certificate for an LHV-infeasible table")
    p.add_argument("--settings", required=True)
    p.add_argument("--state", choices=("mixture",), default="mixture")
    p.add_argument("--f", type=float)
    p.add_argument("--psi")
    p.add_argument("--psi-canonical", action="store_true")
    p.add_argument("--dump-lp", action="store_true")
    p.add_argument("--out", required=True, help="output JSON file")
    p.set_defaults(func=cmd_certificate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lhvprobe {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except io.FormatError as exc:
        print(f"lhvprobe {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
