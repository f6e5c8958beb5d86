"""Command-line front end and persistence glue.

Subcommands: simulate, characterize, verdict, import-calibration,
plan-samples, report. Global flags ``--seed``, ``--out``, ``--quiet`` may be
given before or after the subcommand. ``REPRO_BOUND_THREADS`` caps internal
parallelism.

Exit codes are stable: 0 success, 2 input error, 3 I/O failure, 4 incomplete
run artifacts, 5 tolerance outside the bound's validity regime.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds, estimator
from ._fmt import g17
from ._version import __version__
from .errors import (
    ConfigError,
    IncompleteArchiveError,
    InvalidParameterError,
    OutOfRegimeError,
    ReproBoundError,
)
from .noise_model import QubitNoiseParams
from .sampler import (
    CircuitKind,
    ExperimentPlan,
    PlanQubit,
    load_archive,
    run_plan,
    save_archive,
)

DEVICE_CONFIG_SCHEMA = "device-config/1"
SNAPSHOT_SCHEMA = "calibration-snapshot/1"
NORMALIZED_SCHEMA = "calibration-normalized/1"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IO = 3
EXIT_INCOMPLETE = 4
EXIT_REGIME = 5

# Stream id 3 is reserved for the drift hook (0..2 belong to circuit kinds).
_DRIFT_STREAM = 3


# ---------------------------------------------------------------------------
# config and snapshot handling


def _load_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _field(doc: dict, where: str, name: str, kind=None):
    if name not in doc:
        raise ConfigError(f"{where}: missing field {name!r}")
    value = doc[name]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"{where}: field {name!r} has wrong type {type(value).__name__}")
    return value


def load_device_config(path: str | Path) -> tuple[str, ExperimentPlan]:
    """Parse and validate a device config; returns (name, plan)."""
    path = Path(path)
    doc = _load_json(path)
    where = str(path)
    if doc.get("schema") != DEVICE_CONFIG_SCHEMA:
        raise ConfigError(f"{where}: schema must be {DEVICE_CONFIG_SCHEMA!r}, got {doc.get('schema')!r}")
    name = _field(doc, where, "name", str)
    qubits_doc = _field(doc, where, "qubits", list)
    if not qubits_doc:
        raise ConfigError(f"{where}: qubits must be a non-empty list")
    plan_doc = _field(doc, where, "plan", dict)

    qubits = []
    for i, q in enumerate(qubits_doc):
        loc = f"{where}: qubits[{i}]"
        if not isinstance(q, dict):
            raise ConfigError(f"{loc}: expected an object")
        index = _field(q, loc, "index", int)
        try:
            params = QubitNoiseParams(
                f0=_field(q, loc, "f0", (int, float)),
                f1=_field(q, loc, "f1", (int, float)),
                theta=_field(q, loc, "theta_rad", (int, float)),
            )
        except InvalidParameterError as exc:
            raise ConfigError(f"{loc}: {exc}") from exc
        qubits.append(PlanQubit(index, params))

    indices = sorted(q.index for q in qubits)
    if indices != list(range(len(qubits))):
        raise ConfigError(f"{where}: qubit indices must be unique and contiguous from 0, got {indices}")

    loc = f"{where}: plan"
    try:
        plan = ExperimentPlan(
            L=_field(plan_doc, loc, "L", int),
            S=_field(plan_doc, loc, "S", int),
            qubits=tuple(qubits),
            seed=_field(plan_doc, loc, "seed", int),
        )
    except InvalidParameterError as exc:
        raise ConfigError(f"{loc}: {exc}") from exc
    return name, plan


def _theta_from_gate_error(loc: str, entry: dict) -> float:
    value = _field(entry, loc, "value", (int, float))
    unit = _field(entry, loc, "unit", str)
    if unit == "rad":
        return float(value)
    if unit == "deg":
        return math.radians(value)
    if unit == "infidelity":
        # Average gate infidelity of a rotation-by-theta error is
        # (2/3)*sin(theta)^2, so theta = arcsin(sqrt(3r/2)).
        r = float(value)
        if not 0.0 <= r <= 2.0 / 3.0:
            raise ConfigError(f"{loc}: infidelity must be in [0, 2/3], got {r!r}")
        return math.asin(math.sqrt(1.5 * r))
    raise ConfigError(f"{loc}: unknown gate error unit {unit!r} (use rad, deg, or infidelity)")


def normalize_snapshot(path: str | Path) -> dict:
    """Validate a calibration snapshot and normalize angles to radians.

    A qubit may give the gate angle directly (``theta_rad``) or as a tagged
    ``gate_error`` object with an explicit unit; a missing angle is accepted
    and flagged, never guessed.
    """
    path = Path(path)
    doc = _load_json(path)
    where = str(path)
    if doc.get("schema") != SNAPSHOT_SCHEMA:
        raise ConfigError(f"{where}: schema must be {SNAPSHOT_SCHEMA!r}, got {doc.get('schema')!r}")
    source = _field(doc, where, "source", str)
    captured_at = _field(doc, where, "captured_at", str)
    qubits_doc = _field(doc, where, "qubits", list)
    if not qubits_doc:
        raise ConfigError(f"{where}: qubits must be a non-empty list")

    normalized = []
    flags = []
    for i, q in enumerate(qubits_doc):
        loc = f"{where}: qubits[{i}]"
        if not isinstance(q, dict):
            raise ConfigError(f"{loc}: expected an object")
        index = _field(q, loc, "index", int)
        f0 = _field(q, loc, "f0", (int, float))
        f1 = _field(q, loc, "f1", (int, float))
        for fname, fval in (("f0", f0), ("f1", f1)):
            if not 0.0 <= float(fval) <= 1.0:
                raise ConfigError(f"{loc}: {fname}={fval!r} outside [0, 1]")
        if "theta_rad" in q:
            theta = float(_field(q, loc, "theta_rad", (int, float)))
        elif "gate_error" in q:
            theta = _theta_from_gate_error(f"{loc}: gate_error", _field(q, loc, "gate_error", dict))
        else:
            theta = None
            flags.append(f"qubit {index}: gate angle missing; verdict will need --theta")
        normalized.append({"index": index, "f0": float(f0), "f1": float(f1), "theta_rad": theta})

    indices = [q["index"] for q in normalized]
    if len(set(indices)) != len(indices):
        raise ConfigError(f"{where}: duplicate qubit indices {indices}")

    return {
        "schema": NORMALIZED_SCHEMA,
        "source": source,
        "captured_at": captured_at,
        "qubits": sorted(normalized, key=lambda q: q["index"]),
        "warnings": flags,
    }


# ---------------------------------------------------------------------------
# verdict inputs: characterization CSV or normalized calibration JSON


def _verdict_rows(path: Path) -> list[dict]:
    """Rows of {qubit, eps, f, theta (may be None), d_mean (may be None)}."""
    if path.suffix == ".json":
        doc = _load_json(path)
        if doc.get("schema") != NORMALIZED_SCHEMA:
            raise ConfigError(
                f"{path}: schema must be {NORMALIZED_SCHEMA!r} "
                f"(run import-calibration first), got {doc.get('schema')!r}"
            )
        return [
            {
                "qubit": q["index"],
                "eps": q["f0"] - q["f1"],
                "f": (q["f0"] + q["f1"]) / 2.0,
                "theta": q["theta_rad"],
                "d_mean": None,
            }
            for q in doc["qubits"]
        ]
    rows = []
    for e in estimator.read_characterization_csv(path):
        rows.append(
            {
                "qubit": e.qubit,
                "eps": e.eps_mean,
                "f": e.f_mean,
                "theta": None if math.isnan(e.theta_hat) else e.theta_hat,
                "d_mean": e.d_mean,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# subcommands


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _resolve_threads(requested: int | None) -> int:
    cap = os.environ.get("REPRO_BOUND_THREADS")
    if cap is not None:
        cap_val = max(1, int(cap))
        return min(requested or cap_val, cap_val)
    return max(1, requested or 1)


def _gaussian_drift(sigma: float, seed: int):
    """Common-mode per-experiment parameter drift for exploratory runs."""

    def hook(params: QubitNoiseParams, experiment: int) -> QubitNoiseParams:
        seq = np.random.SeedSequence(seed, spawn_key=(_DRIFT_STREAM, experiment))
        rng = np.random.Generator(np.random.Philox(seq))
        df0, df1, dtheta = rng.normal(0.0, sigma, 3)
        return QubitNoiseParams(
            f0=min(1.0, max(0.0, params.f0 + df0)),
            f1=min(1.0, max(0.0, params.f1 + df1)),
            theta=params.theta + dtheta,
            theta_bound=None,
        )

    return hook


def cmd_simulate(args) -> int:
    if args.out is None:
        raise ConfigError("simulate needs --out RUN_DIR")
    name, plan = load_device_config(args.config)
    if args.seed is not None:
        plan = ExperimentPlan(L=plan.L, S=plan.S, qubits=plan.qubits, seed=args.seed)
    drift = _gaussian_drift(args.drift, plan.seed) if args.drift is not None else None
    archive = run_plan(plan, threads=_resolve_threads(args.threads), drift=drift)
    out = save_archive(archive, args.out)
    _say(args, f"{name}: wrote {len(archive.blocks)} blocks to {out}")
    return EXIT_OK


def cmd_characterize(args) -> int:
    run_dir = Path(args.run_dir)
    archive = load_archive(run_dir)
    estimates = estimator.characterize(archive)
    out = Path(args.out) if args.out else run_dir / "characterization.csv"
    estimator.write_characterization_csv(estimates, out)
    flagged = sum(1 for e in estimates if e.warnings)
    _say(args, f"characterized {len(estimates)} qubit(s) -> {out}" + (f" ({flagged} flagged)" if flagged else ""))
    return EXIT_OK


def cmd_verdict(args) -> int:
    source = Path(args.source)
    rows = _verdict_rows(source)
    results = []
    for row in sorted(rows, key=lambda r: r["qubit"]):
        theta = row["theta"]
        if theta is None:
            if args.theta is None:
                raise ConfigError(
                    f"qubit {row['qubit']}: no gate angle available; pass --theta RADIANS"
                )
            theta = args.theta
        if args.delta_from_observed:
            if row["d_mean"] is None:
                raise ConfigError(
                    "--delta-from-observed needs characterization input with observed distances"
                )
            delta = row["d_mean"]
        else:
            delta = args.delta
        results.append((row["qubit"], bounds.verdict(args.n, delta, row["eps"], theta, row["f"])))

    out = Path(args.out) if args.out else source.parent / "verdicts.csv"
    bounds.write_verdicts_csv(results, out)
    ok = sum(1 for _, v in results if v.reproducible)
    _say(args, f"verdicts -> {out}: {ok}/{len(results)} reproducible")
    return EXIT_OK


def cmd_import_calibration(args) -> int:
    snapshot = Path(args.snapshot)
    normalized = normalize_snapshot(snapshot)
    out = Path(args.out) if args.out else snapshot.with_suffix(".normalized.json")
    out.write_text(json.dumps(normalized, indent=2) + "\n")
    _say(args, f"normalized {len(normalized['qubits'])} qubit(s) -> {out}")
    for flag in normalized["warnings"]:
        _say(args, f"  note: {flag}")
    return EXIT_OK


def cmd_plan_samples(args) -> int:
    if not 0.0 < args.confidence < 1.0:
        raise ConfigError(f"--confidence must be in (0, 1), got {args.confidence!r}")
    plan = bounds.plan_samples(args.p, args.precision, 1.0 - args.confidence)
    print(f"T = {plan.T}")
    print(f"z = {g17(plan.z)}")
    return EXIT_OK


def _load_counts(run_dir: Path) -> dict[tuple[str, int, int], int]:
    counts = {}
    with open(run_dir / "counts.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            counts[(row["kind"], int(row["qubit"]), int(row["experiment"]))] = int(row["ones"])
    return counts


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    needed = ["manifest.json", "counts.csv", "characterization.csv", "verdicts.csv"]
    missing = tuple(name for name in needed if not (run_dir / name).is_file())
    if missing:
        raise IncompleteArchiveError(
            f"{run_dir}: run characterize and verdict first", missing=missing
        )
    manifest = json.loads((run_dir / "manifest.json").read_text())
    estimates = estimator.read_characterization_csv(run_dir / "characterization.csv")
    verdicts = bounds.read_verdicts_csv(run_dir / "verdicts.csv")
    counts = _load_counts(run_dir)
    out = Path(args.out) if args.out else run_dir / "report"
    out.mkdir(parents=True, exist_ok=True)

    _write_csv(
        out / "table1.csv",
        ["register", "gamma_max", "gamma_D"],
        [[q, g17(v.gamma_max), g17(v.gamma_D)] for q, v in verdicts],
    )

    finite_thetas = [abs(e.theta_hat_deg) for e in estimates if not math.isnan(e.theta_hat)]
    theta_mean = sum(finite_thetas) / len(finite_thetas) if finite_thetas else math.nan
    _write_csv(
        out / "fig_theta.csv",
        ["qubit", "theta_abs_deg", "register_mean_deg"],
        [[e.qubit, g17(abs(e.theta_hat_deg)), g17(theta_mean)] for e in estimates],
    )

    _write_csv(
        out / "fig_hellinger.csv",
        ["qubit", "d_mean", "d_sigma"],
        [[e.qubit, g17(e.d_mean), g17(e.d_sigma)] for e in estimates],
    )

    _write_csv(
        out / "fig_asymmetry.csv",
        ["qubit", "eps_mean", "eps_sigma"],
        [[e.qubit, g17(e.eps_mean), g17(e.eps_sigma)] for e in estimates],
    )

    gammas = {q: v.gamma_D for q, v in verdicts}
    gamma_mean = sum(gammas.values()) / len(gammas)
    _write_csv(
        out / "fig_gamma.csv",
        ["qubit", "gamma_D", "register_mean"],
        [[q, g17(gd), g17(gamma_mean)] for q, gd in sorted(gammas.items())],
    )

    s = int(manifest["S"])
    scatter_rows = []
    for q in sorted(int(q["index"]) for q in manifest["qubits"]):
        for l in range(int(manifest["L"])):
            f0 = 1.0 - counts[(CircuitKind.SPAM0.value, q, l)] / s
            f1 = counts[(CircuitKind.SPAM1.value, q, l)] / s
            p1 = counts[(CircuitKind.C.value, q, l)] / s
            d = estimator.hellinger_single(np.array([1.0 - p1, p1]))
            scatter_rows.append([q, l, g17(f0 - f1), g17(d)])
    _write_csv(out / "fig_scatter.csv", ["qubit", "experiment", "eps", "hellinger"], scatter_rows)

    report = bounds.lemma_a1_check(*bounds.default_lemma_grids())
    bounds.write_lemma_report(report, out / "lemma_report.json")

    _say(args, f"report bundle -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and entry point


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the config seed")
    parser.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")
    parser.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="suppress progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reprobound",
        description="Simulate, characterize, and bound the reproducibility of noisy single-qubit test circuits.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="output file or directory")
    parser.add_argument("--quiet", action="store_true", default=False, help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a synthetic device config into a run directory")
    p.add_argument("config", help="device config JSON")
    p.add_argument("--threads", type=int, default=None, help="worker threads (capped by REPRO_BOUND_THREADS)")
    p.add_argument("--drift", type=float, default=None, metavar="SIGMA",
                   help="exploratory per-experiment Gaussian parameter drift")
    _add_shared(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("characterize", help="estimate noise parameters from a run directory")
    p.add_argument("run_dir")
    _add_shared(p)
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("verdict", help="apply the reproducibility bound per qubit")
    p.add_argument("source", help="characterization.csv or normalized calibration JSON")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--delta", type=float, default=None, help="tolerance on the Hellinger distance")
    group.add_argument("--delta-from-observed", action="store_true",
                       help="use each qubit's observed mean distance as its tolerance")
    p.add_argument("--n", type=int, default=1, help="register size for the bound (default 1)")
    p.add_argument("--theta", type=float, default=None,
                   help="gate angle override (radians) for inputs without one")
    _add_shared(p)
    p.set_defaults(func=cmd_verdict)

    p = sub.add_parser("import-calibration", help="normalize an external calibration snapshot")
    p.add_argument("snapshot", help="calibration snapshot JSON")
    _add_shared(p)
    p.set_defaults(func=cmd_import_calibration)

    p = sub.add_parser("plan-samples", help="shots needed to estimate an outcome probability")
    p.add_argument("--p", type=float, required=True, help="target outcome probability")
    p.add_argument("--precision", type=float, required=True, help="relative precision")
    p.add_argument("--confidence", type=float, required=True, help="confidence level, e.g. 0.95")
    _add_shared(p)
    p.set_defaults(func=cmd_plan_samples)

    p = sub.add_parser("report", help="emit plot-ready CSVs and the equivalence report")
    p.add_argument("run_dir")
    _add_shared(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OutOfRegimeError as exc:
        _fail(f"{exc} (largest valid tolerance: {g17(exc.delta_star)})")
        return EXIT_REGIME
    except IncompleteArchiveError as exc:
        _fail(str(exc))
        for name in exc.missing[:20]:
            print(f"  missing: {name}", file=sys.stderr)
        if len(exc.missing) > 20:
            print(f"  ... and {len(exc.missing) - 20} more", file=sys.stderr)
        return EXIT_INCOMPLETE
    except OSError as exc:
        _fail(str(exc))
        return EXIT_IO
    except ReproBoundError as exc:
        _fail(str(exc))
        return EXIT_INPUT


def _fail(message: str) -> None:
    print(f"reprobound: error: {message}", file=sys.stderr)


def entrypoint() -> None:
    sys.exit(main())
