"""Deterministic Monte Carlo engine for the characterization protocol.

Emulates the three circuit families the estimators consume: SPAM(0) and
SPAM(1) readout-calibration circuits and the uniform-superposition test
circuit C, run as L experiments of S shots per register element. Shots are
i.i.d. Bernoulli draws from the closed-form outcome probabilities; no
temporal drift is injected unless a drift hook is supplied.

Reproducibility of this engine is non-negotiable, so every block gets its
own counter-based Philox stream keyed purely by
(master seed, circuit kind, qubit, experiment). Re-running a plan yields
bit-identical archives regardless of thread count or execution order.

A run archive persists as a directory::

    manifest.json                       plan, seed, version, UTC timestamps
    blocks/<kind>_<qubit>_<experiment>.bin
    counts.csv                          kind, qubit, experiment, ones, shots

Block files carry an 8-byte little-endian bit count followed by the shots
packed 8 per byte, least-significant bit first.
"""

from __future__ import annotations

import csv
import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from ._version import __version__
from .errors import IncompleteArchiveError, InvalidParameterError
from .noise_model import QubitNoiseParams, gamma_of

MANIFEST_SCHEMA = "run-manifest/1"

_HEADER = struct.Struct("<Q")


class CircuitKind(str, Enum):
    """The three circuit families of the characterization protocol."""

    SPAM0 = "spam0"
    SPAM1 = "spam1"
    C = "c"


# Fixed stream identifiers; part of the on-disk reproducibility contract.
_KIND_STREAM = {CircuitKind.SPAM0: 0, CircuitKind.SPAM1: 1, CircuitKind.C: 2}

DriftHook = Callable[[QubitNoiseParams, int], QubitNoiseParams]


@dataclass(frozen=True)
class PlanQubit:
    """One register element and its ground-truth noise parameters."""

    index: int
    params: QubitNoiseParams

    def __post_init__(self):
        if int(self.index) < 0:
            raise InvalidParameterError(f"qubit index must be non-negative, got {self.index}")
        object.__setattr__(self, "index", int(self.index))


@dataclass(frozen=True)
class ExperimentPlan:
    """L experiments of S shots for each circuit kind and register element."""

    L: int
    S: int
    qubits: tuple[PlanQubit, ...]
    seed: int

    def __post_init__(self):
        if int(self.L) < 2:
            raise InvalidParameterError(f"L must be >= 2 for population statistics, got {self.L}")
        if int(self.S) < 1:
            raise InvalidParameterError(f"S must be >= 1, got {self.S}")
        qubits = tuple(self.qubits)
        indices = [q.index for q in qubits]
        if not qubits:
            raise InvalidParameterError("plan needs at least one qubit")
        if len(set(indices)) != len(indices):
            raise InvalidParameterError(f"duplicate qubit indices in plan: {indices}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "S", int(self.S))
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def qubit_indices(self) -> tuple[int, ...]:
        return tuple(q.index for q in self.qubits)

    def params_for(self, qubit: int) -> QubitNoiseParams:
        for q in self.qubits:
            if q.index == qubit:
                return q.params
        raise KeyError(f"qubit {qubit} not in plan")


@dataclass(frozen=True)
class ShotBlock:
    """S binary outcomes for one (circuit kind, qubit, experiment) triple."""

    circuit_kind: CircuitKind
    qubit: int
    experiment: int
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or bits.size < 1:
            raise InvalidParameterError("bits must be a non-empty 1-D array")
        if bits.max(initial=0) > 1:
            raise InvalidParameterError("bits must be 0/1 valued")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "circuit_kind", CircuitKind(self.circuit_kind))

    @property
    def ones(self) -> int:
        return int(self.bits.sum())


BlockKey = tuple[CircuitKind, int, int]


@dataclass(frozen=True)
class RunArchive:
    """All shot blocks of one executed plan, plus a provenance manifest.

    Holds exactly 3 * L * len(qubits) blocks. Block payloads are fully
    determined by (plan, seed); the manifest timestamps are provenance only
    and excluded from the determinism contract.
    """

    plan: ExperimentPlan
    blocks: dict[BlockKey, ShotBlock]
    manifest: dict = field(compare=False)

    def __post_init__(self):
        expected = set(iter_block_keys(self.plan))
        got = set(self.blocks)
        if got != expected:
            raise IncompleteArchiveError(
                f"archive holds {len(got)} blocks, expected {len(expected)}",
                missing=tuple(sorted(block_relpath(*k) for k in expected - got)),
            )

    def block(self, kind: CircuitKind, qubit: int, experiment: int) -> ShotBlock:
        return self.blocks[(CircuitKind(kind), qubit, experiment)]


def iter_block_keys(plan: ExperimentPlan) -> Iterator[BlockKey]:
    """Deterministic (kind, qubit, experiment) order used everywhere."""
    for kind in CircuitKind:
        for q in plan.qubit_indices:
            for l in range(plan.L):
                yield (kind, q, l)


def block_stream(seed: int, kind: CircuitKind, qubit: int, experiment: int) -> np.random.Generator:
    """Counter-based RNG stream for one block.

    The stream is a Philox generator keyed by (seed, kind, qubit,
    experiment) only, so parallel or reordered execution cannot change any
    block's outcome.
    """
    key = (_KIND_STREAM[CircuitKind(kind)], int(qubit), int(experiment))
    seq = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))


def _bernoulli_block(
    kind: CircuitKind,
    p_one: float,
    s: int,
    rng: np.random.Generator,
    qubit: int,
    experiment: int,
) -> ShotBlock:
    bits = (rng.random(s) < p_one).astype(np.uint8)
    return ShotBlock(kind, qubit, experiment, bits)


def run_spam0(
    params: QubitNoiseParams,
    s: int,
    rng: np.random.Generator,
    *,
    qubit: int = 0,
    experiment: int = 0,
) -> ShotBlock:
    """SPAM(0): prepare |0>, measure. Pr(bit=1) = 1 - f0."""
    return _bernoulli_block(CircuitKind.SPAM0, 1.0 - params.f0, s, rng, qubit, experiment)


def run_spam1(
    params: QubitNoiseParams,
    s: int,
    rng: np.random.Generator,
    *,
    qubit: int = 0,
    experiment: int = 0,
) -> ShotBlock:
    """SPAM(1): prepare |1>, measure. Pr(bit=1) = f1."""
    return _bernoulli_block(CircuitKind.SPAM1, params.f1, s, rng, qubit, experiment)


def run_circuit_c(
    params: QubitNoiseParams,
    s: int,
    rng: np.random.Generator,
    *,
    qubit: int = 0,
    experiment: int = 0,
) -> ShotBlock:
    """Test circuit C: noisy Hadamard then noisy readout.

    Pr(bit=0) = (1 + gamma)/2 with gamma the composite output bias.
    """
    p_one = (1.0 - gamma_of(params)) / 2.0
    return _bernoulli_block(CircuitKind.C, p_one, s, rng, qubit, experiment)


_RUNNERS = {
    CircuitKind.SPAM0: run_spam0,
    CircuitKind.SPAM1: run_spam1,
    CircuitKind.C: run_circuit_c,
}


def run_plan(
    plan: ExperimentPlan,
    *,
    threads: int = 1,
    drift: DriftHook | None = None,
) -> RunArchive:
    """Execute every block of a plan and return the in-memory archive.

    Args:
        plan: what to run.
        threads: worker threads for block generation; any value yields the
            same archive because streams are keyed per block.
        drift: optional per-experiment perturbation ``(params, l) -> params``
            applied to all three circuit kinds of experiment ``l``. Off by
            default; the baseline protocol assumes stationary noise.
    """
    started = _utc_now()

    def make(key: BlockKey) -> tuple[BlockKey, ShotBlock]:
        kind, q, l = key
        params = plan.params_for(q)
        if drift is not None:
            params = drift(params, l)
        rng = block_stream(plan.seed, kind, q, l)
        return key, _RUNNERS[kind](params, plan.S, rng, qubit=q, experiment=l)

    keys = list(iter_block_keys(plan))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = dict(pool.map(make, keys))
    else:
        blocks = dict(map(make, keys))

    manifest = {
        "schema": MANIFEST_SCHEMA,
        "toolkit_version": __version__,
        "status": "complete",
        "seed": plan.seed,
        "L": plan.L,
        "S": plan.S,
        "qubits": [
            {
                "index": q.index,
                "f0": q.params.f0,
                "f1": q.params.f1,
                "theta_rad": q.params.theta,
                "theta_bound": q.params.theta_bound,
            }
            for q in plan.qubits
        ],
        "drifted": drift is not None,
        "started_at": started,
        "finished_at": _utc_now(),
    }
    return RunArchive(plan=plan, blocks=blocks, manifest=manifest)


def block_relpath(kind: CircuitKind, qubit: int, experiment: int) -> str:
    """Archive-relative path of one block file."""
    return f"blocks/{CircuitKind(kind).value}_{qubit}_{experiment}.bin"


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def save_archive(archive: RunArchive, out_dir: str | Path) -> Path:
    """Persist an archive as a run directory; returns the directory path.

    The manifest is written twice: first with status "partial" so that a
    storage failure mid-run leaves an explicit marker, then rewritten with
    status "complete" once every block and the counts cache are on disk.
    """
    out = Path(out_dir)
    (out / "blocks").mkdir(parents=True, exist_ok=True)

    manifest = dict(archive.manifest)
    manifest["status"] = "partial"
    _write_manifest(out, manifest)

    for key in iter_block_keys(archive.plan):
        block = archive.blocks[key]
        payload = _HEADER.pack(block.bits.size) + np.packbits(
            block.bits, bitorder="little"
        ).tobytes()
        (out / block_relpath(*key)).write_bytes(payload)

    with open(out / "counts.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["kind", "qubit", "experiment", "ones", "shots"])
        for key in iter_block_keys(archive.plan):
            block = archive.blocks[key]
            writer.writerow([key[0].value, key[1], key[2], block.ones, block.bits.size])

    manifest["status"] = "complete"
    manifest["finished_at"] = _utc_now()
    _write_manifest(out, manifest)
    return out


def _write_manifest(out: Path, manifest: dict) -> None:
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def plan_from_manifest(manifest: dict) -> ExperimentPlan:
    qubits = tuple(
        PlanQubit(
            int(q["index"]),
            QubitNoiseParams(
                f0=q["f0"],
                f1=q["f1"],
                theta=q["theta_rad"],
                theta_bound=q.get("theta_bound"),
            ),
        )
        for q in manifest["qubits"]
    )
    return ExperimentPlan(L=manifest["L"], S=manifest["S"], qubits=qubits, seed=manifest["seed"])


def load_archive(run_dir: str | Path) -> RunArchive:
    """Load a run directory written by :func:`save_archive`.

    Raises IncompleteArchiveError, listing the offending files, if the
    manifest is absent or not finalized, if any block file is missing or
    truncated, or if the counts cache is gone.
    """
    run = Path(run_dir)
    manifest_path = run / "manifest.json"
    if not manifest_path.is_file():
        raise IncompleteArchiveError(f"{run}: no manifest.json", missing=("manifest.json",))
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise IncompleteArchiveError(
            f"{run}: unsupported manifest schema {manifest.get('schema')!r}",
            missing=("manifest.json",),
        )
    if manifest.get("status") != "complete":
        raise IncompleteArchiveError(
            f"{run}: manifest status is {manifest.get('status')!r}, run was not finalized",
            missing=("manifest.json",),
        )
    plan = plan_from_manifest(manifest)

    expected_size = _HEADER.size + (plan.S + 7) // 8
    blocks: dict[BlockKey, ShotBlock] = {}
    missing: list[str] = []
    for key in iter_block_keys(plan):
        rel = block_relpath(*key)
        path = run / rel
        if not path.is_file() or path.stat().st_size != expected_size:
            missing.append(rel)
            continue
        raw = path.read_bytes()
        (nbits,) = _HEADER.unpack_from(raw)
        if nbits != plan.S:
            missing.append(rel)
            continue
        bits = np.unpackbits(
            np.frombuffer(raw, dtype=np.uint8, offset=_HEADER.size),
            count=plan.S,
            bitorder="little",
        )
        blocks[key] = ShotBlock(key[0], key[1], key[2], bits)
    if not (run / "counts.csv").is_file():
        missing.append("counts.csv")
    if missing:
        raise IncompleteArchiveError(
            f"{run}: {len(missing)} missing or corrupt file(s)", missing=tuple(missing)
        )
    return RunArchive(plan=plan, blocks=blocks, manifest=manifest)
