"""Per-experiment estimators and their aggregation into device estimates.

Each experiment l of S shots yields point estimates: readout fidelities from
the SPAM circuits, the zero-outcome probability from the test circuit, and
the per-experiment Hellinger distance to the ideal uniform output. Averaging
over the L experiments gives population means with error bars (standard
deviation of the population mean, unbiased L-1 form), the composite bias
estimate gamma_hat = 2*mean(Pr(0)) - 1, and finally the gate angle estimate
by inverting gamma = eps - 2*sin(2*theta)*(f - 1/2).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._fmt import g17
from .errors import (
    BlockKindError,
    ConfigError,
    InsufficientDataError,
    ModelMismatchError,
    ModelMismatchWarning,
    SingularFidelityError,
)
from .sampler import CircuitKind, RunArchive, ShotBlock

# Policy for the arcsin argument when inverting the gate angle: silent for
# float-level overshoot, a warning when the data mildly disagrees with the
# model, a hard error when it clearly cannot be explained by it.
CLAMP_SILENT = 1e-9
CLAMP_ERROR = 0.01

_F_SINGULAR = 1e-6


def _require_kind(block: ShotBlock, kind: CircuitKind) -> ShotBlock:
    if block.circuit_kind is not kind:
        raise BlockKindError(f"expected a {kind.value} block, got {block.circuit_kind.value}")
    return block


def estimate_f1(block: ShotBlock) -> float:
    """Readout fidelity of |1> from one SPAM(1) experiment: ones/S."""
    _require_kind(block, CircuitKind.SPAM1)
    return block.ones / block.bits.size


def estimate_f0(block: ShotBlock) -> float:
    """Readout fidelity of |0> from one SPAM(0) experiment: 1 - ones/S."""
    _require_kind(block, CircuitKind.SPAM0)
    return 1.0 - block.ones / block.bits.size


def estimate_pr(block: ShotBlock) -> np.ndarray:
    """Observed (Pr(0), Pr(1)) of one test-circuit experiment."""
    _require_kind(block, CircuitKind.C)
    p1 = block.ones / block.bits.size
    return np.array([1.0 - p1, p1], dtype=np.float64)


def hellinger_single(pr) -> float:
    """Hellinger distance between a two-outcome distribution and (1/2, 1/2).

    d = sqrt(1 - sqrt(Pr(0)/2) - sqrt(Pr(1)/2)); agrees with the general
    n-qubit distance routine on every two-outcome input.
    """
    pr = np.asarray(pr, dtype=np.float64)
    if pr.shape != (2,):
        raise ValueError(f"expected a two-outcome distribution, got shape {pr.shape}")
    inner = 1.0 - math.sqrt(pr[0] / 2.0) - math.sqrt(pr[1] / 2.0)
    return math.sqrt(max(0.0, inner))


def population_stats(values) -> tuple[float, float]:
    """Mean and standard deviation of the population mean of a sample.

    sigma^2(mean) = sum((x_l - mean)^2) / (L * (L - 1)), the unbiased form.
    """
    x = np.asarray(values, dtype=np.float64)
    n = x.size
    if n < 2:
        raise InsufficientDataError(f"population statistics need >= 2 values, got {n}")
    if x.min() == x.max():
        # Constant samples: sigma is exactly zero, not mean-rounding residue.
        return float(x[0]), 0.0
    mean = float(x.mean())
    var_of_mean = float(np.sum((x - mean) ** 2)) / (n * (n - 1))
    return mean, math.sqrt(var_of_mean)


def invert_theta(gamma_hat: float, eps_hat: float, f_hat: float) -> float:
    """Gate angle estimate theta = arcsin((eps - gamma) / (2f - 1)) / 2.

    Raises SingularFidelityError when f is too close to 1/2 (the angle drops
    out of gamma and is unidentifiable). An arcsin argument outside [-1, 1]
    means the data disagrees with the noise model: overshoot up to 1e-9 is
    clamped silently, up to 0.01 clamped with a ModelMismatchWarning, beyond
    that a ModelMismatchError is raised.
    """
    denom = 2.0 * f_hat - 1.0
    if abs(denom) < _F_SINGULAR:
        raise SingularFidelityError(
            f"average fidelity {f_hat!r} too close to 1/2, gate angle unidentifiable"
        )
    x = (eps_hat - gamma_hat) / denom
    overshoot = abs(x) - 1.0
    if overshoot > CLAMP_ERROR:
        raise ModelMismatchError(
            f"arcsin argument {x!r} exceeds 1 by {overshoot:.3g}; "
            "the single-qubit noise model does not explain this data"
        )
    if overshoot > CLAMP_SILENT:
        warnings.warn(
            f"arcsin argument {x!r} clamped to [-1, 1] (overshoot {overshoot:.3g})",
            ModelMismatchWarning,
            stacklevel=2,
        )
    if overshoot > 0.0:
        x = math.copysign(1.0, x)
    return 0.5 * math.asin(x)


@dataclass(frozen=True)
class CharacterizationEstimate:
    """Aggregated noise estimates for one register element.

    ``theta_hat`` is NaN (with an explanatory warning token) when the angle
    inversion failed for this qubit; all other fields are still valid.
    """

    qubit: int
    f0_mean: float
    f1_mean: float
    eps_mean: float
    eps_sigma: float
    f_mean: float
    gamma_hat: float
    theta_hat: float
    d_mean: float
    d_sigma: float
    L: int
    S: int
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if abs(self.eps_mean - (self.f0_mean - self.f1_mean)) > 1e-12:
            raise ValueError("eps_mean must equal f0_mean - f1_mean")
        if abs(self.f_mean - (self.f0_mean + self.f1_mean) / 2.0) > 1e-12:
            raise ValueError("f_mean must equal (f0_mean + f1_mean)/2")
        if self.eps_sigma < 0.0 or self.d_sigma < 0.0:
            raise ValueError("sigmas must be non-negative")
        if not 0.0 <= self.d_mean <= 1.0:
            raise ValueError(f"d_mean must be in [0, 1], got {self.d_mean!r}")

    @property
    def theta_hat_deg(self) -> float:
        return math.degrees(self.theta_hat)


def characterize_qubit(
    archive: RunArchive, qubit: int, *, angle_errors: str = "raise"
) -> CharacterizationEstimate:
    """Run the full estimator stack for one register element.

    With ``angle_errors="raise"`` (default) a failed angle inversion
    propagates; with ``"record"`` the estimate is returned with
    theta_hat = NaN and the failure text as a warning token.
    """
    if angle_errors not in ("raise", "record"):
        raise ValueError(f"angle_errors must be 'raise' or 'record', got {angle_errors!r}")
    plan = archive.plan
    f0_l = np.array(
        [estimate_f0(archive.block(CircuitKind.SPAM0, qubit, l)) for l in range(plan.L)]
    )
    f1_l = np.array(
        [estimate_f1(archive.block(CircuitKind.SPAM1, qubit, l)) for l in range(plan.L)]
    )
    pr_l = [estimate_pr(archive.block(CircuitKind.C, qubit, l)) for l in range(plan.L)]

    _, eps_sigma = population_stats(f0_l - f1_l)
    d_mean, d_sigma = population_stats([hellinger_single(pr) for pr in pr_l])
    f0_mean = float(f0_l.mean())
    f1_mean = float(f1_l.mean())
    f_mean = (f0_mean + f1_mean) / 2.0
    eps_mean = f0_mean - f1_mean
    # Per-experiment estimates first, then the average across experiments.
    gamma_hat = 2.0 * float(np.mean([pr[0] for pr in pr_l])) - 1.0

    notes: list[str] = []
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ModelMismatchWarning)
            theta_hat = invert_theta(gamma_hat, eps_mean, f_mean)
        notes.extend(
            str(w.message) for w in caught if issubclass(w.category, ModelMismatchWarning)
        )
    except (SingularFidelityError, ModelMismatchError) as exc:
        if angle_errors == "raise":
            raise
        theta_hat = math.nan
        notes.append(f"{type(exc).__name__}: {exc}")

    return CharacterizationEstimate(
        qubit=qubit,
        f0_mean=f0_mean,
        f1_mean=f1_mean,
        eps_mean=eps_mean,
        eps_sigma=eps_sigma,
        f_mean=f_mean,
        gamma_hat=gamma_hat,
        theta_hat=theta_hat,
        d_mean=d_mean,
        d_sigma=d_sigma,
        L=plan.L,
        S=plan.S,
        warnings=tuple(notes),
    )


def characterize(archive: RunArchive) -> list[CharacterizationEstimate]:
    """Characterize every register element of an archive.

    A qubit whose angle inversion fails does not abort the others: its
    estimate carries theta_hat = NaN and the error text as a warning token.
    """
    return [
        characterize_qubit(archive, q, angle_errors="record")
        for q in archive.plan.qubit_indices
    ]


CSV_COLUMNS = [
    "qubit",
    "f0_mean",
    "f1_mean",
    "eps_mean",
    "eps_sigma",
    "f_mean",
    "gamma_hat",
    "theta_hat_rad",
    "theta_hat_deg",
    "d_mean",
    "d_sigma",
    "L",
    "S",
    "warnings",
]


def write_characterization_csv(estimates, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for e in estimates:
            writer.writerow(
                [
                    e.qubit,
                    g17(e.f0_mean),
                    g17(e.f1_mean),
                    g17(e.eps_mean),
                    g17(e.eps_sigma),
                    g17(e.f_mean),
                    g17(e.gamma_hat),
                    g17(e.theta_hat),
                    g17(e.theta_hat_deg),
                    g17(e.d_mean),
                    g17(e.d_sigma),
                    e.L,
                    e.S,
                    "|".join(e.warnings),
                ]
            )


def read_characterization_csv(path: str | Path) -> list[CharacterizationEstimate]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected characterization columns {reader.fieldnames}")
        out = []
        for row in reader:
            out.append(
                CharacterizationEstimate(
                    qubit=int(row["qubit"]),
                    f0_mean=float(row["f0_mean"]),
                    f1_mean=float(row["f1_mean"]),
                    eps_mean=float(row["eps_mean"]),
                    eps_sigma=float(row["eps_sigma"]),
                    f_mean=float(row["f_mean"]),
                    gamma_hat=float(row["gamma_hat"]),
                    theta_hat=float(row["theta_hat_rad"]),
                    d_mean=float(row["d_mean"]),
                    d_sigma=float(row["d_sigma"]),
                    L=int(row["L"]),
                    S=int(row["S"]),
                    warnings=tuple(t for t in row["warnings"].split("|") if t),
                )
            )
    return out
