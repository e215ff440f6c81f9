"""Per-iteration contraction bounds, flop-count predictors, and bound certification.

The deterministic aggregate methods admit a per-step bound on the squared
error ratio of the form

    1 - relax * (selected energy / total energy) * sigma_min(A)^2 / sigma_max(subset)^2

which is strictly below 1; ``relax`` mixes the relaxation parameter with the
energy not yet annihilated (indices of exactly-zero loss are excluded). The
randomized single-index methods satisfy the analogous bound only in
expectation with a global, step-independent factor, so those are certified
statistically over repeated seeded runs. All spectral quantities are computed
directly from the matrix (or submatrix), which restricts certification to
desk-scale instances.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import SizeGuardError, UsageError
from .linalg import DenseMatrix, sigma_extremes, singular_values
from .selection import LossProfile
from .state import SolveReport

# Certification requires full-matrix and per-step submatrix spectra; refuse
# instances where either dimension exceeds this.
CERTIFY_DIM_LIMIT = 512

# Absorbs floating-point zero-set detection and SVD error in bound checks.
BOUND_SLACK = 1e-8


@dataclass
class BoundCertificate:
    """One iteration's theoretical contraction factor versus the measured ratio."""

    k: int
    factor_theoretical: float
    ratio_measured: float
    satisfied: bool
    components: dict


@dataclass
class AggregateCertificate:
    """Statistical certificate for a randomized method over repeated runs."""

    method: str
    theta: float
    factor: float
    mean_contraction: float
    std_error: float
    runs: int
    satisfied: bool


def _check_certify_size(a: DenseMatrix) -> None:
    if max(a.m, a.n) > CERTIFY_DIM_LIMIT:
        raise SizeGuardError(
            f"certification is limited to instances with both dimensions <= "
            f"{CERTIFY_DIM_LIMIT}; got {a.m}x{a.n}"
        )


def _clamp_factor(factor: float) -> float:
    # The bound is provably in [0, 1); tiny negatives are rounding artifacts.
    if -1e-9 < factor < 0.0:
        return 0.0
    return factor


def _relaxation(theta: float, frob_sq: float, active_energy: float) -> float:
    if active_energy <= 0.0:
        raise UsageError("all energy sits in the zero-loss set; nothing to bound")
    return theta * frob_sq / active_energy + (1.0 - theta)


def rgdr_factor(
    a: DenseMatrix,
    indices: np.ndarray,
    profile: LossProfile,
    theta1: float,
    sigma_min: float | None = None,
) -> float:
    """Per-step contraction bound for the aggregate row update on ``indices``."""
    if profile.kind != "row":
        raise UsageError("rgdr_factor expects a row loss profile")
    indices = np.asarray(indices, dtype=int)
    zero_mass = float(a.row_sqnorms[profile.zero_set].sum())
    relax = _relaxation(theta1, a.frob_sq, a.frob_sq - zero_mass)
    energy_fraction = float(a.row_sqnorms[indices].sum()) / a.frob_sq
    if sigma_min is None:
        sigma_min = sigma_extremes(a)[1]
    sigma_max_sub = float(singular_values(a.entries[indices])[0])
    return _clamp_factor(1.0 - relax * energy_fraction * sigma_min**2 / sigma_max_sub**2)


def rgdc_factor(
    a: DenseMatrix,
    indices: np.ndarray,
    profile: LossProfile,
    theta2: float,
    sigma_min: float | None = None,
) -> float:
    """Per-step contraction bound for the aggregate column update on ``indices``."""
    if profile.kind != "column":
        raise UsageError("rgdc_factor expects a column loss profile")
    indices = np.asarray(indices, dtype=int)
    zero_mass = float(a.col_sqnorms[profile.zero_set].sum())
    relax = _relaxation(theta2, a.frob_sq, a.frob_sq - zero_mass)
    energy_fraction = float(a.col_sqnorms[indices].sum()) / a.frob_sq
    if sigma_min is None:
        sigma_min = sigma_extremes(a)[1]
    sigma_max_sub = float(singular_values(a.entries[:, indices])[0])
    return _clamp_factor(1.0 - relax * energy_fraction * sigma_min**2 / sigma_max_sub**2)


def rgrk_factor(a: DenseMatrix, theta1: float, sigma_min: float | None = None) -> float:
    """Global expected contraction factor for the randomized row method."""
    if not 0.0 <= theta1 <= 1.0:
        raise UsageError(f"theta must lie in [0, 1], got {theta1}")
    active = a.frob_sq - float(a.row_sqnorms.min())
    if active <= 0.0:
        raise UsageError("single-row matrix admits no relaxed expected factor")
    relax = theta1 * a.frob_sq / active + (1.0 - theta1)
    if sigma_min is None:
        sigma_min = sigma_extremes(a)[1]
    return _clamp_factor(1.0 - relax * sigma_min**2 / a.frob_sq)


def rgrcd_factor(a: DenseMatrix, theta2: float, sigma_min: float | None = None) -> float:
    """Global expected contraction factor for the randomized coordinate method."""
    if not 0.0 <= theta2 <= 1.0:
        raise UsageError(f"theta must lie in [0, 1], got {theta2}")
    active = a.frob_sq - float(a.col_sqnorms.min())
    if active <= 0.0:
        raise UsageError("single-column matrix admits no relaxed expected factor")
    relax = theta2 * a.frob_sq / active + (1.0 - theta2)
    if sigma_min is None:
        sigma_min = sigma_extremes(a)[1]
    return _clamp_factor(1.0 - relax * sigma_min**2 / a.frob_sq)


def flops_rgdr(m: int, n: int, set_size: int) -> int:
    """Flops for one aggregate row iteration: update cost plus selection cost."""
    if m < 1 or n < 1 or set_size < 1:
        raise UsageError("flop arguments must be positive")
    update = (2 * set_size + 1) * (m + n) + (set_size * (3 * set_size + 7)) // 2
    selection = 4 * m + 2
    return update + selection


def flops_rgdc(n: int, set_size: int) -> int:
    """Flops for one aggregate column iteration: update cost plus selection cost."""
    if n < 1 or set_size < 1:
        raise UsageError("flop arguments must be positive")
    update = (2 * set_size + 1) * n + (set_size * (3 * set_size + 11)) // 2
    selection = 4 * n + 2
    return update + selection


def certify_run(
    report: SolveReport,
    a: DenseMatrix,
    theta: float | None = None,
    sigma_min: float | None = None,
    slack: float = BOUND_SLACK,
) -> list[BoundCertificate]:
    """Check every recorded iteration of a deterministic aggregate run against its bound."""
    if report.method not in ("rgdr", "rgdc"):
        raise UsageError(
            f"per-step certificates exist only for rgdr and rgdc, not {report.method!r}"
        )
    if report.step_records is None:
        raise UsageError("missing trace: rerun the solve with record_steps=True")
    _check_certify_size(a)
    if theta is None:
        theta = report.params.get("theta")
    if theta is None:
        raise UsageError("no relaxation parameter available for certification")
    if sigma_min is None:
        sigma_min = sigma_extremes(a)[1]

    row_kind = report.method == "rgdr"
    sqnorms = a.row_sqnorms if row_kind else a.col_sqnorms
    certificates = []
    for rec in report.step_records:
        active_energy = a.frob_sq - rec.zero_mass
        relax = _relaxation(theta, a.frob_sq, active_energy)
        energy_fraction = float(sqnorms[rec.indices].sum()) / a.frob_sq
        sub = a.entries[rec.indices] if row_kind else a.entries[:, rec.indices]
        sigma_max_sub = float(singular_values(sub)[0])
        factor = _clamp_factor(
            1.0 - relax * energy_fraction * sigma_min**2 / sigma_max_sub**2
        )
        ratio = rec.err_sq_after / rec.err_sq_before if rec.err_sq_before > 0.0 else 0.0
        certificates.append(BoundCertificate(
            k=rec.k,
            factor_theoretical=factor,
            ratio_measured=ratio,
            satisfied=bool(ratio <= factor + slack),
            components={
                "relaxation_factor": relax,
                "active_energy": active_energy,
                "zero_set_mass": rec.zero_mass,
                "sigma_min": sigma_min,
                "sigma_max_subset": sigma_max_sub,
                "set_energy_fraction": energy_fraction,
            },
        ))
    return certificates


def certify_randomized(
    reports: list[SolveReport],
    a: DenseMatrix,
    theta: float | None = None,
    sigma_min: float | None = None,
) -> AggregateCertificate:
    """Check repeated randomized runs against the expected contraction factor.

    Each run contributes its geometric-mean per-step squared-error ratio; the
    sample mean must not exceed the expected factor by more than three
    standard errors. The bounds hold in expectation only, so at least two runs
    (ideally 30) are required.
    """
    if not reports:
        raise UsageError("no reports to certify")
    method = reports[0].method
    if method not in ("rgrk", "rgrcd"):
        raise UsageError(
            f"statistical certificates exist only for rgrk and rgrcd, not {method!r}"
        )
    if any(rep.method != method for rep in reports):
        raise UsageError("all reports must come from the same method")
    if len(reports) < 2:
        raise UsageError("statistical certification needs at least two runs")
    _check_certify_size(a)
    if theta is None:
        theta = reports[0].params.get("theta")
    factor = (
        rgrk_factor(a, theta, sigma_min)
        if method == "rgrk"
        else rgrcd_factor(a, theta, sigma_min)
    )

    contractions = []
    for rep in reports:
        if rep.step_records is None:
            raise UsageError("missing trace: rerun the solves with record_steps=True")
        if not rep.step_records:
            continue
        first = rep.step_records[0]
        last = rep.step_records[-1]
        if first.err_sq_before <= 0.0:
            continue
        overall = last.err_sq_after / first.err_sq_before
        contractions.append(overall ** (1.0 / len(rep.step_records)))
    if len(contractions) < 2:
        raise UsageError("not enough non-trivial runs for statistical certification")
    sample = np.array(contractions)
    mean = float(sample.mean())
    std_error = float(sample.std(ddof=1) / np.sqrt(sample.size))
    return AggregateCertificate(
        method=method,
        theta=float(theta),
        factor=factor,
        mean_contraction=mean,
        std_error=std_error,
        runs=int(sample.size),
        satisfied=bool(mean <= factor + 3.0 * std_error),
    )


_CSV_COMPONENTS = (
    "relaxation_factor",
    "active_energy",
    "zero_set_mass",
    "sigma_min",
    "sigma_max_subset",
    "set_energy_fraction",
)


def certificates_to_csv(certificates: list[BoundCertificate], path) -> None:
    """Write per-iteration certificates as CSV: k, factor, ratio, satisfied, components."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "factor", "ratio", "satisfied", *_CSV_COMPONENTS])
        for cert in certificates:
            writer.writerow([
                cert.k,
                repr(cert.factor_theoretical),
                repr(cert.ratio_measured),
                int(cert.satisfied),
                *(repr(float(cert.components[name])) for name in _CSV_COMPONENTS),
            ])
