"""Brute-force oracles, independent of the solver's iteration path.

* ``grid_residual_minimizer`` scans a product grid for the smallest residual.
* ``condition_brute_force`` checks a contraction class on every comparable
  ordered pair of grid points.
* ``audit_trace`` recomputes a solver trace from its iterates and re-checks
  the invariants the certificates rely on.

Unbounded box edges are clamped at ``GridSpec.clamp_radius``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .contraction import (
    DEFAULT_RTOL,
    ContractionClass,
    PairViolation,
    ViolationReport,
)
from .coupled_maps import CoupledMapPair
from .errors import ConfigError, InputError
from .ordered_metric import DEFAULT_SAMPLING_RADIUS, ProductPoint
from .solver import JOINT_D1, Certificate, IterationTrace, apriori_bound

GRID_CEILING = 10**6
PAIR_SCAN_CEILING = 10**4  # grid points; the pair scan is quadratic in this


@dataclass(frozen=True)
class GridSpec:
    points_per_axis: int
    clamp_radius: float = DEFAULT_SAMPLING_RADIUS
    ceiling: int = GRID_CEILING

    def __post_init__(self):
        if int(self.points_per_axis) != self.points_per_axis or self.points_per_axis < 2:
            raise ConfigError("points_per_axis must be an integer >= 2")
        if not self.clamp_radius > 0:
            raise ConfigError("clamp_radius must be positive")

    def size(self, pair: CoupledMapPair) -> int:
        return self.points_per_axis ** (pair.X.dim + pair.Y.dim)

    def check(self, pair: CoupledMapPair, ceiling: int | None = None):
        ceiling = self.ceiling if ceiling is None else ceiling
        n = self.size(pair)
        if n > ceiling:
            raise ConfigError(
                f"grid of {self.points_per_axis}^{pair.X.dim + pair.Y.dim} = {n} points "
                f"exceeds the ceiling of {ceiling}"
            )
        return n


def grid_axes(pair: CoupledMapPair, grid: GridSpec):
    xlo, xhi = pair.X.sampling_bounds(grid.clamp_radius)
    ylo, yhi = pair.Y.sampling_bounds(grid.clamp_radius)
    lo = np.concatenate([xlo, ylo])
    hi = np.concatenate([xhi, yhi])
    return [np.linspace(a, b, grid.points_per_axis) for a, b in zip(lo, hi)]


def cell_widths(pair: CoupledMapPair, grid: GridSpec) -> np.ndarray:
    return np.array([ax[1] - ax[0] for ax in grid_axes(pair, grid)])


def grid_points(pair: CoupledMapPair, grid: GridSpec, ceiling: int | None = None):
    """All grid points in lexicographic order, split into X and Y blocks."""
    grid.check(pair, ceiling)
    axes = grid_axes(pair, grid)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.reshape(-1) for m in mesh])
    return pts[:, : pair.X.dim], pts[:, pair.X.dim:]


def grid_residual_minimizer(pair: CoupledMapPair, grid: GridSpec) -> tuple[ProductPoint, float]:
    """Grid point with the smallest residual; ties go to the lexicographically smallest point."""
    px, py = grid_points(pair, grid)
    res = (np.abs(pair.F(px, py) - px).sum(axis=1)
           + np.abs(pair.G(py, px) - py).sum(axis=1))
    best = res.min()
    tied = np.flatnonzero(res == best)
    if tied.size > 1:
        coords = np.column_stack([px[tied], py[tied]])
        tied = tied[np.lexsort(coords.T[::-1])]
    i = tied[0]
    return ProductPoint(px[i], py[i]), float(best)


def condition_brute_force(cls: ContractionClass, pair: CoupledMapPair, grid: GridSpec,
                          rtol: float = DEFAULT_RTOL, max_witnesses: int = 100,
                          ceiling: int = PAIR_SCAN_CEILING) -> ViolationReport:
    """Exact worst slack of ``cls`` over every comparable ordered pair of grid points."""
    px, py = grid_points(pair, grid, min(ceiling, grid.ceiling))
    Fp = pair.F(px, py)
    Gp = pair.G(py, px)
    n_pairs, n_viol, worst_f, worst_g, idx, vals = _kernels.grid_scan(
        cls.code, cls.kernel_constants, px, py, Fp, Gp, rtol, max_witnesses
    )
    violations = [
        PairViolation(ProductPoint(px[i], py[i]), ProductPoint(px[j], py[j]), *map(float, v))
        for (i, j), v in zip(idx.tolist(), vals)
    ]
    return ViolationReport(
        samples_checked=int(n_pairs),
        worst_slack=max(worst_f, worst_g),
        worst_slack_F=float(worst_f),
        worst_slack_G=float(worst_g),
        violations=violations,
        violation_count=int(n_viol),
        rtol=rtol,
    )


# -- trace audit -------------------------------------------------------------

STEP_SLACK = 1e-12


@dataclass(frozen=True)
class AuditFailure:
    kind: str
    index: int
    detail: str


@dataclass
class AuditReport:
    checked: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def kinds(self) -> set:
        return {f.kind for f in self.failures}

    def indices(self, kind: str) -> list:
        return [f.index for f in self.failures if f.kind == kind]


def audit_trace(pair: CoupledMapPair, trace: IterationTrace, cert: Certificate | None = None,
                check_monotone: bool = True, bound_tol: float = 1e-9) -> AuditReport:
    """Re-derive and re-check a trace.

    Checks, each reported with the offending index:

    * ``steps`` / ``residuals``: stored values equal the recomputation bit for bit;
    * ``monotone``: ``x_j <= x_{j+1}`` and ``y_{j+1} <= y_j``;
    * ``bound``: distance from iterate j to the last iterate is within
      ``apriori_bound(j) + bound_tol`` (needs ``cert``);
    * ``step_ratio``: banach, product step ``s_{j+1} <= delta * s_j + 1e-12``;
      other classes, each coordinate step shrinks by its own rate;
    * ``step_envelope``: banach, each coordinate step ``<= delta**j * D1 + 1e-12``.
    """
    xs, ys = trace.xs, trace.ys
    if xs.ndim != 2 or ys.ndim != 2 or xs.shape[1] != pair.X.dim or ys.shape[1] != pair.Y.dim:
        raise InputError("trace iterates do not match the pair's dimensions")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise InputError("trace contains non-finite iterates")
    report = AuditReport()
    fail = report.failures.append

    dxs = np.abs(xs[1:] - xs[:-1]).sum(axis=1)
    dys = np.abs(ys[1:] - ys[:-1]).sum(axis=1)
    steps = dxs + dys
    report.checked.append("steps")
    for j in np.flatnonzero(steps != trace.step_distances):
        fail(AuditFailure("steps", int(j),
                          f"stored {trace.step_distances[j]!r}, recomputed {steps[j]!r}"))

    res = np.abs(pair.F(xs, ys) - xs).sum(axis=1) + np.abs(pair.G(ys, xs) - ys).sum(axis=1)
    report.checked.append("residuals")
    for j in np.flatnonzero(res != trace.residuals):
        fail(AuditFailure("residuals", int(j),
                          f"stored {trace.residuals[j]!r}, recomputed {res[j]!r}"))

    if check_monotone:
        report.checked.append("monotone")
        up = np.all(xs[:-1] <= xs[1:], axis=1)
        down = np.all(ys[1:] <= ys[:-1], axis=1)
        for j in np.flatnonzero(~up):
            fail(AuditFailure("monotone", int(j), f"x_{j} <= x_{j + 1} fails"))
        for j in np.flatnonzero(~down):
            fail(AuditFailure("monotone", int(j), f"y_{j + 1} <= y_{j} fails"))

    if cert is None:
        return report

    report.checked.append("bound")
    to_last_x = np.abs(xs - xs[-1]).sum(axis=1)
    to_last_y = np.abs(ys - ys[-1]).sum(axis=1)
    for j in range(len(trace)):
        bx, by = apriori_bound(cert, j)
        if not (to_last_x[j] <= bx + bound_tol and to_last_y[j] <= by + bound_tol):
            fail(AuditFailure("bound", j,
                              f"distance ({to_last_x[j]:.3e}, {to_last_y[j]:.3e}) exceeds "
                              f"bound ({bx:.3e}, {by:.3e})"))

    report.checked.append("step_ratio")
    if cert.bound_form == JOINT_D1:
        d = cert.delta
        for j in np.flatnonzero(~(steps[1:] <= d * steps[:-1] + STEP_SLACK)):
            fail(AuditFailure("step_ratio", int(j) + 1,
                              f"step {steps[j + 1]:.3e} > delta * {steps[j]:.3e}"))
        report.checked.append("step_envelope")
        env = d ** np.arange(steps.size) * cert.D1 + STEP_SLACK
        for j in np.flatnonzero(~((dxs <= env) & (dys <= env))):
            fail(AuditFailure("step_envelope", int(j),
                              f"coordinate steps ({dxs[j]:.3e}, {dys[j]:.3e}) exceed {env[j]:.3e}"))
    else:
        ok = ((dxs[1:] <= cert.delta1 * dxs[:-1] + STEP_SLACK)
              & (dys[1:] <= cert.delta2 * dys[:-1] + STEP_SLACK))
        for j in np.flatnonzero(~ok):
            fail(AuditFailure("step_ratio", int(j) + 1,
                              f"coordinate steps ({dxs[j + 1]:.3e}, {dys[j + 1]:.3e}) do not "
                              f"shrink by ({cert.delta1:.3g}, {cert.delta2:.3g})"))
    return report


def step_ratios(trace: IterationTrace) -> np.ndarray:
    """Consecutive product-step ratios ``s_{j+1} / s_j`` (nan where ``s_j == 0``)."""
    s = trace.step_distances
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s[:-1] > 0, s[1:] / s[:-1], np.nan)


__all__ = [
    "GridSpec", "grid_points", "grid_residual_minimizer", "condition_brute_force",
    "audit_trace", "AuditReport", "AuditFailure", "cell_widths", "step_ratios",
    "GRID_CEILING", "PAIR_SCAN_CEILING",
]
