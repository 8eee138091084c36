"""Picard iteration for FG-coupled fixed points with a priori rate certificates.

The iteration is ``x_{j+1} = F(x_j, y_j)``, ``y_{j+1} = G(y_j, x_j)``,
updated simultaneously. Given an admissible contraction class, each class
yields per-coordinate geometric rates ``delta1`` (X) and ``delta2`` (Y):

=========== ============================ ===========================
class       delta1                       delta2
=========== ============================ ===========================
banach      max(k+l, m+n)                max(k+l, m+n)
kannan      l / (1 - k)                  m / (1 - n)
chatterjea  l / (1 - l)                  m / (1 - m)
reich       (b + c) / (1 - a)            (a + c) / (1 - b)
hybrid      (b + c) / (1 - b)            (a + c) / (1 - a)
quasi       k / (1 - k)                  l / (1 - l)
=========== ============================ ===========================

and the distance from iterate j to the limit is bounded by
``delta**j / (1 - delta) * D``, where D is the joint first displacement
``d_X(x1,x0) + d_Y(y1,y0)`` for banach and the coordinate displacement
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .contraction import (
    BanachType,
    ChatterjeaType,
    ContractionClass,
    HybridType,
    KannanType,
    QuasiType,
    ReichType,
    ViolationReport,
    verify_condition,
)
from .coupled_maps import (
    CoupledMapPair,
    MonotoneReport,
    SamplerConfig,
    check_closure,
    check_mixed_monotone,
    check_seed,
    eval_F,
    eval_G,
    residual,
    sample_box,
)
from .errors import ConfigError, DivergenceError, InputError
from .ordered_metric import (
    ProductPoint,
    comparable,
    join,
    meet,
    metric,
    product_leq,
    product_metric,
)

CONTINUOUS = "continuous"
ORDER_LIMIT = "order_limit"
HYPOTHESIS_MODES = (CONTINUOUS, ORDER_LIMIT)

JOINT_D1 = "joint-D1"
SPLIT = "split"

DIVERGENCE_CUTOFF = 1e12


@dataclass(frozen=True)
class SolveConfig:
    tol_step: float = 1e-10
    tol_residual: float = 1e-9
    max_iter: int = 10_000
    hypothesis_mode: str = CONTINUOUS

    def __post_init__(self):
        if not self.tol_step > 0 or not self.tol_residual > 0:
            raise ConfigError("tolerances must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError("max_iter must be a positive integer")
        if self.hypothesis_mode not in HYPOTHESIS_MODES:
            raise ConfigError(
                f"hypothesis_mode must be one of {HYPOTHESIS_MODES}, got {self.hypothesis_mode!r}"
            )


@dataclass
class IterationTrace:
    """Iterates ``p_0..p_n``, the n step distances between them, and n+1 residuals."""

    xs: np.ndarray
    ys: np.ndarray
    step_distances: np.ndarray
    residuals: np.ndarray

    def __post_init__(self):
        n1 = self.xs.shape[0]
        if (self.ys.shape[0] != n1 or self.residuals.shape[0] != n1
                or self.step_distances.shape[0] != n1 - 1):
            raise InputError(
                f"malformed trace: {self.xs.shape[0]} x-iterates, {self.ys.shape[0]} "
                f"y-iterates, {self.step_distances.shape[0]} steps, "
                f"{self.residuals.shape[0]} residuals"
            )

    def __len__(self):
        return self.xs.shape[0]

    @property
    def iterations(self) -> int:
        return self.xs.shape[0] - 1

    def iterate(self, j: int) -> ProductPoint:
        return ProductPoint(self.xs[j], self.ys[j])

    @property
    def iterates(self) -> list[ProductPoint]:
        return [self.iterate(j) for j in range(len(self))]

    @property
    def last(self) -> ProductPoint:
        return self.iterate(len(self) - 1)


@dataclass(frozen=True)
class Certificate:
    cls: ContractionClass
    delta1: float
    delta2: float
    D1: float
    bound_form: str
    D1_x: float = 0.0
    D1_y: float = 0.0

    @property
    def delta(self) -> float:
        return max(self.delta1, self.delta2)


@dataclass
class HypothesisReport:
    hypothesis_mode: str
    seed_ok: bool
    monotone: MonotoneReport | None = None
    condition: ViolationReport | None = None
    closure_violations: list = field(default_factory=list)
    trajectory_monotone: bool | None = None
    trajectory_violations: list = field(default_factory=list)

    @property
    def note(self) -> str:
        if self.hypothesis_mode == ORDER_LIMIT:
            return "order-limit property holds in box spaces with componentwise order"
        return "continuity of F and G assumed (not verified numerically)"

    @property
    def ok(self) -> bool:
        return (
            self.seed_ok
            and (self.monotone is None or self.monotone.ok)
            and (self.condition is None or self.condition.ok)
            and not self.closure_violations
            and self.trajectory_monotone is not False
        )


@dataclass
class FixedPointResult:
    point: ProductPoint
    trace: IterationTrace
    certificate: Certificate | None
    converged: bool
    hypothesis_report: HypothesisReport

    @property
    def residual(self) -> float:
        return float(self.trace.residuals[-1])

    @property
    def iterations(self) -> int:
        return self.trace.iterations


def rate_factors(cls: ContractionClass) -> tuple[float, float, str]:
    """``(delta1, delta2, bound_form)`` for an admissible class."""
    cls.check_admissible()
    if isinstance(cls, BanachType):
        d = max(cls.k + cls.l, cls.m + cls.n)
        return d, d, JOINT_D1
    if isinstance(cls, KannanType):
        return cls.l / (1 - cls.k), cls.m / (1 - cls.n), SPLIT
    if isinstance(cls, ChatterjeaType):
        return cls.l / (1 - cls.l), cls.m / (1 - cls.m), SPLIT
    if isinstance(cls, ReichType):
        return (cls.b + cls.c) / (1 - cls.a), (cls.a + cls.c) / (1 - cls.b), SPLIT
    if isinstance(cls, HybridType):
        return (cls.b + cls.c) / (1 - cls.b), (cls.a + cls.c) / (1 - cls.a), SPLIT
    if isinstance(cls, QuasiType):
        return cls.k / (1 - cls.k), cls.l / (1 - cls.l), SPLIT
    raise ConfigError(f"no rate factors for {type(cls).__name__}")


def make_certificate(cls: ContractionClass, p0: ProductPoint, p1: ProductPoint) -> Certificate:
    d1, d2, form = rate_factors(cls)
    dx = metric(None, p1.x, p0.x)
    dy = metric(None, p1.y, p0.y)
    return Certificate(cls, d1, d2, dx + dy, form, dx, dy)


def apriori_bound(cert: Certificate, j: int) -> tuple[float, float]:
    """Upper bounds on ``d_X(x_j, x*)`` and ``d_Y(y_j, y*)``."""
    if j < 0:
        raise InputError("iteration index must be nonnegative")
    if cert.bound_form == JOINT_D1:
        d = cert.delta
        b = d ** j / (1 - d) * cert.D1
        return b, b
    return (cert.delta1 ** j / (1 - cert.delta1) * cert.D1_x,
            cert.delta2 ** j / (1 - cert.delta2) * cert.D1_y)


def _iterate_generic(pair, x0, y0, config):
    x, y = np.array(x0, dtype=float), np.array(y0, dtype=float)
    fx, gy = eval_F(pair, x, y), eval_G(pair, y, x)
    res = metric(None, fx, x) + metric(None, gy, y)
    xs, ys, steps, residuals = [x], [y], [], [res]
    status = _kernels.MAX_ITER
    if res <= config.tol_step and res <= config.tol_residual:
        return xs, ys, steps, residuals, _kernels.CONVERGED
    for _ in range(config.max_iter):
        step = metric(None, fx, x) + metric(None, gy, y)
        x, y = fx, gy
        fx, gy = eval_F(pair, x, y), eval_G(pair, y, x)
        res = metric(None, fx, x) + metric(None, gy, y)
        xs.append(x)
        ys.append(y)
        steps.append(step)
        residuals.append(res)
        if not step <= DIVERGENCE_CUTOFF:
            return xs, ys, steps, residuals, _kernels.DIVERGED
        if step <= config.tol_step and res <= config.tol_residual:
            return xs, ys, steps, residuals, _kernels.CONVERGED
    return xs, ys, steps, residuals, status


def run_iteration(pair: CoupledMapPair, p0: ProductPoint, config: SolveConfig):
    """Raw Picard loop; returns ``(trace, status)`` without any hypothesis checks."""
    if pair.is_affine:
        xs, ys, steps, residuals, status = _kernels.picard_affine(
            pair.F.A, pair.F.B, pair.F.offset, pair.G.A, pair.G.B, pair.G.offset,
            p0.x, p0.y, config.tol_step, config.tol_residual, int(config.max_iter),
            DIVERGENCE_CUTOFF,
        )
    else:
        xs, ys, steps, residuals, status = _iterate_generic(pair, p0.x, p0.y, config)
    trace = IterationTrace(
        np.asarray(xs, dtype=float).reshape(-1, pair.X.dim),
        np.asarray(ys, dtype=float).reshape(-1, pair.Y.dim),
        np.asarray(steps, dtype=float),
        np.asarray(residuals, dtype=float),
    )
    return trace, status


def trajectory_violations(trace: IterationTrace) -> list[int]:
    """Indices j where ``x_j <= x_{j+1}`` or ``y_{j+1} <= y_j`` fails."""
    up = np.all(trace.xs[:-1] <= trace.xs[1:], axis=1)
    down = np.all(trace.ys[1:] <= trace.ys[:-1], axis=1)
    return np.flatnonzero(~(up & down)).tolist()


def solve(pair: CoupledMapPair, cls: ContractionClass | None, p0: ProductPoint,
          config: SolveConfig | None = None, sampler: SamplerConfig | None = None,
          check_hypotheses: bool = True) -> FixedPointResult:
    """Run the Picard iteration from ``p0`` and certify it when a class is given.

    A failed seed condition does not abort the run: the result is flagged and
    the monotone-trajectory check is skipped. Exhausting ``max_iter`` yields a
    non-converged result; a step beyond the divergence cutoff raises
    DivergenceError.
    """
    config = config or SolveConfig()
    sampler = sampler or SamplerConfig()
    if not (pair.X.contains(p0.x) and pair.Y.contains(p0.y)):
        raise InputError(f"seed {p0} lies outside the product space")
    if cls is not None:
        cls.check_admissible()

    seed_ok = check_seed(pair, p0)
    report = HypothesisReport(hypothesis_mode=config.hypothesis_mode, seed_ok=seed_ok)
    if check_hypotheses:
        report.monotone = check_mixed_monotone(pair, sampler)
        report.closure_violations = check_closure(pair, sampler)
        if cls is not None:
            report.condition = verify_condition(cls, pair, sampler)

    trace, status = run_iteration(pair, p0, config)
    if status == _kernels.DIVERGED:
        raise DivergenceError(
            f"step distance {trace.step_distances[-1]:.3g} exceeded {DIVERGENCE_CUTOFF:g} "
            f"at iteration {trace.iterations}",
            trace.iterations,
        )

    if seed_ok and (report.monotone is None or report.monotone.ok):
        report.trajectory_violations = trajectory_violations(trace)
        report.trajectory_monotone = not report.trajectory_violations

    cert = None
    if cls is not None:
        p1 = trace.iterate(1) if len(trace) > 1 else trace.iterate(0)
        cert = make_certificate(cls, p0, p1)

    point = trace.last
    converged = status == _kernels.CONVERGED and trace.residuals[-1] <= config.tol_residual
    return FixedPointResult(point, trace, cert, bool(converged), report)


# -- uniqueness --------------------------------------------------------------

IDENTICAL = "identical"
CERTIFIED_UNIQUE = "certified-unique"
UNCERTIFIED = "uncertified"


@dataclass(frozen=True)
class ComparabilityWitness:
    z: ProductPoint
    relation_to_first: str
    relation_to_second: str


def _relation(z, p):
    if product_leq(p, z):
        return ">="
    if product_leq(z, p):
        return "<="
    return "incomparable"


@dataclass(frozen=True)
class UniquenessVerdict:
    verdict: str
    distance: float
    delta: float
    directly_comparable: bool
    witness: ComparabilityWitness | None
    reason: str


def find_witness(pair: CoupledMapPair, p: ProductPoint, q: ProductPoint,
                 sampler: SamplerConfig | None = None) -> ComparabilityWitness | None:
    """A product point comparable to both ``p`` and ``q``.

    The lattice join and meet are tried first; random product points follow.
    """
    sampler = sampler or SamplerConfig()
    candidates = [join(p, q), meet(p, q)]
    rng = sampler.rng()
    xs = sample_box(pair.X, sampler.samples, rng, sampler.radius)
    ys = sample_box(pair.Y, sampler.samples, rng, sampler.radius)
    candidates.extend(ProductPoint(x, y) for x, y in zip(xs, ys))
    for z in candidates:
        if not (pair.X.contains(z.x) and pair.Y.contains(z.y)):
            continue
        if comparable(z, p) and comparable(z, q):
            return ComparabilityWitness(z, _relation(z, p), _relation(z, q))
    return None


def uniqueness_probe(pair: CoupledMapPair, cls: BanachType, fp1: ProductPoint,
                     fp2: ProductPoint, sampler: SamplerConfig | None = None,
                     tol_residual: float = 1e-9, merge_tol: float = 0.0) -> UniquenessVerdict:
    """Decide whether the comparability argument certifies a unique fixed point.

    The argument bounds ``d(p, q)`` by ``2**j * delta**j`` times a constant,
    so certification requires ``2 * delta < 1`` with ``delta = max(k+l, m+n)``
    together with a comparability chain between the two points.
    """
    if not isinstance(cls, BanachType):
        raise ConfigError("uniqueness certification is defined for the banach class only")
    cls.check_admissible()
    for name, fp in (("first", fp1), ("second", fp2)):
        r = residual(pair, fp)
        if not r <= tol_residual:
            raise InputError(f"{name} point is not a fixed point at tolerance: residual {r:.3g}")

    dist = product_metric(fp1, fp2)
    delta = max(cls.k + cls.l, cls.m + cls.n)
    if dist <= merge_tol:
        return UniquenessVerdict(IDENTICAL, dist, delta, True, None,
                                 f"points coincide (distance {dist:.3g} <= {merge_tol:g})")
    direct = comparable(fp1, fp2)
    witness = None if direct else find_witness(pair, fp1, fp2, sampler)
    if not direct and witness is None:
        return UniquenessVerdict(UNCERTIFIED, dist, delta, False, None,
                                 "no comparability witness found among samples")
    if 2 * delta < 1:
        return UniquenessVerdict(CERTIFIED_UNIQUE, dist, delta, direct, witness,
                                 f"comparability chain exists and 2*delta = {2 * delta:.6g} < 1")
    return UniquenessVerdict(UNCERTIFIED, dist, delta, direct, witness,
                             f"2*delta = {2 * delta:.6g} >= 1; the 2^j factor does not vanish")
