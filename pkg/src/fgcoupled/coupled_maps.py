"""The map pair ``F: X x Y -> X``, ``G: Y x X -> Y`` and its iteration.

Maps are either affine (``A @ first + B @ second + offset``) or named
entries of a closed builtin registry. All evaluators accept a single point
or a batch of points stacked along the leading axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, InputError
from .ordered_metric import (
    DEFAULT_SAMPLING_RADIUS,
    ProductPoint,
    SpaceDescriptor,
    leq,
    leq_rows,
    metric,
)


@dataclass(frozen=True)
class BuiltinMap:
    """An elementwise map ``fn(first, second)`` with the same dimension everywhere."""

    name: str
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    description: str


def _third_minus_quarter(first, second):
    return first / 3.0 - second / 4.0


def _eighth_minus_sixth(first, second):
    return first / 8.0 - second / 6.0


def _third(first, second):
    return first / 3.0 + 0.0 * second


def _quarter(first, second):
    return first / 4.0 + 0.0 * second


def _eighth_minus_eighth(first, second):
    return first / 8.0 - second / 8.0


def _tanh_half_quarter(first, second):
    return 0.5 * np.tanh(first) - 0.25 * np.tanh(second)


def _tanh_third_quarter(first, second):
    return np.tanh(first) / 3.0 - 0.25 * np.tanh(second)


BUILTINS = {
    b.name: b
    for b in (
        BuiltinMap("third_minus_quarter", _third_minus_quarter, "first/3 - second/4"),
        BuiltinMap("eighth_minus_sixth", _eighth_minus_sixth, "first/8 - second/6"),
        BuiltinMap("third", _third, "first/3"),
        BuiltinMap("quarter", _quarter, "first/4"),
        BuiltinMap("eighth_minus_eighth", _eighth_minus_eighth, "first/8 - second/8"),
        BuiltinMap("tanh_half_quarter", _tanh_half_quarter,
                   "tanh(first)/2 - tanh(second)/4"),
        BuiltinMap("tanh_third_quarter", _tanh_third_quarter,
                   "tanh(first)/3 - tanh(second)/4"),
    )
}


def _matrix(values, rows, cols, what) -> np.ndarray:
    m = np.array(values, dtype=float)
    if m.ndim == 0 and rows == cols == 1:
        m = m.reshape(1, 1)
    if m.ndim == 1 and rows == 1:
        m = m.reshape(1, -1)
    if m.shape != (rows, cols):
        raise InputError(f"{what} must have shape ({rows}, {cols}), got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{what} has non-finite entries")
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class MapSpec:
    """Either ``kind="affine"`` with ``A``, ``B``, ``offset`` or ``kind="builtin"`` with ``name``."""

    kind: str
    A: np.ndarray | None = None
    B: np.ndarray | None = None
    offset: np.ndarray | None = None
    name: str | None = None

    @classmethod
    def affine(cls, A, B, offset=None) -> "MapSpec":
        A = np.atleast_2d(np.array(A, dtype=float))
        B = np.atleast_2d(np.array(B, dtype=float))
        if offset is None:
            offset = np.zeros(A.shape[0])
        offset = np.array(offset, dtype=float).reshape(-1)
        for arr in (A, B, offset):
            arr.flags.writeable = False
        return cls("affine", A=A, B=B, offset=offset)

    @classmethod
    def builtin(cls, name: str) -> "MapSpec":
        if name not in BUILTINS:
            raise ConfigError(
                f"unknown builtin map {name!r}; known: {', '.join(sorted(BUILTINS))}"
            )
        return cls("builtin", name=name)

    @classmethod
    def constant(cls, value, dim_first: int, dim_second: int) -> "MapSpec":
        value = np.array(value, dtype=float).reshape(-1)
        return cls.affine(
            np.zeros((value.size, dim_first)), np.zeros((value.size, dim_second)), value
        )

    def validate(self, dim_out: int, dim_first: int, dim_second: int, what: str = "map"):
        if self.kind == "affine":
            _matrix(self.A, dim_out, dim_first, f"{what}.A")
            _matrix(self.B, dim_out, dim_second, f"{what}.B")
            if self.offset is None or np.shape(self.offset) != (dim_out,):
                raise InputError(f"{what}.offset must have length {dim_out}")
            if not np.all(np.isfinite(self.offset)):
                raise InputError(f"{what}.offset has non-finite entries")
        elif self.kind == "builtin":
            if self.name not in BUILTINS:
                raise ConfigError(f"unknown builtin map {self.name!r}")
            if not dim_out == dim_first == dim_second:
                raise InputError(
                    f"{what}: builtin {self.name!r} is elementwise and needs equal "
                    f"dimensions, got out={dim_out}, first={dim_first}, second={dim_second}"
                )
        else:
            raise ConfigError(f"{what}: unknown map kind {self.kind!r}")

    def __call__(self, first, second) -> np.ndarray:
        first = np.asarray(first, dtype=float)
        second = np.asarray(second, dtype=float)
        if self.kind == "affine":
            return affine_apply(self.A, self.B, self.offset, first, second)
        if self.kind == "builtin":
            try:
                fn = BUILTINS[self.name].fn
            except KeyError:
                raise ConfigError(f"unknown builtin map {self.name!r}") from None
            return np.asarray(fn(first, second), dtype=float)
        raise ConfigError(f"unknown map kind {self.kind!r}")

    def __eq__(self, other):
        if not isinstance(other, MapSpec) or self.kind != other.kind:
            return NotImplemented if not isinstance(other, MapSpec) else False
        if self.kind == "builtin":
            return self.name == other.name
        return (
            np.array_equal(self.A, other.A)
            and np.array_equal(self.B, other.B)
            and np.array_equal(self.offset, other.offset)
        )

    __hash__ = None


def affine_apply(A, B, offset, first, second) -> np.ndarray:
    """``offset + A @ first + B @ second`` accumulated column by column.

    The fixed accumulation order makes single-point and batched evaluation
    (and the compiled kernels) agree bit for bit.
    """
    if first.shape[-1] != A.shape[1] or second.shape[-1] != B.shape[1]:
        raise InputError(
            f"argument dimensions {first.shape[-1]}, {second.shape[-1]} do not match "
            f"map shapes {A.shape}, {B.shape}"
        )
    out = np.broadcast_to(offset, first.shape[:-1] + offset.shape).copy()
    for j in range(A.shape[1]):
        out += A[:, j] * first[..., j : j + 1]
    for j in range(B.shape[1]):
        out += B[:, j] * second[..., j : j + 1]
    return out


@dataclass(frozen=True, eq=False)
class CoupledMapPair:
    X: SpaceDescriptor
    Y: SpaceDescriptor
    F: MapSpec
    G: MapSpec

    def __post_init__(self):
        self.F.validate(self.X.dim, self.X.dim, self.Y.dim, "F")
        self.G.validate(self.Y.dim, self.Y.dim, self.X.dim, "G")

    @property
    def is_affine(self) -> bool:
        return self.F.kind == "affine" and self.G.kind == "affine"

    def point(self, x, y) -> ProductPoint:
        return ProductPoint(self.X.point(x), self.Y.point(y))


def _check_args(pair, first, second, d_first, d_second, what):
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    if first.shape[-1:] != (d_first,) or second.shape[-1:] != (d_second,):
        raise InputError(
            f"{what}: expected arguments of dimension ({d_first}, {d_second}), "
            f"got {first.shape} and {second.shape}"
        )
    return first, second


def eval_F(pair: CoupledMapPair, x, y) -> np.ndarray:
    x, y = _check_args(pair, x, y, pair.X.dim, pair.Y.dim, "F(x, y)")
    return pair.F(x, y)


def eval_G(pair: CoupledMapPair, y, x) -> np.ndarray:
    y, x = _check_args(pair, y, x, pair.Y.dim, pair.X.dim, "G(y, x)")
    return pair.G(y, x)


def iterate_step(pair: CoupledMapPair, p: ProductPoint) -> ProductPoint:
    """One simultaneous update ``(F(x, y), G(y, x))``."""
    return ProductPoint(eval_F(pair, p.x, p.y), eval_G(pair, p.y, p.x))


def iterate_n(pair: CoupledMapPair, p0: ProductPoint, n: int) -> list[ProductPoint]:
    if n < 0:
        raise InputError("number of iterations must be nonnegative")
    out = [p0]
    for _ in range(n):
        out.append(iterate_step(pair, out[-1]))
    return out


def residual(pair: CoupledMapPair, p: ProductPoint) -> float:
    """``d_X(F(x,y), x) + d_Y(G(y,x), y)``; zero exactly at an FG-coupled fixed point."""
    q = iterate_step(pair, p)
    return metric(None, q.x, p.x) + metric(None, q.y, p.y)


def check_seed(pair: CoupledMapPair, p0: ProductPoint) -> bool:
    """``x0 <= F(x0, y0)`` and ``G(y0, x0) <= y0``."""
    fx = eval_F(pair, p0.x, p0.y)
    gy = eval_G(pair, p0.y, p0.x)
    return leq(pair.X, p0.x, fx) and leq(pair.Y, gy, p0.y)


# -- sampling ---------------------------------------------------------------

@dataclass(frozen=True)
class SamplerConfig:
    samples: int = 1000
    seed: int = 0
    radius: float = DEFAULT_SAMPLING_RADIUS

    def __post_init__(self):
        if self.samples < 0:
            raise ConfigError("sample count must be nonnegative")
        if not self.radius > 0:
            raise ConfigError("sampling radius must be positive")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def sample_box(space: SpaceDescriptor, n: int, rng: np.random.Generator,
               radius: float = DEFAULT_SAMPLING_RADIUS) -> np.ndarray:
    lo, hi = space.sampling_bounds(radius)
    return lo + (hi - lo) * rng.random((n, space.dim))


def ordered_draws(space, n, rng, radius=DEFAULT_SAMPLING_RADIUS):
    """Two batches ``lo <= hi`` built from the min/max of two uniform draws."""
    a = sample_box(space, n, rng, radius)
    b = sample_box(space, n, rng, radius)
    return np.minimum(a, b), np.maximum(a, b)


CLAUSE_F_X = "F(x1,y) <= F(x2,y) for x1 <= x2"
CLAUSE_G_X = "G(y,x1) >= G(y,x2) for x1 <= x2"
CLAUSE_F_Y = "F(x,y1) >= F(x,y2) for y1 <= y2"
CLAUSE_G_Y = "G(y1,x) <= G(y2,x) for y1 <= y2"


@dataclass(frozen=True)
class MonotoneViolation:
    clause: str
    low: np.ndarray
    high: np.ndarray
    other: np.ndarray


@dataclass
class MonotoneReport:
    samples_checked: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def clauses(self) -> set:
        return {v.clause for v in self.violations}


def check_mixed_monotone(pair: CoupledMapPair, config: SamplerConfig | None = None,
                         max_witnesses: int = 100) -> MonotoneReport:
    """Falsification test of the mixed monotone property on random comparable inputs.

    Only the first ``max_witnesses`` violations are kept, but ``samples_checked``
    always counts every sample.
    """
    config = config or SamplerConfig()
    rng = config.rng()
    n = config.samples
    x_lo, x_hi = ordered_draws(pair.X, n, rng, config.radius)
    y_any = sample_box(pair.Y, n, rng, config.radius)
    y_lo, y_hi = ordered_draws(pair.Y, n, rng, config.radius)
    x_any = sample_box(pair.X, n, rng, config.radius)

    checks = (
        (CLAUSE_F_X, x_lo, x_hi, y_any,
         leq_rows(pair.F(x_lo, y_any), pair.F(x_hi, y_any))),
        (CLAUSE_G_X, x_lo, x_hi, y_any,
         leq_rows(pair.G(y_any, x_hi), pair.G(y_any, x_lo))),
        (CLAUSE_F_Y, y_lo, y_hi, x_any,
         leq_rows(pair.F(x_any, y_hi), pair.F(x_any, y_lo))),
        (CLAUSE_G_Y, y_lo, y_hi, x_any,
         leq_rows(pair.G(y_lo, x_any), pair.G(y_hi, x_any))),
    )
    report = MonotoneReport(samples_checked=n)
    for clause, low, high, other, ok in checks:
        for i in np.flatnonzero(~ok):
            if len(report.violations) >= max_witnesses:
                break
            report.violations.append(
                MonotoneViolation(clause, low[i].copy(), high[i].copy(), other[i].copy())
            )
    return report


@dataclass(frozen=True)
class ClosureViolation:
    which: str
    x: np.ndarray
    y: np.ndarray
    image: np.ndarray


def check_closure(pair: CoupledMapPair, config: SamplerConfig | None = None,
                  max_witnesses: int = 100) -> list[ClosureViolation]:
    """Sampled check that F maps into X's box and G into Y's box."""
    config = config or SamplerConfig()
    rng = config.rng()
    xs = sample_box(pair.X, config.samples, rng, config.radius)
    ys = sample_box(pair.Y, config.samples, rng, config.radius)
    out = []
    for which, image, space in (("F", pair.F(xs, ys), pair.X), ("G", pair.G(ys, xs), pair.Y)):
        inside = np.all((space.lower_array <= image) & (image <= space.upper_array), axis=1)
        for i in np.flatnonzero(~inside)[:max_witnesses]:
            out.append(ClosureViolation(which, xs[i].copy(), ys[i].copy(), image[i].copy()))
    return out
