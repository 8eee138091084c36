"""Real boxes with the L1 metric and componentwise order, and their product.

Points are plain 1-D float64 arrays. The product space ``X x Y`` carries the
sum metric and the mixed order in which the first coordinate ascends and the
second descends:

    (u, v) <= (x, y)  iff  u <= x in X  and  y <= v in Y
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError

DEFAULT_SAMPLING_RADIUS = 10.0


def _as_bound(value) -> float:
    v = float(value)
    if math.isnan(v):
        raise InputError("box bound may not be NaN")
    return v


@dataclass(frozen=True)
class SpaceDescriptor:
    """A box ``lower <= p <= upper`` in R^dim; edges may be infinite.

    ``allow_degenerate`` permits ``lower[i] == upper[i]`` on some axes.
    """

    lower: tuple
    upper: tuple
    allow_degenerate: bool = False
    dim: int = field(init=False)

    def __post_init__(self):
        lower = tuple(_as_bound(v) for v in np.atleast_1d(self.lower))
        upper = tuple(_as_bound(v) for v in np.atleast_1d(self.upper))
        if len(lower) == 0:
            raise InputError("space must have at least one dimension")
        if len(lower) != len(upper):
            raise InputError(
                f"lower has {len(lower)} entries but upper has {len(upper)}"
            )
        for i, (lo, hi) in enumerate(zip(lower, upper)):
            if lo > hi or (lo == hi and not self.allow_degenerate):
                raise InputError(f"axis {i}: need lower < upper, got [{lo}, {hi}]")
            if lo == math.inf or hi == -math.inf:
                raise InputError(f"axis {i}: empty box [{lo}, {hi}]")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "dim", len(lower))

    @classmethod
    def interval(cls, lower, upper) -> "SpaceDescriptor":
        return cls((lower,), (upper,))

    @property
    def lower_array(self) -> np.ndarray:
        return np.array(self.lower, dtype=float)

    @property
    def upper_array(self) -> np.ndarray:
        return np.array(self.upper, dtype=float)

    @property
    def is_bounded(self) -> bool:
        return all(math.isfinite(v) for v in self.lower + self.upper)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,) or not np.all(np.isfinite(p)):
            return False
        return bool(np.all(self.lower_array <= p) and np.all(p <= self.upper_array))

    def point(self, coords) -> np.ndarray:
        """Validate ``coords`` and return them as a read-only Point."""
        p = np.array(coords, dtype=float).reshape(-1)
        if p.shape != (self.dim,):
            raise InputError(f"expected a point of dimension {self.dim}, got {p.size}")
        if not np.all(np.isfinite(p)):
            raise InputError(f"point coordinates must be finite: {p.tolist()}")
        if not self.contains(p):
            raise InputError(f"point {p.tolist()} lies outside the box {self}")
        p.flags.writeable = False
        return p

    def sampling_bounds(self, radius: float = DEFAULT_SAMPLING_RADIUS):
        """Finite (lo, hi) arrays with infinite edges clamped at ``radius``.

        A half-infinite axis keeps its finite edge and extends ``radius``
        beyond it, so the clamped box is never empty.
        """
        if not radius > 0:
            raise InputError("sampling radius must be positive")
        lo, hi = self.lower_array.copy(), self.upper_array.copy()
        for i in range(self.dim):
            lo_inf, hi_inf = math.isinf(lo[i]), math.isinf(hi[i])
            if lo_inf and hi_inf:
                lo[i], hi[i] = -radius, radius
            elif lo_inf:
                lo[i] = min(-radius, hi[i] - radius)
            elif hi_inf:
                hi[i] = max(radius, lo[i] + radius)
        return lo, hi

    def __str__(self):
        ivs = ", ".join(f"[{lo:g}, {hi:g}]" for lo, hi in zip(self.lower, self.upper))
        return f"Box({ivs})"


@dataclass(frozen=True, eq=False)
class ProductPoint:
    """A pair ``(x, y)`` with ``x`` in X and ``y`` in Y."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        for name in ("x", "y"):
            v = np.array(getattr(self, name), dtype=float).reshape(-1)
            v.flags.writeable = False
            object.__setattr__(self, name, v)

    def __eq__(self, other):
        if not isinstance(other, ProductPoint):
            return NotImplemented
        return (
            self.x.shape == other.x.shape
            and self.y.shape == other.y.shape
            and bool(np.all(self.x == other.x))
            and bool(np.all(self.y == other.y))
        )

    __hash__ = None

    def __iter__(self):
        yield self.x
        yield self.y

    def __repr__(self):
        return f"ProductPoint(x={self.x.tolist()}, y={self.y.tolist()})"


def product_point(X: SpaceDescriptor, Y: SpaceDescriptor, x, y) -> ProductPoint:
    """Build a ProductPoint after checking membership of both components."""
    return ProductPoint(X.point(x), Y.point(y))


def _check_pair(space: SpaceDescriptor | None, p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.ndim != 1 or q.ndim != 1 or p.shape != q.shape:
        raise InputError(f"dimension mismatch: {p.shape} vs {q.shape}")
    if space is not None and p.shape[0] != space.dim:
        raise InputError(f"points have dimension {p.shape[0]}, space has {space.dim}")
    return p, q


def metric(space: SpaceDescriptor | None, p, q) -> float:
    """L1 distance between two points of ``space``."""
    p, q = _check_pair(space, p, q)
    return float(np.abs(p - q).sum())


def leq(space: SpaceDescriptor | None, p, q) -> bool:
    """Componentwise order: ``p[i] <= q[i]`` for every i."""
    p, q = _check_pair(space, p, q)
    return bool(np.all(p <= q))


def _check_product(a: ProductPoint, b: ProductPoint):
    if a.x.shape != b.x.shape or a.y.shape != b.y.shape:
        raise InputError(
            f"product points live in different spaces: "
            f"{a.x.shape}x{a.y.shape} vs {b.x.shape}x{b.y.shape}"
        )


def product_metric(a: ProductPoint, b: ProductPoint) -> float:
    _check_product(a, b)
    return metric(None, a.x, b.x) + metric(None, a.y, b.y)


def product_leq(a: ProductPoint, b: ProductPoint) -> bool:
    """``a <= b`` in the mixed product order (x ascends, y descends)."""
    _check_product(a, b)
    return leq(None, a.x, b.x) and leq(None, b.y, a.y)


def comparable(a: ProductPoint, b: ProductPoint) -> bool:
    return product_leq(a, b) or product_leq(b, a)


def join(a: ProductPoint, b: ProductPoint) -> ProductPoint:
    """Least upper bound of two product points in the mixed order."""
    _check_product(a, b)
    return ProductPoint(np.maximum(a.x, b.x), np.minimum(a.y, b.y))


def meet(a: ProductPoint, b: ProductPoint) -> ProductPoint:
    """Greatest lower bound of two product points in the mixed order."""
    _check_product(a, b)
    return ProductPoint(np.minimum(a.x, b.x), np.maximum(a.y, b.y))


# Row-wise variants used by the samplers and oracles.

def metric_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return np.abs(P - Q).sum(axis=-1)


def leq_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return np.all(P <= Q, axis=-1)


def as_points(values: Sequence, dim: int) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    return arr.reshape(-1, dim)
