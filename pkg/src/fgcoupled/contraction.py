"""Contraction hypotheses as checkable predicates over comparable pairs.

Six inequality families are supported. For a pair ``a >= b`` in the mixed
product order, the F inequality is read with ``(x, y) = a`` and
``(u, v) = b``; the G inequality quantifies over ``x <= u, y >= v`` and is
therefore read with ``(x, y) = b`` and ``(u, v) = a``.

========== =============================================== ==================
class      right-hand side of the F inequality             admissible when
========== =============================================== ==================
banach     k d(x,u) + l d(y,v)                             k+l < 1, m+n < 1
kannan     k d(x,F(x,y)) + l d(u,F(u,v))                   all in [0, 1/2)
chatterjea k d(x,F(u,v)) + l d(u,F(x,y))                   all in [0, 1/2)
reich      a d(x,F(x,y)) + b d(u,F(u,v)) + c d(x,u)        a+b+c < 1
hybrid     a d(x,F(u,v)) + b d(u,F(x,y)) + c d(x,u)        2b+c < 1, 2a+c < 1
quasi      k M(x,y,u,v)                                    k, l in [0, 1/2)
========== =============================================== ==================

The G inequalities mirror these in Y (``m, n`` for the four-constant
classes, the shared ``a, b, c`` for reich/hybrid and ``l`` with N for quasi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.optimize import linprog

from . import _kernels
from .coupled_maps import CoupledMapPair, SamplerConfig, eval_F, eval_G, sample_box
from .errors import ConfigError, EstimationError, InputError
from .ordered_metric import ProductPoint, metric, product_leq

DEFAULT_RTOL = 1e-12


@dataclass(frozen=True)
class ContractionClass:
    """Base record; use one of the concrete subclasses."""

    tag: ClassVar[str] = ""
    code: ClassVar[int] = -1
    names: ClassVar[tuple] = ()
    cap: ClassVar[float] = 1.0  # upper end of each constant's range

    @property
    def constants(self) -> tuple:
        return tuple(getattr(self, n) for n in self.names)

    @property
    def kernel_constants(self) -> np.ndarray:
        c = np.zeros(4)
        c[: len(self.names)] = self.constants
        return c

    def admissibility_errors(self) -> list[str]:
        errs = []
        for name, v in zip(self.names, self.constants):
            if not math.isfinite(v) or v < 0:
                errs.append(f"{name}>=0 violated ({name}={v})")
        return errs

    def check_admissible(self):
        errs = self.admissibility_errors()
        if errs:
            raise ConfigError(f"inadmissible {self.tag} constants: " + "; ".join(errs))
        return self

    @property
    def admissible(self) -> bool:
        return not self.admissibility_errors()

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.constants))


def _half_open(cls_obj, errs):
    for name, v in zip(cls_obj.names, cls_obj.constants):
        if math.isfinite(v) and v >= 0.5:
            errs.append(f"{name}<1/2 violated ({name}={v})")
    return errs


@dataclass(frozen=True)
class BanachType(ContractionClass):
    k: float
    l: float
    m: float
    n: float
    tag: ClassVar[str] = "banach"
    code: ClassVar[int] = _kernels.BANACH
    names: ClassVar[tuple] = ("k", "l", "m", "n")

    def admissibility_errors(self):
        errs = super().admissibility_errors()
        for name, v in self.as_dict().items():
            if math.isfinite(v) and v >= 1:
                errs.append(f"{name}<1 violated ({name}={v})")
        if not self.k + self.l < 1:
            errs.append(f"k+l<1 violated (k+l={self.k + self.l})")
        if not self.m + self.n < 1:
            errs.append(f"m+n<1 violated (m+n={self.m + self.n})")
        return errs


@dataclass(frozen=True)
class KannanType(ContractionClass):
    k: float
    l: float
    m: float
    n: float
    tag: ClassVar[str] = "kannan"
    code: ClassVar[int] = _kernels.KANNAN
    names: ClassVar[tuple] = ("k", "l", "m", "n")
    cap: ClassVar[float] = 0.5

    def admissibility_errors(self):
        return _half_open(self, super().admissibility_errors())


@dataclass(frozen=True)
class ChatterjeaType(ContractionClass):
    k: float
    l: float
    m: float
    n: float
    tag: ClassVar[str] = "chatterjea"
    code: ClassVar[int] = _kernels.CHATTERJEA
    names: ClassVar[tuple] = ("k", "l", "m", "n")
    cap: ClassVar[float] = 0.5

    def admissibility_errors(self):
        return _half_open(self, super().admissibility_errors())


@dataclass(frozen=True)
class ReichType(ContractionClass):
    a: float
    b: float
    c: float
    tag: ClassVar[str] = "reich"
    code: ClassVar[int] = _kernels.REICH
    names: ClassVar[tuple] = ("a", "b", "c")

    def admissibility_errors(self):
        errs = super().admissibility_errors()
        if not self.a + self.b + self.c < 1:
            errs.append(f"a+b+c<1 violated (a+b+c={self.a + self.b + self.c})")
        return errs


@dataclass(frozen=True)
class HybridType(ContractionClass):
    a: float
    b: float
    c: float
    tag: ClassVar[str] = "hybrid"
    code: ClassVar[int] = _kernels.HYBRID
    names: ClassVar[tuple] = ("a", "b", "c")

    def admissibility_errors(self):
        errs = super().admissibility_errors()
        if not 2 * self.b + self.c < 1:
            errs.append(f"2b+c<1 violated (2b+c={2 * self.b + self.c})")
        if not 2 * self.a + self.c < 1:
            errs.append(f"2a+c<1 violated (2a+c={2 * self.a + self.c})")
        return errs


@dataclass(frozen=True)
class QuasiType(ContractionClass):
    k: float
    l: float
    tag: ClassVar[str] = "quasi"
    code: ClassVar[int] = _kernels.QUASI
    names: ClassVar[tuple] = ("k", "l")
    cap: ClassVar[float] = 0.5

    def admissibility_errors(self):
        return _half_open(self, super().admissibility_errors())


CLASSES = {c.tag: c for c in (BanachType, KannanType, ChatterjeaType, ReichType,
                              HybridType, QuasiType)}


def make_class(tag: str, **constants) -> ContractionClass:
    """Build a class record from its tag and constants, without admissibility checks."""
    try:
        cls = CLASSES[tag]
    except KeyError:
        raise ConfigError(
            f"unknown contraction class {tag!r}; known: {', '.join(CLASSES)}"
        ) from None
    missing = [n for n in cls.names if n not in constants]
    extra = [n for n in constants if n not in cls.names]
    if missing or extra:
        raise ConfigError(
            f"class {tag} takes constants {', '.join(cls.names)}"
            + (f"; missing {', '.join(missing)}" if missing else "")
            + (f"; unexpected {', '.join(extra)}" if extra else "")
        )
    return cls(**{n: float(constants[n]) for n in cls.names})


# -- quasi-contraction max functions ----------------------------------------

def quasi_M(pair: CoupledMapPair, x, y, u, v) -> float:
    """Largest of d(x,u), d(x,F(x,y)), d(x,F(u,v)), d(u,F(u,v)), d(u,F(x,y)) in X."""
    fxy = eval_F(pair, x, y)
    fuv = eval_F(pair, u, v)
    return max(metric(pair.X, x, u), metric(pair.X, x, fxy), metric(pair.X, x, fuv),
               metric(pair.X, u, fuv), metric(pair.X, u, fxy))


def quasi_N(pair: CoupledMapPair, y, x, v, u) -> float:
    """Largest of d(y,v), d(y,G(y,x)), d(y,G(v,u)), d(v,G(v,u)), d(v,G(y,x)) in Y."""
    gyx = eval_G(pair, y, x)
    gvu = eval_G(pair, v, u)
    return max(metric(pair.Y, y, v), metric(pair.Y, y, gyx), metric(pair.Y, y, gvu),
               metric(pair.Y, v, gvu), metric(pair.Y, v, gyx))


# -- slacks ------------------------------------------------------------------

@dataclass(frozen=True)
class PairValues:
    """Row-stacked pairs ``a >= b`` together with the map values they need."""

    ax: np.ndarray
    ay: np.ndarray
    bx: np.ndarray
    by: np.ndarray
    Fa: np.ndarray
    Fb: np.ndarray
    Ga: np.ndarray
    Gb: np.ndarray

    @classmethod
    def evaluate(cls, pair: CoupledMapPair, ax, ay, bx, by) -> "PairValues":
        ax, ay, bx, by = (np.atleast_2d(np.asarray(v, dtype=float)) for v in (ax, ay, bx, by))
        return cls(ax, ay, bx, by, pair.F(ax, ay), pair.F(bx, by),
                   pair.G(ay, ax), pair.G(by, bx))

    def __len__(self):
        return self.ax.shape[0]

    def kernel_args(self):
        return (self.ax, self.ay, self.bx, self.by, self.Fa, self.Fb, self.Ga, self.Gb)

    def sides(self, cls: ContractionClass):
        """``(lhs_F, rhs_F, lhs_G, rhs_G)`` row arrays under ``cls``."""
        return _kernels.pair_slacks(cls.code, cls.kernel_constants, *self.kernel_args())


def condition_slack(cls: ContractionClass, pair: CoupledMapPair,
                    a: ProductPoint, b: ProductPoint) -> tuple[float, float]:
    """``(slack_F, slack_G)`` = lhs - rhs of both inequalities on the pair ``a >= b``.

    Nonpositive slack means the inequality holds on this pair.
    """
    if not product_leq(b, a):
        if product_leq(a, b):
            raise InputError("condition_slack expects a >= b; swap the arguments")
        raise InputError("the contraction inequalities only quantify over comparable pairs")
    vals = PairValues.evaluate(pair, a.x, a.y, b.x, b.y)
    lf, rf, lg, rg = vals.sides(cls)
    return float(lf[0] - rf[0]), float(lg[0] - rg[0])


# -- sampled verification ----------------------------------------------------

MAX_CORNER_DIM = 10


def _corners(lo, hi):
    d = lo.size
    bits = (np.arange(2 ** d)[:, None] >> np.arange(d)[None, :]) & 1
    return np.where(bits == 1, hi, lo)


def battery_pairs(pair: CoupledMapPair, radius: float):
    """Deterministic pairs ``a >= b``: comparable box corners plus axis-aligned moves.

    Axis-aligned pairs differ in a single coordinate, from several base points
    (the center and the corners), in both half-steps and the full edge. They
    pin the separate Lipschitz-type constants of affine maps.
    """
    xlo, xhi = pair.X.sampling_bounds(radius)
    ylo, yhi = pair.Y.sampling_bounds(radius)
    dx, dy = xlo.size, ylo.size
    lo = np.concatenate([xlo, ylo])
    hi = np.concatenate([xhi, yhi])
    mid = 0.5 * (lo + hi)

    A, B = [], []
    if dx + dy <= MAX_CORNER_DIM:
        C = _corners(lo, hi)
        cx, cy = C[:, :dx], C[:, dx:]
        ge = (np.all(cx[:, None, :] >= cx[None, :, :], axis=2)
              & np.all(cy[:, None, :] <= cy[None, :, :], axis=2))
        i, j = np.nonzero(ge)
        A.append(C[i])
        B.append(C[j])
        bases = np.vstack([mid[None, :], C[: 2 ** min(dx + dy, 6)]])
    else:
        bases = mid[None, :]

    # moving "up" in the product order: x coordinates increase, y coordinates decrease
    up_lo = np.concatenate([xlo, yhi])
    up_hi = np.concatenate([xhi, ylo])
    up_mid = 0.5 * (up_lo + up_hi)
    for t in range(dx + dy):
        for start, stop in ((up_lo, up_hi), (up_lo, up_mid), (up_mid, up_hi)):
            a = bases.copy()
            b = bases.copy()
            a[:, t] = stop[t]
            b[:, t] = start[t]
            A.append(a)
            B.append(b)
    A = np.vstack(A)
    B = np.vstack(B)
    return A[:, :dx], A[:, dx:], B[:, :dx], B[:, dx:]


def sampled_pairs(pair: CoupledMapPair, n: int, rng: np.random.Generator, radius: float):
    """``n`` random pairs ``a >= b`` from the min/max of two uniform product draws."""
    px = sample_box(pair.X, n, rng, radius)
    py = sample_box(pair.Y, n, rng, radius)
    qx = sample_box(pair.X, n, rng, radius)
    qy = sample_box(pair.Y, n, rng, radius)
    return (np.maximum(px, qx), np.minimum(py, qy),
            np.minimum(px, qx), np.maximum(py, qy))


def comparable_pairs(pair: CoupledMapPair, config: SamplerConfig | None = None) -> PairValues:
    """The deterministic battery followed by ``config.samples`` random pairs."""
    config = config or SamplerConfig()
    bat = battery_pairs(pair, config.radius)
    smp = sampled_pairs(pair, config.samples, config.rng(), config.radius)
    stacked = [np.vstack([u, w]) for u, w in zip(bat, smp)]
    return PairValues.evaluate(pair, *stacked)


@dataclass(frozen=True)
class PairViolation:
    a: ProductPoint
    b: ProductPoint
    lhs_F: float
    rhs_F: float
    lhs_G: float
    rhs_G: float

    @property
    def slack_F(self):
        return self.lhs_F - self.rhs_F

    @property
    def slack_G(self):
        return self.lhs_G - self.rhs_G


@dataclass
class ViolationReport:
    """Aggregate of slacks over a pair set.

    A side of a pair counts as violated when ``lhs - rhs`` exceeds
    ``rtol * (lhs + rhs) + atol``; ``rtol`` absorbs rounding in the two
    floating-point evaluations. ``violation_count`` counts every violating
    pair even when only the first few are kept in ``violations``.
    """

    samples_checked: int
    worst_slack: float
    worst_slack_F: float = -math.inf
    worst_slack_G: float = -math.inf
    violations: list = field(default_factory=list)
    violation_count: int = 0
    rtol: float = DEFAULT_RTOL
    atol: float = 0.0

    @property
    def ok(self) -> bool:
        return self.violation_count == 0


def _violation_mask(lf, rf, lg, rg, rtol, atol):
    return ((lf - rf) > rtol * (lf + rf) + atol) | ((lg - rg) > rtol * (lg + rg) + atol)


def _pv(vals: PairValues, i, lf, rf, lg, rg) -> PairViolation:
    return PairViolation(ProductPoint(vals.ax[i], vals.ay[i]), ProductPoint(vals.bx[i], vals.by[i]),
                         float(lf[i]), float(rf[i]), float(lg[i]), float(rg[i]))


def report_from_pairs(cls: ContractionClass, vals: PairValues, rtol=DEFAULT_RTOL,
                      atol=0.0, max_witnesses=100) -> ViolationReport:
    lf, rf, lg, rg = vals.sides(cls)
    n = len(vals)
    sf = lf - rf
    sg = lg - rg
    worst_f = float(sf.max()) if n else -math.inf
    worst_g = float(sg.max()) if n else -math.inf
    bad = np.flatnonzero(_violation_mask(lf, rf, lg, rg, rtol, atol))
    return ViolationReport(
        samples_checked=n,
        worst_slack=max(worst_f, worst_g),
        worst_slack_F=worst_f,
        worst_slack_G=worst_g,
        violations=[_pv(vals, i, lf, rf, lg, rg) for i in bad[:max_witnesses]],
        violation_count=int(bad.size),
        rtol=rtol,
        atol=atol,
    )


def verify_condition(cls: ContractionClass, pair: CoupledMapPair,
                     config: SamplerConfig | None = None, rtol: float = DEFAULT_RTOL,
                     atol: float = 0.0, max_witnesses: int = 100) -> ViolationReport:
    """Check ``cls`` on the battery plus random comparable pairs.

    This can refute the hypothesis but never prove it; the report carries the
    worst slack seen. Inadmissible constants raise ConfigError before any
    sampling happens.
    """
    cls.check_admissible()
    return report_from_pairs(cls, comparable_pairs(pair, config), rtol, atol, max_witnesses)


# -- constant estimation -----------------------------------------------------

def _features(vals: PairValues):
    d = lambda P, Q: np.abs(P - Q).sum(axis=1)  # noqa: E731
    f = {
        "dxu": d(vals.ax, vals.bx),
        "dyv": d(vals.ay, vals.by),
        "x_fxy": d(vals.ax, vals.Fa),
        "u_fuv": d(vals.bx, vals.Fb),
        "x_fuv": d(vals.ax, vals.Fb),
        "u_fxy": d(vals.bx, vals.Fa),
        "y_gyx": d(vals.by, vals.Gb),
        "v_gvu": d(vals.ay, vals.Ga),
        "y_gvu": d(vals.by, vals.Ga),
        "v_gyx": d(vals.ay, vals.Gb),
    }
    f["M"] = np.maximum.reduce([f["dxu"], f["x_fxy"], f["x_fuv"], f["u_fuv"], f["u_fxy"]])
    f["N"] = np.maximum.reduce([f["dyv"], f["y_gyx"], f["y_gvu"], f["v_gvu"], f["v_gyx"]])
    return f


# (constant names, F-side features, G-side features); None = side not constrained
_LP_LAYOUT = {
    "banach": [(("k", "l"), ("dxu", "dyv"), None), (("m", "n"), None, ("dyv", "dxu"))],
    "kannan": [(("k", "l"), ("x_fxy", "u_fuv"), None), (("m", "n"), None, ("y_gyx", "v_gvu"))],
    "chatterjea": [(("k", "l"), ("x_fuv", "u_fxy"), None),
                   (("m", "n"), None, ("y_gvu", "v_gyx"))],
    "reich": [(("a", "b", "c"), ("x_fxy", "u_fuv", "dxu"), ("y_gyx", "v_gvu", "dyv"))],
    "hybrid": [(("a", "b", "c"), ("x_fuv", "u_fxy", "dxu"), ("y_gvu", "v_gyx", "dyv"))],
    "quasi": [(("k",), ("M",), None), (("l",), None, ("N",))],
}


def _lex_lp(rows, rhs, cap):
    """Lexicographically smallest minimizer of sum(c) s.t. rows @ c >= rhs, 0 <= c <= cap."""
    nvar = rows.shape[1]
    keep = rhs > 0
    rows, rhs = rows[keep], rhs[keep]
    if rows.shape[0] == 0:
        return np.zeros(nvar)
    scale = rows.max(axis=1)
    if np.any(scale <= 0):
        raise EstimationError(
            "not certifiable from samples: a pair moves the image but every "
            "right-hand-side term vanishes"
        )
    rows = rows / scale[:, None]
    rhs = rhs / scale
    A_ub = -rows
    b_ub = -rhs
    bounds = [(0.0, cap)] * nvar
    objectives = [np.ones(nvar)] + [np.eye(nvar)[i] for i in range(nvar)]
    x = None
    for obj in objectives:
        res = linprog(obj, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if res.status == 2:
            raise EstimationError(
                "not certifiable from samples: no constants within the admissible "
                "range satisfy every sampled pair"
            )
        if not res.success:
            raise EstimationError(f"linear program failed: {res.message}")
        x = res.x
        opt = float(obj @ x)
        A_ub = np.vstack([A_ub, obj])
        b_ub = np.append(b_ub, opt + 1e-12 * max(1.0, abs(opt)))
    return np.clip(x, 0.0, cap)


def _repair(consts, rows, rhs, cap):
    # scale constants up until every sampled row holds despite LP tolerance
    pred = rows @ consts
    need = rhs > 0
    if not np.any(need):
        return consts
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(pred[need] > 0, rhs[need] / pred[need], np.inf)
    r = float(ratio.max())
    if r > 1.0:
        if not math.isfinite(r):
            raise EstimationError("not certifiable from samples")
        consts = np.minimum(consts * r, cap)
    return consts


def estimate_constants(tag: str, pair: CoupledMapPair,
                       config: SamplerConfig | None = None) -> ContractionClass:
    """Smallest admissible constants consistent with every sampled comparable pair.

    Each pair contributes one linear inequality in the constants. The
    objective is the class's admissibility functional (``k+l`` and ``m+n``
    for the four-constant classes, ``a+b+c`` for reich and hybrid, ``k`` and
    ``l`` separately for quasi); ties are broken toward the lexicographically
    smallest constant vector. Raises EstimationError when no admissible
    constants fit the samples.
    """
    if tag not in _LP_LAYOUT:
        raise ConfigError(f"unknown contraction class {tag!r}; known: {', '.join(CLASSES)}")
    cls_type = CLASSES[tag]
    vals = comparable_pairs(pair, config)
    feats = _features(vals)
    lhs_f = np.abs(vals.Fa - vals.Fb).sum(axis=1)
    lhs_g = np.abs(vals.Gb - vals.Ga).sum(axis=1)

    found = {}
    for names, f_side, g_side in _LP_LAYOUT[tag]:
        blocks, targets = [], []
        if f_side:
            blocks.append(np.column_stack([feats[k] for k in f_side]))
            targets.append(lhs_f)
        if g_side:
            blocks.append(np.column_stack([feats[k] for k in g_side]))
            targets.append(lhs_g)
        rows = np.vstack(blocks)
        rhs = np.concatenate(targets)
        consts = _lex_lp(rows, rhs, cls_type.cap)
        consts = _repair(consts, rows, rhs, cls_type.cap)
        found.update(zip(names, consts.tolist()))

    est = make_class(tag, **found)
    errs = est.admissibility_errors()
    if errs:
        raise EstimationError(
            f"not certifiable from samples: best {tag} fit {est.as_dict()} is "
            f"inadmissible ({'; '.join(errs)})"
        )
    return est
