import math

import numpy as np
import pytest

from fgcoupled import (
    BanachType,
    ChatterjeaType,
    ConfigError,
    CoupledMapPair,
    EstimationError,
    HybridType,
    InputError,
    KannanType,
    MapSpec,
    ProductPoint,
    QuasiType,
    ReichType,
    SamplerConfig,
    condition_slack,
    estimate_constants,
    make_class,
    verify_condition,
)
from fgcoupled.contraction import CLASSES, comparable_pairs, quasi_M, quasi_N

from conftest import box
from oracles import dense_grid_banach_lp, scalar_slacks


def pt(x, y):
    return ProductPoint(np.array([float(x)]), np.array([float(y)]))


EX1 = BanachType(1 / 3, 1 / 4, 1 / 8, 1 / 6)


@pytest.mark.parametrize("cls, message", [
    (BanachType(0.6, 0.6, 0.1, 0.1), "k+l<1 violated"),
    (BanachType(0.1, 0.1, 0.5, 0.5), "m+n<1 violated"),
    (BanachType(-0.1, 0.1, 0.1, 0.1), "k>=0 violated"),
    (KannanType(0.5, 0.1, 0.1, 0.1), "k<1/2 violated"),
    (ChatterjeaType(0.1, 0.1, 0.1, 0.7), "n<1/2 violated"),
    (ReichType(0.4, 0.4, 0.3), "a+b+c<1 violated"),
    (HybridType(0.1, 0.45, 0.2), "2b+c<1 violated"),
    (HybridType(0.45, 0.1, 0.2), "2a+c<1 violated"),
    (QuasiType(0.5, 0.1), "k<1/2 violated"),
    (BanachType(math.nan, 0.1, 0.1, 0.1), "k>=0 violated"),
])
def test_admissibility_messages(cls, message):
    assert not cls.admissible
    with pytest.raises(ConfigError, match=message.replace("+", r"\+")):
        cls.check_admissible()


def test_admissible_examples():
    for cls in (EX1, QuasiType(1 / 3, 1 / 4), ReichType(0.2, 0.3, 0.4),
                HybridType(0.2, 0.2, 0.5), KannanType(0.4, 0.4, 0.4, 0.4)):
        assert cls.admissible


def test_make_class():
    assert make_class("quasi", k=0.25, l=0.125) == QuasiType(0.25, 0.125)
    with pytest.raises(ConfigError):
        make_class("nope", k=0.1)
    with pytest.raises(ConfigError, match="missing l"):
        make_class("quasi", k=0.1)


def test_quasi_M_N_examples(ex2):
    assert quasi_M(ex2, [-1.0], [1.0], [0.0], [0.0]) == 1.0
    assert quasi_N(ex2, [1.0], [-1.0], [0.0], [0.0]) == 1.0
    x, y = [-0.6], [0.3]
    assert quasi_M(ex2, x, y, x, y) == pytest.approx(0.4)
    assert quasi_N(ex2, y, x, y, x) == pytest.approx(0.225)
    assert quasi_M(ex2, [0.0], [0.0], [0.0], [0.0]) == 0.0
    assert quasi_N(ex2, [0.0], [0.0], [0.0], [0.0]) == 0.0


def test_condition_slack_examples(ex1, ex2):
    sf, _ = condition_slack(EX1, ex1, pt(0, 0), pt(-1, 1))
    assert abs(sf) <= 1e-15
    sf, _ = condition_slack(QuasiType(1 / 3, 1 / 4), ex2, pt(0, 0.5), pt(-1, 0.5))
    assert abs(sf) <= 1e-15


@pytest.mark.parametrize("cls", [EX1, KannanType(0.1, 0.2, 0.3, 0.4), QuasiType(0.2, 0.3),
                                 ReichType(0.1, 0.2, 0.3), HybridType(0.1, 0.2, 0.3),
                                 ChatterjeaType(0.3, 0.2, 0.1, 0.4)])
def test_condition_slack_equal_points(cls, ex1):
    sf, sg = condition_slack(cls, ex1, pt(-0.5, 0.5), pt(-0.5, 0.5))
    assert sf <= 0 and sg <= 0


def test_condition_slack_requires_order(ex1):
    with pytest.raises(InputError):
        condition_slack(EX1, ex1, pt(-1, 1), pt(0, 0))
    with pytest.raises(InputError):
        condition_slack(EX1, ex1, pt(0, 1), pt(-1, 0))


@pytest.mark.parametrize("tag, consts", [
    ("banach", (0.3, 0.2, 0.1, 0.25)), ("kannan", (0.1, 0.2, 0.3, 0.4)),
    ("chatterjea", (0.3, 0.2, 0.1, 0.4)), ("reich", (0.1, 0.2, 0.3)),
    ("hybrid", (0.3, 0.1, 0.2)), ("quasi", (0.2, 0.45)),
])
def test_condition_slack_matches_scalar_oracle(tag, consts):
    X, Y = box([-2.0], [1.0]), box([-1.0], [3.0])
    pair = CoupledMapPair(X, Y, MapSpec.builtin("tanh_half_quarter"),
                          MapSpec.builtin("tanh_third_quarter"))
    cls = CLASSES[tag](*consts)
    rng = np.random.default_rng(7)
    for _ in range(200):
        x, u = sorted(rng.uniform(-2, 1, 2))[::-1]
        y, v = sorted(rng.uniform(-1, 3, 2))
        got = condition_slack(cls, pair, pt(x, y), pt(u, v))
        want = scalar_slacks(tag, consts, lambda p, q: pair.F(np.array([p]), np.array([q])),
                             lambda p, q: pair.G(np.array([p]), np.array([q])),
                             (x, y), (u, v))
        assert got == pytest.approx(want, abs=1e-14)


def test_verify_condition_examples(ex1, constant_pair):
    rep = verify_condition(EX1, ex1, SamplerConfig(1000, seed=0))
    assert rep.ok and rep.violation_count == 0
    assert abs(rep.worst_slack) <= 1e-14
    bad = verify_condition(BanachType(0.1, 0.1, 0.1, 0.1), ex1, SamplerConfig(1000, seed=0))
    assert not bad.ok and bad.violations
    assert bad.violation_count >= len(bad.violations)
    for cls_type in CLASSES.values():
        cls = cls_type(*[0.1] * len(cls_type.names))
        assert verify_condition(cls, constant_pair).ok


def test_verify_checks_admissibility_first(ex1):
    with pytest.raises(ConfigError):
        verify_condition(BanachType(0.6, 0.6, 0.1, 0.1), ex1)


def test_verify_worst_slack_is_max_of_pairs(ex1):
    cfg = SamplerConfig(300, seed=11)
    cls = KannanType(0.3, 0.3, 0.3, 0.3)
    rep = verify_condition(cls, ex1, cfg)
    vals = comparable_pairs(ex1, cfg)
    worst = -math.inf
    for i in range(len(vals)):
        a = ProductPoint(vals.ax[i], vals.ay[i])
        b = ProductPoint(vals.bx[i], vals.by[i])
        worst = max(worst, *condition_slack(cls, ex1, a, b))
    assert rep.worst_slack == worst


def test_estimate_example1_against_dense_grid_lp(ex1):
    est = estimate_constants("banach", ex1, SamplerConfig(1000, seed=0))
    oracle = dense_grid_banach_lp(lambda x, y: x / 3 - y / 4, lambda y, x: y / 8 - x / 6,
                                  -10, 0, 0, 10)
    assert oracle == pytest.approx((1 / 3, 1 / 4, 1 / 8, 1 / 6), abs=1e-9)
    assert est.constants == pytest.approx(oracle, abs=1e-9)
    assert verify_condition(est, ex1).ok


def test_estimate_constant_maps_gives_zero(constant_pair):
    for tag in ("banach", "kannan", "chatterjea", "reich", "hybrid", "quasi"):
        est = estimate_constants(tag, constant_pair)
        assert est.constants == pytest.approx((0.0,) * len(est.constants), abs=1e-12)


def test_estimate_identity_fails():
    X, Y = box([-1.0], [0.0]), box([0.0], [1.0])
    ident = CoupledMapPair(X, Y, MapSpec.affine([[1.0]], [[0.0]]), MapSpec.affine([[0.5]], [[0.0]]))
    with pytest.raises(EstimationError):
        estimate_constants("banach", ident)


def test_estimate_quasi_example2(ex2):
    est = estimate_constants("quasi", ex2)
    assert est.constants == pytest.approx((1 / 3, 1 / 4), abs=1e-9)


def test_estimate_unknown_tag(ex1):
    with pytest.raises(ConfigError):
        estimate_constants("nope", ex1)
