from fractions import Fraction as Fr

import numpy as np
import pytest

from fgcoupled import (
    ConfigError,
    CoupledMapPair,
    InputError,
    MapSpec,
    ProductPoint,
    SamplerConfig,
    check_closure,
    check_mixed_monotone,
    check_seed,
    eval_F,
    eval_G,
    iterate_n,
    iterate_step,
    residual,
)
from fgcoupled.coupled_maps import BUILTINS, CLAUSE_F_Y, CLAUSE_G_Y

from conftest import box


def pt(x, y):
    return ProductPoint(np.array([float(x)]), np.array([float(y)]))


def test_eval_examples(ex1, ex2, constant_pair):
    assert eval_F(ex1, [-1.0], [1.0])[0] == pytest.approx(-7 / 12, abs=1e-15)
    assert eval_G(ex1, [1.0], [-1.0])[0] == pytest.approx(7 / 24, abs=1e-15)
    assert eval_F(ex2, [-1.0], [1.0])[0] == pytest.approx(-1 / 3, abs=1e-15)
    assert eval_G(ex2, [1.0], [-1.0])[0] == 0.25
    assert eval_F(constant_pair, [-0.9], [0.1])[0] == -0.5
    assert eval_G(constant_pair, [0.9], [-0.1])[0] == 0.5


def test_iterate_step_examples(ex1, constant_pair):
    p1 = iterate_step(ex1, pt(-1, 1))
    assert p1.x[0] == pytest.approx(-7 / 12, abs=1e-15)
    assert p1.y[0] == pytest.approx(7 / 24, abs=1e-15)
    assert iterate_step(ex1, pt(0, 0)) == pt(0, 0)
    assert iterate_step(constant_pair, pt(-0.1, 0.9)) == pt(-0.5, 0.5)


def _exact_iterates(p0, n):
    x, y = Fr(p0[0]), Fr(p0[1])
    out = [(x, y)]
    for _ in range(n):
        x, y = x / 3 - y / 4, y / 8 - x / 6
        out.append((x, y))
    return out


def test_iterate_n_against_rational_oracle(ex1):
    got = iterate_n(ex1, pt(-1, 1), 2)
    want = _exact_iterates((-1, 1), 2)
    assert want[2] == (Fr(-77, 288), Fr(77, 576))
    for p, (x, y) in zip(got, want):
        assert p.x[0] == pytest.approx(float(x), abs=1e-15)
        assert p.y[0] == pytest.approx(float(y), abs=1e-15)


def test_iterate_n_edge_cases(ex1):
    assert iterate_n(ex1, pt(-1, 1), 0) == [pt(-1, 1)]
    assert all(p == pt(0, 0) for p in iterate_n(ex1, pt(0, 0), 5))
    with pytest.raises(InputError):
        iterate_n(ex1, pt(-1, 1), -1)


def test_iterate_n_deterministic(ex1):
    a = iterate_n(ex1, pt(-1, 1), 20)
    b = iterate_n(ex1, pt(-1, 1), 20)
    assert all(np.array_equal(p.x, q.x) and np.array_equal(p.y, q.y) for p, q in zip(a, b))


def test_check_seed_examples(ex1):
    assert check_seed(ex1, pt(-1, 1))
    assert check_seed(ex1, pt(0, 0))
    assert not check_seed(ex1, pt(0, 1))


def test_residual_zero_at_fixed_point(ex1):
    assert residual(ex1, pt(0, 0)) == 0.0
    assert residual(ex1, pt(-1, 1)) == pytest.approx(5 / 12 + 17 / 24)


def test_mixed_monotone(ex1, constant_pair):
    assert check_mixed_monotone(ex1, SamplerConfig(1000, seed=3)).ok
    assert check_mixed_monotone(constant_pair).ok
    bad = CoupledMapPair(ex1.X, ex1.Y, MapSpec.affine([[0.5]], [[0.5]]),
                         MapSpec.affine([[0.5]], [[-0.5]]))
    rep = check_mixed_monotone(bad, SamplerConfig(200, seed=0))
    assert not rep.ok
    assert CLAUSE_F_Y in rep.clauses()
    assert rep.samples_checked == 200
    bad_g = CoupledMapPair(ex1.X, ex1.Y, ex1.F, MapSpec.affine([[-0.5]], [[-0.5]]))
    assert CLAUSE_G_Y in check_mixed_monotone(bad_g, SamplerConfig(200)).clauses()


def test_closure(ex1_unit, ex2):
    assert check_closure(ex2) == []
    leaky = CoupledMapPair(ex2.X, ex2.Y, MapSpec.constant([0.5], 1, 1), ex2.G)
    v = check_closure(leaky, SamplerConfig(10))
    assert v and all(w.which == "F" for w in v)


def test_builtins_match_affine_forms():
    X, Y = box([-1.0], [0.0]), box([0.0], [1.0])
    b = CoupledMapPair(X, Y, MapSpec.builtin("third_minus_quarter"),
                       MapSpec.builtin("eighth_minus_sixth"))
    assert eval_F(b, [-1.0], [1.0])[0] == pytest.approx(-7 / 12)
    assert eval_G(b, [1.0], [-1.0])[0] == pytest.approx(7 / 24)
    assert not b.is_affine
    assert set(BUILTINS) >= {"third", "quarter", "eighth_minus_eighth"}


def test_map_validation():
    X, Y = box([-1.0], [0.0]), box([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ConfigError):
        MapSpec.builtin("nope")
    with pytest.raises(InputError):
        CoupledMapPair(X, Y, MapSpec.affine([[1.0]], [[1.0]]), MapSpec.affine(np.eye(2)[:, :1], np.eye(2)))
    with pytest.raises(InputError):
        CoupledMapPair(X, Y, MapSpec.builtin("third"), MapSpec.builtin("quarter"))


def test_argument_dimension_errors(ex1):
    with pytest.raises(InputError):
        eval_F(ex1, [0.0, 0.0], [0.0])
