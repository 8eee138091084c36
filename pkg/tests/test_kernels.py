"""Both kernel backends must agree bit for bit."""

import numpy as np
import pytest

from fgcoupled import _kernels
from fgcoupled.coupled_maps import affine_apply

BACKENDS = _kernels.available_backends()
REF = BACKENDS["python"]


def _random_affine(rng, dx, dy):
    AF = rng.uniform(0, 0.3, (dx, dx))
    BF = -rng.uniform(0, 0.3, (dx, dy))
    AG = rng.uniform(0, 0.3, (dy, dy))
    BG = -rng.uniform(0, 0.3, (dy, dx))
    return AF, BF, rng.normal(size=dx), AG, BG, rng.normal(size=dy)


def test_backend_selection():
    assert _kernels.BACKEND in BACKENDS
    assert _kernels.picard_affine is BACKENDS[_kernels.BACKEND].picard_affine


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("dims", [(1, 1), (2, 3), (9, 2), (130, 4)])
def test_picard_matches_reference(name, dims):
    rng = np.random.default_rng(sum(dims))
    dx, dy = dims
    maps = _random_affine(rng, dx, dy)
    x0, y0 = rng.normal(size=dx), rng.normal(size=dy)
    got = BACKENDS[name].picard_affine(*maps, x0, y0, 1e-12, 1e-12, 500, 1e12)
    want = REF.picard_affine(*maps, x0, y0, 1e-12, 1e-12, 500, 1e12)
    for g, w in zip(got[:4], want[:4]):
        assert np.array_equal(np.asarray(g), np.asarray(w))
    assert got[4] == want[4]


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_picard_rows_match_affine_apply(name):
    rng = np.random.default_rng(5)
    AF, BF, cF, AG, BG, cG = _random_affine(rng, 3, 2)
    xs, ys, steps, res, status = BACKENDS[name].picard_affine(
        AF, BF, cF, AG, BG, cG, np.zeros(3), np.zeros(2), 1e-12, 1e-12, 50, 1e12)
    xs, ys = np.asarray(xs), np.asarray(ys)
    assert np.array_equal(xs[1:], affine_apply(AF, BF, cF, xs[:-1], ys[:-1]))
    assert np.array_equal(ys[1:], affine_apply(AG, BG, cG, ys[:-1], xs[:-1]))


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_picard_status_codes(name):
    k = BACKENDS[name]
    one = np.ones((1, 1))
    zero = np.zeros((1, 1))
    out = k.picard_affine(one * 3, zero, np.ones(1), one * 0.5, zero, np.zeros(1),
                          np.ones(1), np.ones(1), 1e-12, 1e-12, 1000, 1e12)
    assert out[4] == _kernels.DIVERGED
    out = k.picard_affine(one * 0.5, zero, np.zeros(1), one * 0.5, zero, np.zeros(1),
                          np.ones(1), np.ones(1), 1e-300, 1e-300, 5, 1e12)
    assert out[4] == _kernels.MAX_ITER and np.asarray(out[0]).shape == (6, 1)


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("code", range(6))
@pytest.mark.parametrize("dims", [(1, 1), (3, 2), (12, 9)])
def test_pair_slacks_match(name, code, dims):
    rng = np.random.default_rng(code * 31 + dims[0])
    n, (dx, dy) = 64, dims
    arrs = [rng.normal(size=(n, d)) for d in (dx, dy, dx, dy, dx, dx, dy, dy)]
    consts = rng.uniform(0, 0.4, 4)
    got = BACKENDS[name].pair_slacks(code, consts, *arrs)
    want = REF.pair_slacks(code, consts, *arrs)
    for g, w in zip(got, want):
        assert np.array_equal(np.asarray(g), np.asarray(w))


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("code", range(6))
def test_grid_scan_match(name, code):
    rng = np.random.default_rng(code)
    g = np.linspace(-1, 1, 7)
    X, Y = np.meshgrid(g, g, indexing="ij")
    px, py = X.reshape(-1, 1), Y.reshape(-1, 1)
    Fp = 0.6 * px - 0.5 * py + 0.05 * rng.normal(size=px.shape)
    Gp = 0.6 * py - 0.5 * px
    consts = np.array([0.2, 0.15, 0.1, 0.05])
    got = BACKENDS[name].grid_scan(code, consts, px, py, Fp, Gp, 1e-12, 10)
    want = REF.grid_scan(code, consts, px, py, Fp, Gp, 1e-12, 10)
    assert got[:4] == want[:4]
    assert np.array_equal(np.asarray(got[4]), np.asarray(want[4]))
    assert np.array_equal(np.asarray(got[5]), np.asarray(want[5]))
    assert want[1] > 0


def test_grid_scan_counts_pairs():
    g = np.linspace(0, 1, 4)
    X, Y = np.meshgrid(g, g, indexing="ij")
    px, py = X.reshape(-1, 1), Y.reshape(-1, 1)
    out = REF.grid_scan(0, np.zeros(4), px, py, np.zeros_like(px), np.zeros_like(py), 1e-12, 5)
    # ordered pairs (i >= j): 10 per axis, including equal points
    assert out[0] == 100 and out[1] == 0
