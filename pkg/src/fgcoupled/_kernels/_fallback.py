"""Pure-Python/NumPy implementations of the hot kernels.

Every function here has a compiled twin in ``_core.pyx`` with the same
signature and the same floating-point operation order, so both backends
return bit-identical results.
"""

import numpy as np

BANACH, KANNAN, CHATTERJEA, REICH, HYBRID, QUASI = range(6)

CONVERGED, MAX_ITER, DIVERGED = 0, 1, 2


def _l1(P, Q):
    return np.abs(P - Q).sum(axis=-1)


def pair_slacks(code, consts, ax, ay, bx, by, Fa, Fb, Ga, Gb):
    """Both sides of the contraction inequality on pairs ``a >= b``.

    Row i describes the pair ``a = (ax[i], ay[i])``, ``b = (bx[i], by[i])``
    with ``Fa = F(a.x, a.y)``, ``Fb = F(b.x, b.y)``, ``Ga = G(a.y, a.x)``,
    ``Gb = G(b.y, b.x)``. The F inequality reads ``(x, y) = a``,
    ``(u, v) = b``; the G inequality quantifies over ``x <= u, y >= v``, so
    there ``(x, y) = b`` and ``(u, v) = a``.

    Returns ``(lhs_F, rhs_F, lhs_G, rhs_G)``.
    """
    k0, k1, k2, _ = (float(c) for c in consts)
    dxu = _l1(ax, bx)
    dyv = _l1(ay, by)
    lhs_f = _l1(Fa, Fb)
    lhs_g = _l1(Gb, Ga)

    if code == BANACH:
        k3 = float(consts[3])
        rhs_f = k0 * dxu + k1 * dyv
        rhs_g = k2 * dyv + k3 * dxu
        return lhs_f, rhs_f, lhs_g, rhs_g

    # x = ax, u = bx, F(x,y) = Fa, F(u,v) = Fb
    d_x_fxy = _l1(ax, Fa)
    d_u_fuv = _l1(bx, Fb)
    d_x_fuv = _l1(ax, Fb)
    d_u_fxy = _l1(bx, Fa)
    # y = by, v = ay, G(y,x) = Gb, G(v,u) = Ga
    d_y_gyx = _l1(by, Gb)
    d_v_gvu = _l1(ay, Ga)
    d_y_gvu = _l1(by, Ga)
    d_v_gyx = _l1(ay, Gb)

    if code == KANNAN:
        k3 = float(consts[3])
        rhs_f = k0 * d_x_fxy + k1 * d_u_fuv
        rhs_g = k2 * d_y_gyx + k3 * d_v_gvu
    elif code == CHATTERJEA:
        k3 = float(consts[3])
        rhs_f = k0 * d_x_fuv + k1 * d_u_fxy
        rhs_g = k2 * d_y_gvu + k3 * d_v_gyx
    elif code == REICH:
        rhs_f = k0 * d_x_fxy + k1 * d_u_fuv + k2 * dxu
        rhs_g = k0 * d_y_gyx + k1 * d_v_gvu + k2 * dyv
    elif code == HYBRID:
        rhs_f = k0 * d_x_fuv + k1 * d_u_fxy + k2 * dxu
        rhs_g = k0 * d_y_gvu + k1 * d_v_gyx + k2 * dyv
    elif code == QUASI:
        m_val = np.maximum.reduce([dxu, d_x_fxy, d_x_fuv, d_u_fuv, d_u_fxy])
        n_val = np.maximum.reduce([dyv, d_y_gyx, d_y_gvu, d_v_gvu, d_v_gyx])
        rhs_f = k0 * m_val
        rhs_g = k1 * n_val
    else:
        raise ValueError(f"unknown class code {code}")
    return lhs_f, rhs_f, lhs_g, rhs_g


def grid_scan(code, consts, px, py, Fp, Gp, rtol, max_keep):
    """Exhaustive slack scan over every ordered comparable pair of grid points.

    A pair ``(i, j)`` is scanned when point i >= point j in the mixed product
    order (``px[i] >= px[j]`` and ``py[i] <= py[j]`` componentwise). A side
    violates when ``lhs - rhs > rtol * (lhs + rhs)``.

    Returns ``(n_pairs, n_violations, worst_f, worst_g, kept_idx, kept_vals)``
    where ``kept_idx`` holds up to ``max_keep`` violating ``(i, j)`` index
    pairs in scan order and ``kept_vals`` their ``(lhs_F, rhs_F, lhs_G, rhs_G)``.
    """
    n = px.shape[0]
    n_pairs = 0
    n_viol = 0
    worst_f = -np.inf
    worst_g = -np.inf
    kept_idx = []
    kept_vals = []
    for i in range(n):
        mask = np.all(px[i] >= px, axis=1) & np.all(py[i] <= py, axis=1)
        js = np.flatnonzero(mask)
        if js.size == 0:
            continue
        m = js.size
        lf, rf, lg, rg = pair_slacks(
            code, consts,
            np.broadcast_to(px[i], (m, px.shape[1])),
            np.broadcast_to(py[i], (m, py.shape[1])),
            px[js], py[js],
            np.broadcast_to(Fp[i], (m, Fp.shape[1])), Fp[js],
            np.broadcast_to(Gp[i], (m, Gp.shape[1])), Gp[js],
        )
        sf = lf - rf
        sg = lg - rg
        n_pairs += m
        worst_f = max(worst_f, float(sf.max()))
        worst_g = max(worst_g, float(sg.max()))
        bad = (sf > rtol * (lf + rf)) | (sg > rtol * (lg + rg))
        nb = int(bad.sum())
        if nb:
            n_viol += nb
            room = max_keep - len(kept_idx)
            for j_local in np.flatnonzero(bad)[:room]:
                kept_idx.append((i, int(js[j_local])))
                kept_vals.append((lf[j_local], rf[j_local], lg[j_local], rg[j_local]))
    kept_idx = np.array(kept_idx, dtype=np.int64).reshape(-1, 2)
    kept_vals = np.array(kept_vals, dtype=float).reshape(-1, 4)
    return n_pairs, n_viol, worst_f, worst_g, kept_idx, kept_vals


def _affine(A, B, c, first, second):
    out = c.copy()
    for j in range(A.shape[1]):
        out += A[:, j] * first[j]
    for j in range(B.shape[1]):
        out += B[:, j] * second[j]
    return out


def picard_affine(AF, BF, cF, AG, BG, cG, x0, y0, tol_step, tol_residual,
                  max_iter, diverge_at):
    """Simultaneous Picard iteration for affine F and G.

    Stops at the first iterate j whose incoming step and own residual are both
    within tolerance (at j = 0 the residual doubles as the step), after
    ``max_iter`` steps, or when a step exceeds ``diverge_at``.

    Returns ``(xs, ys, steps, residuals, status)``.
    """
    x = np.array(x0, dtype=float)
    y = np.array(y0, dtype=float)
    fx = _affine(AF, BF, cF, x, y)
    gy = _affine(AG, BG, cG, y, x)
    res = float(np.abs(fx - x).sum()) + float(np.abs(gy - y).sum())
    xs, ys, steps, residuals = [x], [y], [], [res]
    status = MAX_ITER
    if res <= tol_step and res <= tol_residual:
        status = CONVERGED
    else:
        for _ in range(max_iter):
            step = float(np.abs(fx - x).sum()) + float(np.abs(gy - y).sum())
            x, y = fx, gy
            fx = _affine(AF, BF, cF, x, y)
            gy = _affine(AG, BG, cG, y, x)
            res = float(np.abs(fx - x).sum()) + float(np.abs(gy - y).sum())
            xs.append(x)
            ys.append(y)
            steps.append(step)
            residuals.append(res)
            if not step <= diverge_at:
                status = DIVERGED
                break
            if step <= tol_step and res <= tol_residual:
                status = CONVERGED
                break
    return (np.array(xs), np.array(ys), np.array(steps, dtype=float),
            np.array(residuals, dtype=float), status)
