"""Pure-Python (numpy-vectorized) fallback for the compiled kernels.

Must stay numerically interchangeable with ``_kernels.pyx``; the test suite
runs both against each other.
"""
import numpy as np

OK = 0
FORBIDDEN = 1
NON_MONOTONE = 2
NO_BRACKET = 3

_MAX_EXPAND = 200
_MAX_ITER = 400


def _residual(u, g0, c2, coeffs):
    """g(u) = g0 + c2 u + sum_j a_j u^(j+1) and its derivative, vectorized over nodes."""
    K = coeffs.shape[1]
    # Horner on the coefficients of u^1 .. u^K
    g = np.zeros_like(u)
    dg = np.zeros_like(u)
    for j in range(K - 1, -1, -1):
        a = coeffs[:, j] + (c2 if j == 0 else 0.0)
        dg = dg * u + g
        g = g * u + a
    # g now holds sum a_j u^j (j from 0), so multiply by u once more
    dg = dg * u + g
    g = g * u + g0
    return g, dg


def momentum_roots(w, d0, coeffs, c2, u_init, rtol=1e-15):
    """Solve ``d0 + c2 u + sum_j coeffs[:, j] u^(j+1) = w^2`` for ``u = P^2 >= 0``.

    ``w`` is the kinetic budget ``E - U(x)`` and ``d0`` the zero-momentum
    radicand ``m^2 c^4 + V(x, 0)``.  Returns ``(P, status)`` with ``P = nan``
    wherever status is nonzero.
    """
    w = np.ascontiguousarray(w, dtype=float)
    d0 = np.ascontiguousarray(d0, dtype=float)
    coeffs = np.ascontiguousarray(coeffs, dtype=float).reshape(w.size, -1)
    n = w.size
    P = np.full(n, np.nan)
    status = np.full(n, FORBIDDEN, dtype=np.int8)

    sq = np.sqrt(np.where(d0 >= 0, d0, 0.0))
    g0 = np.where(d0 >= 0, (sq - w) * (sq + w), d0 - w * w)
    ok = (w >= 0) & (g0 <= 0)
    zero = ok & (g0 == 0)
    P[zero] = 0.0
    status[zero] = OK
    pending = np.flatnonzero(ok & (g0 < 0))
    if pending.size == 0:
        return P, status

    if coeffs.shape[1] == 0 or not np.any(coeffs[pending]):
        P[pending] = np.sqrt(-g0[pending] / c2)
        status[pending] = OK
        return P, status

    g0t = g0[pending]
    ct = coeffs[pending]
    lo = np.zeros(pending.size)
    glo = g0t.copy()
    hi = np.full(pending.size, float(u_init))
    ghi, _ = _residual(hi, g0t, c2, ct)
    st = np.zeros(pending.size, dtype=np.int8)

    for _ in range(_MAX_EXPAND):
        need = (ghi <= 0) & (st == OK)
        if not need.any():
            break
        bad = need & (ghi < glo)
        st[bad] = NON_MONOTONE
        need &= ~bad
        lo[need] = hi[need]
        glo[need] = ghi[need]
        hi[need] *= 4.0
        ghi_new, _ = _residual(hi[need], g0t[need], c2, ct[need])
        ghi[need] = ghi_new
    st[(ghi <= 0) & (st == OK)] = NO_BRACKET

    # safeguarded Newton (rtsafe), starting from the secant point
    active = st == OK
    u = np.where(active, lo - glo * (hi - lo) / np.where(ghi != glo, ghi - glo, 1.0), 0.0)
    for _ in range(_MAX_ITER):
        if not active.any():
            break
        ia = np.flatnonzero(active)
        g, dg = _residual(u[ia], g0t[ia], c2, ct[ia])
        nonmono = dg <= 0
        st[ia[nonmono]] = NON_MONOTONE
        exact = g == 0
        neg = g < 0
        lo[ia] = np.where(neg, u[ia], lo[ia])
        hi[ia] = np.where(~neg & ~exact, u[ia], hi[ia])
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = u[ia] - g / dg
        outside = ~((newton > lo[ia]) & (newton < hi[ia])) | nonmono
        new = np.where(outside, 0.5 * (lo[ia] + hi[ia]), newton)
        new = np.where(exact, u[ia], new)
        step = np.abs(new - u[ia])
        u[ia] = new
        done = exact | nonmono | (step <= rtol * np.abs(new)) | (hi[ia] - lo[ia] <= rtol * hi[ia])
        active[ia[done]] = False

    good = st == OK
    P[pending[good]] = np.sqrt(u[good])
    status[pending] = st
    return P, status
