"""Self-contained special functions: cylinder functions and elliptic integrals.

Cylinder functions J_n, Y_n (and H_n = J_n + iY_n) are computed for integer
order by a single downward Miller sweep per argument batch:

* the sweep is normalized with the identity ``J_0 + 2*sum_m J_{2m} = 1``,
* Y_0 and Y_1 come from Neumann-type series accumulated during the same
  sweep, ``Y_0 = (2/pi)[(ln(x/2)+gamma) J_0 + 2 sum (-1)^{k+1} J_{2k}/k]``
  and ``Y_1 = -dY_0/dx``,
* higher Y orders follow by (stable) upward recurrence.

Magnitudes of J_n/Y_n span far beyond the double exponent range for small
arguments at high order (|Y_150(0.05)| ~ 1e502), so the core carries a
separate power-of-two exponent per value.  Plain-float entry points flush
out-of-range results to 0/inf; the ``*_scaled`` entry points and
:func:`wronskian_jy` keep the exponent so identities remain checkable over
the full supported range.  All arithmetic stays in double precision.

The complete elliptic integral K uses the arithmetic-geometric mean, and
the Carlson symmetric integral R_F the duplication algorithm for complex
arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

EULER_GAMMA = 0.5772156649015328606065

MAX_ORDER = 300
MAX_ARGUMENT = 200.0

_TWO_OVER_PI = 2.0 / math.pi
_TINY_X = 1e-8
_LN2 = math.log(2.0)

# Power-of-two rescaling keeps mantissas exact while tracking huge ranges.
_RESCALE_EXP = 500
_RESCALE_UP = math.ldexp(1.0, _RESCALE_EXP)
_RESCALE_DOWN = math.ldexp(1.0, -_RESCALE_EXP)


def _check_order_argument(n, x):
    if abs(n) > MAX_ORDER:
        raise DomainError(f"order |n|={abs(n)} exceeds supported maximum {MAX_ORDER}")
    if not (0.0 < x <= MAX_ARGUMENT):
        raise DomainError(f"argument x={x!r} outside supported range (0, {MAX_ARGUMENT}]")


def _miller_start(nmax, xmax):
    """Start order for the downward sweep: deep enough in the decaying
    regime that the minimal solution dominates to below 1e-18."""
    base = max(nmax, int(math.ceil(xmax)))
    pad = 20 + int(math.ceil(14.0 * max(1.0, xmax) ** (1.0 / 3.0)))
    return base + pad


def _normalize_rows(mant, expo):
    """frexp-normalize mantissa/exponent arrays in place-ish."""
    m, e = np.frexp(mant)
    return m, expo + e.astype(np.int64)


def _jy_scaled_tiny(nmax, x):
    """Leading-order forms for x < 1e-8 (relative error below 1e-16)."""
    npts = x.size
    jm = np.zeros((nmax + 1, npts))
    je = np.zeros((nmax + 1, npts), dtype=np.int64)
    ym = np.zeros((nmax + 1, npts))
    ye = np.zeros((nmax + 1, npts), dtype=np.int64)

    log2_half_x = np.log2(0.5 * x)
    c = np.log(0.5 * x) + EULER_GAMMA
    x2q = 0.25 * x * x
    for n in range(nmax + 1):
        log2_j = n * log2_half_x - math.lgamma(n + 1) / _LN2
        e = np.floor(log2_j)
        jm[n] = np.exp2(log2_j - e) * (1.0 - x2q / (n + 1))
        je[n] = e.astype(np.int64)
    ym[0] = _TWO_OVER_PI * c  # J_0 ~ 1
    for n in range(1, nmax + 1):
        log2_y = (math.lgamma(n) - math.log(math.pi)) / _LN2 + n * np.log2(2.0 / x)
        e = np.floor(log2_y)
        ym[n] = -np.exp2(log2_y - e)
        ye[n] = e.astype(np.int64)
    jm, je = _normalize_rows(jm, je)
    ym, ye = _normalize_rows(ym, ye)
    return jm, je, ym, ye


def _jy_scaled_batch(nmax, x):
    """Miller sweep for a batch of arguments (all in [_TINY_X, MAX_ARGUMENT])."""
    npts = x.size
    M = _miller_start(nmax, float(np.max(x)))
    inv_x = 1.0 / x

    fp = np.zeros(npts)            # f_{n+1}
    fc = np.ones(npts)             # f_n, starting at n = M
    f2 = np.zeros(npts)            # f_{n+2}
    exp_f = np.zeros(npts, dtype=np.int64)
    norm = np.zeros(npts)          # f_0 + 2 sum f_{2k}
    s0 = np.zeros(npts)            # sum (-1)^{k+1} f_{2k}/k
    s1 = np.zeros(npts)            # sum (-1)^{k+1} (f_{2k-1}-f_{2k+1})/(2k)

    jm = np.zeros((nmax + 1, npts))
    je = np.zeros((nmax + 1, npts), dtype=np.int64)

    for n in range(M, -1, -1):
        if n <= nmax:
            jm[n] = fc
            je[n] = exp_f
        if n == 0:
            norm += fc
        elif n % 2 == 0:
            norm += 2.0 * fc
            k = n // 2
            s0 += (fc / k) if (k % 2 == 1) else (-fc / k)
        else:
            k = (n + 1) // 2
            term = (fc - f2) / (n + 1)
            s1 += term if (k % 2 == 1) else -term
        if n > 0:
            fc, fp, f2 = (2.0 * n) * inv_x * fc - fp, fc, fp
            big = np.abs(fc) > _RESCALE_UP
            if big.any():
                for arr in (fc, fp, f2, norm, s0, s1):
                    arr[big] *= _RESCALE_DOWN
                exp_f[big] += _RESCALE_EXP

    # Normalize: J_n = (jm[n]/norm) * 2^{je[n] - exp_f - ne}.
    nmant, ne = np.frexp(norm)
    jm /= nmant
    je -= exp_f + ne.astype(np.int64)
    jm, je = _normalize_rows(jm, je)

    # Seeds for Y: both O(1)-representable for x >= _TINY_X.
    c = np.log(0.5 * x) + EULER_GAMMA
    j0 = np.ldexp(jm[0], je[0].astype(np.int32))
    ss0 = (s0 / nmant) * np.exp2(-ne)
    y0 = _TWO_OVER_PI * (c * j0 + 2.0 * ss0)

    ym = np.zeros((nmax + 1, npts))
    ye = np.zeros((nmax + 1, npts), dtype=np.int64)
    ym[0] = y0
    if nmax >= 1:
        j1 = np.ldexp(jm[1], je[1].astype(np.int32))
        ss1 = (s1 / nmant) * np.exp2(-ne)
        y1 = -_TWO_OVER_PI * (j0 * inv_x - c * j1 + 2.0 * ss1)
        ym[1] = y1
        ya, yb = y0.copy(), y1.copy()
        ey = np.zeros(npts, dtype=np.int64)
        for n in range(1, nmax):
            ya, yb = yb, (2.0 * n) * inv_x * yb - ya
            big = np.abs(yb) > _RESCALE_UP
            if big.any():
                ya[big] *= _RESCALE_DOWN
                yb[big] *= _RESCALE_DOWN
                ey[big] += _RESCALE_EXP
            ym[n + 1] = yb
            ye[n + 1] = ey
    ym, ye = _normalize_rows(ym, ye)
    return jm, je, ym, ye


def cylinder_jy_scaled(nmax, x):
    """J_n and Y_n for n = 0..nmax with power-of-two exponent tracking.

    Parameters
    ----------
    nmax : int
        Highest (nonnegative) order, <= MAX_ORDER.
    x : array_like
        Positive arguments, <= MAX_ARGUMENT.

    Returns
    -------
    jm, je, ym, ye : np.ndarray, shape (nmax+1, len(x))
        Mantissas (float) and base-2 exponents (int64); the represented
        value is ``mantissa * 2**exponent``.
    """
    if not 0 <= nmax <= MAX_ORDER:
        raise DomainError(f"nmax={nmax} outside [0, {MAX_ORDER}]")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise DomainError("x must be one-dimensional")
    if np.any(x <= 0.0) or np.any(x > MAX_ARGUMENT):
        raise DomainError(f"arguments must lie in (0, {MAX_ARGUMENT}]")

    tiny = x < _TINY_X
    if not tiny.any():
        return _jy_scaled_batch(nmax, x)
    if tiny.all():
        return _jy_scaled_tiny(nmax, x)
    jm = np.zeros((nmax + 1, x.size))
    je = np.zeros((nmax + 1, x.size), dtype=np.int64)
    ym = np.zeros_like(jm)
    ye = np.zeros_like(je)
    a = _jy_scaled_tiny(nmax, x[tiny])
    b = _jy_scaled_batch(nmax, x[~tiny])
    for dst, src in zip((jm, je, ym, ye), a):
        dst[:, tiny] = src
    for dst, src in zip((jm, je, ym, ye), b):
        dst[:, ~tiny] = src
    return jm, je, ym, ye


def cylinder_jy(nmax, x):
    """Plain-float J_n(x), Y_n(x) for n = 0..nmax, shape (nmax+1, len(x)).

    Values outside the double range flush to 0 (J underflow) or +-inf
    (Y overflow); use the scaled variant where extremes matter.
    """
    jm, je, ym, ye = cylinder_jy_scaled(nmax, x)
    with np.errstate(over="ignore", under="ignore"):
        j = np.ldexp(jm, np.clip(je, -2400, 2400).astype(np.int32))
        y = np.ldexp(ym, np.clip(ye, -2400, 2400).astype(np.int32))
    return j, y


def hankel1_orders(nmax, x):
    """H_n(x) = J_n(x) + i Y_n(x) for n = 0..nmax, shape (nmax+1, len(x))."""
    j, y = cylinder_jy(nmax, x)
    return j + 1j * y


def bessel_j(n, x):
    """Bessel function of the first kind, integer order."""
    _check_order_argument(n, x)
    j, _ = cylinder_jy(abs(n), np.array([x]))
    val = float(j[abs(n), 0])
    return -val if (n < 0 and n % 2) else val


def bessel_y(n, x):
    """Bessel function of the second kind, integer order."""
    _check_order_argument(n, x)
    _, y = cylinder_jy(abs(n), np.array([x]))
    val = float(y[abs(n), 0])
    return -val if (n < 0 and n % 2) else val


def hankel1(n, x):
    """Hankel function of the first kind, H_n = J_n + i Y_n."""
    _check_order_argument(n, x)
    j, y = cylinder_jy(abs(n), np.array([x]))
    val = complex(j[abs(n), 0], y[abs(n), 0])
    return -val if (n < 0 and n % 2) else val


def hankel1_derivative(n, x):
    """H_n'(x) via H_n' = H_{n-1} - (n/x) H_n (with H_{-1} = -H_1)."""
    _check_order_argument(n, x)
    m = abs(n)
    j, y = cylinder_jy(max(m, 1), np.array([x]))
    h = j[:, 0] + 1j * y[:, 0]
    hm = complex(h[m]) if m >= 0 else 0.0
    hprev = complex(h[m - 1]) if m >= 1 else -complex(h[1])
    d = hprev - (m / x) * hm
    return -d if (n < 0 and n % 2) else d


@dataclass(frozen=True)
class CylinderEval:
    """J_n, Y_n and their derivatives at a single point."""

    n: int
    x: float
    j: float
    y: float
    jp: float
    yp: float


def cylinder_eval(n, x):
    """Evaluate J_n, Y_n, J_n', Y_n' at x (plain doubles)."""
    _check_order_argument(n, x)
    m = abs(n)
    j, y = cylinder_jy(max(m, 1), np.array([x]))
    jn, yn = float(j[m, 0]), float(y[m, 0])
    if m == 0:
        jp, yp = -float(j[1, 0]), -float(y[1, 0])
    else:
        jp = float(j[m - 1, 0]) - (m / x) * jn
        yp = float(y[m - 1, 0]) - (m / x) * yn
    if n < 0 and n % 2:
        jn, yn, jp, yp = -jn, -yn, -jp, -yp
    return CylinderEval(n=n, x=float(x), j=jn, y=yn, jp=jp, yp=yp)


def _scaled_sub(m1, e1, m2, e2):
    """(m1*2^e1 - m2*2^e2) as a normalized (mantissa, exponent) pair."""
    e = max(e1, e2)
    m = m1 * math.ldexp(1.0, int(e1 - e)) - m2 * math.ldexp(1.0, int(e2 - e))
    mm, de = math.frexp(m)
    return mm, e + de


def wronskian_jy(n, x):
    """J_n(x) Y_n'(x) - J_n'(x) Y_n(x), evaluated with exponent tracking.

    The product is O(1/x) even where the factors leave the double range,
    so the identity remains checkable at any supported (n, x).
    """
    _check_order_argument(n, x)
    m = abs(n)
    jm, je, ym, ye = cylinder_jy_scaled(max(m, 1), np.array([x]))
    jn, jen = float(jm[m, 0]), int(je[m, 0])
    yn, yen = float(ym[m, 0]), int(ye[m, 0])
    if m == 0:
        jp, jep = -float(jm[1, 0]), int(je[1, 0])
        yp, yep = -float(ym[1, 0]), int(ye[1, 0])
    else:
        jp, jep = _scaled_sub(float(jm[m - 1, 0]), int(je[m - 1, 0]),
                              (m / x) * jn, jen)
        yp, yep = _scaled_sub(float(ym[m - 1, 0]), int(ye[m - 1, 0]),
                              (m / x) * yn, yen)
    wm, we = _scaled_sub(jn * yp, jen + yep, jp * yn, jep + yen)
    return math.ldexp(wm, int(we))


def elliptic_K(k):
    """Complete elliptic integral of the first kind, modulus k in [0, 1).

    Arithmetic-geometric mean iteration: K = pi / (2 AGM(1, sqrt(1-k^2))).
    """
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise DomainError(f"modulus k={k!r} outside [0, 1)")
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    for _ in range(60):
        if abs(a - b) <= 1e-17 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def carlson_rf(x, y, z):
    """Carlson symmetric elliptic integral R_F for complex arguments.

    Duplication algorithm with a fifth-order Taylor tail; accepts scalars
    or broadcastable arrays.  Arguments must avoid the negative real axis
    (branch cut) and at most one may be zero.
    """
    xa = np.asarray(x, dtype=complex)
    ya = np.asarray(y, dtype=complex)
    za = np.asarray(z, dtype=complex)
    xb, yb, zb = np.broadcast_arrays(xa, ya, za)
    for name, v in (("x", xb), ("y", yb), ("z", zb)):
        on_cut = (v.real < 0.0) & (v.imag == 0.0)
        if np.any(on_cut):
            raise DomainError(f"argument {name} lies on the negative real axis")
    zeros = (xb == 0).astype(int) + (yb == 0).astype(int) + (zb == 0).astype(int)
    if np.any(zeros > 1):
        raise DomainError("at most one Carlson argument may be zero")
    out = rf_unchecked(xb, yb, zb)
    if np.isscalar(x) and np.isscalar(y) and np.isscalar(z):
        return complex(out)
    return out


def rf_unchecked(x, y, z, max_iter=120):
    """R_F duplication without cut-plane validation (principal sqrt limits)."""
    x0 = np.array(x, dtype=complex, copy=True, ndmin=1)
    y0 = np.array(y, dtype=complex, copy=True, ndmin=1)
    z0 = np.array(z, dtype=complex, copy=True, ndmin=1)
    x0, y0, z0 = np.broadcast_arrays(x0, y0, z0)
    shape = x0.shape
    xc = x0.astype(complex).ravel()
    yc = y0.astype(complex).ravel()
    zc = z0.astype(complex).ravel()

    a0 = (xc + yc + zc) / 3.0
    q = (3.0 * np.finfo(float).eps) ** (-0.125) * np.maximum(
        np.abs(a0 - xc), np.maximum(np.abs(a0 - yc), np.abs(a0 - zc))
    )
    a = a0.copy()
    scale = 1.0
    converged = False
    for _ in range(max_iter):
        if np.all(q <= scale * np.abs(a)):
            converged = True
            break
        sx, sy, sz = np.sqrt(xc), np.sqrt(yc), np.sqrt(zc)
        lam = sx * sy + sx * sz + sy * sz
        xc = 0.25 * (xc + lam)
        yc = 0.25 * (yc + lam)
        zc = 0.25 * (zc + lam)
        a = 0.25 * (a + lam)
        scale *= 4.0
    if not converged and not np.all(q <= scale * np.abs(a)):
        worst = float(np.max(q / (scale * np.abs(a))))
        raise ConvergenceError(
            f"Carlson R_F duplication did not converge in {max_iter} "
            f"iterations (residual ratio {worst:.3e})"
        )
    dx = (a0 - x0.ravel()) / (scale * a)
    dy = (a0 - y0.ravel()) / (scale * a)
    dz = -(dx + dy)
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    series = (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0
              - 3.0 * e2 * e3 / 44.0 - 5.0 * e2 ** 3 / 208.0
              + 3.0 * e3 * e3 / 104.0 + e2 * e2 * e3 / 16.0)
    out = (series / np.sqrt(a)).reshape(shape)
    return out
