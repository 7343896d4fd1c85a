"""Real-order parabolic cylinder functions, the real gamma function and
Hermite polynomials.

``D_nu(z)`` is evaluated without any series that cancels catastrophically:

* integer ``nu >= 0``: the Hermite-type recurrence ``D_{n+1} = z D_n - n D_{n-1}``
  started from ``D_0 = exp(-z^2/4)``;
* ``nu <= -1``: the integral representation

      D_nu(z) = exp(-z^2/4) / Gamma(-nu) * int_0^inf t^(-nu-1) exp(-z t - t^2/2) dt

  whose integrand is positive for every real ``z``;
* other ``nu`` and ``z >= 0``: two integral-represented orders below ``-2``
  followed by the upward order recurrence, which is forward stable for
  ``z >= 0``;
* other ``nu`` and ``z < 0``: the connection formula

      D_nu(-x) = cos(pi nu) D_nu(x) + pi / Gamma(-nu) * V(-nu-1/2, x)

  with Weber's second solution ``V`` integrated outward from ``x = 0`` by a
  Taylor-series ODE stepper (``V`` dominates for ``x > 0``, so the
  integration direction is the stable one).

All internal kernels work with a mantissa and a natural-log scale so that
orders up to several thousand and ``|z|`` up to ~60 do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

EPS = float(np.finfo(float).eps)
SQRT_2PI = math.sqrt(2.0 * math.pi)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(96)
_GL_U = 0.5 * (_GL_X + 1.0)
_GL_WU = 0.5 * _GL_W

_RENORM = 1e150
_TAIL_LOG = -46.0  # integrand cut-off relative to the peak (e^-46 ~ 1e-20)


class PoleError(ValueError):
    """Raised when the gamma function is requested at (or near) a pole."""


@dataclass(frozen=True)
class EvalResult:
    """A function value with an estimated absolute error bound."""

    value: float
    abs_error_estimate: float

    def __float__(self) -> float:
        return self.value


def _near_nonpositive_integer(x: float, tol: float) -> bool:
    return x <= 0.5 and abs(x - round(x)) < tol


def gamma_real(x: float, pole_tol: float = 1e-12) -> float:
    """Gamma function on the real line.

    Raises
    ------
    PoleError
        If ``x`` lies within ``pole_tol`` of zero or a negative integer.
    """
    x = float(x)
    if _near_nonpositive_integer(x, pole_tol):
        raise PoleError(f"gamma has a pole at x={x!r}")
    return math.gamma(x)


def rgamma_real(x: float, pole_tol: float = 1e-12) -> float:
    """``1/Gamma(x)``, returning exactly 0 at the poles."""
    x = float(x)
    if _near_nonpositive_integer(x, pole_tol):
        return 0.0
    if x > 171.0:
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


def hermite_phys(n: int, u):
    """Physicists' Hermite polynomial ``H_n(u)`` by three-term recurrence."""
    if n < 0:
        raise ValueError("n must be non-negative")
    u = np.asarray(u, dtype=float)
    h_prev = np.ones_like(u)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * u
    for k in range(1, n):
        h_prev, h = h, 2.0 * u * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def oscillator_functions(nmax: int, z: float) -> np.ndarray:
    """Normalized eigenfunctions ``phi_0..phi_{nmax-1}`` of ``-y'' + z^2/4 y``
    at a single point ``z``.

    ``phi_n(z) = (sqrt(2 pi) 2^n n!)^(-1/2) exp(-z^2/4) H_n(z/sqrt 2)``,
    computed by the normalized recurrence, which neither overflows nor
    underflows for the orders used here.
    """
    phi = np.empty(nmax)
    if nmax == 0:
        return phi
    # carry a log scale so exp(-z^2/4) does not underflow for |z| >~ 55
    scale = -0.25 * z * z - 0.25 * math.log(2.0 * math.pi)
    logs = np.empty(nmax)
    a, b = 0.0, 1.0  # phi_{-1}, phi_0 mantissas
    for n in range(nmax):
        phi[n] = b
        logs[n] = scale
        a, b = b, (z * b - math.sqrt(n) * a) / math.sqrt(n + 1.0)
        if abs(b) > _RENORM:
            a /= _RENORM
            b /= _RENORM
            scale += math.log(_RENORM)
    with np.errstate(under="ignore"):
        return phi * np.exp(logs)


# ---------------------------------------------------------------------------
# integral representation, orders <= -1


def _log_weber_integral(mu, z):
    """``log int_0^inf t^(mu-1) exp(-z t - t^2/2) dt`` for ``mu >= 1``.

    Vectorized over broadcast ``mu``, ``z``. The integration window is chosen
    around the peak of the integrand; if the peak sits near ``t = 0`` the
    variable change ``t = R u^4`` removes the algebraic endpoint behaviour.
    """
    mu, z = np.broadcast_arrays(np.asarray(mu, float), np.asarray(z, float))
    shape = mu.shape
    mu = mu.ravel()
    z = z.ravel()
    am1 = mu - 1.0
    tpk = 0.5 * (-z + np.sqrt(z * z + 4.0 * am1))
    tpk = np.maximum(tpk, 0.0)

    def phi(t):
        a, zz = (am1, z) if t.ndim == 1 else (am1[:, None], z[:, None])
        with np.errstate(divide="ignore", invalid="ignore"):
            lt = np.where(t > 0, np.log(np.where(t > 0, t, 1.0)), -np.inf)
            out = np.where(a > 0, a * lt, 0.0) - zz * t - 0.5 * t * t
        return out

    phipk = phi(tpk)
    with np.errstate(divide="ignore"):
        curv = 1.0 + np.where(tpk > 0, am1 / np.where(tpk > 0, tpk, 1.0) ** 2, np.inf)
    d0 = np.where(np.isfinite(curv), 1.0 / np.sqrt(curv), 1.0 / (np.abs(z) + 1.0))

    dr = d0.copy()
    for _ in range(200):
        short = phi(tpk + dr) - phipk > _TAIL_LOG
        if not short.any():
            break
        dr = np.where(short, dr * 1.5, dr)
    right = tpk + dr

    dl = d0.copy()
    for _ in range(200):
        short = (tpk - dl > 0) & (phi(np.maximum(tpk - dl, 1e-300)) - phipk > _TAIL_LOG)
        if not short.any():
            break
        dl = np.where(short, dl * 1.5, dl)
    mapped = tpk - dl <= 0
    left = np.where(mapped, 0.0, tpk - dl)

    # linear window
    span = (right - left)[:, None]
    t_lin = left[:, None] + span * _GL_U[None, :]
    f_lin = np.exp(phi(t_lin) - phipk[:, None]) * span
    # u^4 window on [0, right]
    u = _GL_U[None, :]
    t_map = right[:, None] * u**4
    f_map = np.exp(phi(t_map) - phipk[:, None]) * 4.0 * right[:, None] * u**3
    vals = np.where(mapped[:, None], f_map, f_lin)
    total = vals @ _GL_WU
    return (phipk + np.log(total)).reshape(shape)


def _log_d_negative(nu, z):
    """``log D_nu(z)`` for ``nu <= -1`` (where ``D_nu > 0`` for all real z)."""
    nu = np.asarray(nu, float)
    z = np.asarray(z, float)
    mu = -nu
    return -0.25 * z * z + _log_weber_integral(mu, z) - gammaln(mu)


# ---------------------------------------------------------------------------
# order recurrence


def _recur(y0, y1, s, order1, steps, z):
    """Advance ``D_{k+1} = z D_k - k D_{k-1}`` elementwise.

    ``y0, y1`` are mantissas of ``D_{order1-1}`` and ``D_{order1}`` with common
    log-scale ``s``. Returns ``(y0, y1, s, err)`` after ``steps`` applications;
    ``err`` is an absolute round-off estimate in mantissa units, accumulated
    relative to the local envelope ``max(|D_k|, |D_{k+1}|)``.
    """
    y0 = np.array(y0, float)
    y1 = np.array(y1, float)
    s = np.array(s, float)
    rel = np.full(y1.shape, 2.0 * EPS)
    steps = np.asarray(steps)
    nmax = int(steps.max()) if steps.size else 0
    for j in range(nmax):
        active = j < steps
        k = order1 + j
        y2 = z * y1 - k * y0
        env = np.maximum(np.abs(y1), np.abs(y2)) + 1e-300
        rel = np.where(active, rel + EPS * (np.abs(z * y1) + np.abs(k * y0)) / env, rel)
        y0 = np.where(active, y1, y0)
        y1 = np.where(active, y2, y1)
        big = np.abs(y1) > _RENORM
        if big.any():
            f = np.where(big, 1.0 / _RENORM, 1.0)
            y0, y1 = y0 * f, y1 * f
            s = s + np.where(big, math.log(_RENORM), 0.0)
    err = rel * np.maximum(np.abs(y0), np.abs(y1))
    return y0, y1, s, err


def _d_integer(n, z):
    """Mantissa, log-scale and cancellation gauge of ``D_n(z)``, integer n >= 0."""
    n = np.asarray(n)
    z = np.asarray(z, float)
    n, z = np.broadcast_arrays(n, z)
    s = -0.25 * z * z
    y0 = np.ones(z.shape)  # D_0
    y1 = z.copy()  # D_1
    # after j steps y1 holds D_{1+j}; want D_n -> n-1 steps (n=0: take y0)
    steps = np.maximum(n - 1, 0)
    a, b, s, err = _recur(y0, y1, s, 1.0, steps, z)
    val = np.where(n == 0, 1.0, b)
    err = np.where(n == 0, EPS, err)
    return val, s, err


def _d_upward(nu, z):
    """``D_nu(z)`` for non-integer ``nu > -1`` and ``z >= 0``.

    Starts from the integral representation at orders ``f-3`` and ``f-2``
    (``f`` the fractional part of ``nu``) and recurs upward.
    """
    nu, z = np.broadcast_arrays(np.asarray(nu, float), np.asarray(z, float))
    fl = np.floor(nu)
    start = nu - fl - 3.0
    la = _log_d_negative(start, z)
    lb = _log_d_negative(start + 1.0, z)
    s = np.maximum(la, lb)
    y0 = np.exp(la - s)
    y1 = np.exp(lb - s)
    steps = (fl + 2.0).astype(int)
    _, val, s, err = _recur(y0, y1, s, start + 1.0, steps, z)
    return val, s, err + 50.0 * EPS * np.abs(val)


def _v_initial(nu):
    """``V(-nu-1/2, 0)`` and its derivative as ``(A, B, log_scale)``."""
    nu = np.asarray(nu, float)
    log_s = (
        0.5 * nu * math.log(2.0)
        - 0.5 * math.log(math.pi)
        + gammaln(0.5 * (1.0 + nu))
        - gammaln(nu + 1.0)
    )
    half = 0.5 * nu
    sin_h = np.sin(math.pi * (half - np.round(half))) * np.where(np.round(half) % 2, -1.0, 1.0)
    cos_h = np.cos(math.pi * (half - np.round(half))) * np.where(np.round(half) % 2, -1.0, 1.0)
    ratio = np.exp(gammaln(1.0 + half) - gammaln(0.5 * (1.0 + nu)))
    return -sin_h, math.sqrt(2.0) * ratio * cos_h, log_s


def _weber_v(nu, x):
    """Weber's ``V(-nu-1/2, x)`` and ``V'`` for ``nu > -1`` and scalar ``x >= 0``.

    Returns mantissas ``(v, dv)``, a common log-scale, and the number of ODE
    steps taken. Integrates ``y'' = (x^2/4 - nu - 1/2) y`` by Taylor series.
    """
    nu = np.atleast_1d(np.asarray(nu, float))
    y, dy, s = _v_initial(nu)
    y = np.array(y, float) * np.ones_like(nu)
    dy = np.array(dy, float) * np.ones_like(nu)
    s = np.array(s, float) * np.ones_like(nu)
    c = 0.0
    nstep = 0
    x = float(x)
    while c < x:
        q0 = c * c / 4.0 - nu - 0.5
        qend = np.abs(q0) + 0.5 * abs(c) + 0.25
        h = min(0.5, 1.2 / math.sqrt(float(np.max(qend))), x - c)
        q1 = 0.5 * c
        q2 = 0.25
        # Taylor coefficients b_k = y^(k) h^k / k!; b_{k+2} uses b_k, b_{k-1}, b_{k-2}
        terms = [y.copy(), dy * h]
        ysum = terms[0] + terms[1]
        dsum = dy.copy()
        zero = np.zeros_like(nu)
        ref = np.abs(y) + np.abs(dy * h) + 1e-300
        small = 0
        for k in range(0, 120):
            bk = terms[k]
            bkm1 = terms[k - 1] if k >= 1 else zero
            bkm2 = terms[k - 2] if k >= 2 else zero
            nxt = h * h / ((k + 1.0) * (k + 2.0)) * (q0 * bk + q1 * h * bkm1 + q2 * h * h * bkm2)
            terms.append(nxt)
            ysum = ysum + nxt
            dsum = dsum + (k + 2.0) * nxt / h
            if np.all(np.abs(nxt) <= 1e-18 * ref):
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
        y, dy = ysum, dsum
        big = (np.abs(y) + np.abs(dy)) > _RENORM
        if big.any():
            f = np.where(big, 1.0 / _RENORM, 1.0)
            y, dy = y * f, dy * f
            s = s + np.where(big, math.log(_RENORM), 0.0)
        c += h
        nstep += 1
    return y, dy, s, nstep


# ---------------------------------------------------------------------------
# public evaluators


def _is_int(nu: float) -> bool:
    return float(nu) == math.floor(nu)


def _signed_pi_trig(nu: float) -> tuple[float, float]:
    """``(sin(pi nu), cos(pi nu))`` exact at integers."""
    r = round(nu)
    f = nu - r
    sgn = -1.0 if r % 2 else 1.0
    return sgn * math.sin(math.pi * f), sgn * math.cos(math.pi * f)


def _log_pcf(nu: float, z: float) -> tuple[float, float, float]:
    """``D_nu(z)`` as ``(mantissa, log_scale, rel_err)`` for scalars."""
    nu = float(nu)
    z = float(z)
    if _is_int(nu) and nu >= 0:
        m, s, err = _d_integer(int(nu), z)
        m, s, err = float(m), float(s), float(err)
        return m, s, err / max(abs(m), 1e-300)
    if nu <= -1.0:
        return 1.0, float(_log_d_negative(nu, z)), 50.0 * EPS
    if z >= 0.0:
        m, s, err = _d_upward(nu, z)
        m, s, err = float(m), float(s), float(err)
        return m, s, err / max(abs(m), 1e-300)
    # connection formula, z < 0
    x = -z
    md, sd, errd = _log_pcf(nu, x)
    v, _, sv, nstep = _weber_v(np.array([nu]), x)
    v = float(v[0])
    sv = float(sv[0])
    sn, cs = _signed_pi_trig(nu)
    # pi/Gamma(-nu) = -sin(pi nu) Gamma(nu+1)
    lg = math.lgamma(nu + 1.0)
    t1_m, t1_s = cs * md, sd
    t2_m, t2_s = -sn * v, sv + lg
    s = max(t1_s, t2_s)
    a1 = t1_m * math.exp(t1_s - s)
    a2 = t2_m * math.exp(t2_s - s)
    m = a1 + a2
    abs_err = abs(a1) * (errd + EPS) + abs(a2) * EPS * (20.0 + 0.1 * nstep)
    err = 4.0 * EPS + abs_err / max(abs(m), 1e-300)
    return m, s, err


def _compose(m: float, s: float, rel: float) -> EvalResult:
    if m == 0.0:
        return EvalResult(0.0, 0.0)
    lv = math.log(abs(m)) + s
    if lv > 709.0:
        value = math.copysign(math.inf, m)
        return EvalResult(value, math.inf)
    value = m * math.exp(s) if lv > -745.0 else 0.0
    # a log-scale of size |s| carries about eps*|s| relative error of its own
    return EvalResult(value, abs(value) * (rel + 4.0 * EPS * (1.0 + abs(s))))


def pcf_d(nu: float, z: float) -> EvalResult:
    """Parabolic cylinder function ``D_nu(z)`` for real order and argument."""
    if not (math.isfinite(nu) and math.isfinite(z)):
        raise ValueError("nu and z must be finite")
    return _compose(*_log_pcf(nu, z))


def log_pcf_d(nu: float, z: float) -> tuple[float, float]:
    """``(sign, log|D_nu(z)|)``; useful where the value itself would overflow."""
    m, s, _ = _log_pcf(nu, z)
    if m == 0.0:
        return 0.0, -math.inf
    return math.copysign(1.0, m), math.log(abs(m)) + s


def log_pcf_d_grid(nu: float, z) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`log_pcf_d` for one order over an array of arguments."""
    nu = float(nu)
    z = np.asarray(z, float)
    sign = np.ones(z.shape)
    logv = np.empty(z.shape)
    if nu <= -1.0:
        logv[...] = _log_d_negative(nu, z)
        return sign, logv
    if _is_int(nu):
        fast = np.ones(z.shape, bool)
        m, sc, _ = _d_integer(np.full(z.shape, int(nu)), z)
    else:
        fast = z >= 0.0
        m = np.zeros(z.shape)
        sc = np.zeros(z.shape)
        if fast.any():
            m[fast], sc[fast], _ = _d_upward(nu, z[fast])
    with np.errstate(divide="ignore"):
        logv[fast] = np.log(np.abs(m[fast])) + sc[fast]
    sign[fast] = np.sign(m[fast])
    for i in np.flatnonzero(~fast):
        sign.flat[i], logv.flat[i] = log_pcf_d(nu, float(z.flat[i]))
    return sign, logv


def pcf_d_deriv(nu: float, z: float) -> EvalResult:
    """``d/dz D_nu(z)`` via ``D'_nu(z) = (z/2) D_nu(z) - D_{nu+1}(z)``."""
    m0, s0, e0 = _log_pcf(nu, z)
    m1, s1, e1 = _log_pcf(nu + 1.0, z)
    s = max(s0, s1)
    a = 0.5 * z * m0 * math.exp(s0 - s)
    b = m1 * math.exp(s1 - s)
    m = a - b
    abs_err = abs(a) * (e0 + EPS) + abs(b) * (e1 + EPS)
    rel = 2.0 * EPS + abs_err / max(abs(m), 1e-300)
    return _compose(m, s, rel)


def wronskian(xi: float) -> float:
    """``W[D_xi(z), D_xi(-z)] = 2^(xi+3/2) pi / (Gamma(-xi/2) Gamma((1-xi)/2))``.

    The duplication formula reduces this to ``sqrt(2 pi) / Gamma(-xi)``, which
    vanishes exactly at non-negative integers.
    """
    xi = float(xi)
    return SQRT_2PI * rgamma_real(-xi)


# ---------------------------------------------------------------------------
# vectorized kernel used by the eigenvalue solver


def scaled_products(xi, x: float):
    """``P = D_xi(x)^2 / Gamma(xi+1)`` and ``Q = D_xi(x) V(-xi-1/2, x)``.

    Vectorized over ``xi > -1``; ``x >= 0`` scalar. For integer ``xi`` the
    returned ``Q`` is 0 (it only ever multiplies ``sin(pi xi)``).
    """
    xi = np.atleast_1d(np.asarray(xi, float))
    x = float(x)
    is_int = xi == np.floor(xi)
    p = np.empty_like(xi)
    q = np.zeros_like(xi)
    if is_int.any():
        m, s, _ = _d_integer(xi[is_int].astype(int), x)
        p[is_int] = np.exp(2.0 * (np.log(np.abs(m) + 1e-300) + s) - gammaln(xi[is_int] + 1.0)) * (m != 0)
    frac = ~is_int
    if frac.any():
        nu = xi[frac]
        md, sd, _ = _d_upward(nu, x)
        v, _, sv, _ = _weber_v(nu, x)
        with np.errstate(divide="ignore", under="ignore"):
            lmd = np.log(np.abs(md))
            p[frac] = np.exp(2.0 * (lmd + sd) - gammaln(nu + 1.0))
            q[frac] = np.sign(md) * v * np.exp(lmd + sd + sv)
    return p, q
