"""Regenerate tests/data/oracles.json from independent high-precision references.

Nothing here imports the package: parabolic cylinder values, Wronskians and
characteristic-function roots come from mpmath at 40 digits, and the
thermodynamic pins come from a plain explicit sum over levels with a scipy
root solve on mu.
"""

import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy.optimize import brentq

mp.mp.dps = 40
KW = dict(zeroprec=4000, infprec=4000, maxprec=40000)
OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracles.json"


def pcfd(nu, z):
    return mp.pcfd(mp.mpf(nu), mp.mpf(z), **KW)


def g(xi, lam, z1):
    """``W - lam D_xi(z1) D_xi(-z1)`` with ``W = sqrt(2 pi)/Gamma(-xi)``."""
    xi = mp.mpf(xi)
    w = mp.sqrt(2 * mp.pi) * mp.rgamma(-xi)
    return w - lam * pcfd(xi, z1) * pcfd(xi, -z1)


def root(lam, z1, a, b):
    """Bisection to 1e-25 in xi on ``g / Gamma(xi+1)``, or ``g / (D D)`` below zero.

    Both rescalings keep the sign of ``g`` (``Gamma(xi+1) > 0`` for ``xi > -1``
    and ``D_xi > 0`` for ``xi < 0``) while keeping values of order one.
    """
    if b <= 0:
        f = lambda x: g(x, lam, z1) / (pcfd(x, z1) * pcfd(x, -z1))
    else:
        f = lambda x: g(x, lam, z1) * mp.rgamma(x + 1)
    a, b = mp.mpf(a), mp.mpf(b)
    fa = f(a)
    assert fa * f(b) < 0, (lam, z1, a, b)
    while b - a > mp.mpf(10) ** -25:
        m = (a + b) / 2
        fm = f(m)
        if fm * fa > 0:
            a, fa = m, fm
        else:
            b = m
    return float((a + b) / 2)


def pcfd_table():
    rows = []
    for nu in (-40.5, -7.3, -2.5, -1.0, -0.5, -0.3, 0.0, 0.7, 2.5, 3.0, 17.25, 60.6, 255.5):
        for z in (-9.0, -3.2, -0.4, 0.0, 1.0, 2.7, 8.5):
            rows.append([nu, z, float(pcfd(nu, z))])
    return rows


def roots_table():
    # (lam, z1, level, bracket) with brackets from interlacing, narrowed by hand
    cases = [
        (1.0, 0.0, 0, (-1.0, -0.01)),
        (3.2, 1.0, 0, (-4.0, -1.0)),
        (3.2, 1.0, 1, (0.01, 0.99)),
        (3.2, 1.0, 3, (2.01, 2.999)),
        (3.2, 1.0, 10, (9.001, 9.9999)),
        (3.6, 1.0, 0, (-5.0, -1.0)),
        (32.0, 0.0, 0, (-257.0, -256.0)),
        (32.0, 0.0, 2, (1.0001, 1.9999)),
        (32.0, 2.0, 5, (4.0001, 4.9999)),
        (-3.0, 1.5, 0, (0.0001, 0.9999)),
        (-3.0, 1.5, 4, (4.0001, 4.9999)),
        (0.01, 0.0, 0, (-0.1, -0.0001)),
    ]
    return [[lam, z1, n, root(lam, z1, *br)] for lam, z1, n, br in cases]


def excited_sum(excit, tail_from, b):
    """Explicit sum, no closed-form tail: ``excit`` then bare levels up to 4e5."""
    ladder = np.arange(tail_from, 400_000, dtype=float)
    x = np.minimum(np.concatenate([excit, ladder]) * b, 700.0)
    with np.errstate(over="ignore"):
        return float(np.sum(1.0 / np.expm1(x)))


def bare_tau_c(n):
    k = np.arange(1, 400_000, dtype=float)
    f = lambda t: float(np.sum(1.0 / np.expm1(np.minimum(k / t, 700.0)))) - n
    return brentq(f, 10.0, 1e5, xtol=1e-13, rtol=1e-15)


def centered_spectrum(lam, levels):
    """All levels for a dimple at the trap center, from the closed form there.

    With ``z1 = 0`` odd levels are untouched and even ones solve
    ``2 sqrt(2) Gamma((1 - xi)/2) / Gamma(-xi/2) = lam`` on ``(n - 1, n)``.
    """
    from scipy.special import gammaln, gammasgn

    def f(x):
        a, b = 0.5 * (1.0 - x), -0.5 * x
        return 2.0 * math.sqrt(2.0) * gammasgn(a) * gammasgn(b) * math.exp(
            gammaln(a) - gammaln(b)) - lam

    xs = np.arange(levels, dtype=float)
    # ground state: Gamma ratio is smooth and increasing for xi < 0
    lo = -1.0
    while f(lo) < 0:
        lo *= 2.0
    xs[0] = brentq(f, lo, -1e-300, xtol=1e-300, rtol=8.9e-16)
    for n in range(2, levels, 2):
        xs[n] = brentq(f, n - 1 + 1e-8, n - 1e-8, xtol=1e-300, rtol=8.9e-16)
    return xs


def thermo_pins():
    n = 10_000
    tau0 = bare_tau_c(n)
    # hbar*omega/k_B for 23 amu at 21 Hz, via CODATA constants in mpmath-free floats
    hbar, kb = 1.054571817e-34, 1.380649e-23
    unit = hbar * 2 * math.pi * 21.0 / kb
    # gas in the bare trap at T = 0.5 Tc0: explicit sum with brentq on the gap
    tau = 0.5 * tau0
    k = np.arange(1, 400_000, dtype=float)

    def total(gap):
        with np.errstate(over="ignore"):
            return 1.0 / math.expm1(gap) + float(np.sum(1.0 / np.expm1(gap + k / tau)))

    gap = brentq(lambda x: total(x) - n, 1e-12, 10.0, xtol=1e-300, rtol=1e-15)
    frac0 = 1.0 / math.expm1(gap) / n

    # decorated centre, Lambda = 32, every level exact up to 60000
    xs = centered_spectrum(32.0, 60_000)
    excit = xs[1:] - xs[0]
    tail_from = 60_000 - xs[0]
    tau_c = 1.0 / brentq(lambda b: excited_sum(excit, tail_from, b) - n, 1e-6, 1.0,
                         xtol=1e-300, rtol=1e-15)

    def total_d(gap):
        with np.errstate(over="ignore"):
            x = gap + np.concatenate([excit, np.arange(tail_from, 400_000.0)]) / tau
            return 1.0 / math.expm1(gap) + float(np.sum(1.0 / np.expm1(x)))

    gap_d = brentq(lambda x: total_d(x) - n, 1e-14, 10.0, xtol=1e-300, rtol=1e-15)
    return {
        "centered32_xi": [float(v) for v in xs[:12]],
        "centered32_tau_c": tau_c,
        "centered32_fraction_half_tc0": 1.0 / math.expm1(gap_d) / n,
        "centered32_mu_half_tc0": float(xs[0] + 0.5 - gap_d * tau),
        "bare_tau_c0": tau0,
        "bare_tc0_kelvin": tau0 * unit,
        "bare_fraction_half_tc0": frac0,
        "hbar_omega_over_kb": unit,
    }


def main():
    data = {
        "pcfd": pcfd_table(),
        "roots": roots_table(),
        "thermo": thermo_pins(),
        "wronskian": [[x, float(mp.sqrt(2 * mp.pi) * mp.rgamma(-mp.mpf(x)))]
                      for x in (-3.7, -1.0, -0.5, 0.25, 1.5, 4.9, 9.3)],
    }
    OUT.write_text(json.dumps(data, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
