"""Independent reference computations used across the test suite.

None of these call into the code paths they are used to check.
"""

import itertools
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from hermitranche.model import PRESET_SIZES, preset_portfolio


def quad_expectation(payoff, density, breakpoints, lo=-40.0, hi=40.0):
    """Adaptive quadrature of payoff * density, split at kinks."""
    pts = [lo] + sorted(p for p in breakpoints if lo < p < hi) + [hi]
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        total += quad(lambda u: payoff(u) * density(u), a, b,
                      epsabs=1e-14, epsrel=1e-13, limit=400)[0]
    return total


def hermite_he_ref(n, x):
    """He_n from the explicit sum n! sum_m (-1)^m x^(n-2m) / (m! (n-2m)! 2^m)."""
    return sum((-1) ** m * math.factorial(n) / (math.factorial(m) * math.factorial(n - 2 * m) * 2**m)
               * x ** (n - 2 * m) for m in range(n // 2 + 1))


def charlier_density_ref(c):
    return lambda u: sum(cj * hermite_he_ref(j, u) for j, cj in enumerate(c)) * norm.pdf(u)


def profile_ref(a, b, x):
    return min(b - a, max(x - a, 0.0)) / (b - a)


def enumerate_pmf(exposures, probs):
    """Brute-force pmf over all 2^n default patterns, one pattern at a time."""
    atoms = []
    for pattern in itertools.product((0, 1), repeat=len(exposures)):
        pr = 1.0
        loss = 0.0
        for d, e, p in zip(pattern, exposures, probs):
            pr *= p if d else 1.0 - p
            loss += e * d
        atoms.append((loss, pr))
    return atoms


def cond_probs_ref(portfolio, phi):
    """Conditional default probabilities through scipy.stats.norm."""
    phi = np.asarray(phi, dtype=float)
    out = []
    for loan in portfolio.loans:
        w = np.asarray(loan.w)
        z = (norm.ppf(loan.p) - w @ phi) / math.sqrt(1.0 - w @ w)
        out.append(norm.cdf(z))
    return np.array(out)


def lattice_exact_prices(n, tranches, K=64):
    """Exact expected tranche losses for a linear preset of size n.

    Preset exposures are integer multiples of 1 / (10 n (n-1)), so the
    conditional loss pmf is computed exactly by convolution on that lattice
    (losses beyond the largest detachment are lumped into one bucket).
    The outer integral uses numpy's probabilists' Gauss-Hermite nodes.
    """
    from numpy.polynomial.hermite_e import hermegauss

    unit = 1.0 / (10 * n * (n - 1))
    steps = [5 * (n - 1) + (i - 1) for i in range(1, n + 1)]
    s = np.arange(n) / (n - 1)
    p0 = 0.015 + 0.05 * s
    w = 0.5 - 0.1 * s
    cap = int(math.ceil(max(b for _, b in tranches) / unit)) + 1
    x, wt = hermegauss(K)
    wt = wt / math.sqrt(2 * math.pi)
    pc = norm.cdf((norm.ppf(p0)[None, :] - np.outer(x, w)) / np.sqrt(1 - w**2)[None, :])
    pmf = np.zeros((K, cap + 1))
    pmf[:, 0] = 1.0
    for i, k in enumerate(steps):
        shifted = np.zeros_like(pmf)
        shifted[:, k:] = pmf[:, :-k]
        shifted[:, -1] += pmf[:, -k:].sum(axis=1)
        pmf = pmf * (1 - pc[:, i:i + 1]) + shifted * pc[:, i:i + 1]
    levels = np.arange(cap + 1) * unit
    return [float(wt @ (pmf @ np.minimum(b - a, np.maximum(levels - a, 0.0)) / (b - a)))
            for a, b in tranches]


@pytest.fixture(scope="session")
def presets():
    return {name: preset_portfolio(name) for name in PRESET_SIZES}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.REPORT:
        terminalreporter.write_line(line)
