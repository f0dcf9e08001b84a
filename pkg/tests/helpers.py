"""Independent oracles shared by the test modules.

Everything here deliberately avoids the package's own evaluation and algebra
paths: Hermite values come from numpy.polynomial.hermite_e, expectations from
Gauss quadrature with the exp(-x^2/2) weight, derivatives from finite
differences, and distributions from plain Monte Carlo.  Tests compare the
package against these.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import hermite_e

from wienerlab.chaos import ChaosPoly, MultiIndex
from wienerlab.malliavin import HField

# 12-point Gauss quadrature on the exp(-x^2/2) weight: exact for polynomial
# integrands up to degree 23, far past anything the algebra can hold.
_NODES, _WEIGHTS = hermite_e.hermegauss(12)
_WEIGHTS = _WEIGHTS / math.sqrt(2.0 * math.pi)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def he_value(k: int, x):
    """He_k(x) via the library evaluator, independent of the package."""
    coeffs = [0.0] * k + [1.0]
    return hermite_e.hermeval(x, coeffs)


def eval_poly_indep(p: ChaosPoly, point) -> float:
    """Evaluate a ChaosPoly using only its term dict and the library Hermite."""
    point = np.asarray(point, dtype=float)
    total = 0.0
    for idx, c in p.terms.items():
        v = c
        for i, k in idx.pairs:
            v *= float(he_value(k, point[i - 1]))
        total += v
    return total


def quad_expectation(f, coords: list[int], dim: int) -> float:
    """E[f(eta)] by tensor Gauss quadrature over the listed coordinates.

    ``f`` maps a length-``dim`` point to a float and must depend only on the
    listed coordinates.  Exact for polynomials of per-coordinate degree < 24.
    """
    if not coords:
        return f(np.zeros(dim))
    total = 0.0
    grids = np.meshgrid(*[_NODES] * len(coords), indexing="ij")
    weights = np.ones_like(grids[0])
    for g in np.meshgrid(*[_WEIGHTS] * len(coords), indexing="ij"):
        weights = weights * g
    flat = [g.ravel() for g in grids]
    wflat = weights.ravel()
    point = np.zeros(dim)
    for row in range(wflat.size):
        for c, grid in zip(coords, flat):
            point[c - 1] = grid[row]
        total += wflat[row] * f(point)
    return total


def quad_poly_expectation(p: ChaosPoly) -> float:
    coords = sorted({i for idx in p.terms for i, _ in idx.pairs})
    return quad_expectation(lambda x: eval_poly_indep(p, x), coords, p.dim)


def mc_poly_mean(p: ChaosPoly, n_samples: int, seed: int) -> tuple[float, float]:
    """(mean, stderr) of the polynomial under plain Monte Carlo."""
    rng = make_rng(seed)
    draws = rng.standard_normal((n_samples, p.dim))
    vals = np.array([eval_poly_indep(p, row) for row in draws])
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_samples))


def fd_partial(p: ChaosPoly, i: int, point, h: float = 1e-5) -> float:
    """Central finite difference of the independent evaluator."""
    up = np.array(point, dtype=float)
    dn = np.array(point, dtype=float)
    up[i - 1] += h
    dn[i - 1] -= h
    return (eval_poly_indep(p, up) - eval_poly_indep(p, dn)) / (2.0 * h)


def refine_monomial_oracle(dim: int, i: int, k: int, m: int) -> ChaosPoly:
    """Exact multinomial expansion of He_k over an m-fold block average.

    Independent derivation (generating-function route) of what refine() must
    produce for a single-coordinate monomial:
    He_k(sum_j c eta'_j) = sum_{|beta|=k} k!/prod(beta!) c^k prod He_{beta_j}.
    """
    from itertools import product as cartesian

    block = list(range((i - 1) * m + 1, i * m + 1))
    scale = m ** (-k / 2.0)
    terms = {}
    for beta in cartesian(range(k + 1), repeat=m):
        if sum(beta) != k:
            continue
        w = math.factorial(k) * scale
        for b in beta:
            w /= math.factorial(b)
        pairs = tuple((block[j], b) for j, b in enumerate(beta) if b > 0)
        terms[pairs] = terms.get(pairs, 0.0) + w
    return ChaosPoly(dim * m, {k_: v for k_, v in terms.items()})


def split_integrand(p: ChaosPoly) -> HField:
    """Independent construction of the adapted integrand for representable p.

    Each monomial with top coordinate j at order 1 is the stage-j integral
    of the same monomial with that factor removed, placed in coordinate j.
    """
    rows = [ChaosPoly.zero(p.dim) for _ in range(p.dim)]
    for idx, c in p.terms.items():
        if not idx.pairs:
            continue
        j, order = idx.pairs[-1]
        assert order == 1
        lowered = MultiIndex(idx.pairs[:-1])
        rows[j - 1] = rows[j - 1] + ChaosPoly(p.dim, {lowered: c})
    return HField(tuple(rows))
