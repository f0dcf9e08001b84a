"""Seeded random instances for the verification suites and tests.

All generators take an explicit numpy Generator so callers control
reproducibility; :func:`make_rng` builds the canonical Philox stream.
"""

from __future__ import annotations

import numpy as np

from .adapted import (
    FiniteRankAdapted,
    PredictableHField,
    RankOneAdapted,
    WeaklyAdaptedOperator,
)
from .chaos import ChaosPoly, MultiIndex
from .malliavin import HField, OperatorField, VField


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


def random_multiindex(rng: np.random.Generator, n: int, degree: int,
                      coords=None) -> MultiIndex:
    """Sparse index over the allowed coordinates with total degree <= degree."""
    if coords is None:
        coords = list(range(1, n + 1))
    if not coords or degree == 0:
        return MultiIndex()
    width = min(len(coords), int(rng.integers(1, 4)))
    support = rng.choice(coords, size=width, replace=False)
    orders = {}
    budget = degree
    for c in support:
        if budget == 0:
            break
        k = int(rng.integers(0, budget + 1))
        if k:
            orders[int(c)] = k
            budget -= k
    return MultiIndex(orders)


def random_poly(rng: np.random.Generator, n: int, degree: int,
                n_terms: int = 4, coords=None, centered: bool = False) -> ChaosPoly:
    terms: dict[MultiIndex, float] = {}
    for _ in range(n_terms):
        idx = random_multiindex(rng, n, degree, coords)
        terms[idx] = terms.get(idx, 0.0) + float(rng.uniform(-1, 1))
    if centered:
        terms.pop(MultiIndex(), None)
    return ChaosPoly(n, terms)


def random_hfield(rng, n: int, degree: int, n_terms: int = 3) -> HField:
    return HField(tuple(random_poly(rng, n, degree, n_terms) for _ in range(n)))


def random_vfield(rng, n: int, d: int, degree: int, n_terms: int = 3) -> VField:
    return VField(tuple(random_poly(rng, n, degree, n_terms) for _ in range(d)))


def random_operator(rng, n: int, d: int, degree: int, n_terms: int = 2) -> OperatorField:
    return OperatorField(
        tuple(random_hfield(rng, n, degree, n_terms) for _ in range(d))
    )


def random_predictable_field(rng, n: int, degree: int, n_terms: int = 2) -> PredictableHField:
    """Coordinate i draws its terms from eta_1 .. eta_{i-1} only."""
    coords = []
    for i in range(1, n + 1):
        allowed = list(range(1, i))
        if allowed:
            coords.append(random_poly(rng, n, degree, n_terms, coords=allowed))
        else:
            coords.append(ChaosPoly.constant(n, float(rng.uniform(-1, 1))))
    return PredictableHField(tuple(coords))


def random_weakly_adapted(rng, n: int, d: int, degree: int,
                          n_terms: int = 2) -> WeaklyAdaptedOperator:
    return WeaklyAdaptedOperator(
        tuple(random_predictable_field(rng, n, degree, n_terms) for _ in range(d))
    )


def random_finite_rank_adapted(rng, n: int, d: int, rank: int = 2,
                               degree: int = 2) -> FiniteRankAdapted:
    terms = tuple(
        RankOneAdapted(
            field=random_predictable_field(rng, n, degree),
            functional=tuple(rng.uniform(-1, 1, size=d)),
        )
        for _ in range(rank)
    )
    return FiniteRankAdapted(terms)


def random_representable_poly(rng, n: int, degree: int, n_terms: int = 4) -> ChaosPoly:
    """Every monomial's top coordinate carries order exactly 1."""
    terms: dict[MultiIndex, float] = {}
    for _ in range(n_terms):
        top = int(rng.integers(1, n + 1))
        orders = {top: 1}
        budget = degree - 1
        below = list(range(1, top))
        rng.shuffle(below)
        for c in below:
            if budget == 0:
                break
            k = int(rng.integers(0, budget + 1))
            if k:
                orders[c] = k
                budget -= k
        idx = MultiIndex(orders)
        terms[idx] = terms.get(idx, 0.0) + float(rng.uniform(-1, 1))
    return ChaosPoly(n, terms)


def random_representable_vfield(rng, n: int, d: int, degree: int) -> VField:
    return VField(tuple(random_representable_poly(rng, n, degree) for _ in range(d)))


def random_skew_matrix(rng, n: int) -> np.ndarray:
    A = rng.uniform(-1, 1, size=(n, n))
    A = A - A.T
    np.fill_diagonal(A, 0.0)
    return A


def random_orthogonal(rng, n: int) -> np.ndarray:
    """Haar-ish orthogonal matrix via QR with a fixed sign convention."""
    M = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(M)
    return Q * np.sign(np.diag(R))


def random_unit_vector(rng, n: int) -> np.ndarray:
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)
