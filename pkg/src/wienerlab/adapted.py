"""Coordinate filtration, strict-past predictability, adapted projections.

The filtration is generated coordinate by coordinate: stage k knows
eta_1 .. eta_k.  An HField u is *predictable* when coordinate u_i depends
only on the strict past eta_1 .. eta_{i-1}; in the Hermite representation
that is a pure term-support condition, so membership is decidable exactly.

Strict past (rather than "up to and including i") is the convention that
makes the discrete divergence of a predictable field equal the plain
pathwise sum  sum_i u_i eta_i  and gives the exact isometry
E[div u div v] = E(u, v).  Including stage i breaks it: u = eta_1 e_1 has
div u = He_2(eta_1) with second moment 2, not E|u|^2 = 1.

An OperatorField is *weakly adapted* when every row is predictable, i.e.
entry (a, i) depends only on eta_1 .. eta_{i-1}.  The projection of an
HField applies the stage-(i-1) conditional expectation to coordinate i;
the operator projection applies that rowwise.  Both are exact orthogonal
projections here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chaos import (
    ChaosPoly,
    DimensionMismatch,
    conditional_expectation,
    evaluate,
    l2_inner,
    linear_combine,
)
from .malliavin import HField, OperatorField, VField, divergence_h, divergence_op


class NotPredictable(ValueError):
    """A field failed the strict-past support condition."""


@dataclass(frozen=True)
class Filtration:
    """Stage-indexed conditioning: stage k = functionals of eta_1 .. eta_k."""

    n: int

    def condition(self, p: ChaosPoly, k: int) -> ChaosPoly:
        if p.dim != self.n:
            raise DimensionMismatch(f"functional over {p.dim} coordinates, filtration n={self.n}")
        return conditional_expectation(p, k)


def is_predictable(u: HField) -> bool:
    """True iff coordinate i has no positive order at any coordinate >= i."""
    for i, ui in enumerate(u.coords, start=1):
        for idx in ui.terms:
            if idx.max_coordinate >= i:
                return False
    return True


class PredictableHField(HField):
    """HField with a checked strict-past certificate."""

    def __post_init__(self):
        super().__post_init__()
        if not is_predictable(self):
            raise NotPredictable("coordinate fields reach into their own present or future")


class WeaklyAdaptedOperator(OperatorField):
    """OperatorField whose rows are all predictable."""

    def __post_init__(self):
        super().__post_init__()
        for a, row in enumerate(self.rows, start=1):
            if not is_predictable(row):
                raise NotPredictable(f"row {a} is not predictable")


def project_adapted(u: HField) -> PredictableHField:
    """Orthogonal projection onto predictable fields, coordinate by coordinate.

    Coordinate i becomes its stage-(i-1) conditional expectation.  Idempotent,
    self-adjoint, an L2 contraction, and the identity on predictable input.
    """
    coords = tuple(
        conditional_expectation(ui, i - 1) for i, ui in enumerate(u.coords, start=1)
    )
    return PredictableHField(coords)


def project_operator(K: OperatorField) -> WeaklyAdaptedOperator:
    """Rowwise adapted projection of an OperatorField."""
    return WeaklyAdaptedOperator(tuple(project_adapted(row) for row in K.rows))


@dataclass(frozen=True)
class RankOneAdapted:
    """q tensor y with a predictable q: entry (a, i) = y_a q_i."""

    field: PredictableHField
    functional: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "functional", tuple(float(v) for v in self.functional))
        if not self.functional:
            raise ValueError("empty output functional")


@dataclass(frozen=True)
class FiniteRankAdapted:
    """Finite sum of predictable rank-one operators, kept in structural form."""

    terms: tuple[RankOneAdapted, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("finite-rank operator needs at least one term")
        ds = {len(t.functional) for t in self.terms}
        ns = {t.field.n for t in self.terms}
        if len(ds) != 1 or len(ns) != 1:
            raise DimensionMismatch("mixed shapes across rank-one terms")

    @property
    def d(self) -> int:
        return len(self.terms[0].functional)

    @property
    def n(self) -> int:
        return self.terms[0].field.n

    def to_operator(self) -> WeaklyAdaptedOperator:
        rows = []
        for a in range(self.d):
            parts = [t.field.scale(t.functional[a]) for t in self.terms]
            row = parts[0]
            for other in parts[1:]:
                row = row.add(other)
            rows.append(PredictableHField(row.coords))
        return WeaklyAdaptedOperator(tuple(rows))

    def divergence(self) -> VField:
        """div(sum_j q_j tensor y_j) = sum_j div(q_j) y_j, componentwise."""
        divs = [divergence_h(t.field) for t in self.terms]
        comps = []
        for a in range(self.d):
            comps.append(
                linear_combine([t.functional[a] for t in self.terms], divs)
            )
        return VField(tuple(comps))


def ito_integral(u: HField, sample) -> float:
    """Pathwise sum_i u_i(eta) eta_i for a predictable field.

    For predictable u this equals the divergence evaluated at the sample,
    because every correction term d_i u_i vanishes.
    """
    if not is_predictable(u):
        raise NotPredictable("pathwise integral requires a predictable integrand")
    sample = np.asarray(sample, dtype=float)
    if sample.shape != (u.n,):
        raise DimensionMismatch(f"sample of shape {sample.shape} for n={u.n}")
    return float(
        sum(evaluate(ui, sample) * sample[i] for i, ui in enumerate(u.coords))
    )


def check_ito_isometry(u: HField, v: HField) -> float:
    """|E[div u div v] - E(u, v)| for predictable u, v; exact zero in theory."""
    if not (is_predictable(u) and is_predictable(v)):
        raise NotPredictable("isometry holds for predictable fields")
    return abs(l2_inner(divergence_h(u), divergence_h(v)) - u.inner(v))


def check_weak_orthogonality(K: OperatorField, Q: FiniteRankAdapted) -> float:
    """|E<<K, Q>> - E<<projected K, Q>>| over the structural rank-one form."""
    if (Q.d, Q.n) != K.shape:
        raise DimensionMismatch(f"operator {K.shape} vs finite-rank {(Q.d, Q.n)}")
    projected = project_operator(K)
    lhs = rhs = 0.0
    for t in Q.terms:
        for a in range(K.d):
            ya = t.functional[a]
            if ya == 0.0:
                continue
            for i in range(K.n):
                qi = t.field.coords[i]
                lhs += ya * l2_inner(K.rows[a].coords[i], qi)
                rhs += ya * l2_inner(projected.rows[a].coords[i], qi)
    return abs(lhs - rhs)


def check_operator_isometry(K: WeaklyAdaptedOperator, D: FiniteRankAdapted) -> float:
    """|E<div D, div K> - E<<K, D>>| with D in structural finite-rank form."""
    if (D.d, D.n) != K.shape:
        raise DimensionMismatch(f"operator {K.shape} vs finite-rank {(D.d, D.n)}")
    delta_K = divergence_op(K)
    delta_D = D.divergence()
    lhs = sum(
        l2_inner(delta_D.components[a], delta_K.components[a]) for a in range(K.d)
    )
    rhs = 0.0
    for t in D.terms:
        for a in range(K.d):
            ya = t.functional[a]
            if ya == 0.0:
                continue
            for i in range(K.n):
                rhs += ya * l2_inner(K.rows[a].coords[i], t.field.coords[i])
    return abs(lhs - rhs)


def check_divergence_free_uniqueness(K: WeaklyAdaptedOperator, tol: float = 1e-12) -> bool:
    """div K = 0 forces K = 0 on weakly adapted operators.

    Returns True iff the implication holds for this K: either the divergence
    is visibly nonzero, or every entry vanishes within tol.
    """
    if divergence_op(K).norm() > tol:
        return True
    return K.max_entry_norm() <= tol
