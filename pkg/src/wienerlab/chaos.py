"""Exact Wiener-chaos polynomial algebra over independent standard Gaussians.

A square-integrable polynomial functional of n independent standard Gaussian
coordinates ``eta_1 .. eta_n`` is stored as a sparse linear combination of
Hermite monomials ``prod_i He_{k_i}(eta_i)``, keyed by sparse multi-indices.
The probabilists' convention is used throughout::

    He_0 = 1,   He_1 = x,   He_{k+1}(x) = x * He_k(x) - k * He_{k-1}(x)

so that ``E[He_j(eta) He_k(eta)] = k! * [j == k]`` and the L2 inner product
of two chaos polynomials is ``sum_alpha alpha! * p_alpha * q_alpha`` with
``alpha! = prod_i k_i!``.

Every operation here is exact up to double rounding: expectation, inner
product, product (Hermite linearization), coordinate derivative, conditional
expectation with respect to the coordinate filtration, chaos-grade
projection, number-operator scaling and its inverse, grid refinement, and
pointwise evaluation.  Coefficients at or below ``PRUNE_EPS`` are pruned
after every operation so a stored coefficient is never an exact zero.

Values are immutable and operations are pure functions, so they are safe to
share across threads or workers without locking.
"""

from __future__ import annotations

import math
import re
from functools import lru_cache
from itertools import product as _cartesian
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

#: Largest total degree a stored term may have unless a caller passes a
#: larger explicit cap to a degree-raising operation.
DEGREE_CAP = 8

#: Hard upper bound on the ambient Gaussian dimension.
DIM_CAP = 128

#: Coefficients with absolute value at or below this are dropped.
PRUNE_EPS = 1e-14


class AlgebraError(ValueError):
    """Invalid operation on chaos-algebra values."""


class DimensionMismatch(AlgebraError):
    """Operands live over different ambient Gaussian dimensions."""


class DegreeCapExceeded(AlgebraError):
    """A term's total degree went past the active cap."""

    def __init__(self, degree: int, cap: int):
        super().__init__(
            f"term of total degree {degree} exceeds the degree cap {cap}"
        )
        self.degree = degree
        self.cap = cap


class NotCentered(AlgebraError):
    """Inverse number-operator applied to a functional with nonzero mean."""


class MultiIndex:
    """Sparse exponent vector: 1-based coordinate index -> positive order.

    Canonical form stores only nonzero orders, sorted by coordinate.  The
    empty multi-index denotes the constant monomial ``He_0 = 1``.
    """

    __slots__ = ("_pairs", "_degree", "_factorial")

    def __init__(self, orders: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = orders.items() if isinstance(orders, Mapping) else orders
        pairs = []
        for coord, order in items:
            coord = int(coord)
            order = int(order)
            if order == 0:
                continue
            if coord < 1:
                raise AlgebraError(f"coordinate index {coord} is not >= 1")
            if order < 0:
                raise AlgebraError(f"negative Hermite order {order} at coordinate {coord}")
            pairs.append((coord, order))
        pairs.sort()
        for (i, _), (j, _) in zip(pairs, pairs[1:]):
            if i == j:
                raise AlgebraError(f"coordinate {i} appears more than once")
        self._pairs = tuple(pairs)
        self._degree = sum(k for _, k in pairs)
        self._factorial = math.prod(math.factorial(k) for _, k in pairs)

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return self._pairs

    @property
    def total_degree(self) -> int:
        return self._degree

    @property
    def factorial(self) -> int:
        """``prod_i k_i!`` for the stored orders."""
        return self._factorial

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self._pairs)

    @property
    def max_coordinate(self) -> int:
        """Largest coordinate carrying a positive order; 0 for the constant."""
        return self._pairs[-1][0] if self._pairs else 0

    def order(self, coord: int) -> int:
        for i, k in self._pairs:
            if i == coord:
                return k
        return 0

    def shifted(self, coord: int, delta: int) -> "MultiIndex":
        """New index with the order at ``coord`` changed by ``delta``."""
        new = dict(self._pairs)
        new[coord] = new.get(coord, 0) + delta
        return MultiIndex(new)

    def as_dict(self) -> dict[int, int]:
        return dict(self._pairs)

    def sort_key(self) -> tuple:
        # deterministic serialization order: degree, then coordinates, then orders
        return (self._degree, tuple(i for i, _ in self._pairs), tuple(k for _, k in self._pairs))

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiIndex) and self._pairs == other._pairs

    def __hash__(self) -> int:
        return hash(self._pairs)

    def __repr__(self) -> str:
        return f"MultiIndex({dict(self._pairs)!r})"


#: The constant monomial's index.
EMPTY_INDEX = MultiIndex()


def _canonical_terms(
    terms, dim: int, cap: int
) -> dict[MultiIndex, float]:
    acc: dict[MultiIndex, float] = {}
    items = terms.items() if isinstance(terms, Mapping) else terms
    for idx, coeff in items:
        if not isinstance(idx, MultiIndex):
            idx = MultiIndex(idx)
        coeff = float(coeff)
        if idx.max_coordinate > dim:
            raise DimensionMismatch(
                f"coordinate {idx.max_coordinate} outside ambient dimension {dim}"
            )
        if idx.total_degree > cap:
            raise DegreeCapExceeded(idx.total_degree, cap)
        acc[idx] = acc.get(idx, 0.0) + coeff
    return {idx: c for idx, c in acc.items() if abs(c) > PRUNE_EPS}


class ChaosPoly:
    """Immutable polynomial functional in its Hermite-monomial expansion.

    ``dim`` is the ambient number of Gaussian coordinates; ``terms`` maps
    :class:`MultiIndex` to a float coefficient.  The empty index carries the
    expectation.
    """

    __slots__ = ("_dim", "_terms")

    def __init__(self, dim: int, terms=(), *, cap: int | None = None):
        dim = int(dim)
        if not 1 <= dim <= DIM_CAP:
            raise AlgebraError(f"ambient dimension {dim} outside 1..{DIM_CAP}")
        self._dim = dim
        self._terms = _canonical_terms(terms, dim, DEGREE_CAP if cap is None else cap)

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "ChaosPoly":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, value: float) -> "ChaosPoly":
        return cls(dim, {EMPTY_INDEX: value})

    @classmethod
    def coordinate(cls, dim: int, i: int) -> "ChaosPoly":
        """The coordinate functional ``eta_i = He_1(eta_i)``."""
        return cls.hermite(dim, i, 1)

    @classmethod
    def hermite(cls, dim: int, i: int, k: int, coeff: float = 1.0) -> "ChaosPoly":
        """The single monomial ``coeff * He_k(eta_i)``."""
        if not 1 <= i <= dim:
            raise AlgebraError(f"coordinate {i} outside 1..{dim}")
        return cls(dim, {MultiIndex({i: k}): coeff})

    @classmethod
    def monomial(cls, dim: int, index: MultiIndex, coeff: float = 1.0) -> "ChaosPoly":
        return cls(dim, {index: coeff})

    # ---- basic views ---------------------------------------------------

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def terms(self) -> Mapping[MultiIndex, float]:
        return MappingProxyType(self._terms)

    def degree(self) -> int:
        """Largest total degree present (0 for constants and the zero poly)."""
        return max((idx.total_degree for idx in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def sorted_terms(self) -> list[tuple[MultiIndex, float]]:
        return sorted(self._terms.items(), key=lambda kv: kv[0].sort_key())

    # ---- arithmetic sugar (delegates to the module-level operations) ---

    def __add__(self, other: "ChaosPoly") -> "ChaosPoly":
        return linear_combine([1.0, 1.0], [self, other])

    def __sub__(self, other: "ChaosPoly") -> "ChaosPoly":
        return linear_combine([1.0, -1.0], [self, other])

    def __neg__(self) -> "ChaosPoly":
        return linear_combine([-1.0], [self])

    def __mul__(self, other):
        if isinstance(other, ChaosPoly):
            return hermite_product(self, other)
        return linear_combine([float(other)], [self])

    def __rmul__(self, other):
        return linear_combine([float(other)], [self])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ChaosPoly)
            and self._dim == other._dim
            and self._terms == other._terms
        )

    def __hash__(self) -> int:
        return hash((self._dim, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        if self.is_zero():
            return f"ChaosPoly(dim={self._dim}, 0)"
        body = ", ".join(
            f"{dict(idx.pairs)!r}: {c!r}" for idx, c in self.sorted_terms()
        )
        return f"ChaosPoly(dim={self._dim}, {{{body}}})"

    # ---- convenience ----------------------------------------------------

    def expectation(self) -> float:
        return expectation(self)

    def norm_l2(self) -> float:
        return math.sqrt(l2_inner(self, self))

    def evaluate(self, sample: Sequence[float]) -> float:
        return evaluate(self, sample)

    def embed(self, dim: int) -> "ChaosPoly":
        """The same functional viewed over a larger ambient dimension."""
        if dim < self._dim:
            raise DimensionMismatch(f"cannot shrink dimension {self._dim} -> {dim}")
        return ChaosPoly(dim, self._terms)

    # ---- canonical text form --------------------------------------------

    def to_text(self) -> str:
        """One line per term: ``coeff i1:k1 i2:k2 ...`` in canonical order.

        The zero polynomial serializes to the empty string; a constant term
        serializes as the bare coefficient.  Coefficients use ``repr`` so the
        round trip is bit exact.
        """
        lines = []
        for idx, coeff in self.sorted_terms():
            parts = [repr(coeff)] + [f"{i}:{k}" for i, k in idx.pairs]
            lines.append(" ".join(parts))
        return "\n".join(lines)

    @classmethod
    def from_text(cls, dim: int, text: str, *, cap: int | None = None) -> "ChaosPoly":
        terms: list[tuple[MultiIndex, float]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            fields = line.split()
            try:
                coeff = float(fields[0])
            except ValueError as exc:
                raise AlgebraError(f"line {lineno}: bad coefficient {fields[0]!r}") from exc
            pairs = []
            for field in fields[1:]:
                m = re.fullmatch(r"(\d+):(\d+)", field)
                if m is None:
                    raise AlgebraError(f"line {lineno}: bad order field {field!r}")
                pairs.append((int(m.group(1)), int(m.group(2))))
            terms.append((MultiIndex(pairs), coeff))
        return cls(dim, terms, cap=cap)


def _require_same_dim(*polys: ChaosPoly) -> int:
    dims = {p.dim for p in polys}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed ambient dimensions {sorted(dims)}")
    return polys[0].dim


def linear_combine(coeffs: Sequence[float], polys: Sequence[ChaosPoly]) -> ChaosPoly:
    """``sum_j coeffs[j] * polys[j]`` over a shared ambient dimension."""
    if len(coeffs) != len(polys):
        raise AlgebraError(
            f"{len(coeffs)} coefficients for {len(polys)} polynomials"
        )
    if not polys:
        raise AlgebraError("empty linear combination has no ambient dimension")
    dim = _require_same_dim(*polys)
    acc: dict[MultiIndex, float] = {}
    for c, p in zip(coeffs, polys):
        c = float(c)
        if c == 0.0:
            continue
        for idx, pc in p._terms.items():
            acc[idx] = acc.get(idx, 0.0) + c * pc
    return ChaosPoly(dim, acc)


@lru_cache(maxsize=None)
def _linearization(m: int, n: int) -> tuple[tuple[int, int], ...]:
    # He_m * He_n = sum_k C(m,k) C(n,k) k! He_{m+n-2k}, exact integers
    return tuple(
        (m + n - 2 * k, math.comb(m, k) * math.comb(n, k) * math.factorial(k))
        for k in range(min(m, n) + 1)
    )


def _monomial_product(a: MultiIndex, b: MultiIndex):
    """Yield ``(index, coeff)`` for ``He_a * He_b`` coordinatewise."""
    a_orders = a.as_dict()
    b_orders = b.as_dict()
    shared = sorted(set(a_orders) & set(b_orders))
    base = [(i, k) for i, k in a_orders.items() if i not in b_orders]
    base += [(i, k) for i, k in b_orders.items() if i not in a_orders]
    if not shared:
        yield MultiIndex(base), 1.0
        return
    options = [
        [(i, order, weight) for order, weight in _linearization(a_orders[i], b_orders[i])]
        for i in shared
    ]
    for combo in _cartesian(*options):
        coeff = 1.0
        pairs = list(base)
        for i, order, weight in combo:
            coeff *= weight
            if order:
                pairs.append((i, order))
        yield MultiIndex(pairs), coeff


def hermite_product(p: ChaosPoly, q: ChaosPoly, *, cap: int | None = None) -> ChaosPoly:
    """Exact product in the algebra via Hermite linearization.

    Raises :class:`DegreeCapExceeded` rather than silently producing terms
    past the cap.
    """
    dim = _require_same_dim(p, q)
    acc: dict[MultiIndex, float] = {}
    for ia, ca in p._terms.items():
        for ib, cb in q._terms.items():
            scale = ca * cb
            for idx, w in _monomial_product(ia, ib):
                acc[idx] = acc.get(idx, 0.0) + scale * w
    return ChaosPoly(dim, acc, cap=cap)


def expectation(p: ChaosPoly) -> float:
    """``E[p]``: the coefficient of the empty index."""
    return p._terms.get(EMPTY_INDEX, 0.0)


def l2_inner(p: ChaosPoly, q: ChaosPoly) -> float:
    """``E[p q] = sum_alpha alpha! p_alpha q_alpha`` without forming the product."""
    _require_same_dim(p, q)
    small, large = (p._terms, q._terms) if len(p._terms) <= len(q._terms) else (q._terms, p._terms)
    total = 0.0
    for idx, c in small.items():
        other = large.get(idx)
        if other is not None:
            total += idx.factorial * c * other
    return total


def norm_l2(p: ChaosPoly) -> float:
    return math.sqrt(l2_inner(p, p))


def partial_derivative(p: ChaosPoly, i: int) -> ChaosPoly:
    """Coordinate derivative: ``He_k(eta_i) -> k He_{k-1}(eta_i)`` per term."""
    if not 1 <= i <= p.dim:
        raise AlgebraError(f"coordinate {i} outside 1..{p.dim}")
    acc: dict[MultiIndex, float] = {}
    for idx, c in p._terms.items():
        k = idx.order(i)
        if k == 0:
            continue
        new = idx.shifted(i, -1)
        acc[new] = acc.get(new, 0.0) + k * c
    return ChaosPoly(p.dim, acc)


def multiply_by_coordinate(p: ChaosPoly, i: int, *, cap: int | None = None) -> ChaosPoly:
    """Exact product with ``eta_i``: ``He_1 He_k = He_{k+1} + k He_{k-1}``."""
    if not 1 <= i <= p.dim:
        raise AlgebraError(f"coordinate {i} outside 1..{p.dim}")
    acc: dict[MultiIndex, float] = {}
    for idx, c in p._terms.items():
        k = idx.order(i)
        up = idx.shifted(i, 1)
        acc[up] = acc.get(up, 0.0) + c
        if k >= 1:
            down = idx.shifted(i, -1)
            acc[down] = acc.get(down, 0.0) + k * c
    return ChaosPoly(p.dim, acc, cap=cap)


def conditional_expectation(p: ChaosPoly, k: int) -> ChaosPoly:
    """Projection onto functionals of ``eta_1 .. eta_k``.

    Exact in this representation: a Hermite monomial has zero mean in every
    coordinate it touches, so conditioning on the first ``k`` coordinates
    keeps exactly the terms supported there.  ``k = 0`` returns the
    expectation as a constant; ``k = dim`` is the identity.
    """
    if not 0 <= k <= p.dim:
        raise AlgebraError(f"stage {k} outside 0..{p.dim}")
    kept = {idx: c for idx, c in p._terms.items() if idx.max_coordinate <= k}
    return ChaosPoly(p.dim, kept)


def chaos_projection(p: ChaosPoly, m: int) -> ChaosPoly:
    """Grade projection: keep terms of total degree exactly ``m``."""
    if m < 0:
        raise AlgebraError(f"chaos grade {m} is negative")
    kept = {idx: c for idx, c in p._terms.items() if idx.total_degree == m}
    return ChaosPoly(p.dim, kept)


def ou_apply(p: ChaosPoly) -> ChaosPoly:
    """Number operator: scale each grade-m term by m (constants vanish)."""
    acc = {
        idx: idx.total_degree * c
        for idx, c in p._terms.items()
        if idx.total_degree > 0
    }
    return ChaosPoly(p.dim, acc)


def ou_inverse(p: ChaosPoly, *, tol: float = 1e-12) -> ChaosPoly:
    """Inverse number operator on centered functionals (grade-m term / m)."""
    mean = expectation(p)
    if abs(mean) > tol:
        raise NotCentered(f"expectation {mean!r} exceeds centering tolerance {tol!r}")
    acc = {
        idx: c / idx.total_degree
        for idx, c in p._terms.items()
        if idx.total_degree > 0
    }
    return ChaosPoly(p.dim, acc)


def refine(p: ChaosPoly, m: int, *, cap: int | None = None) -> ChaosPoly:
    """Replace each coordinate by the mean of ``m`` finer coordinates.

    Coordinate ``i`` of the coarse grid becomes
    ``(eta'_{(i-1)m+1} + ... + eta'_{im}) / sqrt(m)`` on a grid of dimension
    ``dim * m``.  Because that block average is again standard Gaussian the
    substitution preserves the law, grade, expectation, and every L2 inner
    product.  Each ``He_k`` of a block average is expanded exactly through
    the three-term recurrence and :func:`hermite_product`.
    """
    m = int(m)
    if m < 1:
        raise AlgebraError(f"refinement factor {m} is not >= 1")
    new_dim = p.dim * m
    if new_dim > DIM_CAP:
        raise AlgebraError(
            f"refined dimension {new_dim} exceeds the dimension cap {DIM_CAP}"
        )
    if m == 1:
        return ChaosPoly(p.dim, p._terms, cap=cap)

    inv_root = 1.0 / math.sqrt(m)
    one = ChaosPoly.constant(new_dim, 1.0)

    # per-coordinate expansions He_k(block average), built on demand
    tables: dict[int, list[ChaosPoly]] = {}

    def he_of_block(i: int, k: int) -> ChaosPoly:
        table = tables.get(i)
        if table is None:
            z = ChaosPoly(
                new_dim,
                {MultiIndex({(i - 1) * m + j: 1}): inv_root for j in range(1, m + 1)},
            )
            table = [one, z]
            tables[i] = table
        z = table[1]
        while len(table) <= k:
            j = len(table) - 1  # He_{j+1} = z He_j - j He_{j-1}
            table.append(
                linear_combine(
                    [1.0, -float(j)],
                    [hermite_product(z, table[j], cap=cap), table[j - 1]],
                )
            )
        return table[k]

    acc: dict[MultiIndex, float] = {}
    for idx, c in p._terms.items():
        piece = one
        for i, k in idx.pairs:
            piece = hermite_product(piece, he_of_block(i, k), cap=cap)
        for pidx, pc in piece._terms.items():
            acc[pidx] = acc.get(pidx, 0.0) + c * pc
    return ChaosPoly(new_dim, acc, cap=cap)


def _hermite_values(x: float, kmax: int) -> list[float]:
    vals = [1.0, x]
    for k in range(1, kmax):
        vals.append(x * vals[k] - k * vals[k - 1])
    return vals[: kmax + 1]


def evaluate(p: ChaosPoly, sample: Sequence[float]) -> float:
    """Evaluate at one sample point (length ``dim``) via the recurrence."""
    sample = np.asarray(sample, dtype=float)
    if sample.shape != (p.dim,):
        raise DimensionMismatch(
            f"sample of shape {sample.shape} for ambient dimension {p.dim}"
        )
    needed: dict[int, int] = {}
    for idx in p._terms:
        for i, k in idx.pairs:
            needed[i] = max(needed.get(i, 0), k)
    tables = {i: _hermite_values(float(sample[i - 1]), k) for i, k in needed.items()}
    total = 0.0
    for idx, c in p._terms.items():
        v = c
        for i, k in idx.pairs:
            v *= tables[i][k]
        total += v
    return total


def evaluate_batch(p: ChaosPoly, samples: np.ndarray) -> np.ndarray:
    """Evaluate at an ``(N, dim)`` batch of samples, vectorized per term."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != p.dim:
        raise DimensionMismatch(
            f"batch of shape {samples.shape} for ambient dimension {p.dim}"
        )
    n_rows = samples.shape[0]
    needed: dict[int, int] = {}
    for idx in p._terms:
        for i, k in idx.pairs:
            needed[i] = max(needed.get(i, 0), k)
    tables: dict[int, np.ndarray] = {}
    for i, kmax in needed.items():
        col = samples[:, i - 1]
        table = np.empty((kmax + 1, n_rows))
        table[0] = 1.0
        if kmax >= 1:
            table[1] = col
        for k in range(1, kmax):
            table[k + 1] = col * table[k] - k * table[k - 1]
        tables[i] = table
    out = np.zeros(n_rows)
    for idx, c in p._terms.items():
        v = np.full(n_rows, c)
        for i, k in idx.pairs:
            v = v * tables[i][k]
        out += v
    return out
