"""Measure-preserving adapted rotations of the Gaussian coordinate system.

A rotation is carried by a random matrix M(omega) whose output coordinate a
is the pathwise Ito sum  (Tw)_a = sum_j M[a][j] eta_j.  Two requirements make
Tw exactly standard Gaussian again:

* weak adaptedness: entry (a, j) depends only on eta_1 .. eta_{j-1}, so every
  row is a predictable field and the pathwise sum coincides with the
  divergence of the row;
* pathwise orthogonality: M(omega) has orthonormal rows at every sample.

Under these two, any output functional h . Tw is the divergence of the
predictable field M^T h whose pathwise length |M^T h| = |h| is deterministic,
and conditioning coordinate by coordinate gives the exact characteristic
function exp(-|h|^2/2).  So Tw ~ N(0, I) exactly, not asymptotically; the
sampling batteries here are consistency checks, and they must also catch
planted defects that break orthogonality.

The classical operator acting on the Cameron-Martin side is the transpose
M^T (its column i is the predictable integrand of output coordinate i).  A
constant descriptor matrix Q is interpreted on that side, so applying the
rotation computes Q^T . sample.

Construction is sequential in the input index: column j of M is chosen
inside the pathwise orthogonal complement of columns 1 .. j-1 by a bounded
measurable rule of the prefix eta_1 .. eta_{j-1} (arctan of seeded linear
statistics), then normalized.  Columns built this way are automatically
measurable with respect to the strict past of their own index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .adapted import PredictableHField, WeaklyAdaptedOperator
from .chaos import ChaosPoly, evaluate_batch, l2_inner, refine
from .clark import clark_integrand
from .malliavin import VField, divergence_op, gradient_scalar
from .randgen import make_rng
from .space import SampleBatch, ks_normal, moment_normality, sample_batch

#: Pathwise orthonormality contract for constructed isometries.
ISOMETRY_TOL = 1e-9


class RotationError(ValueError):
    """Degenerate construction descriptor or failed battery precondition."""


@dataclass(frozen=True)
class RotationReport:
    """Battery outcome: per-test statistic, threshold, and flag; seeded."""

    name: str
    tests: tuple[dict, ...]
    seed: int
    n_samples: int

    @property
    def passed(self) -> bool:
        return all(t["pass"] for t in self.tests)

    def test(self, name: str) -> dict:
        for t in self.tests:
            if t["name"] == name:
                return t
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "tests": list(self.tests),
            "seed": self.seed,
            "N": self.n_samples,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)


class AdaptedIsometry:
    """Random rotation with strict-past-measurable matrix columns.

    ``matrices`` evaluates the row-form matrix at a batch of samples; the
    rotation of a sample is matrix @ sample.  Constructions with polynomial
    entries also expose the exact operator form for chaos-level checks.
    """

    def __init__(self, n, d, kind, matrix_fn, operator=None, params=None,
                 isometric=True):
        self.n = int(n)
        self.d = int(d)
        self.kind = str(kind)
        self._matrix_fn = matrix_fn
        self._operator = operator
        self.params = dict(params) if params else {}
        self.isometric = bool(isometric)

    def matrices(self, draws: np.ndarray) -> np.ndarray:
        """Row-form matrices, shape (N, d, n), at the given (N, n) samples."""
        draws = np.asarray(draws, dtype=float)
        if draws.ndim != 2 or draws.shape[1] != self.n:
            raise RotationError(
                f"sample block of shape {draws.shape} for input dimension {self.n}"
            )
        out = self._matrix_fn(draws)
        if out.shape != (draws.shape[0], self.d, self.n):
            raise RotationError(f"construction produced shape {out.shape}")
        return out

    def apply_batch(self, draws: np.ndarray) -> np.ndarray:
        """Rotated samples, shape (N, d)."""
        draws = np.asarray(draws, dtype=float)
        mats = self.matrices(draws)
        return np.einsum("sij,sj->si", mats, draws)

    def operator(self) -> WeaklyAdaptedOperator | None:
        """Exact chaos-polynomial form of the rows, when the entries are polynomial."""
        return self._operator

    def descriptor(self) -> dict:
        return {"kind": self.kind, "n": self.n, "d": self.d, **self.params}


# ------------------------------------------------------------- constructors


def _constant_fn(M: np.ndarray):
    def fn(draws):
        return np.broadcast_to(M, (draws.shape[0],) + M.shape)

    return fn


def _operator_from_matrix(M: np.ndarray) -> WeaklyAdaptedOperator:
    d, n = M.shape
    rows = tuple(
        PredictableHField(tuple(ChaosPoly.constant(n, float(M[a, j])) for j in range(n)))
        for a in range(d)
    )
    return WeaklyAdaptedOperator(rows)


def _sign_fn(n: int):
    # output a flips with the sign of the previous increment; row 1 fixed
    def fn(draws):
        N = draws.shape[0]
        M = np.zeros((N, n, n))
        M[:, 0, 0] = 1.0
        for a in range(2, n + 1):
            M[:, a - 1, a - 1] = np.where(draws[:, a - 2] < 0.0, -1.0, 1.0)
        return M

    return fn


def _sequential_fn(n: int, weights: dict):
    def fn(draws):
        N = draws.shape[0]
        M = np.zeros((N, n, n))
        M[:, 0, 0] = 1.0
        if n == 1:
            return M
        # complement of column 1 = e_1 is the constant span of e_2..e_n
        B = np.broadcast_to(np.eye(n)[:, 1:], (N, n, n - 1)).copy()
        for c in range(2, n + 1):
            m = n - c + 1
            W = weights[c]  # (m, c-1) fixed by the seed
            feats = np.arctan(draws[:, : c - 1] @ W.T)
            g = feats.copy()
            g[:, 0] += 2.0  # keeps the first coefficient positive and |g| > 0
            norms = np.linalg.norm(g, axis=1, keepdims=True)
            if np.any(norms < 1e-12):
                raise RotationError(f"complement collapse at stage {c}")
            ghat = g / norms
            col = np.einsum("sik,sk->si", B, ghat)
            M[:, :, c - 1] = col
            if m > 1:
                # Householder sending ghat to -e_1; its trailing columns
                # re-span the complement of the chosen direction
                v = ghat.copy()
                v[:, 0] += 1.0
                vnorm2 = np.sum(v * v, axis=1)
                Bv = np.einsum("sik,sk->si", B, v)
                B = B - 2.0 * Bv[:, :, None] * v[:, None, :] / vnorm2[:, None, None]
                B = B[:, :, 1:]
        return M

    return fn


def build_sequential_isometry(n: int, seed: int, angle_spec) -> AdaptedIsometry:
    """Construct a pathwise-orthogonal matrix with strict-past columns.

    ``angle_spec`` selects the rule for each new column inside the running
    orthogonal complement:

    * ``"zero"`` - no rotation at all: the identity matrix;
    * ``"sign"`` - diagonal sign flips driven by the previous increment;
    * ``"givens"`` - seeded bounded angle functions (arctan of linear
      statistics of the prefix) choosing a complement direction per stage;
    * ``{"kind": "constant", "matrix": Q}`` - a fixed orthogonal Q acting on
      the Cameron-Martin side, i.e. samples map through Q^T; without
      ``matrix`` a seeded random orthogonal is drawn.
    """
    n = int(n)
    if n < 1:
        raise RotationError(f"need at least one coordinate, got n={n}")
    if isinstance(angle_spec, str):
        spec = {"kind": angle_spec}
    elif isinstance(angle_spec, dict):
        spec = dict(angle_spec)
    else:
        raise RotationError(f"angle spec must be a string or dict, got {type(angle_spec).__name__}")
    kind = spec.get("kind")

    if kind == "zero":
        M = np.eye(n)
        return AdaptedIsometry(
            n, n, "zero", _constant_fn(M), operator=_operator_from_matrix(M),
            params={"seed": int(seed)},
        )

    if kind == "sign":
        return AdaptedIsometry(n, n, "sign", _sign_fn(n), params={"seed": int(seed)})

    if kind == "givens":
        rng = make_rng(int(seed))
        weights = {
            c: 0.7 * rng.standard_normal((n - c + 1, c - 1)) for c in range(2, n + 1)
        }
        params = {
            "seed": int(seed),
            "stage_weights": {str(c): w.tolist() for c, w in weights.items()},
        }
        return AdaptedIsometry(n, n, "givens", _sequential_fn(n, weights), params=params)

    if kind == "constant":
        if "matrix" in spec:
            Q = np.asarray(spec["matrix"], dtype=float)
        else:
            from .randgen import random_orthogonal

            Q = random_orthogonal(make_rng(int(seed)), n)
        if Q.shape != (n, n):
            raise RotationError(f"matrix of shape {Q.shape} for n={n}")
        gap = float(np.max(np.abs(Q.T @ Q - np.eye(n))))
        if gap > ISOMETRY_TOL:
            raise RotationError(f"constant matrix is not orthogonal (gap {gap:.3e})")
        M = Q.T.copy()
        return AdaptedIsometry(
            n, n, "constant", _constant_fn(M), operator=_operator_from_matrix(M),
            params={"seed": int(seed), "matrix": Q.tolist()},
        )

    raise RotationError(f"unknown angle spec {kind!r}")


# ---------------------------------------------------------- planted defects


def scale_output(base: AdaptedIsometry, index: int, factor: float) -> AdaptedIsometry:
    """Break the isometry by scaling one output row of the matrix."""
    if not 1 <= index <= base.d:
        raise RotationError(f"output index {index} outside 1..{base.d}")
    factor = float(factor)

    def fn(draws):
        M = np.array(base.matrices(draws))
        M[:, index - 1, :] *= factor
        return M

    op = base.operator()
    if op is not None:
        rows = list(op.rows)
        rows[index - 1] = PredictableHField(
            tuple(p * factor for p in rows[index - 1].coords)
        )
        op = WeaklyAdaptedOperator(tuple(rows))
    params = {**base.params, "defect": {"scale_output": [index, factor]}}
    return AdaptedIsometry(
        base.n, base.d, base.kind + "+scaled", fn, operator=op, params=params,
        isometric=False,
    )


def mix_outputs(base: AdaptedIsometry, a: int, b: int) -> AdaptedIsometry:
    """Break independence by replacing output b with (output a + output b)/sqrt2."""
    if a == b or not (1 <= a <= base.d and 1 <= b <= base.d):
        raise RotationError(f"need two distinct output indices in 1..{base.d}")
    c = 1.0 / math.sqrt(2.0)

    def fn(draws):
        M = np.array(base.matrices(draws))
        M[:, b - 1, :] = c * (M[:, a - 1, :] + M[:, b - 1, :])
        return M

    op = base.operator()
    if op is not None:
        rows = list(op.rows)
        mixed = tuple(
            (p + q) * c for p, q in zip(rows[a - 1].coords, rows[b - 1].coords)
        )
        rows[b - 1] = PredictableHField(mixed)
        op = WeaklyAdaptedOperator(tuple(rows))
    params = {**base.params, "defect": {"mix_outputs": [a, b]}}
    return AdaptedIsometry(
        base.n, base.d, base.kind + "+mixed", fn, operator=op, params=params,
        isometric=False,
    )


# ------------------------------------------------------------------- checks


def _as_draws(samples, n: int, default_seed: int = 1618) -> np.ndarray:
    if isinstance(samples, SampleBatch):
        return samples.draws
    if isinstance(samples, (int, np.integer)):
        return sample_batch(n, int(samples), seed=default_seed).draws
    return np.asarray(samples, dtype=float)


def apply_rotation(R: AdaptedIsometry, sample) -> np.ndarray:
    """Rotate one sample: the vector of pathwise Ito sums, matrix @ sample."""
    sample = np.asarray(sample, dtype=float)
    if sample.shape != (R.n,):
        raise RotationError(f"sample of shape {sample.shape} for n={R.n}")
    return R.apply_batch(sample[None, :])[0]


def isometry_check(R: AdaptedIsometry, samples) -> float:
    """Worst pathwise deviation of the matrix Gram from the identity.

    Per sample this is the largest absolute eigenvalue of M M^T - I, i.e.
    the spectral distance of the rows from exact orthonormality.
    """
    draws = _as_draws(samples, R.n)
    mats = R.matrices(draws)
    gram = np.einsum("sij,skj->sik", mats, mats)
    gram -= np.eye(R.d)
    eigs = np.linalg.eigvalsh(gram)
    return float(np.max(np.abs(eigs)))


def check_strict_past_measurability(R: AdaptedIsometry, samples, seed: int = 271828) -> float:
    """Certify that matrix column j only reads eta_1 .. eta_{j-1}.

    Replaces all coordinates from j onward with fresh noise and measures the
    change in columns 1..j; the contract is exact zero.
    """
    draws = _as_draws(samples, R.n)
    fresh = sample_batch(R.n, draws.shape[0], seed=seed).draws
    base = R.matrices(draws)
    worst = 0.0
    for j in range(1, R.n + 1):
        hybrid = draws.copy()
        hybrid[:, j - 1 :] = fresh[:, j - 1 :]
        other = R.matrices(hybrid)
        worst = max(worst, float(np.max(np.abs(other[:, :, :j] - base[:, :, :j]))))
    return worst


def basis_invariance_check(R: AdaptedIsometry, onb_pair, samples) -> float:
    """Pathwise gap between the rotation resolved in two orthonormal bases.

    Resolving Tw over a basis (h_i) means summing (h_i . Tw) h_i; for exact
    orthonormal bases both resolutions reproduce Tw, so the gap is float
    noise only.
    """
    H1 = np.asarray(onb_pair[0], dtype=float)
    H2 = np.asarray(onb_pair[1], dtype=float)
    for H in (H1, H2):
        if H.shape != (R.d, R.d):
            raise ValueError(f"basis of shape {H.shape} for d={R.d}")
        gap = float(np.max(np.abs(H @ H.T - np.eye(R.d))))
        if gap > ISOMETRY_TOL:
            raise ValueError(f"basis is not orthonormal (gap {gap:.3e})")
    draws = _as_draws(samples, R.n)
    tw = R.apply_batch(draws)
    first = (tw @ H1.T) @ H1
    second = (tw @ H2.T) @ H2
    return float(np.max(np.linalg.norm(first - second, axis=1), initial=0.0))


def exact_output_covariance(R: AdaptedIsometry) -> np.ndarray:
    """Chaos-level covariance of the rotated coordinates, computed exactly.

    Available when the matrix entries are polynomial (the operator form
    exists); for a true isometry the result is the identity.
    """
    op = R.operator()
    if op is None:
        raise RotationError(f"{R.kind} rotation has no polynomial operator form")
    comps = divergence_op(op).components
    d = len(comps)
    cov = np.empty((d, d))
    for a in range(d):
        for b in range(a, d):
            cov[a, b] = cov[b, a] = l2_inner(comps[a], comps[b])
    return cov


# ---------------------------------------------------------------- batteries


def _battery_report(name, tests, seed, N) -> RotationReport:
    return RotationReport(name=name, tests=tuple(tests), seed=int(seed), n_samples=int(N))


def _normality_tests(prefix: str, values: np.ndarray) -> list[dict]:
    tests = []
    ks = ks_normal(values)
    tests.append({"name": f"{prefix}ks", **ks})
    for stat_name, row in moment_normality(values).items():
        tests.append({"name": f"{prefix}{stat_name}", **row})
    return tests


def gaussianity_battery(R: AdaptedIsometry, h, N: int, seed: int) -> RotationReport:
    """Is h . Tw exactly N(0, |h|^2)?  KS plus four moment z-tests."""
    h = np.asarray(h, dtype=float)
    if h.shape != (R.d,):
        raise RotationError(f"functional of shape {h.shape} for d={R.d}")
    scale = float(np.linalg.norm(h))
    if scale <= 0.0:
        raise RotationError("zero output functional")
    batch = sample_batch(R.n, N, seed=seed)
    vals = R.apply_batch(batch.draws) @ h / scale
    return _battery_report("gaussianity", _normality_tests("", vals), seed, N)


def independence_battery(R: AdaptedIsometry, h1, h2, N: int, seed: int) -> RotationReport:
    """Are h1 . Tw and h2 . Tw independent for orthogonal h1, h2?

    Correlation test plus the nine factorization checks E[f(X)g(Y)] =
    E[f(X)] E[g(Y)] over f, g in {x, x^2-1, sign}.
    """
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    for h in (h1, h2):
        if h.shape != (R.d,):
            raise RotationError(f"functional of shape {h.shape} for d={R.d}")
        if np.linalg.norm(h) <= 0.0:
            raise RotationError("zero output functional")
    if abs(float(h1 @ h2)) > 1e-12:
        raise RotationError("output functionals are not orthogonal")
    batch = sample_batch(R.n, N, seed=seed)
    tw = R.apply_batch(batch.draws)
    x = tw @ h1 / np.linalg.norm(h1)
    y = tw @ h2 / np.linalg.norm(h2)
    tests = []
    rho = float(np.corrcoef(x, y)[0, 1])
    tests.append(
        {
            "name": "correlation",
            "statistic": rho,
            "threshold": 4.0 / math.sqrt(N),
            "pass": abs(rho) <= 4.0 / math.sqrt(N),
        }
    )
    feats = {
        "x": lambda v: v,
        "x2m1": lambda v: v * v - 1.0,
        "sign": lambda v: np.where(v < 0.0, -1.0, 1.0),
    }
    for fname, f in feats.items():
        fx = f(x)
        for gname, g in feats.items():
            gy = g(y)
            prod = fx * gy
            gap = float(prod.mean() - fx.mean() * gy.mean())
            se = float(prod.std(ddof=1) / math.sqrt(N))
            tests.append(
                {
                    "name": f"factorization_{fname}_{gname}",
                    "statistic": gap,
                    "threshold": 4.0 * se,
                    "pass": abs(gap) <= 4.0 * se,
                }
            )
    return _battery_report("independence", tests, seed, N)


def measure_preservation_battery(R: AdaptedIsometry, N: int, seed: int) -> RotationReport:
    """Is the law of Tw standard Gaussian on R^d?

    Entrywise covariance against the identity, per-coordinate KS tests, and
    correlation checks on the first ten coordinate pairs.
    """
    batch = sample_batch(R.n, N, seed=seed)
    tw = R.apply_batch(batch.draws)
    d = R.d
    tests = []
    if d > 1:
        cov = np.cov(tw.T, ddof=1)
    else:
        cov = np.array([[float(np.var(tw[:, 0], ddof=1))]])
    cov_err = float(np.max(np.abs(cov - np.eye(d))))
    cov_thr = 4.0 * math.sqrt(2.0 / N)
    tests.append(
        {
            "name": "covariance_identity",
            "statistic": cov_err,
            "threshold": cov_thr,
            "pass": cov_err <= cov_thr,
        }
    )
    for a in range(1, d + 1):
        ks = ks_normal(tw[:, a - 1])
        tests.append({"name": f"ks_coordinate_{a}", **ks})
    corr_thr = 4.0 / math.sqrt(N)
    for a, b in list(combinations(range(1, d + 1), 2))[:10]:
        rho = float(np.corrcoef(tw[:, a - 1], tw[:, b - 1])[0, 1])
        tests.append(
            {
                "name": f"independence_pair_{a}_{b}",
                "statistic": rho,
                "threshold": corr_thr,
                "pass": abs(rho) <= corr_thr,
            }
        )
    return _battery_report("measure_preservation", tests, seed, N)


# ---------------------------------------------------------------- recovery


def extract_rotation(T, grid: int = 1, *, N: int = 50_000, seed: int = 314159,
                     strict: bool = True):
    """Recover the adapted rotation carrying given Gaussian coordinates.

    ``T`` lists chaos polynomials representing the rotated coordinates; each
    row of the recovered matrix is the adapted integrand of the matching
    component on the ``grid``-fold refined coordinate system.  The returned
    report carries the input screening battery (each component must look
    N(0,1) and pairwise uncorrelated) and the pathwise orthonormality
    deviation of the assembled matrix, reported as found.  With ``strict``
    the screening failures raise instead.
    """
    T = tuple(T)
    if not T:
        raise RotationError("need at least one component")
    n = T[0].dim
    if any(p.dim != n for p in T):
        raise RotationError("components over mixed ambient dimensions")
    m = int(grid)
    if m < 1:
        raise RotationError(f"refinement factor must be positive, got {m}")

    batch = sample_batch(n, N, seed=seed)
    vals = np.column_stack([evaluate_batch(p, batch.draws) for p in T])
    tests = []
    for i, p in enumerate(T, start=1):
        tests.extend(_normality_tests(f"component_{i}_", vals[:, i - 1]))
    corr_thr = 4.0 / math.sqrt(N)
    for a, b in combinations(range(1, len(T) + 1), 2):
        rho = float(np.corrcoef(vals[:, a - 1], vals[:, b - 1])[0, 1])
        tests.append(
            {
                "name": f"correlation_{a}_{b}",
                "statistic": rho,
                "threshold": corr_thr,
                "pass": abs(rho) <= corr_thr,
            }
        )
    if strict and not all(t["pass"] for t in tests):
        failed = [t["name"] for t in tests if not t["pass"]]
        raise RotationError(f"input battery failed: {', '.join(failed)}")

    refined = [refine(p, m) for p in T]
    K = clark_integrand(VField(tuple(refined)))
    entries = [[K.entry(a, j) for j in range(1, K.n + 1)] for a in range(1, K.d + 1)]

    def fn(draws):
        N_rows = draws.shape[0]
        M = np.empty((N_rows, K.d, K.n))
        for a in range(K.d):
            for j in range(K.n):
                M[:, a, j] = evaluate_batch(entries[a][j], draws)
        return M

    iso = AdaptedIsometry(
        K.n, K.d, "extracted", fn, operator=K,
        params={"grid": m, "seed": int(seed)}, isometric=False,
    )
    deviation = isometry_check(iso, sample_batch(K.n, 1000, seed=seed + 1))
    iso.isometric = deviation <= ISOMETRY_TOL
    tests.append(
        {
            "name": "assembled_isometry_deviation",
            "statistic": deviation,
            "threshold": ISOMETRY_TOL,
            "pass": deviation <= ISOMETRY_TOL,
        }
    )
    report = _battery_report("extract_rotation", tests, seed, N)
    return iso, report
