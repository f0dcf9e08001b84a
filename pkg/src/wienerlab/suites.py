"""Deterministic verification suites over the exact chaos algebra.

Each suite stresses one structural identity of the calculus: adjointness of
gradient and divergence, isometry of adapted integrals, exactness of the
adapted representation on its natural class, refinement convergence, the
minimal-energy representation, and the rotation invariants.  Random
instances come from fixed seeds, so two runs produce identical results
byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adapted import (
    check_divergence_free_uniqueness,
    check_ito_isometry,
    check_operator_isometry,
    check_weak_orthogonality,
)
from .chaos import ChaosPoly, ou_apply
from .clark import (
    clark_integrand,
    compare_energies,
    minimal_energy_integrand,
    reconstruct,
    refine_and_reconstruct,
)
from .malliavin import (
    HField,
    VField,
    check_cbound,
    check_duality,
    check_rowwise_divergence,
    check_weakb,
    divergence_h,
    gradient_scalar,
    skew_symmetric_field,
)
from .randgen import (
    make_rng,
    random_finite_rank_adapted,
    random_hfield,
    random_operator,
    random_poly,
    random_predictable_field,
    random_representable_poly,
    random_representable_vfield,
    random_skew_matrix,
    random_vfield,
    random_weakly_adapted,
)
from .rotations import (
    build_sequential_isometry,
    check_strict_past_measurability,
    exact_output_covariance,
    gaussianity_battery,
    isometry_check,
    mix_outputs,
    scale_output,
)
from .space import identity_divergence_growth, mc_estimate, sample_batch


@dataclass(frozen=True)
class SuiteResult:
    """Outcome of one verification suite."""

    name: str
    passed: bool
    statistic: float
    threshold: float
    details: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: worst {self.statistic:.3e}"
            f" (threshold {self.threshold:.1e}; {self.details})"
        )

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "details": self.details,
        }


def _result(name, worst, threshold, details, extra_ok=True) -> SuiteResult:
    return SuiteResult(
        name=name,
        passed=bool(worst <= threshold and extra_ok),
        statistic=float(worst),
        threshold=float(threshold),
        details=details,
    )


# ------------------------------------------------------------------ suites


def suite_duality_pairing(seed: int = 1001) -> SuiteResult:
    """Divergence is adjoint to the gradient under the pairings."""
    rng = make_rng(seed)
    worst = 0.0
    count = 200
    for _ in range(count):
        n = int(rng.integers(2, 7))
        d = int(rng.integers(1, 4))
        degree = int(rng.integers(1, 5))
        K = random_operator(rng, n, d, degree)
        F = random_vfield(rng, n, d, min(degree, 3))
        worst = max(worst, check_duality(K, F))
    return _result(
        "duality_pairing", worst, 1e-10, f"{count} random operator/field pairs"
    )


def suite_weak_pairing(seed: int = 1002) -> SuiteResult:
    """Componentwise and rowwise forms of the duality agree."""
    rng = make_rng(seed)
    worst = 0.0
    count = 100
    for _ in range(count):
        n = int(rng.integers(2, 6))
        d = int(rng.integers(1, 4))
        K = random_operator(rng, n, d, 3)
        F = random_vfield(rng, n, d, 3)
        worst = max(worst, check_weakb(K, F))
        y = rng.standard_normal(d)
        worst = max(worst, check_rowwise_divergence(K, y))
    return _result(
        "weak_pairing", worst, 1e-10, f"{count} instances, both pairing forms"
    )


def suite_structure_constants(seed: int = 1003) -> SuiteResult:
    """Exact divergence values: skew fields, constants, identity growth."""
    rng = make_rng(seed)
    worst = 0.0
    ok = True
    for n in range(2, 9):
        A = random_skew_matrix(rng, n)
        ok = ok and divergence_h(skew_symmetric_field(A)).is_zero()
        h = rng.standard_normal(n)
        const = HField(tuple(ChaosPoly.constant(n, h[i]) for i in range(n)))
        expected = sum(
            (ChaosPoly.hermite(n, i + 1, 1, h[i]) for i in range(n)),
            ChaosPoly.zero(n),
        )
        gap = (divergence_h(const) - expected).norm_l2()
        worst = max(worst, gap)
    for n, value in identity_divergence_growth(range(1, 9)):
        worst = max(worst, abs(value - math.sqrt(2.0 * n)))
    return _result(
        "structure_constants",
        worst,
        1e-12,
        "skew fields, constant fields, identity divergence growth, n <= 8",
        extra_ok=ok,
    )


def suite_ito_isometry(seed: int = 1004) -> SuiteResult:
    """Energy identities for predictable fields and adapted operators."""
    rng = make_rng(seed)
    worst = 0.0
    count = 200
    for _ in range(count):
        n = int(rng.integers(2, 6))
        u = random_predictable_field(rng, n, 3)
        v = random_predictable_field(rng, n, 3)
        worst = max(worst, check_ito_isometry(u, v))
    for _ in range(count):
        n = int(rng.integers(2, 6))
        d = int(rng.integers(1, 4))
        K = random_weakly_adapted(rng, n, d, 3)
        D = random_finite_rank_adapted(rng, n, d)
        worst = max(worst, check_operator_isometry(K, D))
    return _result(
        "ito_isometry", worst, 1e-10, f"{count} field pairs and {count} operator pairs"
    )


def suite_weak_orthogonality(seed: int = 1005) -> SuiteResult:
    """Anticipating remainders pair to zero against adapted test operators."""
    rng = make_rng(seed)
    worst = 0.0
    count = 100
    for _ in range(count):
        n = int(rng.integers(2, 6))
        d = int(rng.integers(1, 4))
        K = random_operator(rng, n, d, 3)
        Q = random_finite_rank_adapted(rng, n, d)
        worst = max(worst, check_weak_orthogonality(K, Q))
    return _result("weak_orthogonality", worst, 1e-10, f"{count} instances")


def suite_clark_exactness(seed: int = 1006) -> SuiteResult:
    """The adapted representation is exact on the representable class."""
    rng = make_rng(seed)
    worst = 0.0
    ok = True
    count = 100
    for _ in range(count):
        n = int(rng.integers(2, 6))
        d = int(rng.integers(1, 4))
        v = random_representable_vfield(rng, n, d, 3)
        res = reconstruct(v)
        worst = max(worst, res.residual_l2)
        worst = max(worst, math.sqrt(res.reconstruction.sub(v).energy()))
    for _ in range(30):
        n = int(rng.integers(2, 6))
        d = int(rng.integers(1, 4))
        K = random_weakly_adapted(rng, n, d, 3)
        ok = ok and check_divergence_free_uniqueness(K)
    return _result(
        "clark_exactness",
        worst,
        1e-10,
        f"{count} representable fields plus 30 injectivity checks",
        extra_ok=ok,
    )


def suite_refinement_convergence(seed: int = 1007) -> SuiteResult:
    """Residuals shrink under grid refinement at the predicted rate."""
    rng = make_rng(seed)
    worst = 0.0
    ok = True
    he2 = VField((ChaosPoly.hermite(1, 1, 2),))
    for m, residual in refine_and_reconstruct(he2, range(1, 17)):
        worst = max(worst, abs(residual - math.sqrt(2.0 / m)))
    for _ in range(20):
        n = int(rng.integers(1, 4))
        v = VField((random_poly(rng, n, 3),))
        table = refine_and_reconstruct(v, [1, 2, 4, 8])
        residuals = [r for _, r in table]
        ok = ok and all(
            residuals[i + 1] <= residuals[i] + 1e-12 for i in range(len(residuals) - 1)
        )
        if residuals[0] > 1e-12:
            ok = ok and residuals[0] ** 2 >= 3.0 * residuals[-1] ** 2
    return _result(
        "refinement_convergence",
        worst,
        1e-12,
        "closed form m=1..16 plus 20 random monotonicity and energy-ratio checks",
        extra_ok=ok,
    )


def suite_minimal_energy(seed: int = 1008) -> SuiteResult:
    """The gradient-of-inverse-generator field represents every functional."""
    rng = make_rng(seed)
    worst = 0.0
    ok = True
    count = 100
    for _ in range(count):
        n = int(rng.integers(1, 6))
        p = random_poly(rng, n, 4)
        centered = p - ChaosPoly.constant(n, p.expectation())
        bar = minimal_energy_integrand(centered)
        worst = max(worst, (divergence_h(bar) - centered).norm_l2())
    for _ in range(40):
        n = int(rng.integers(2, 6))
        phi = random_representable_poly(rng, n, 3)
        comp = compare_energies(phi)
        ok = ok and comp.exact_energy <= comp.adapted_energy + 1e-10
    # worked product functional: adapted energy 1, exact energy 1/2
    pair = ChaosPoly.hermite(2, 1, 1) * ChaosPoly.hermite(2, 2, 1)
    comp = compare_energies(pair)
    ok = ok and abs(comp.adapted_energy - 1.0) <= 1e-12
    ok = ok and abs(comp.exact_energy - 0.5) <= 1e-12
    ok = ok and not comp.coincide
    first = ChaosPoly.hermite(3, 2, 1, 2.0) + ChaosPoly.hermite(3, 3, 1, -1.0)
    ok = ok and compare_energies(first).coincide
    return _result(
        "minimal_energy",
        worst,
        1e-10,
        f"{count} centered functionals, 40 energy comparisons, worked pair",
        extra_ok=ok,
    )


def suite_number_operator(seed: int = 1009) -> SuiteResult:
    """Divergence after gradient acts as grade scaling."""
    rng = make_rng(seed)
    worst = 0.0
    count = 100
    for _ in range(count):
        n = int(rng.integers(1, 6))
        p = random_poly(rng, n, 4)
        gap = (divergence_h(gradient_scalar(p)) - ou_apply(p)).norm_l2()
        worst = max(worst, gap)
    return _result("number_operator", worst, 1e-10, f"{count} random functionals")


def suite_operator_bound(seed: int = 1010) -> SuiteResult:
    """The sharp constant bounds the pairing over the unit sphere."""
    rng = make_rng(seed)
    worst = 0.0
    count = 40
    for _ in range(count):
        n = int(rng.integers(2, 5))
        d = int(rng.integers(1, 4))
        K = random_operator(rng, n, d, 2)
        c = check_cbound(K)
        for _ in range(20):
            y = rng.standard_normal(d)
            norm = float(np.linalg.norm(y))
            if norm < 1e-12:
                continue
            y = y / norm
            value = divergence_h(K.transpose_apply(y)).norm_l2()
            worst = max(worst, value - c)
    return _result(
        "operator_bound", worst, 1e-9, f"{count} operators, 20 directions each"
    )


def suite_rotation_invariants(seed: int = 1011) -> SuiteResult:
    """Adapted rotations: pathwise isometry, strict-past certificates, defects."""
    worst = 0.0
    ok = True
    n = 6
    probe = sample_batch(n, 1000, seed)
    for spec in ("zero", "sign", "givens"):
        R = build_sequential_isometry(n, seed, spec)
        worst = max(worst, isometry_check(R, probe))
        worst = max(worst, check_strict_past_measurability(R, probe))
    base = build_sequential_isometry(n, seed, "zero")
    cov_gap = float(np.max(np.abs(exact_output_covariance(base) - np.eye(n))))
    worst = max(worst, cov_gap)
    scaled = scale_output(base, 1, 2.0)
    ok = ok and abs(isometry_check(scaled, probe) - 3.0) <= 1e-12
    mixed = mix_outputs(build_sequential_isometry(n, seed, "givens"), 1, n)
    ok = ok and isometry_check(mixed, probe) > 0.5
    report = gaussianity_battery(
        build_sequential_isometry(n, seed, "givens"),
        np.ones(n) / math.sqrt(n),
        50_000,
        seed + 1,
    )
    ok = ok and report.passed
    return _result(
        "rotation_invariants",
        worst,
        1e-9,
        "three constructions, exact covariance, planted defects, output law",
        extra_ok=ok,
    )


def suite_monte_carlo_consistency(seed: int = 1012) -> SuiteResult:
    """Sampling means agree with algebraic expectations within 4 sigma."""
    rng = make_rng(seed)
    worst = 0.0
    count = 50
    n = 4
    batch = sample_batch(n, 100_000, seed)
    for _ in range(count):
        p = random_poly(rng, n, 3)
        est = mc_estimate(p, batch)
        tolerance = max(4.0 * est.stderr, 1e-12)
        worst = max(worst, abs(est.mean - p.expectation()) / tolerance)
    return _result(
        "monte_carlo_consistency",
        worst,
        1.0,
        f"{count} functionals at 100000 samples, gap over 4 sigma",
    )


ALL_SUITES = (
    suite_duality_pairing,
    suite_weak_pairing,
    suite_structure_constants,
    suite_ito_isometry,
    suite_weak_orthogonality,
    suite_clark_exactness,
    suite_refinement_convergence,
    suite_minimal_energy,
    suite_number_operator,
    suite_operator_bound,
    suite_rotation_invariants,
    suite_monte_carlo_consistency,
)


def suite_names() -> list[str]:
    return [fn.__name__.removeprefix("suite_") for fn in ALL_SUITES]


def run_suites(names=None) -> list[SuiteResult]:
    """Run the named suites (all by default) in declaration order."""
    table = {fn.__name__.removeprefix("suite_"): fn for fn in ALL_SUITES}
    if names is None:
        picked = list(table)
    else:
        picked = list(names)
        unknown = [name for name in picked if name not in table]
        if unknown:
            known = ", ".join(table)
            raise KeyError(f"unknown suite(s) {', '.join(unknown)}; known: {known}")
    return [table[name]() for name in picked]
