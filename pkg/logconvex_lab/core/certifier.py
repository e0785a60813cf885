"""Sign certification of the radial commutator difference.

For phi = -a rho² + b rho^s - c, Phi = phi/Upsilon and an inverse-square
potential mu/rho², the difference

    D(f) = <-(S' + [S, A]) f, f> - (1/Upsilon) <-S f, f>

splits into
    * a gradient group (1/Upsilon)[-(1-4a) ∫|∇f|² + mu(1-4a) ∫ f²/rho²],
    * a bracket (1/Upsilon)[-2bs ∫ rho^{s-2}|∇f|² + 2bs(2-s) ∫ rho^{s-4}|x·∇f|²],
    * zeroth-order terms at Upsilon^-1 and Upsilon^-3 with rho powers
      s-4, 0, 2, s, 2s-2 and 3s-4.

D(f) <= 0 is certified group by group: Hardy's inequality for the gradient
group, Cauchy-Schwarz for the bracket and a pointwise sign check of the
zeroth-order polynomials on (0, R0].
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from logconvex_lab.core.errors import InvalidInputError, RegressionFailure
from logconvex_lab.core.models import (
    CoefficientTable,
    GroupVerdict,
    Number,
    ProgressCallback,
    RadialWeightParams,
    SearchResult,
    SignCertificate,
)
from logconvex_lab.core.oracle import to_sympy
from logconvex_lab.core.utils import resolve_jobs

logger = logging.getLogger(__name__)

DEFAULT_RHO_RESOLUTION = 2001
# Coefficients below this fraction of the largest one count as zero in float mode
_RELATIVE_ZERO = 1e-13

RangeSpec = Union[Sequence[Number], Tuple[float, float, int], Dict[str, Any]]


def critical_mu(n: int) -> Fraction:
    """Hardy constant (n - 2)²/4."""
    if n < 3:
        raise InvalidInputError("the inverse-square potential needs n >= 3")
    return Fraction((n - 2) ** 2, 4)


def mu_threshold(n: int) -> Fraction:
    """Largest mu for which the annulus weight is known to certify.

    7/54 in dimension 3 and (n - 1)(n - 3)/4 from dimension 4 on.
    """
    if n < 3:
        raise InvalidInputError("the inverse-square potential needs n >= 3")
    if n == 3:
        return Fraction(7, 54)
    return Fraction((n - 1) * (n - 3), 4)


def expand_radial_commutator(params: RadialWeightParams) -> CoefficientTable:
    """Closed-form coefficient table; exact when every parameter is rational."""
    n, a, b, c, s, mu = params.n, params.a, params.b, params.c, params.s, params.mu
    half = Fraction(1, 2) if params.exact else 0.5
    bs = b * s
    zeroth = {
        "u1_rho_s-4": ((1, s - 4), half * bs * (4 * mu - (2 - s) * (n + s - 2) * (n + s - 4))),
        "u3_rho_0": ((3, 0), half * c),
        "u3_rho_2": ((3, 2), half * a * (1 - 2 * a) * (1 - 4 * a)),
        "u3_rho_s": ((3, s), half * b * (-1 + 6 * a * s - 4 * a * a * s - 4 * a * a * s * s)),
        "u3_rho_2s-2": ((3, 2 * s - 2), -half * bs * bs * (half * 3 + 2 * a - 4 * a * s)),
        "u3_rho_3s-4": ((3, 3 * s - 4), -half * bs ** 3 * (s - 1)),
    }
    return CoefficientTable(
        params=params,
        gradient=-(1 - 4 * a),
        hardy_term=mu * (1 - 4 * a),
        bracket_gradient=-2 * bs,
        bracket_radial=2 * bs * (2 - s),
        zeroth=zeroth,
    )


def oracle_deviation(table: CoefficientTable, expansion: Dict[str, Dict]) -> float:
    """Largest |table - oracle| over every (Upsilon power, rho power) slot."""
    expected: Dict[Tuple[int, float], float] = {}

    def put(bucket: Dict, k: int, p: Number, value: Number) -> None:
        key = (k, round(float(p), 9))
        bucket[key] = bucket.get(key, 0.0) + float(value)

    for (k, p), value in table.zeroth.values():
        put(expected, k, p, value)
    put(expected, 1, -2, table.hardy_term)

    actual: Dict[Tuple[int, float], float] = {}
    for (k, p), value in expansion["zeroth"].items():
        put(actual, k, p, value)

    gradient_expected: Dict[Tuple[int, float], float] = {}
    put(gradient_expected, 1, 0, table.gradient)
    put(gradient_expected, 1, table.params.s - 2, table.bracket_gradient)
    gradient_actual: Dict[Tuple[int, float], float] = {}
    for (k, p), value in expansion["gradient"].items():
        put(gradient_actual, k, p, value)

    radial_expected: Dict[Tuple[int, float], float] = {}
    put(radial_expected, 1, table.params.s - 4, table.bracket_radial)
    radial_actual: Dict[Tuple[int, float], float] = {}
    for (k, p), value in expansion["radial"].items():
        put(radial_actual, k, p, value)

    worst = 0.0
    for lhs, rhs in ((expected, actual), (gradient_expected, gradient_actual), (radial_expected, radial_actual)):
        for key in set(lhs) | set(rhs):
            worst = max(worst, abs(lhs.get(key, 0.0) - rhs.get(key, 0.0)))
    return worst


def _rho_samples(R0: float, resolution: int) -> np.ndarray:
    near_zero = np.geomspace(R0 * 1e-6, R0, resolution // 2)
    uniform = np.linspace(R0 / resolution, R0, resolution)
    return np.union1d(near_zero, uniform)


def _is_zero(value: Number, scale: float, exact: bool) -> bool:
    if exact:
        return value == 0
    return abs(float(value)) <= _RELATIVE_ZERO * scale


def _gradient_verdict(table: CoefficientTable, tolerance: float) -> GroupVerdict:
    params = table.params
    hardy = Fraction(4, (params.n - 2) ** 2)
    margin = float((1 - 4 * params.a) * (hardy * params.mu - 1)) if params.exact else (
        (1 - 4 * float(params.a)) * (float(hardy) * float(params.mu) - 1)
    )
    return GroupVerdict(
        name="gradient",
        passed=margin <= tolerance,
        margin=margin,
        detail=f"(1-4a)(4 mu/(n-2)^2 - 1) with 1-4a = {float(1 - 4 * params.a):.6g}",
    )


def _bracket_verdict(table: CoefficientTable, tolerance: float) -> GroupVerdict:
    s = float(table.params.s)
    margin = float(table.bracket_gradient) * (s - 1)
    passed = 1.0 <= s <= 2.0 and margin <= tolerance
    return GroupVerdict(
        name="bracket",
        passed=passed,
        margin=margin,
        detail="-2bs(s-1) rho^{s-2}|∇f|^2 after |x·∇f|^2 <= |x|^2 |∇f|^2",
    )


def _upsilon1_verdict(table: CoefficientTable, tolerance: float) -> GroupVerdict:
    _, coefficient = table.zeroth["u1_rho_s-4"]
    margin = float(coefficient)
    return GroupVerdict(
        name="upsilon1",
        passed=margin <= tolerance,
        margin=margin,
        detail=f"coefficient of rho^(s-4) = {coefficient}",
    )


def _upsilon3_verdict(
    merged: Dict[Number, Number], R0: float, resolution: int, tolerance: float, exact: bool
) -> GroupVerdict:
    scale = max((abs(float(v)) for v in merged.values()), default=0.0)
    nonzero = [(p, v) for p, v in merged.items() if not _is_zero(v, scale, exact)]
    if not nonzero:
        return GroupVerdict(name="upsilon3", passed=True, margin=0.0, detail="identically zero")
    lowest_power, lowest = nonzero[0]
    rho = _rho_samples(R0, resolution)
    values = sum(float(v) * rho ** float(p) for p, v in nonzero)
    margin = float(np.max(values))
    limit_ok = float(lowest) < 0
    return GroupVerdict(
        name="upsilon3",
        passed=limit_ok and margin <= tolerance,
        margin=margin,
        detail=f"lowest power rho^{lowest_power} has coefficient {lowest}",
    )


def _rational_square(R0: Number) -> sympy.Rational:
    if isinstance(R0, (int, Fraction)):
        square = Fraction(R0) ** 2
    else:
        square = Fraction(float(R0) ** 2).limit_denominator(10 ** 6)
    return sympy.Rational(square.numerator, square.denominator)


def exact_pairing_trail(merged: Dict[Number, Number], R0: Number) -> Tuple[bool, List[Dict[str, Any]]]:
    """Absorb positive terms into lower negative ones using rho^p <= R0^(p-q) rho^q.

    Positive terms are processed from the lowest power up; each is moved onto
    the nearest lower power whose current coefficient is negative.

    Returns:
        (every coefficient ends nonpositive, list of pairing steps)
    """
    r0_sq = _rational_square(R0)
    terms = [[to_sympy(Fraction(p)), to_sympy(v)] for p, v in merged.items() if v != 0]
    steps: List[Dict[str, Any]] = []
    for i, (p, value) in enumerate(terms):
        if value <= 0:
            continue
        target = next((j for j in range(i - 1, -1, -1) if terms[j][1] < 0), None)
        if target is None:
            steps.append({"power": str(p), "coefficient": str(value), "absorbed_by": None})
            continue
        q = terms[target][0]
        factor = sympy.simplify(r0_sq ** ((p - q) / 2))
        terms[target][1] = terms[target][1] + value * factor
        terms[i][1] = sympy.Integer(0)
        steps.append({
            "power": str(p),
            "coefficient": str(value),
            "absorbed_by": str(q),
            "factor": str(factor),
            "remaining": str(terms[target][1]),
        })
    ok = all(v <= 0 for _, v in terms)
    return bool(ok), steps


def certify_sign(
    table: CoefficientTable,
    R0: Optional[Number] = None,
    rho_resolution: int = DEFAULT_RHO_RESOLUTION,
    tolerance: float = 1e-12,
) -> SignCertificate:
    """Certify D(f) <= 0 for every f supported in the ball of radius R0.

    Args:
        table: Output of expand_radial_commutator.
        R0: Outer radius (defaults to table.params.R0).
        rho_resolution: Sample count for the zeroth-order polynomial.
        tolerance: Allowed positive margin per group.

    Returns:
        Certificate with per-group verdicts and the reduction trail. For
        rational parameters the Upsilon^-3 group also gets an exact
        pairing trail.
    """
    params = table.params
    R0 = params.R0 if R0 is None else R0
    if float(R0) <= 0:
        raise InvalidInputError("R0 must be positive")
    if rho_resolution < 2:
        raise InvalidInputError("rho_resolution must be at least 2")

    merged = table.group(3)
    groups = {
        "gradient": _gradient_verdict(table, tolerance),
        "bracket": _bracket_verdict(table, tolerance),
        "upsilon1": _upsilon1_verdict(table, tolerance),
        "upsilon3": _upsilon3_verdict(merged, float(R0), rho_resolution, tolerance, params.exact),
    }
    trail: List[Dict[str, Any]] = [
        {"group": "gradient", "reduction": "hardy", "bound": "∫f²/rho² <= 4/(n-2)² ∫|∇f|²"},
        {"group": "bracket", "reduction": "cauchy_schwarz", "bound": "|x·∇f|² <= |x|²|∇f|²"},
        {"group": "upsilon1", "reduction": "sign", "bound": "single power rho^(s-4)"},
    ]
    if params.exact:
        exact_ok, steps = exact_pairing_trail(merged, R0)
        trail.append({"group": "upsilon3", "reduction": "pairing", "exact": exact_ok, "steps": steps})
    else:
        trail.append({"group": "upsilon3", "reduction": "sampled", "samples": rho_resolution})

    certified = all(g.passed for g in groups.values())
    worst = max(g.margin for g in groups.values())
    logger.debug(f"certify {params.astuple()} n={params.n} mu={params.mu}: {certified} (margin {worst:.3e})")
    return SignCertificate(groups=groups, worst_margin=worst, trail=trail, certified=certified)


def certify(params: RadialWeightParams, **kwargs) -> SignCertificate:
    """expand_radial_commutator followed by certify_sign."""
    return certify_sign(expand_radial_commutator(params), **kwargs)


# ---------------------------------------------------------------------------
# Reference configurations
# ---------------------------------------------------------------------------

_QUARTER = Fraction(1, 4)
_R0_FOUR_THIRDS = (4 / 3) ** 1.5


def reference_configurations() -> List[Tuple[str, RadialWeightParams, bool]]:
    """(name, parameters, expected verdict) for the known parameter sets."""
    step = Fraction(1, 100)
    configs = [
        ("n3_s1", RadialWeightParams(3, _QUARTER, _QUARTER, Fraction(1, 16), 1), True),
        (
            "n3_s4/3",
            RadialWeightParams(3, _QUARTER, _QUARTER, Fraction(1, 81), Fraction(4, 3), R0=_R0_FOUR_THIRDS),
            True,
        ),
        (
            "n3_mu_threshold",
            RadialWeightParams(
                3, _QUARTER, _QUARTER, Fraction(1, 81), Fraction(4, 3), mu=mu_threshold(3), R0=_R0_FOUR_THIRDS
            ),
            True,
        ),
        (
            "n3_mu_above",
            RadialWeightParams(
                3, _QUARTER, _QUARTER, Fraction(1, 81), Fraction(4, 3), mu=mu_threshold(3) + step, R0=_R0_FOUR_THIRDS
            ),
            False,
        ),
    ]
    for n in (4, 5):
        for name, mu, expected in (
            (f"n{n}_mu_threshold", mu_threshold(n), True),
            (f"n{n}_mu_above", mu_threshold(n) + step, False),
        ):
            configs.append((name, RadialWeightParams(n, _QUARTER, _QUARTER, Fraction(1, 16), 1, mu=mu), expected))
    return configs


def reproduce_reference_verdicts(tolerance: float = 1e-12) -> List[Dict[str, Any]]:
    """Certify every reference configuration and compare with its expected verdict.

    Raises:
        RegressionFailure: On the first configuration whose verdict differs.
    """
    results = []
    for name, params, expected in reference_configurations():
        certificate = certify(params, tolerance=tolerance)
        results.append({
            "configuration": name,
            "params": params,
            "expected": expected,
            "certified": certificate.certified,
            "worst_margin": certificate.worst_margin,
            "groups": certificate.groups,
        })
        if certificate.certified != expected:
            failing = [g.name for g in certificate.groups.values() if not g.passed]
            raise RegressionFailure(
                name,
                f"expected {'certified' if expected else 'not-certified'}, got "
                f"{certificate.verdict} (failing groups: {failing})",
            )
    return results


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

def expand_range(spec: RangeSpec, name: str) -> List[Number]:
    """Explicit values from a list, a (lo, hi, count) tuple or {"lo", "hi", "count"}.

    Raises:
        InvalidInputError: If the range is empty or malformed.
    """
    if isinstance(spec, dict):
        try:
            spec = (float(spec["lo"]), float(spec["hi"]), int(spec["count"]))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInputError(f"range {name!r} needs lo, hi and count: {e}") from e
    if isinstance(spec, tuple) and len(spec) == 3 and isinstance(spec[2], int) and not isinstance(spec[2], bool):
        lo, hi, count = spec
        if count < 1 or hi < lo:
            raise InvalidInputError(f"range {name!r} is empty")
        values: List[Number] = np.linspace(float(lo), float(hi), count).tolist()
    else:
        values = [Fraction(v) if isinstance(v, str) else v for v in spec]
    if not values:
        raise InvalidInputError(f"range {name!r} is empty")
    return sorted(set(values), key=float)


def admissible_mu(n: int, a: Number, s: Number) -> float:
    """Largest mu the gradient and Upsilon^-1 groups allow for (a, s)."""
    s = float(s)
    bound = (2 - s) * (n + s - 2) * (n + s - 4) / 4
    if float(a) < 0.25:
        bound = min(bound, float(critical_mu(n)))
    return bound


def _evaluate(n: int, mu: Number, R0: Number, candidate: Tuple[Number, ...], tolerance: float) -> Optional[SignCertificate]:
    a, b, c, s = candidate
    try:
        params = RadialWeightParams(n, a, b, c, s, mu=mu, R0=R0)
    except InvalidInputError as e:
        logger.debug(f"skipping {candidate}: {e}")
        return None
    return certify(params, tolerance=tolerance)


def search_parameters(
    n: int,
    mu: Number,
    ranges: Dict[str, RangeSpec],
    R0: Number = 1.0,
    jobs: Optional[int] = None,
    tolerance: float = 1e-12,
    progress_callback: Optional[ProgressCallback] = None,
) -> SearchResult:
    """Deterministic grid scan over (a, b, c, s).

    Args:
        n: Dimension.
        mu: Inverse-square coefficient, fixed for the scan.
        ranges: Range for each of "a", "b", "c", "s".
        R0: Outer radius.
        jobs: Worker threads (None reads LOGCONVEX_LAB_JOBS, then CPU count).
        tolerance: Group margin tolerance.
        progress_callback: Optional (current, total, message) callback.

    Returns:
        Certified tuples in lexicographic order; best is the certified
        tuple with the largest admissible mu, ties going to the smallest
        tuple. Candidates with out-of-range parameters are skipped and not
        counted as evaluated.

    Raises:
        InvalidInputError: If any range is empty or missing.
    """
    missing = [k for k in ("a", "b", "c", "s") if k not in ranges]
    if missing:
        raise InvalidInputError(f"missing search ranges: {missing}")
    axes = [expand_range(ranges[k], k) for k in ("a", "b", "c", "s")]
    candidates = list(itertools.product(*axes))
    total = len(candidates)

    feasible: List[Tuple[Number, ...]] = []
    evaluated = 0
    with ThreadPoolExecutor(max_workers=resolve_jobs(jobs)) as executor:
        future_to_candidate = {
            executor.submit(_evaluate, n, mu, R0, candidate, tolerance): candidate
            for candidate in candidates
        }
        for done, future in enumerate(as_completed(future_to_candidate), start=1):
            candidate = future_to_candidate[future]
            certificate = future.result()
            if certificate is not None:
                evaluated += 1
                if certificate.certified:
                    feasible.append(candidate)
            if progress_callback:
                progress_callback(done, total, "search")

    feasible.sort(key=lambda t: tuple(float(v) for v in t))
    best = None
    best_mu = None
    for candidate in feasible:
        value = admissible_mu(n, candidate[0], candidate[3])
        if best_mu is None or value > best_mu + 1e-15:
            best, best_mu = candidate, value
    logger.info(f"search n={n} mu={mu}: {len(feasible)} of {evaluated} certified")
    return SearchResult(
        feasible=[tuple(float(v) for v in t) for t in feasible],
        best=None if best is None else tuple(float(v) for v in best),
        best_mu=best_mu,
        evaluated=evaluated,
    )


def certificate_summary(certificate: SignCertificate) -> Dict[str, Any]:
    """Plain-dict view of a certificate for reports."""
    return {
        "verdict": certificate.verdict,
        "worst_margin": certificate.worst_margin if math.isfinite(certificate.worst_margin) else None,
        "groups": {name: {"passed": g.passed, "margin": g.margin, "detail": g.detail}
                   for name, g in certificate.groups.items()},
        "trail": certificate.trail,
    }
