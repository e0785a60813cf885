"""Explicit constant chains of the observation and spectral estimates.

Every chain is evaluated with mpmath at MPMATH_PRECISION digits and stored
in log space, because constants such as exp(K/T) overflow a double for
desk-scale parameters. Entries keep the formula and the derivation step
they come from.
"""

import logging
from typing import Optional

import mpmath

from logconvex_lab.core.errors import InternalError, InvalidInputError
from logconvex_lab.core.models import ConstantChain, WeightSpec
from logconvex_lab.core.weights import weight_gap

logger = logging.getLogger(__name__)

MPMATH_PRECISION = 50


def _add(chain: ConstantChain, name: str, value, formula: str, provenance: str) -> None:
    """Store an mpf; the log is taken in high precision when value > 0."""
    value = mpmath.mpf(value)
    log_value = float(mpmath.log(value)) if value > 0 else None
    plain = float(value) if abs(value) < mpmath.mpf("1e300") else None
    chain.add(name, plain, formula, provenance, log_value=log_value)


def _add_log(chain: ConstantChain, name: str, log_value, formula: str, provenance: str) -> None:
    """Store a constant known only through its logarithm."""
    chain.add(name, None, formula, provenance, log_value=float(log_value))


def _check_beta(beta) -> None:
    if not 0 < beta < 1:
        raise InvalidInputError(f"beta must lie in (0, 1), got {beta}")


def _check_p(p) -> None:
    if not 1 <= p <= 2:
        raise InvalidInputError(f"p must lie in [1, 2], got {p}")


def _positive(**values) -> None:
    for name, value in values.items():
        if not value > 0:
            raise InvalidInputError(f"{name} must be positive, got {value}")


def regional_decay_time(
    norm_u0_sq: float, norm_uT_ball_sq: float, R: float, delta: float, T: float
) -> ConstantChain:
    """Decay window theta from a measured ratio ||u0||² / ||u(T)||²_B(x0, R).

    1/theta = (2/(delta R)²) ln(2 exp(R²(1 + 1/T)) ratio); epsilon = theta/delta.
    Also reports C_(delta,R) = (1 + delta) delta R²/4 and the log bound
    (1 + delta) delta R²/(2 theta) on ||u0||²/||u(t)||²_B(x0,(1+delta)R) for
    t in [T - theta, T].

    Raises:
        InvalidInputError: Nonpositive norms, delta outside (0, 1], T <= 0 or
            a ratio below 1.
        InternalError: If theta exceeds min(1, T/2).
    """
    _positive(norm_u0_sq=norm_u0_sq, norm_uT_ball_sq=norm_uT_ball_sq, R=R, T=T)
    if not 0 < delta <= 1:
        raise InvalidInputError("delta must lie in (0, 1]")
    with mpmath.workdps(MPMATH_PRECISION):
        ratio = mpmath.mpf(norm_u0_sq) / mpmath.mpf(norm_uT_ball_sq)
        if ratio < 1:
            raise InvalidInputError(f"norm ratio {float(ratio):.6g} < 1: the solution grew")
        R, delta, T = mpmath.mpf(R), mpmath.mpf(delta), mpmath.mpf(T)
        L = mpmath.log(2) + R ** 2 * (1 + 1 / T) + mpmath.log(ratio)
        theta = (delta * R) ** 2 / (2 * L)
        if theta > min(1, T / 2):
            raise InternalError(f"theta={float(theta)} exceeds min(1, T/2)")

        chain = ConstantChain(name="regional_decay_time")
        _add(chain, "ratio", ratio, "||u0||^2 / ||u(T)||^2_B(x0,R)", "measured input")
        _add(chain, "theta", theta, "(delta R)^2 / (2 ln(2 e^{R^2(1+1/T)} ratio))", "decay window")
        _add(chain, "epsilon", theta / delta, "delta R^2 / (2 ln(2 e^{R^2(1+1/T)} ratio))", "heat-kernel parameter of the decay window")
        _add(chain, "C_delta_R", (1 + delta) * delta * R ** 2 / 4, "(1+delta) delta R^2 / 4", "ball-ratio estimate")
        _add(
            chain,
            "log_ball_ratio_bound",
            (1 + delta) * delta * R ** 2 / (2 * theta),
            "(1+delta) delta R^2 / (2 theta)",
            "log of the ball-ratio bound on [T - theta, T]",
        )
    logger.debug(f"theta={chain.value('theta'):.6g} from ratio {float(ratio):.6g}")
    return chain


def interpolation_exponent_ell(ell) -> mpmath.mpf:
    """M_ell = ln(ell + 1) / ln((2 ell + 1)/(ell + 1))."""
    ell = mpmath.mpf(ell)
    return mpmath.log(ell + 1) / mpmath.log((2 * ell + 1) / (ell + 1))


def _telescoping_terms(beta, gamma):
    z = (1 + beta) ** (1 / (2 * gamma))
    C_beta = (1 + beta) / (beta * (z - 1) ** gamma)
    return z, C_beta


def observation_chain(r: float, R: float, epsilon: float, lam: Optional[float] = None) -> ConstantChain:
    """Constants of the one-time observation estimate from a ball of radius r.

    ell = ((R²/r²) 2^{2+eps}/(eps ln(3/2)))^{1/(1-eps)}, M_ell as in
    interpolation_exponent_ell, K = r² ell/8, beta = 1/(2(1 + M_ell)),
    c = 2, gamma = 1. K_eps is taken as

        max(4 sqrt((1 + 2 M_ell) r² ell/8) r^eps, (r² ell/4) C_beta r^eps, 16/(r² ell)).

    Args:
        r: Observation radius.
        R: Radius of a ball containing the domain, centred at the anchor.
        epsilon: Exponent parameter in (0, 1).
        lam: Optional frequency cut; adds the spectral exponent
            4 sqrt(lam (1 + 2 M_ell) K).

    Raises:
        InvalidInputError: Unless 0 < r < R and 0 < epsilon < 1.
        InternalError: If R²(1 + M_ell)/(4(ell + 1)) > r²/8.
    """
    if not 0 < r < R:
        raise InvalidInputError(f"need 0 < r < R, got r={r}, R={R}")
    if not 0 < epsilon < 1:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    with mpmath.workdps(MPMATH_PRECISION):
        r, R, eps = mpmath.mpf(r), mpmath.mpf(R), mpmath.mpf(epsilon)
        log_ell = (2 * mpmath.log(R / r) + mpmath.log(2 ** (2 + eps) / (eps * mpmath.log(1.5)))) / (1 - eps)
        ell = mpmath.exp(log_ell)
        M = interpolation_exponent_ell(ell)
        if R ** 2 * (1 + M) / (4 * (ell + 1)) > r ** 2 / 8:
            raise InternalError("R^2(1+M_ell)/(4(ell+1)) <= r^2/8 fails for the chosen ell")
        K = r ** 2 * ell / 8
        beta = 1 / (2 * (1 + M))
        gamma = mpmath.mpf(1)
        z, C_beta = _telescoping_terms(beta, gamma)
        r_eps = r ** eps
        K_eps = max(
            4 * mpmath.sqrt((1 + 2 * M) * r ** 2 * ell / 8) * r_eps,
            r ** 2 * ell / 4 * C_beta * r_eps,
            16 / (r ** 2 * ell),
        )

        chain = ConstantChain(name="observation_chain")
        _add(chain, "eps", eps, "eps", "exponent parameter")
        _add(chain, "ell", ell, "((R^2/r^2) 2^{2+eps}/(eps ln 1.5))^{1/(1-eps)}", "choice of ell")
        _add(chain, "M_ell", M, "ln(ell+1) / ln((2ell+1)/(ell+1))", "three-time exponent at t = T, T - ell hbar, T - 2 ell hbar")
        _add(chain, "K", K, "r^2 ell / 8", "one-time observation exponent")
        _add(chain, "beta", beta, "1 / (2(1 + M_ell))", "interpolation weight")
        _add(chain, "c", 2, "2", "one-time observation prefactor")
        _add(chain, "gamma", gamma, "1", "time exponent")
        _add(chain, "p", 2, "2", "observation norm L^p(omega)")
        _add(chain, "z", z, "(1+beta)^{1/(2 gamma)}", "telescoping ratio")
        _add(chain, "C_beta", C_beta, "(1+beta) / (beta ((1+beta)^{1/(2gamma)} - 1)^gamma)", "telescoping constant")
        _add(chain, "K_eps", K_eps, "max(4 sqrt((1+2M) r^2 ell/8) r^eps, (r^2 ell/4) C_beta r^eps, 16/(r^2 ell))", "composition of the chain")
        _add(chain, "C_beta_over_M_sq", C_beta / M ** 2, "C_beta / M_ell^2", "growth of C_beta in M_ell")
        _add(chain, "M_times_r_eps", M * r_eps, "M_ell r^eps", "growth of M_ell in r")
        _add(chain, "chain_gap", r ** 2 / 8 - R ** 2 * (1 + M) / (4 * (ell + 1)), "r^2/8 - R^2(1+M_ell)/(4(ell+1))", "choice of ell")
        if lam is not None:
            _positive(lam=lam)
            exponent = 4 * mpmath.sqrt(mpmath.mpf(lam) * (1 + 2 * M) * K)
            _add(chain, "lambda", lam, "lambda", "frequency cut")
            _add(chain, "spectral_exponent", exponent, "4 sqrt(lambda (1 + 2 M_ell) r^2 ell / 8)", "spectral inequality")
            _add_log(chain, "spectral_constant", mpmath.log(4) + exponent, "4 e^{spectral_exponent}", "spectral inequality")
    return chain


def telescoped_observability(c: float, K: float, beta: float, gamma: float, p: float, T: float) -> ConstantChain:
    """Integrated observability constant from a one-time estimate.

    z = (1 + beta)^{1/(2 gamma)}, C_beta = (1 + beta)/(beta (z - 1)^gamma) and
    the final constant (c/(z K^{1/gamma})) exp((1 + 1/gamma) K C_beta / T^gamma).
    constant_without_z drops the 1/z factor.

    Raises:
        InvalidInputError: beta outside (0, 1), p outside [1, 2] or a
            nonpositive c, K, gamma, T.
    """
    _check_beta(beta)
    _check_p(p)
    _positive(c=c, K=K, gamma=gamma, T=T)
    with mpmath.workdps(MPMATH_PRECISION):
        c, K, beta, gamma, T = (mpmath.mpf(v) for v in (c, K, beta, gamma, T))
        z, C_beta = _telescoping_terms(beta, gamma)
        exponent = (1 + 1 / gamma) * K * C_beta / T ** gamma
        log_without_z = mpmath.log(c) - mpmath.log(K) / gamma + exponent
        chain = ConstantChain(name="telescoped_observability")
        for name, value in (("c", c), ("K", K), ("beta", beta), ("gamma", gamma), ("p", p), ("T", T)):
            _add(chain, name, value, name, "input")
        _add(chain, "z", z, "(1+beta)^{1/(2 gamma)}", "z^{2 gamma} = 1 + beta")
        _add(chain, "C_beta", C_beta, "(1+beta) / (beta (z - 1)^gamma)", "telescoping series")
        _add(chain, "exponent", exponent, "(1 + 1/gamma) K C_beta / T^gamma", "telescoping series")
        _add_log(chain, "constant", log_without_z - mpmath.log(z), "c / (z K^{1/gamma}) e^{exponent}", "integrated observability")
        _add_log(chain, "constant_without_z", log_without_z, "c / K^{1/gamma} e^{exponent}", "integrated observability")
    return chain


def spectral_from_observation(c: float, K: float, beta: float, gamma: float, p: float, lam: float) -> ConstantChain:
    """Spectral inequality constant implied by an interpolation estimate.

    T_opt = ((beta/(1 - beta)) K/lam)^{1/(1+gamma)} and the constant
    c exp(lam^{gamma/(1+gamma)} 2 ((1 - beta)/beta)^{gamma/(1+gamma)} K^{1/(1+gamma)}).
    """
    _check_beta(beta)
    _check_p(p)
    _positive(c=c, K=K, gamma=gamma, lam=lam)
    with mpmath.workdps(MPMATH_PRECISION):
        c, K, beta, gamma, lam = (mpmath.mpf(v) for v in (c, K, beta, gamma, lam))
        T_opt = (beta / (1 - beta) * K / lam) ** (1 / (1 + gamma))
        q = gamma / (1 + gamma)
        exponent = lam ** q * 2 * ((1 - beta) / beta) ** q * K ** (1 / (1 + gamma))
        chain = ConstantChain(name="spectral_from_observation")
        _add(chain, "T_opt", T_opt, "((beta/(1-beta)) K/lambda)^{1/(1+gamma)}", "optimal time")
        _add(chain, "exponent", exponent, "lambda^{g/(1+g)} 2 ((1-beta)/beta)^{g/(1+g)} K^{1/(1+g)}", "spectral constant")
        _add_log(chain, "constant", mpmath.log(c) + exponent, "c e^{exponent}", "spectral constant")
    return chain


def observation_from_spectral(
    D1: float, D2: float, gamma: float, beta: float, p: float, measure_omega: float
) -> ConstantChain:
    """Converse direction: D3 = 2(1 + max(1, |omega|^{1/p - 1/2}) D1), D4 = D2^{1+gamma}/(1-beta)^gamma."""
    _check_beta(beta)
    _check_p(p)
    _positive(D1=D1, D2=D2, gamma=gamma, measure_omega=measure_omega)
    with mpmath.workdps(MPMATH_PRECISION):
        D1, D2, gamma, beta, p, omega = (mpmath.mpf(v) for v in (D1, D2, gamma, beta, p, measure_omega))
        D3 = 2 * (1 + max(mpmath.mpf(1), omega ** (1 / p - mpmath.mpf(1) / 2)) * D1)
        D4 = D2 ** (1 + gamma) / (1 - beta) ** gamma
        chain = ConstantChain(name="observation_from_spectral")
        _add(chain, "D1", D1, "D1", "input")
        _add(chain, "D2", D2, "D2", "input")
        _add(chain, "D3", D3, "2(1 + max(1, |omega|^{1/p-1/2}) D1)", "converse constant")
        _add(chain, "D4", D4, "D2^{1+gamma} / (1-beta)^gamma", "converse constant")
    return chain


def localized_observation_constants(
    weight: WeightSpec, R: float, delta: float, R0: float, ell: float, theta: Optional[float] = None
) -> ConstantChain:
    """Constants that fix the admissible hbar range for localized weights.

    C_(ell,phi) = |min_{|x| <= (1+delta)R} phi - max_{(1+3delta/2)R <= |x| <= R0} phi|
                  / ((1 + 2 ell)(1 + delta) delta R²),
    C3 = min(C_(ell,phi), 1/(2 ell)), C_(delta,R) = (1 + delta) delta R²/4, and
    hbar <= theta C3 when theta is given.

    Raises:
        InvalidInputError: If the weight gap is not negative.
    """
    _positive(R=R, ell=ell)
    gap = weight_gap(weight, R, delta, R0)
    if gap >= 0:
        raise InvalidInputError(f"weight gap {gap:.6g} is not negative; phi does not localize")
    with mpmath.workdps(MPMATH_PRECISION):
        R, delta, ell = mpmath.mpf(R), mpmath.mpf(delta), mpmath.mpf(ell)
        C_phi = abs(mpmath.mpf(gap)) / ((1 + 2 * ell) * (1 + delta) * delta * R ** 2)
        C3 = min(C_phi, 1 / (2 * ell))
        chain = ConstantChain(name="localized_observation_constants")
        _add(chain, "gap", -gap, "min_ball phi - max_annulus phi", "weight gap (sign flipped)")
        _add(chain, "C_ell_phi", C_phi, "|gap| / ((1+2ell)(1+delta) delta R^2)", "weight gap")
        _add(chain, "C3", C3, "min(C_ell_phi, 1/(2 ell))", "hbar range")
        _add(chain, "C_delta_R", (1 + delta) * delta * R ** 2 / 4, "(1+delta) delta R^2 / 4", "ball-ratio estimate")
        if theta is not None:
            _positive(theta=theta)
            _add(chain, "hbar_max", mpmath.mpf(theta) * C3, "theta C3", "hbar range")
    return chain


def hbar_selection(
    C1: float, C2: float, ell: float, T: float, norm_u0: float, norm_uT: float, M: Optional[float] = None
) -> ConstantChain:
    """Choose hbar by exp(C2/hbar) = 2 exp(2 ell C2/T) (||u0||/||u(T)||)^{1+M}.

    With that hbar, ln(2 exp(C1/hbar) (||u0||/||u(T)||)^M) equals
    (1 + C1/C2) ln 2 + 2 ell C1/T + (M + (1 + M) C1/C2) ln(||u0||/||u(T)||).
    Both sides are stored ("log_direct" and "log_closed_form").

    Args:
        M: Interpolation exponent; defaults to M_ell.
    """
    _positive(C1=C1, C2=C2, ell=ell, T=T, norm_u0=norm_u0, norm_uT=norm_uT)
    if norm_uT > norm_u0:
        raise InvalidInputError("||u(T)|| cannot exceed ||u0||")
    with mpmath.workdps(MPMATH_PRECISION):
        C1, C2, ell, T = (mpmath.mpf(v) for v in (C1, C2, ell, T))
        M = interpolation_exponent_ell(ell) if M is None else mpmath.mpf(M)
        L = mpmath.log(mpmath.mpf(norm_u0) / mpmath.mpf(norm_uT))
        inverse_hbar = (mpmath.log(2) + 2 * ell * C2 / T + (1 + M) * L) / C2
        hbar = 1 / inverse_hbar
        prefactor = (1 + C1 / C2) * mpmath.log(2) + 2 * ell * C1 / T
        exponent = M + (1 + M) * C1 / C2
        direct = mpmath.log(2) + C1 * inverse_hbar + M * L
        chain = ConstantChain(name="hbar_selection")
        _add(chain, "M", M, "M_ell", "interpolation exponent")
        _add(chain, "hbar", hbar, "C2 / ln(2 e^{2 ell C2/T} (||u0||/||u(T)||)^{1+M})", "choice of hbar")
        _add(chain, "log_prefactor", prefactor, "(1 + C1/C2) ln 2 + 2 ell C1 / T", "closing estimate")
        _add(chain, "exponent", exponent, "M + (1 + M) C1/C2", "closing estimate")
        chain.add("log_direct", None, "ln 2 + C1/hbar + M ln(||u0||/||u(T)||)", "closing estimate", log_value=float(direct))
        chain.add(
            "log_closed_form",
            None,
            "log_prefactor + exponent ln(||u0||/||u(T)||)",
            "closing estimate",
            log_value=float(prefactor + exponent * L),
        )
    return chain
