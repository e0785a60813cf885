"""Symbolic chain-rule expansion of the radial commutator difference.

Works from the weight itself rather than from a coefficient table: with
Phi = W(rho)/U, U = T - t + hbar and d/dt = -d/dU, it differentiates

    eta = 1/2 d_t Phi + 1/4 Phi_rho²

and assembles the gradient and zeroth-order parts of

    <-(S' + [S, A]) f, f> - (1/U) <-S f, f>

for S = Δ + eta + mu/rho². The result is used to cross-check
certifier.expand_radial_commutator.
"""

from fractions import Fraction
from typing import Dict, Tuple

import sympy

from logconvex_lab.core.errors import InternalError
from logconvex_lab.core.models import Number, RadialWeightParams

rho, U = sympy.symbols("rho U", positive=True)


def to_sympy(value: Number) -> sympy.Expr:
    """Exact sympy number for ints and Fractions, Float otherwise."""
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, int):
        return sympy.Integer(value)
    return sympy.Float(value, 30)


def _radial_laplacian(expr: sympy.Expr, n: int) -> sympy.Expr:
    return sympy.diff(expr, rho, 2) + (n - 1) * sympy.diff(expr, rho) / rho


def _dt(expr: sympy.Expr) -> sympy.Expr:
    return -sympy.diff(expr, U)


def _collect(expr: sympy.Expr) -> Dict[Tuple[int, sympy.Expr], sympy.Expr]:
    """Split a sum of c U^-k rho^p terms into {(k, p): c}."""
    out: Dict[Tuple[int, sympy.Expr], sympy.Expr] = {}
    for term in sympy.Add.make_args(sympy.expand(expr)):
        if term == 0:
            continue
        rest, u_power = term.as_coeff_exponent(U)
        coefficient, rho_power = rest.as_coeff_exponent(rho)
        if coefficient.has(rho) or coefficient.has(U):
            raise InternalError(f"unexpected term in expansion: {term}")
        key = (int(-u_power), rho_power)
        out[key] = out.get(key, 0) + coefficient
    return {k: v for k, v in out.items() if v != 0}


def symbolic_expansion(params: RadialWeightParams) -> Dict[str, Dict]:
    """Expand the commutator difference for phi = -a rho² + b rho^s - c.

    Returns:
        {"gradient": {(k, p): coeff} for the |∇f|² integrand,
         "radial": {(k, p): coeff} for the |x·∇f|² integrand,
         "zeroth": {(k, p): coeff} for the f² integrand},
        where each key stands for U^-k rho^p.
    """
    n = params.n
    a, b, c, s, mu = (to_sympy(v) for v in (params.a, params.b, params.c, params.s, params.mu))
    W = -a * rho ** 2 + b * rho ** s - c
    Phi = W / U
    Phi_r = sympy.diff(Phi, rho)
    Phi_rr = sympy.diff(Phi, rho, 2)
    eta = _dt(Phi) / 2 + Phi_r ** 2 / 4

    # -2 ∇f·∇²Phi ∇f - (1/U)|∇f|²
    gradient = -2 * Phi_r / rho - 1 / U
    radial = -2 * (Phi_rr - Phi_r / rho) / rho ** 2
    zeroth = (
        _radial_laplacian(_radial_laplacian(Phi, n), n) / 2
        - _dt(eta)
        - Phi_r * sympy.diff(eta, rho)
        + 2 * mu * Phi_r / rho ** 3
        + (eta + mu / rho ** 2) / U
    )
    return {
        "gradient": _collect(gradient),
        "radial": _collect(radial),
        "zeroth": _collect(zeroth),
    }
