"""Riemann-Liouville integrals and Caputo derivatives by quadrature.

Both operators integrate against a weakly singular kernel,

    J^b g(x)   = 1/Gamma(b)   * int_0^x (x-tau)^(b-1)   g(tau) dtau
    D^a f(x)   = 1/Gamma(n-a) * int_0^x (x-tau)^(n-a-1) f^(n)(tau) dtau

with n = ceil(a) and f^(n) obtained symbolically (never by finite
differences).  The integrand's own endpoint behaviour at tau = 0 is known
from the term structure: a power tau^e and, for Mittag-Leffler factors
E_{g,.}(c tau^g), an inner power tau^g.  The substitution tau = x*u^(1/g)
makes the Mittag-Leffler part analytic, after which the integral is split at
the midpoint into two Gauss-Jacobi panels whose weights absorb the exact
endpoint exponents.  For the atom algebra both panels converge spectrally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError
from .expr import Expr, ML, Power
from .params import VAR_NAMES
from .special import gamma

DEFAULT_NODES = 64


@dataclass(frozen=True)
class FracSpec:
    """A Caputo order a > 0 acting on one variable; n is the smallest integer
    with n-1 < a <= n."""

    alpha: float
    var: int

    def __post_init__(self):
        if self.alpha <= 0:
            raise DomainError("fractional order must be positive")

    @property
    def n(self) -> int:
        return math.ceil(self.alpha)

    def is_integer(self) -> bool:
        return self.alpha == int(self.alpha)


@lru_cache(maxsize=256)
def _jacobi(nodes: int, a: float, b: float):
    x, w = roots_jacobi(nodes, a, b)
    return x, w


def _frac_kernel_integral(smooth, beta: float, e: float, v: float, x: float,
                          nodes: int) -> float:
    """int_0^x (x-tau)^(beta-1) tau^e * G(tau) dtau with tau = x*u^v.

    `smooth(tau_array)` evaluates G; the endpoint exponents are handled by
    Jacobi weights so G only needs to be analytic in u = (tau/x)^(1/v).
    """
    if x == 0.0:
        return 0.0
    mu = v * (e + 1.0) - 1.0
    if mu <= -1.0:
        raise DomainError("integrand not integrable at the origin")

    # left panel [0, 1/2]: weight u^mu, remainder smooth
    xi, w = _jacobi(nodes, 0.0, mu)
    u = (xi + 1.0) / 4.0
    tau = x * u ** v
    left_vals = (1.0 - u ** v) ** (beta - 1.0) * smooth(tau)
    left = (0.25 ** (mu + 1.0)) * float(np.dot(w, left_vals))

    # right panel [1/2, 1]: weight (1-u)^(beta-1), remainder smooth
    xi, w = _jacobi(nodes, beta - 1.0, 0.0)
    u = (xi + 3.0) / 4.0
    tau = x * u ** v
    ratio = (1.0 - u ** v) / (1.0 - u)
    right_vals = ratio ** (beta - 1.0) * u ** mu * smooth(tau)
    right = (0.25 ** beta) * float(np.dot(w, right_vals))

    return x ** (beta + e) * v * (left + right)


def _term_axis_profile(atoms, var: int):
    """(power exponent e, substitution order v, remaining-atom list) for one term."""
    e = 0.0
    v = 1.0
    rest = []
    for atom in atoms:
        if isinstance(atom, Power) and atom.var == var:
            e += atom.exponent
        else:
            if isinstance(atom, ML) and atom.var == var and atom.gamma_ != 1.0:
                v = 1.0 / atom.gamma_
            rest.append(atom)
    return e, v, rest


def _integrate_terms(f: Expr, beta: float, var: int, point, nodes: int) -> float:
    """int_0^x (x-tau)^(beta-1) f(tau) dtau / Gamma(beta), term by term."""
    x = float(point[VAR_NAMES[var]])
    if x < 0:
        raise DomainError("integration endpoint must be nonnegative")
    fixed = {name: float(point[name]) for name in VAR_NAMES}
    total = 0.0
    for coeff, atoms in f.terms:
        e, v, rest = _term_axis_profile(atoms, var)
        if e <= -1.0:
            raise DomainError("power exponent <= -1 is not integrable at 0")
        partial = Expr([(coeff, tuple(rest))])

        def smooth(tau, partial=partial):
            vals = dict(fixed)
            vals[VAR_NAMES[var]] = tau
            return partial.eval(vals["q"], vals["r"], vals["s"], vals["t"])

        total += _frac_kernel_integral(smooth, beta, e, v, x, nodes)
    return total / gamma(beta)


def rl_integral(f: Expr, alpha: float, var: int, point,
                nodes: int = DEFAULT_NODES) -> float:
    """Left-sided Riemann-Liouville integral J^alpha f at the point, taken in
    `var` with the other coordinates held fixed."""
    if alpha <= 0:
        raise DomainError("Riemann-Liouville order must be positive")
    return _integrate_terms(f, alpha, var, point, nodes)


def caputo(f: Expr, spec: FracSpec, point, nodes: int = DEFAULT_NODES) -> float:
    """Caputo derivative of order spec.alpha in spec.var at the point.

    Integer orders reduce to the plain symbolic derivative; fractional orders
    integrate the symbolic n-th derivative against the (x-tau)^(n-alpha-1)
    kernel."""
    if spec.is_integer():
        d = f.diff(spec.var, int(spec.alpha))
        return float(d.eval(*(float(point[name]) for name in VAR_NAMES)))
    n = spec.n
    fn = f.diff(spec.var, n)
    return _integrate_terms(fn, n - spec.alpha, spec.var, point, nodes)


def rl_integral_callable(g, alpha: float, x: float, lead_exp: float = 0.0,
                         sub_order: float = 1.0, nodes: int = DEFAULT_NODES) -> float:
    """J^alpha of a plain callable g(tau) on [0, x].

    `lead_exp` is the known exponent of g's leading behaviour at 0 and
    `sub_order` the substitution order v (use 2.0 when g has half-integer
    structure, e.g. g itself a half-order fractional integral)."""
    if alpha <= 0:
        raise DomainError("Riemann-Liouville order must be positive")

    def smooth(tau):
        tau = np.asarray(tau)
        out = np.asarray(g(tau), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(tau > 0, out / tau ** lead_exp, _limit_at_zero(g, lead_exp))
        return out

    return _frac_kernel_integral(smooth, alpha, lead_exp, sub_order, x,
                                 nodes) / gamma(alpha)


def _limit_at_zero(g, lead_exp: float) -> float:
    eps = 1e-8
    return float(g(np.asarray([eps]))[0] / eps ** lead_exp) if lead_exp else float(
        g(np.asarray([0.0]))[0])
