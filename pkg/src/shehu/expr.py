"""Function-domain expression algebra.

An Expr is a sum of terms; each term is a real coefficient times a product
of atoms in the variables q, r, s, t:

  * Power(v, e)        v^e with e > -1 for transformable expressions
  * Exp(form)          exp(a*q + b*r + c*s + d*t)
  * Sin(form), Cos(form)
  * ML(g, b, c, v)     the Mittag-Leffler profile E_{g,b}(c * v^g)
  * Heaviside(shifts)  U(q-a, r-b, s-c, t-d), the shifted-orthant indicator

Construction canonicalizes: like atoms merge (powers add, exponentials
combine, Heavisides intersect), sign conventions are fixed, degenerate
Mittag-Leffler atoms collapse to exp/cos, like terms collect, and terms and
factors are sorted by a total deterministic order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GrowthBoundError, KindMismatchError, UnsupportedOperationError
from .params import ALL_VARS, ConvergenceRegion, VAR_NAMES
from .special import gamma, mittag_leffler

_POLY_RATE_SLACK = 1e-3  # growth-rate slack certifying v^e <= M * exp(slack*v)


# ---------------------------------------------------------------------------
# linear forms and atoms

@dataclass(frozen=True)
class LinearForm:
    """a*q + b*r + c*s + d*t (no constant term)."""

    coeffs: tuple  # length 4

    def __post_init__(self):
        if len(self.coeffs) != 4:
            raise ValueError("linear form needs exactly four coefficients")

    def __getitem__(self, v):
        return self.coeffs[v]

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coeffs)

    def vars_present(self):
        return [v for v in ALL_VARS if self.coeffs[v] != 0.0]

    def scaled(self, factor: float) -> "LinearForm":
        return LinearForm(tuple(factor * c for c in self.coeffs))

    def scaled_per_var(self, factors) -> "LinearForm":
        return LinearForm(tuple(self.coeffs[v] * factors[v] for v in ALL_VARS))

    def plus(self, other: "LinearForm") -> "LinearForm":
        return LinearForm(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def dot(self, values) -> float:
        return sum(self.coeffs[v] * values[v] for v in ALL_VARS)

    def drop(self, var: int) -> "LinearForm":
        return LinearForm(tuple(0.0 if v == var else self.coeffs[v] for v in ALL_VARS))

    def leading_sign(self) -> float:
        for c in self.coeffs:
            if c != 0.0:
                return 1.0 if c > 0 else -1.0
        return 0.0


@dataclass(frozen=True)
class Power:
    var: int
    exponent: float

    def sort_key(self):
        return (0, self.var, self.exponent)


def _form_key(form: LinearForm):
    present = form.vars_present()
    lead = present[0] if present else 4
    return (lead,) + form.coeffs


@dataclass(frozen=True)
class Exp:
    form: LinearForm

    def sort_key(self):
        return (1,) + _form_key(self.form)


@dataclass(frozen=True)
class Sin:
    form: LinearForm

    def sort_key(self):
        return (2,) + _form_key(self.form)


@dataclass(frozen=True)
class Cos:
    form: LinearForm

    def sort_key(self):
        return (3,) + _form_key(self.form)


@dataclass(frozen=True)
class ML:
    """E_{gamma,beta}(c * var^gamma); the inner power is tied to the index."""

    gamma_: float
    beta: float
    c: float
    var: int

    def sort_key(self):
        return (4, self.var, self.gamma_, self.beta, self.c)


@dataclass(frozen=True)
class Heaviside:
    shifts: tuple  # length 4, all >= 0

    def sort_key(self):
        return (5,) + self.shifts


# ---------------------------------------------------------------------------
# term canonicalization

def _canonical_term(coeff: float, atoms) -> tuple:
    """Merge and order the atoms of one term; returns (coeff, atoms) or None."""
    power = {}           # var -> exponent
    expform = None       # merged LinearForm
    heav = None          # merged shift tuple
    trig = []            # Sin/Cos atoms
    mls = []

    for atom in atoms:
        if isinstance(atom, Power):
            power[atom.var] = power.get(atom.var, 0.0) + atom.exponent
        elif isinstance(atom, Exp):
            expform = atom.form if expform is None else expform.plus(atom.form)
        elif isinstance(atom, Heaviside):
            if any(s < 0 for s in atom.shifts):
                raise ValueError("Heaviside shifts must be nonnegative")
            heav = atom.shifts if heav is None else tuple(
                max(a, b) for a, b in zip(heav, atom.shifts))
        elif isinstance(atom, (Sin, Cos)):
            trig.append(atom)
        elif isinstance(atom, ML):
            mls.append(atom)
        else:
            raise TypeError(f"not an atom: {atom!r}")

    out = []
    for var in sorted(power):
        e = power[var]
        if e != 0.0:
            out.append(Power(var, e))

    for atom in mls:
        if atom.gamma_ <= 0 or atom.beta <= 0:
            raise ValueError("Mittag-Leffler indices must be positive")
        if atom.c == 0.0:
            coeff /= gamma(atom.beta)
            continue
        if atom.gamma_ == 1.0 and atom.beta == 1.0:
            form = [0.0] * 4
            form[atom.var] = atom.c
            lf = LinearForm(tuple(form))
            expform = lf if expform is None else expform.plus(lf)
            continue
        if atom.gamma_ == 2.0 and atom.beta == 1.0 and atom.c < 0.0:
            form = [0.0] * 4
            form[atom.var] = math.sqrt(-atom.c)
            trig.append(Cos(LinearForm(tuple(form))))
            continue
        out.append(atom)

    if expform is not None and not expform.is_zero():
        out.append(Exp(expform))

    for atom in trig:
        if atom.form.is_zero():
            if isinstance(atom, Sin):
                return None  # sin(0) = 0 kills the term
            continue  # cos(0) = 1
        sign = atom.form.leading_sign()
        if sign < 0:
            if isinstance(atom, Sin):
                coeff = -coeff
                out.append(Sin(atom.form.scaled(-1.0)))
            else:
                out.append(Cos(atom.form.scaled(-1.0)))
        else:
            out.append(atom)

    if heav is not None:
        out.append(Heaviside(heav))

    if coeff == 0.0:
        return None
    out.sort(key=lambda a: a.sort_key())
    return (coeff, tuple(out))


class Expr:
    """Canonical sum of atom-product terms; immutable."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        merged = {}
        order = []
        for coeff, atoms in terms:
            cleaned = _canonical_term(coeff, atoms)
            if cleaned is None:
                continue
            c, key = cleaned
            if key in merged:
                merged[key] += c
            else:
                merged[key] = c
                order.append(key)
        final = [(merged[key], key) for key in order if merged[key] != 0.0]
        final.sort(key=lambda t: (tuple(a.sort_key() for a in t[1]), t[0]))
        object.__setattr__(self, "terms", tuple(final))

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def constant(value: float) -> "Expr":
        return Expr([(value, ())])

    @staticmethod
    def zero() -> "Expr":
        return Expr([])

    @staticmethod
    def atom(a, coeff: float = 1.0) -> "Expr":
        return Expr([(coeff, (a,))])

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Expr") -> "Expr":
        return Expr(list(self.terms) + list(other.terms))

    def __sub__(self, other: "Expr") -> "Expr":
        return self + other.scaled(-1.0)

    def __mul__(self, other: "Expr") -> "Expr":
        out = []
        for c1, a1 in self.terms:
            for c2, a2 in other.terms:
                out.append((c1 * c2, a1 + a2))
        return Expr(out)

    def scaled(self, factor: float) -> "Expr":
        return Expr([(factor * c, a) for c, a in self.terms])

    def vars_present(self):
        seen = set()
        for _, atoms in self.terms:
            for atom in atoms:
                if isinstance(atom, Power):
                    seen.add(atom.var)
                elif isinstance(atom, (Exp, Sin, Cos)):
                    seen.update(atom.form.vars_present())
                elif isinstance(atom, ML):
                    seen.add(atom.var)
                elif isinstance(atom, Heaviside):
                    seen.update(v for v in ALL_VARS if atom.shifts[v] > 0)
        return seen

    def __eq__(self, other):
        return isinstance(other, Expr) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        from .parsing import format_expr
        return f"Expr({format_expr(self)!r})"

    def __str__(self):
        from .parsing import format_expr
        return format_expr(self)

    # -- evaluation ------------------------------------------------------------

    def eval(self, q, r, s, t):
        """Pointwise value; accepts scalars or broadcastable numpy arrays."""
        values = (np.asarray(q, dtype=float), np.asarray(r, dtype=float),
                  np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        total = None
        for coeff, atoms in self.terms:
            term = np.asarray(coeff, dtype=float)
            for atom in atoms:
                term = term * _eval_atom(atom, values)
            total = term if total is None else total + term
        if total is None:
            total = np.zeros(np.broadcast(*values).shape)
        if total.ndim == 0:
            return float(total)
        return total

    def eval_point(self, point) -> float:
        """Evaluate at a mapping {'q': .., 'r': .., 's': .., 't': ..}."""
        return self.eval(*(point[name] for name in VAR_NAMES))

    # -- calculus ---------------------------------------------------------------

    def diff(self, var: int, order: int = 1) -> "Expr":
        out = self
        for _ in range(order):
            out = _diff_once(out, var)
        return out

    def subs_zero(self, var: int) -> "Expr":
        """Restriction to var = 0 (boundary trace)."""
        out = []
        for coeff, atoms in self.terms:
            new_atoms = []
            dead = False
            for atom in atoms:
                if isinstance(atom, Power) and atom.var == var:
                    if atom.exponent > 0:
                        dead = True
                        break
                    raise DomainError("negative power diverges at the trace var = 0")
                elif isinstance(atom, (Exp, Sin, Cos)):
                    new_atoms.append(type(atom)(atom.form.drop(var)))
                elif isinstance(atom, ML) and atom.var == var:
                    coeff = coeff / gamma(atom.beta)
                elif isinstance(atom, Heaviside):
                    dead = True  # var = 0 never exceeds a nonnegative shift
                    break
                else:
                    new_atoms.append(atom)
            if not dead:
                out.append((coeff, tuple(new_atoms)))
        return Expr(out)

    def compose_shift(self, shifts, sign: float = 1.0) -> "Expr":
        """Substitute v -> v + sign*shifts[v] for every variable."""
        out = Expr.constant(0.0)
        delta = tuple(sign * s for s in shifts)
        for coeff, atoms in self.terms:
            term = Expr.constant(coeff)
            for atom in atoms:
                term = term * _shift_atom(atom, delta)
            out = out + term
        return out

    def compose_scale(self, factors) -> "Expr":
        """Substitute v -> factors[v] * v; factors must be positive."""
        if any(f <= 0 for f in factors):
            raise ValueError("scale factors must be positive")
        out = []
        for coeff, atoms in self.terms:
            new_atoms = []
            for atom in atoms:
                if isinstance(atom, Power):
                    coeff = coeff * factors[atom.var] ** atom.exponent
                    new_atoms.append(atom)
                elif isinstance(atom, (Exp, Sin, Cos)):
                    new_atoms.append(type(atom)(atom.form.scaled_per_var(factors)))
                elif isinstance(atom, ML):
                    new_atoms.append(ML(atom.gamma_, atom.beta,
                                        atom.c * factors[atom.var] ** atom.gamma_,
                                        atom.var))
                elif isinstance(atom, Heaviside):
                    new_atoms.append(Heaviside(tuple(
                        atom.shifts[v] / factors[v] for v in ALL_VARS)))
                else:
                    raise TypeError(atom)
            out.append((coeff, tuple(new_atoms)))
        return Expr(out)


def _eval_atom(atom, values):
    if isinstance(atom, Power):
        return np.power(values[atom.var], atom.exponent)
    if isinstance(atom, Exp):
        return np.exp(sum(atom.form[v] * values[v] for v in atom.form.vars_present()))
    if isinstance(atom, Sin):
        return np.sin(sum(atom.form[v] * values[v] for v in atom.form.vars_present()))
    if isinstance(atom, Cos):
        return np.cos(sum(atom.form[v] * values[v] for v in atom.form.vars_present()))
    if isinstance(atom, ML):
        z = atom.c * np.power(values[atom.var], atom.gamma_)
        return mittag_leffler(atom.gamma_, atom.beta, z)
    if isinstance(atom, Heaviside):
        out = np.asarray(1.0)
        for v in ALL_VARS:
            out = out * (values[v] > atom.shifts[v])
        return out.astype(float)
    raise TypeError(atom)


def _diff_once(expr: Expr, var: int) -> Expr:
    out = Expr.zero()
    for coeff, atoms in expr.terms:
        atoms = list(atoms)
        # an ML factor with beta != 1 only differentiates jointly with its
        # matching power v^(beta-1); beta == 1 differentiates standalone
        ml_i = next((i for i, a in enumerate(atoms)
                     if isinstance(a, ML) and a.var == var), None)
        join_pw = None
        if ml_i is not None and atoms[ml_i].beta != 1.0:
            join_pw = next((i for i, a in enumerate(atoms)
                            if isinstance(a, Power) and a.var == var), None)
        for i, atom in enumerate(atoms):
            rest = tuple(atoms[:i] + atoms[i + 1:])
            if isinstance(atom, Power) and atom.var == var:
                if i == join_pw:
                    continue  # consumed by the ML unit below
                new = (Power(var, atom.exponent - 1.0),) if atom.exponent != 1.0 else ()
                out = out + Expr([(coeff * atom.exponent, rest + new)])
            elif isinstance(atom, Exp):
                a = atom.form[var]
                if a != 0.0:
                    out = out + Expr([(coeff * a, tuple(atoms))])
            elif isinstance(atom, Sin):
                a = atom.form[var]
                if a != 0.0:
                    out = out + Expr([(coeff * a, rest + (Cos(atom.form),))])
            elif isinstance(atom, Cos):
                a = atom.form[var]
                if a != 0.0:
                    out = out + Expr([(-coeff * a, rest + (Sin(atom.form),))])
            elif isinstance(atom, ML) and atom.var == var:
                ml = atom
                if ml.beta == 1.0:
                    # d/dv E_{g,1}(c v^g) = c v^(g-1) E_{g,g}(c v^g)
                    new = (Power(var, ml.gamma_ - 1.0), ML(ml.gamma_, ml.gamma_, ml.c, var))
                    out = out + Expr([(coeff * ml.c, rest + new)])
                else:
                    if join_pw is None or abs(atoms[join_pw].exponent - (ml.beta - 1.0)) > 1e-9:
                        raise UnsupportedOperationError(
                            "cannot differentiate a Mittag-Leffler factor without "
                            "its matching power v^(beta-1)")
                    if ml.beta - 1.0 <= 0.0:
                        raise UnsupportedOperationError(
                            "Mittag-Leffler derivative leaves the evaluable algebra")
                    # d/dv [v^(b-1) E_{g,b}(c v^g)] = v^(b-2) E_{g,b-1}(c v^g)
                    rest2 = tuple(a for k, a in enumerate(atoms) if k not in (i, join_pw))
                    new = (Power(var, ml.beta - 2.0), ML(ml.gamma_, ml.beta - 1.0, ml.c, var))
                    out = out + Expr([(coeff, rest2 + new)])
            elif isinstance(atom, Heaviside):
                raise UnsupportedOperationError(
                    "derivative of a Heaviside factor is not in the algebra")
        # terms without any dependence on var contribute nothing
    return out


def _shift_atom(atom, delta) -> Expr:
    if isinstance(atom, Power):
        d = delta[atom.var]
        if d == 0.0:
            return Expr.atom(atom)
        e = atom.exponent
        if e < 0 or abs(e - round(e)) > 1e-12:
            raise UnsupportedOperationError(
                "argument shift of a fractional power leaves the algebra")
        n = int(round(e))
        terms = []
        for i in range(n + 1):
            coeff = math.comb(n, i) * d ** (n - i)
            terms.append((coeff, (Power(atom.var, float(i)),) if i else ()))
        return Expr(terms)
    if isinstance(atom, Exp):
        phi = atom.form.dot(delta)
        return Expr.atom(atom, coeff=math.exp(phi))
    if isinstance(atom, Sin):
        phi = atom.form.dot(delta)
        return Expr([(math.cos(phi), (Sin(atom.form),)),
                     (math.sin(phi), (Cos(atom.form),))])
    if isinstance(atom, Cos):
        phi = atom.form.dot(delta)
        return Expr([(math.cos(phi), (Cos(atom.form),)),
                     (-math.sin(phi), (Sin(atom.form),))])
    if isinstance(atom, ML):
        if delta[atom.var] != 0.0:
            raise UnsupportedOperationError(
                "argument shift of a Mittag-Leffler factor leaves the algebra")
        return Expr.atom(atom)
    if isinstance(atom, Heaviside):
        raise UnsupportedOperationError("cannot compose a Heaviside factor with a shift")
    raise TypeError(atom)


# ---------------------------------------------------------------------------
# exponential-order certificate

@dataclass(frozen=True)
class GrowthBound:
    """|f| <= M * exp(sum rates[v]*v) for all arguments beyond thresholds."""

    M: float
    rates: tuple       # length 4
    thresholds: tuple  # length 4; 0 except for negative-power factors

    def region(self) -> ConvergenceRegion:
        return ConvergenceRegion(self.rates)


def _ml_sup(g: float, b: float) -> float:
    """Upper bound for |E_{g,b}(z)| over z <= 0 (coarse numeric scan)."""
    zs = np.linspace(-10.0, 0.0, 41)
    vals = np.abs(mittag_leffler(g, b, zs))
    return 1.05 * float(np.max(vals))


def growth_bound(expr: Expr) -> GrowthBound:
    """Exponential-order certificate (M, rates); raises GrowthBoundError when
    a Mittag-Leffler factor with positive argument coefficient makes the
    expression super-exponential."""
    if expr.is_zero():
        raise GrowthBoundError("growth bound of the zero expression is degenerate")
    rates = [0.0] * 4
    thresholds = [0.0] * 4
    M = 0.0
    for coeff, atoms in expr.terms:
        term_rates = [0.0] * 4
        bound = abs(coeff)
        for atom in atoms:
            if isinstance(atom, Power):
                e = atom.exponent
                if e > 0:
                    term_rates[atom.var] += _POLY_RATE_SLACK
                    # max of v^e * exp(-slack*v) over v >= 0
                    bound *= (e / _POLY_RATE_SLACK) ** e * math.exp(-e)
                elif e < 0:
                    thresholds[atom.var] = max(thresholds[atom.var], 1.0)
            elif isinstance(atom, Exp):
                for v in ALL_VARS:
                    term_rates[v] += atom.form[v]
            elif isinstance(atom, (Sin, Cos, Heaviside)):
                pass
            elif isinstance(atom, ML):
                if atom.c > 0:
                    raise GrowthBoundError(
                        "Mittag-Leffler factor with positive coefficient is not "
                        "certified as exponential order")
                bound *= _ml_sup(atom.gamma_, atom.beta)
        for v in ALL_VARS:
            rates[v] = max(rates[v], term_rates[v])
        M += bound
    return GrowthBound(M, tuple(rates), tuple(thresholds))


# ---------------------------------------------------------------------------
# equality

def canonical_equal_expr(x: Expr, y: Expr, rtol: float = 1e-12) -> bool:
    if not isinstance(x, Expr) or not isinstance(y, Expr):
        raise KindMismatchError("canonical_equal needs two expressions of the same kind")
    diff = x - y
    if not diff.terms:
        return True
    scale = max((abs(c) for c, _ in x.terms), default=0.0)
    scale = max(scale, max((abs(c) for c, _ in y.terms), default=0.0))
    near = [(c, a) for c, a in diff.terms if abs(c) > rtol * scale]
    if not near:
        return True
    # terms that did not cancel exactly may still match within tolerance
    return _tol_match(x, y, rtol)


def _atoms_close(ax, ay, rtol: float) -> bool:
    if len(ax) != len(ay):
        return False
    for a, b in zip(ax, ay):
        if type(a) is not type(b):
            return False
        for fa, fb in zip(a.sort_key(), b.sort_key()):
            if abs(fa - fb) > rtol * max(1.0, abs(fa), abs(fb)):
                return False
    return True


def _tol_match(x: Expr, y: Expr, rtol: float) -> bool:
    scale = max([abs(c) for c, _ in x.terms + y.terms] or [1.0])
    xt = [(c, a) for c, a in x.terms if abs(c) > rtol * scale]
    yt = [(c, a) for c, a in y.terms if abs(c) > rtol * scale]
    if len(xt) != len(yt):
        return False
    remaining = list(yt)
    for cx, ax in xt:
        for idx, (cy, ay) in enumerate(remaining):
            if abs(cx - cy) <= rtol * max(abs(cx), abs(cy)) and _atoms_close(ax, ay, rtol):
                remaining.pop(idx)
                break
        else:
            return False
    return True
