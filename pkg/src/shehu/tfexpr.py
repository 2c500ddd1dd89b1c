"""Transform-domain expression algebra.

A TFExpr is a sum of factored terms over the eight transform parameters
h, j, k, l (numerators) and m, n, o, p (mates).  Within one term every
factor is stored multiplicatively with a signed integer power, so the
numerator/denominator split is just the sign of the power:

  * params    dense integer exponents of the eight parameters
  * FAffine   P - rate*M for one pair, monic in P
  * FQuad     P^2 + B*P*M + C*M^2 with B^2 < 4C (irreducible)
  * FFrac     (P/M)^(e0 + e1*alpha), the fractional-power atom
  * FMLDen    (P/M)^(g0 + g1*alpha) - c, the Mittag-Leffler denominator
  * shifts    exp(-(a*h/m + b*j/n + c*k/o + d*l/p)), the Heaviside prefactor

`alpha` is the single symbolic exponent token; exponents are affine in it
with integer multiplier.  Binding alpha turns every exponent numeric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, MissingAlphaError, UnsupportedOperationError
from .params import ALL_VARS, MATE_NAMES, PARAM_NAMES, ShehuPoint

_TOL = 1e-12

PARAM_SYMBOLS = PARAM_NAMES + MATE_NAMES  # h j k l m n o p -> indices 0..7


def _close(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class FAffine:
    var: int
    rate: float

    def key(self):
        return (0, self.var, self.rate)

    def value(self, point: ShehuPoint, alpha=None) -> float:
        return point.param(self.var) - self.rate * point.mate(self.var)


@dataclass(frozen=True)
class FQuad:
    var: int
    B: float
    C: float

    def key(self):
        return (1, self.var, self.B, self.C)

    def value(self, point: ShehuPoint, alpha=None) -> float:
        P, M = point.param(self.var), point.mate(self.var)
        return P * P + self.B * P * M + self.C * M * M


@dataclass(frozen=True)
class FFrac:
    """(P/M)^(e0 + e1*alpha) for the pair of `var`."""

    var: int
    e0: float
    e1: int

    def key(self):
        return (2, self.var, self.e0, self.e1)

    def exponent(self, alpha) -> float:
        if self.e1 == 0:
            return self.e0
        if alpha is None:
            raise MissingAlphaError("expression uses the symbolic exponent token")
        return self.e0 + self.e1 * alpha

    def value(self, point: ShehuPoint, alpha=None) -> float:
        return point.ratio(self.var) ** self.exponent(alpha)


@dataclass(frozen=True)
class FMLDen:
    """(P/M)^(g0 + g1*alpha) - c for the pair of `var`."""

    var: int
    g0: float
    g1: int
    c: float

    def key(self):
        return (3, self.var, self.g0, self.g1, self.c)

    def exponent(self, alpha) -> float:
        if self.g1 == 0:
            return self.g0
        if alpha is None:
            raise MissingAlphaError("expression uses the symbolic exponent token")
        return self.g0 + self.g1 * alpha

    def value(self, point: ShehuPoint, alpha=None) -> float:
        return point.ratio(self.var) ** self.exponent(alpha) - self.c


@dataclass(frozen=True)
class TFTerm:
    coeff: float
    params: tuple   # 8 ints
    affines: tuple  # ((FAffine, power), ...)
    quads: tuple    # ((FQuad, power), ...)
    fracs: tuple    # (FFrac, ...) at most one per var
    mldens: tuple   # ((FMLDen, power), ...)
    shifts: tuple   # 4 floats >= 0; all-zero means no exponential prefactor

    def uses_alpha(self) -> bool:
        return any(f.e1 != 0 for f in self.fracs) or any(
            f.g1 != 0 for f, _ in self.mldens)

    def sig(self):
        return (self.params,
                tuple((f.key(), w) for f, w in self.affines),
                tuple((f.key(), w) for f, w in self.quads),
                tuple(f.key() for f in self.fracs),
                tuple((f.key(), w) for f, w in self.mldens),
                self.shifts)

    def value(self, point: ShehuPoint, alpha=None) -> float:
        out = self.coeff
        vals = (point.h, point.j, point.k, point.l, point.m, point.n, point.o, point.p)
        for i, e in enumerate(self.params):
            if e:
                out *= vals[i] ** e
        for f, w in list(self.affines) + list(self.quads) + list(self.mldens):
            v = f.value(point, alpha)
            if w < 0 and abs(v) < 1e-14:
                raise DomainError(f"pole of {f} at the evaluation point")
            out *= v ** w
        for f in self.fracs:
            out *= f.value(point, alpha)
        if any(self.shifts):
            out *= math.exp(-sum(self.shifts[v] * point.ratio(v) for v in ALL_VARS))
        return out


def make_term(coeff, params=None, affines=(), quads=(), fracs=(), mldens=(),
              shifts=None):
    """Normalize one factored term.

    affines: (var, rate, power) triples (monic) or (var, cP, cM, power) raw;
    quads:   (var, A, B, C, power); reducible quadratics split into affines;
    fracs:   (var, e0, e1) exponent contributions, combined per var;
    mldens:  (var, g0, g1, c, power).
    Returns a list of TFTerm (normalization of a reducible quad keeps it a
    single product, so the list always has one element; kept as a list for
    symmetry with future splits).
    """
    pvec = [0] * 8 if params is None else list(params)
    aff = {}
    qd = {}
    fr = {}
    ml = {}
    sh = [0.0] * 4 if shifts is None else list(shifts)

    def add_affine(var, rate, power):
        for (v0, r0), w0 in list(aff.items()):
            if v0 == var and _close(r0, rate):
                aff[(v0, r0)] = w0 + power
                return
        aff[(var, rate)] = aff.get((var, rate), 0) + power

    def add_quad(var, B, C, power):
        disc = B * B - 4.0 * C
        if disc >= -1e-12 * max(1.0, B * B, abs(C)):
            disc = max(disc, 0.0)
            x1 = (-B + math.sqrt(disc)) / 2.0
            x2 = (-B - math.sqrt(disc)) / 2.0
            add_affine(var, x1, power)
            add_affine(var, x2, power)
            return
        for (v0, B0, C0), w0 in list(qd.items()):
            if v0 == var and _close(B0, B) and _close(C0, C):
                qd[(v0, B0, C0)] = w0 + power
                return
        qd[(var, B, C)] = power

    for item in affines:
        if len(item) == 3:
            var, rate, power = item
        else:
            var, cP, cM, power = item
            if cP == 0.0:
                raise ValueError("affine factor must involve the pair's numerator param")
            coeff *= cP ** power
            rate = -cM / cP
        add_affine(var, rate, power)

    for var, A, B, C, power in quads:
        if A <= 0:
            raise ValueError("quadratic factor must have positive leading coefficient")
        coeff *= A ** power
        add_quad(var, B / A, C / A, power)

    for var, e0, e1 in fracs:
        old = fr.get(var, (0.0, 0))
        fr[var] = (old[0] + e0, old[1] + e1)

    for var, g0, g1, c, power in mldens:
        if c == 0.0:
            old = fr.get(var, (0.0, 0))
            fr[var] = (old[0] + g0 * power, old[1] + g1 * power)
            continue
        if g1 == 0 and _close(g0, 1.0):
            # (P/M - c) = (P - c M)/M
            add_affine(var, c, power)
            pvec[var + 4] -= power
            continue
        if g1 == 0 and _close(g0, 2.0):
            add_quad(var, 0.0, -c, power)
            pvec[var + 4] -= 2 * power
            continue
        for (v0, g00, g10, c0), w0 in list(ml.items()):
            if v0 == var and g10 == g1 and _close(g00, g0) and _close(c0, c):
                ml[(v0, g00, g10, c0)] = w0 + power
                break
        else:
            ml[(var, g0, g1, c)] = power

    # integer-exponent fractional powers fold into plain parameter powers
    for var in list(fr):
        e0, e1 = fr[var]
        if e1 == 0 and abs(e0 - round(e0)) < 1e-9:
            n = int(round(e0))
            pvec[var] += n
            pvec[var + 4] -= n
            del fr[var]
        elif e1 == 0 and abs(e0) < 1e-12:
            del fr[var]

    if any(s < 0 for s in sh):
        raise ValueError("Heaviside shifts must be nonnegative")

    term = TFTerm(
        coeff=coeff,
        params=tuple(pvec),
        affines=tuple(sorted(((FAffine(v, r), w) for (v, r), w in aff.items() if w),
                             key=lambda fw: fw[0].key())),
        quads=tuple(sorted(((FQuad(v, B, C), w) for (v, B, C), w in qd.items() if w),
                           key=lambda fw: fw[0].key())),
        fracs=tuple(sorted((FFrac(v, e0, e1) for v, (e0, e1) in fr.items()),
                           key=lambda f: f.key())),
        mldens=tuple(sorted(((FMLDen(v, g0, g1, c), w)
                             for (v, g0, g1, c), w in ml.items() if w),
                            key=lambda fw: fw[0].key())),
        shifts=tuple(sh),
    )
    return [term]


def _term_from(term: TFTerm, **overrides) -> list:
    kw = dict(
        coeff=term.coeff,
        params=term.params,
        affines=[(f.var, f.rate, w) for f, w in term.affines],
        quads=[(f.var, 1.0, f.B, f.C, w) for f, w in term.quads],
        fracs=[(f.var, f.e0, f.e1) for f in term.fracs],
        mldens=[(f.var, f.g0, f.g1, f.c, w) for f, w in term.mldens],
        shifts=term.shifts,
    )
    kw.update(overrides)
    return make_term(**kw)


def _mul_terms(a: TFTerm, b: TFTerm) -> list:
    return make_term(
        a.coeff * b.coeff,
        params=[x + y for x, y in zip(a.params, b.params)],
        affines=[(f.var, f.rate, w) for f, w in a.affines]
               + [(f.var, f.rate, w) for f, w in b.affines],
        quads=[(f.var, 1.0, f.B, f.C, w) for f, w in a.quads]
             + [(f.var, 1.0, f.B, f.C, w) for f, w in b.quads],
        fracs=[(f.var, f.e0, f.e1) for f in a.fracs]
             + [(f.var, f.e0, f.e1) for f in b.fracs],
        mldens=[(f.var, f.g0, f.g1, f.c, w) for f, w in a.mldens]
              + [(f.var, f.g0, f.g1, f.c, w) for f, w in b.mldens],
        shifts=[x + y for x, y in zip(a.shifts, b.shifts)],
    )


class TFExpr:
    """Canonical sum of factored transform-domain terms; immutable."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        cleaned = [t for t in terms if t.coeff != 0.0]
        cleaned.sort(key=lambda t: t.sig())
        merged = []
        for t in cleaned:
            if merged and _sig_close(merged[-1], t):
                prev = merged.pop()
                c = prev.coeff + t.coeff
                if c != 0.0:
                    merged.extend(_term_from(prev, coeff=c))
            else:
                merged.append(t)
        merged = [t for t in merged if t.coeff != 0.0]
        object.__setattr__(self, "terms", tuple(merged))

    @staticmethod
    def constant(value: float) -> "TFExpr":
        return TFExpr(make_term(value))

    @staticmethod
    def zero() -> "TFExpr":
        return TFExpr([])

    def is_zero(self) -> bool:
        return not self.terms

    def uses_alpha(self) -> bool:
        return any(t.uses_alpha() for t in self.terms)

    def __add__(self, other: "TFExpr") -> "TFExpr":
        return TFExpr(list(self.terms) + list(other.terms))

    def __sub__(self, other: "TFExpr") -> "TFExpr":
        return self + other.scaled(-1.0)

    def __mul__(self, other: "TFExpr") -> "TFExpr":
        out = []
        for a in self.terms:
            for b in other.terms:
                out.extend(_mul_terms(a, b))
        return TFExpr(out)

    def scaled(self, factor: float) -> "TFExpr":
        return TFExpr([t for term in self.terms
                       for t in _term_from(term, coeff=factor * term.coeff)])

    def vars_referenced(self):
        seen = set()
        for t in self.terms:
            for i, e in enumerate(t.params):
                if e:
                    seen.add(i % 4)
            for f, _ in list(t.affines) + list(t.quads) + list(t.mldens):
                seen.add(f.var)
            for f in t.fracs:
                seen.add(f.var)
            for v in ALL_VARS:
                if t.shifts[v]:
                    seen.add(v)
        return seen

    def eval(self, point: ShehuPoint, alpha=None) -> float:
        return float(sum(t.value(point, alpha) for t in self.terms))

    def bind_alpha(self, value: float) -> "TFExpr":
        out = []
        for t in self.terms:
            out.extend(_term_from(
                t,
                fracs=[(f.var, f.e0 + f.e1 * value, 0) for f in t.fracs],
                mldens=[(f.var, f.g0 + f.g1 * value, 0, f.c, w) for f, w in t.mldens],
            ))
        return TFExpr(out)

    def __eq__(self, other):
        return isinstance(other, TFExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        from .parsing import format_tf
        return f"TFExpr({format_tf(self)!r})"

    def __str__(self):
        from .parsing import format_tf
        return format_tf(self)


def _sig_close(a: TFTerm, b: TFTerm) -> bool:
    sa, sb = a.sig(), b.sig()

    def walk(x, y):
        if isinstance(x, tuple):
            return isinstance(y, tuple) and len(x) == len(y) and all(
                walk(u, v) for u, v in zip(x, y))
        if isinstance(x, float) or isinstance(y, float):
            return _close(float(x), float(y), 1e-9)
        return x == y

    return walk(sa, sb)


# ---------------------------------------------------------------------------
# parameter substitutions and differentiation

def substitute_scale(F: TFExpr, factors) -> TFExpr:
    """Replace P_v -> P_v / factors[v] in every factor (change-of-scale core)."""
    out = []
    for t in F.terms:
        coeff = t.coeff
        affines = []
        quads = []
        fracs = []
        mldens = []
        shifts = list(t.shifts)
        for v in ALL_VARS:
            a = factors[v]
            if a <= 0:
                raise ValueError("scale factors must be positive")
            coeff *= a ** (-t.params[v])
            if shifts[v]:
                shifts[v] = shifts[v] / a
        for f, w in t.affines:
            a = factors[f.var]
            coeff *= a ** (-w)
            affines.append((f.var, f.rate * a, w))
        for f, w in t.quads:
            a = factors[f.var]
            coeff *= a ** (-2 * w)
            quads.append((f.var, 1.0, f.B * a, f.C * a * a, w))
        for f in t.fracs:
            a = factors[f.var]
            if f.e1 != 0:
                raise UnsupportedOperationError(
                    "cannot scale a symbolic fractional power; bind alpha first")
            coeff *= a ** (-f.e0)
            fracs.append((f.var, f.e0, 0))
        for f, w in t.mldens:
            a = factors[f.var]
            if f.g1 != 0:
                raise UnsupportedOperationError(
                    "cannot scale a symbolic fractional power; bind alpha first")
            coeff *= a ** (-f.g0 * w)
            mldens.append((f.var, f.g0, 0, f.c * a ** f.g0, w))
        out.extend(make_term(coeff, params=t.params, affines=affines, quads=quads,
                             fracs=fracs, mldens=mldens, shifts=shifts))
    return TFExpr(out)


def substitute_shift(F: TFExpr, rates) -> TFExpr:
    """Replace P_v -> P_v - rates[v]*M_v (first-shifting core)."""
    result = TFExpr.zero()
    for t in F.terms:
        coeff = t.coeff
        base_params = [0] * 8
        for i in range(4, 8):
            base_params[i] = t.params[i]
        for v in ALL_VARS:
            # exp(-s(P - rM)/M) = exp(s*r) * exp(-s*P/M)
            if t.shifts[v]:
                coeff *= math.exp(t.shifts[v] * rates[v])
            if rates[v] == 0.0:
                base_params[v] = t.params[v]
        piece = TFExpr(make_term(coeff, params=base_params, shifts=t.shifts))
        for v in ALL_VARS:
            e = t.params[v]
            if rates[v] == 0.0 or e == 0:
                continue
            if e > 0:
                expand = TFExpr.zero()
                for i in range(e + 1):
                    pv = [0] * 8
                    pv[v] = i
                    pv[v + 4] = e - i
                    expand = expand + TFExpr(make_term(
                        math.comb(e, i) * (-rates[v]) ** (e - i), params=pv))
                piece = piece * expand
            else:
                piece = piece * TFExpr(make_term(1.0, affines=[(v, rates[v], e)]))
        for f, w in t.affines:
            piece = piece * TFExpr(make_term(
                1.0, affines=[(f.var, f.rate + rates[f.var], w)]))
        for f, w in t.quads:
            r = rates[f.var]
            piece = piece * TFExpr(make_term(
                1.0, quads=[(f.var, 1.0, f.B - 2.0 * r, f.C - f.B * r + r * r, w)]))
        for f in t.fracs:
            if rates[f.var] != 0.0:
                raise UnsupportedOperationError(
                    "cannot shift a fractional-power factor inside its own pair")
            piece = piece * TFExpr(make_term(1.0, fracs=[(f.var, f.e0, f.e1)]))
        for f, w in t.mldens:
            if rates[f.var] != 0.0:
                raise UnsupportedOperationError(
                    "cannot shift a Mittag-Leffler image inside its own pair")
            piece = piece * TFExpr(make_term(
                1.0, mldens=[(f.var, f.g0, f.g1, f.c, w)]))
        result = result + piece
    return result


def diff_param(F: TFExpr, var: int) -> TFExpr:
    """Partial derivative with respect to the numerator parameter of `var`."""
    out = TFExpr.zero()
    for t in F.terms:
        # d(term)/dP = term * sum_i w_i * (dF_i/dP) / F_i
        e = t.params[var]
        if e != 0:
            pv = list(t.params)
            pv[var] -= 1
            out = out + TFExpr(_term_from(t, coeff=t.coeff * e, params=pv))
        for f, w in t.affines:
            if f.var != var:
                continue
            rest = [(g.var, g.rate, u) for g, u in t.affines if g is not f]
            rest.append((f.var, f.rate, w - 1))
            out = out + TFExpr(_term_from(t, coeff=t.coeff * w, affines=rest))
        for f, w in t.quads:
            if f.var != var:
                continue
            rest_q = [(g.var, 1.0, g.B, g.C, u) for g, u in t.quads if g is not f]
            rest_q.append((f.var, 1.0, f.B, f.C, w - 1))
            # d(quad)/dP = 2P + B*M
            if f.B == 0.0:
                pv = list(t.params)
                pv[var] += 1
                out = out + TFExpr(_term_from(t, coeff=t.coeff * 2.0 * w,
                                              params=pv, quads=rest_q))
            else:
                aff = [(g.var, g.rate, u) for g, u in t.affines]
                aff.append((var, -f.B / 2.0, 1))
                out = out + TFExpr(_term_from(t, coeff=t.coeff * 2.0 * w,
                                              affines=aff, quads=rest_q))
        for f in t.fracs:
            if f.var != var:
                continue
            if f.e1 != 0:
                raise UnsupportedOperationError(
                    "cannot differentiate a symbolic fractional power; bind alpha first")
            pv = list(t.params)
            pv[var] -= 1
            out = out + TFExpr(_term_from(t, coeff=t.coeff * f.e0, params=pv))
        for f, w in t.mldens:
            if f.var != var:
                continue
            if f.g1 != 0:
                raise UnsupportedOperationError(
                    "cannot differentiate a symbolic fractional power; bind alpha first")
            rest_m = [(g.var, g.g0, g.g1, g.c, u) for g, u in t.mldens if g is not f]
            rest_m.append((f.var, f.g0, f.g1, f.c, w - 1))
            pv = list(t.params)
            pv[var] -= 1
            fr = [(g.var, g.e0, g.e1) for g in t.fracs] + [(var, f.g0, 0)]
            out = out + TFExpr(_term_from(t, coeff=t.coeff * w * f.g0, params=pv,
                                          fracs=fr, mldens=rest_m))
        if t.shifts[var]:
            pv = list(t.params)
            pv[var + 4] -= 1
            out = out + TFExpr(_term_from(t, coeff=-t.coeff * t.shifts[var], params=pv))
    return out
