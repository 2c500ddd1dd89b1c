"""Text grammar for both expression domains.

Function domain (variables q r s t):

    expr   := ["-"] term (("+"|"-") term)*
    term   := factor ("*" factor)*
    factor := base ("^" real)?
    base   := real | var | "exp(" linform ")" | "sin(" linform ")"
            | "cos(" linform ")" | "ml(" real ["," real] ";" mlarg ")"
            | "U(" real "," real "," real "," real ")" | "(" expr ")"
    mlarg  := ["+"|"-"] [real "*"?] var "^" real            # c * v^g, g = first index
    linform:= signed linear combination of variables (no constant term)

Transform domain (parameters h j k l m n o p, token "alpha") is the same
with "/" allowed in products, parameter symbols as atoms, exponents that
may be "alpha"-affine, and exp(...) denoting the Heaviside image prefactor
exp(-(a*h/m + b*j/n + c*k/o + d*l/p)).

The two domains are told apart by the symbols used; mixing them is an error.
Printing emits canonical text; parse(print(parse(s))) is a fixed point.
"""

from __future__ import annotations

import re

from .errors import ParseError
from .expr import ML, Cos, Exp, Expr, Heaviside, LinearForm, Power, Sin
from .params import MATE_INDEX, MATE_NAMES, PARAM_INDEX, PARAM_NAMES, VAR_INDEX, VAR_NAMES, ALL_VARS
from .tfexpr import TFExpr, make_term

_TOKEN_RE = re.compile(r"""
    (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_]\w*)
  | (?P<op>\*|\+|-|/|\^|\(|\)|,|;)
  | (?P<ws>\s+)
""", re.VERBOSE)

_FUNC_NAMES = {"exp", "sin", "cos", "ml", "U"}


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Stream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.next()
        if text != value:
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def at(self, value):
        return self.peek()[1] == value

    def accept(self, value):
        if self.at(value):
            self.next()
            return True
        return False


def _parse_number(stream) -> float:
    sign = 1.0
    if stream.accept("-"):
        sign = -1.0
    elif stream.accept("+"):
        pass
    kind, text, pos = stream.next()
    if kind != "num":
        raise ParseError(f"expected a number, found {text or 'end of input'!r}", pos)
    return sign * float(text)


def detect_domain(text: str) -> str:
    """'function', 'transform', or 'function' for a pure constant."""
    fn = tf = False
    for kind, tok, pos in _tokenize(text):
        if kind != "name" or tok in _FUNC_NAMES:
            continue
        if tok in VAR_INDEX:
            fn = True
        elif tok in PARAM_INDEX or tok in MATE_INDEX or tok == "alpha":
            tf = True
        else:
            raise ParseError(f"unknown symbol {tok!r}", pos)
    if fn and tf:
        raise ParseError("expression mixes function variables and transform parameters")
    return "transform" if tf else "function"


def parse(text: str):
    """Parse into an Expr or a TFExpr depending on the symbols used."""
    if detect_domain(text) == "transform":
        return parse_tf(text)
    return parse_expr(text)


# ---------------------------------------------------------------------------
# function domain

def parse_expr(text: str) -> Expr:
    stream = _Stream(_tokenize(text))
    expr = _fn_sum(stream)
    kind, tok, pos = stream.peek()
    if kind != "end":
        raise ParseError(f"trailing input {tok!r}", pos)
    return expr


def _fn_sum(stream) -> Expr:
    negate = stream.accept("-")
    expr = _fn_term(stream)
    if negate:
        expr = expr.scaled(-1.0)
    while stream.peek()[1] in ("+", "-"):
        op = stream.next()[1]
        rhs = _fn_term(stream)
        expr = expr + (rhs.scaled(-1.0) if op == "-" else rhs)
    return expr


def _fn_term(stream) -> Expr:
    expr = _fn_factor(stream)
    while stream.accept("*"):
        expr = expr * _fn_factor(stream)
    return expr


def _fn_factor(stream) -> Expr:
    base = _fn_base(stream)
    if not stream.at("^"):
        return base
    pos = stream.peek()[2]
    stream.expect("^")
    paren = stream.accept("(")
    e = _parse_number(stream)
    if paren:
        stream.expect(")")
    return _fn_power(base, e, pos)


def _fn_power(base: Expr, e: float, pos: int) -> Expr:
    if len(base.terms) == 1 and len(base.terms[0][1]) == 1 and base.terms[0][0] == 1.0:
        atom = base.terms[0][1][0]
        if isinstance(atom, Power):
            if atom.exponent * e <= -1.0:
                raise ParseError(f"power exponent {atom.exponent * e:g} must exceed -1", pos)
            return Expr.atom(Power(atom.var, atom.exponent * e))
        if isinstance(atom, Exp):
            return Expr.atom(Exp(atom.form.scaled(e)))
        if e == 1.0:
            return base
        raise ParseError("only variables, exponentials and parenthesized sums take powers", pos)
    if len(base.terms) == 1 and not base.terms[0][1]:
        return Expr.constant(base.terms[0][0] ** e)
    if e == 1.0:
        return base
    if e >= 0 and e == int(e):
        out = Expr.constant(1.0)
        for _ in range(int(e)):
            out = out * base
        return out
    raise ParseError("fractional power of a sum is outside the algebra", pos)


def _fn_base(stream) -> Expr:
    kind, tok, pos = stream.peek()
    if kind == "num":
        stream.next()
        return Expr.constant(float(tok))
    if tok == "(":
        stream.next()
        inner = _fn_sum(stream)
        stream.expect(")")
        return inner
    if kind == "name":
        stream.next()
        if tok in VAR_INDEX:
            return Expr.atom(Power(VAR_INDEX[tok], 1.0))
        if tok == "exp":
            stream.expect("(")
            form = _linform(stream)
            stream.expect(")")
            return Expr.atom(Exp(form))
        if tok == "sin":
            stream.expect("(")
            form = _linform(stream)
            stream.expect(")")
            return Expr.atom(Sin(form))
        if tok == "cos":
            stream.expect("(")
            form = _linform(stream)
            stream.expect(")")
            return Expr.atom(Cos(form))
        if tok == "ml":
            return _ml_atom(stream, pos)
        if tok == "U":
            stream.expect("(")
            shifts = [_parse_number(stream)]
            for _ in range(3):
                stream.expect(",")
                shifts.append(_parse_number(stream))
            stream.expect(")")
            if any(s < 0 for s in shifts):
                raise ParseError("Heaviside shifts must be nonnegative", pos)
            return Expr.atom(Heaviside(tuple(shifts)))
        raise ParseError(f"unknown symbol {tok!r}", pos)
    raise ParseError(f"expected a factor, found {tok or 'end of input'!r}", pos)


def _ml_atom(stream, pos) -> Expr:
    stream.expect("(")
    g = _parse_number(stream)
    b = 1.0
    if stream.accept(","):
        b = _parse_number(stream)
    stream.expect(";")
    sign = 1.0
    if stream.accept("-"):
        sign = -1.0
    elif stream.accept("+"):
        pass
    c = sign
    kind, tok, tpos = stream.peek()
    if kind == "num":
        stream.next()
        c = sign * float(tok)
        stream.accept("*")
    kind, tok, tpos = stream.next()
    if kind != "name" or tok not in VAR_INDEX:
        raise ParseError("Mittag-Leffler argument must be c*v^g with a variable v", tpos)
    var = VAR_INDEX[tok]
    stream.expect("^")
    inner = _parse_number(stream)
    stream.expect(")")
    if g <= 0 or b <= 0:
        raise ParseError("Mittag-Leffler indices must be positive", pos)
    if abs(inner - g) > 1e-12 * max(1.0, abs(g)):
        raise ParseError(
            f"Mittag-Leffler inner power {inner:g} must equal the first index {g:g}", pos)
    return Expr.atom(ML(g, b, c, var))


def _linform(stream) -> LinearForm:
    coeffs = [0.0] * 4
    sign = -1.0 if stream.accept("-") else 1.0
    while True:
        value = sign
        kind, tok, pos = stream.peek()
        if kind == "num":
            stream.next()
            value = sign * float(tok)
            stream.accept("*")
        kind, tok, pos = stream.next()
        if kind != "name" or tok not in VAR_INDEX:
            raise ParseError(
                "linear form must be a combination of q, r, s, t", pos)
        coeffs[VAR_INDEX[tok]] += value
        if stream.accept("+"):
            sign = 1.0
        elif stream.accept("-"):
            sign = -1.0
        else:
            return LinearForm(tuple(coeffs))


# ---------------------------------------------------------------------------
# transform domain

def parse_tf(text: str) -> TFExpr:
    stream = _Stream(_tokenize(text))
    expr = _tf_sum(stream)
    kind, tok, pos = stream.peek()
    if kind != "end":
        raise ParseError(f"trailing input {tok!r}", pos)
    return expr


def _tf_sum(stream) -> TFExpr:
    negate = stream.accept("-")
    expr = _tf_term(stream)
    if negate:
        expr = expr.scaled(-1.0)
    while stream.peek()[1] in ("+", "-"):
        op = stream.next()[1]
        rhs = _tf_term(stream)
        expr = expr + (rhs.scaled(-1.0) if op == "-" else rhs)
    return expr


def _tf_term(stream) -> TFExpr:
    expr = _tf_factor(stream)
    while True:
        if stream.accept("*"):
            expr = expr * _tf_factor(stream)
        elif stream.accept("/"):
            pos = stream.peek()[2]
            expr = expr * _tf_invert(_tf_factor(stream), pos)
        else:
            return expr


def _tf_factor(stream) -> TFExpr:
    pos = stream.peek()[2]
    base = _tf_base(stream)
    if not stream.at("^"):
        return base
    stream.expect("^")
    e0, e1 = _tf_exponent(stream)
    return _tf_power(base, e0, e1, pos)


def _tf_exponent(stream):
    """Returns (e0, e1) for an exponent e0 + e1*alpha."""
    if stream.accept("("):
        e0, e1 = 0.0, 0
        sign = -1.0 if stream.accept("-") else 1.0
        while True:
            value = sign
            kind, tok, pos = stream.peek()
            if kind == "num":
                stream.next()
                value = sign * float(tok)
                if stream.accept("*"):
                    kind2, tok2, pos2 = stream.next()
                    if tok2 != "alpha":
                        raise ParseError("exponent may only mix numbers and alpha", pos2)
                    e1 += int(round(value))
                else:
                    e0 += value
            elif tok == "alpha":
                stream.next()
                e1 += int(round(value))
            else:
                raise ParseError(f"bad exponent component {tok!r}", pos)
            if stream.accept("+"):
                sign = 1.0
            elif stream.accept("-"):
                sign = -1.0
            else:
                stream.expect(")")
                return e0, e1
    if stream.at("alpha"):
        stream.next()
        return 0.0, 1
    return _parse_number(stream), 0


def _tf_base(stream) -> TFExpr:
    kind, tok, pos = stream.peek()
    if kind == "num":
        stream.next()
        return TFExpr.constant(float(tok))
    if tok == "(":
        stream.next()
        inner = _tf_sum(stream)
        stream.expect(")")
        return _try_factor(inner)
    if kind == "name":
        stream.next()
        if tok in PARAM_INDEX:
            pv = [0] * 8
            pv[PARAM_INDEX[tok]] = 1
            return TFExpr(make_term(1.0, params=pv))
        if tok in MATE_INDEX:
            pv = [0] * 8
            pv[MATE_INDEX[tok] + 4] = 1
            return TFExpr(make_term(1.0, params=pv))
        if tok == "exp":
            stream.expect("(")
            inner = _tf_sum(stream)
            stream.expect(")")
            return _tf_expfactor(inner, pos)
        raise ParseError(f"unknown symbol {tok!r}", pos)
    raise ParseError(f"expected a factor, found {tok or 'end of input'!r}", pos)


def _tf_expfactor(inner: TFExpr, pos) -> TFExpr:
    shifts = [0.0] * 4
    for t in inner.terms:
        if t.affines or t.quads or t.fracs or t.mldens or any(t.shifts):
            raise ParseError("exp argument must be -(a*h/m + b*j/n + c*k/o + d*l/p)", pos)
        var = None
        for v in ALL_VARS:
            expected = [0] * 8
            expected[v] = 1
            expected[v + 4] = -1
            if list(t.params) == expected:
                var = v
                break
        if var is None or t.coeff > 0:
            raise ParseError("exp argument must be -(a*h/m + b*j/n + c*k/o + d*l/p)", pos)
        shifts[var] += -t.coeff
    return TFExpr(make_term(1.0, shifts=shifts))


def _tf_power(base: TFExpr, e0: float, e1: int, pos) -> TFExpr:
    if len(base.terms) == 1:
        t = base.terms[0]
        is_ratio = (not t.affines and not t.quads and not t.fracs and not t.mldens
                    and not any(t.shifts))
        if is_ratio:
            active = [v for v in ALL_VARS
                      if t.params[v] != 0 or t.params[v + 4] != 0]
            if len(active) == 1:
                v = active[0]
                if t.params[v] == 1 and t.params[v + 4] == -1:
                    out = TFExpr(make_term(1.0, fracs=[(v, e0, e1)]))
                    if t.coeff != 1.0:
                        if e1 != 0:
                            raise ParseError(
                                "cannot raise a scaled ratio to a symbolic power", pos)
                        out = out.scaled(t.coeff ** e0)
                    return out
                if t.params[v] == -1 and t.params[v + 4] == 1:
                    out = TFExpr(make_term(1.0, fracs=[(v, -e0, -e1)]))
                    if t.coeff != 1.0:
                        if e1 != 0:
                            raise ParseError(
                                "cannot raise a scaled ratio to a symbolic power", pos)
                        out = out.scaled(t.coeff ** e0)
                    return out
    if e1 != 0:
        raise ParseError("symbolic exponents only apply to a parameter ratio P/M", pos)
    if e0 == int(e0):
        n = int(e0)
        out = TFExpr.constant(1.0)
        inv = None
        for _ in range(abs(n)):
            if n > 0:
                out = out * base
            else:
                if inv is None:
                    inv = _tf_invert(base, pos)
                out = out * inv
        return out
    raise ParseError("fractional power applies only to a parameter ratio P/M", pos)


def _tf_invert(D: TFExpr, pos) -> TFExpr:
    """1/D for a single factored term or a recognizable sum (affine, quadratic,
    Mittag-Leffler denominator)."""
    if D.is_zero():
        raise ParseError("division by zero", pos)
    if len(D.terms) > 1:
        D = _try_factor(D)
    if len(D.terms) == 1:
        t = D.terms[0]
        if t.coeff == 0.0:
            raise ParseError("division by zero", pos)
        if any(t.shifts):
            raise ParseError("cannot divide by an exponential prefactor", pos)
        return TFExpr(make_term(
            1.0 / t.coeff,
            params=[-e for e in t.params],
            affines=[(f.var, f.rate, -w) for f, w in t.affines],
            quads=[(f.var, 1.0, f.B, f.C, -w) for f, w in t.quads],
            fracs=[(f.var, -f.e0, -f.e1) for f in t.fracs],
            mldens=[(f.var, f.g0, f.g1, f.c, -w) for f, w in t.mldens],
        ))
    raise ParseError("cannot divide by this sum (not a recognized factor)", pos)


def _try_factor(D: TFExpr) -> TFExpr:
    """Keep a parenthesized sum as a single affine/quadratic/ML-denominator
    factor when it matches one; otherwise return the distributed sum."""
    if len(D.terms) < 2:
        return D
    profiles = []
    for t in D.terms:
        prof = _monomial_profile(t)
        if prof is None:
            return D
        profiles.append((prof, t.coeff))
    kinds = {p[0][0] for p in profiles}
    if kinds == {"P", "M"} and len(D.terms) == 2:
        (k1, v1), c1 = profiles[0]
        (k2, v2), c2 = profiles[1]
        if v1 == v2:
            cP = c1 if k1 == "P" else c2
            cM = c2 if k1 == "P" else c1
            return TFExpr(make_term(1.0, affines=[(v1, cP, cM, 1)]))
    if kinds <= {"P2", "PM", "M2"} and "P2" in kinds:
        vars_ = {p[0][1] for p in profiles}
        if len(vars_) == 1:
            v = vars_.pop()
            cP2 = cPM = cM2 = 0.0
            for (k, _), c in profiles:
                if k == "P2":
                    cP2 += c
                elif k == "PM":
                    cPM += c
                else:
                    cM2 += c
            if cP2 > 0 and cM2 != 0.0:
                return TFExpr(make_term(1.0, quads=[(v, cP2, cPM, cM2, 1)]))
    if kinds == {"frac", "const"} and len(D.terms) == 2:
        for (k, payload), c in profiles:
            if k == "frac":
                frac, cf = payload, c
            else:
                c0 = c
        inner = make_term(cf, mldens=[(frac.var, frac.e0, frac.e1, -c0 / cf, 1)])
        return TFExpr(inner)
    return D


def _monomial_profile(t):
    """(var, kind) for terms that look like c*P, c*M, c*P^2, c*P*M, c*M^2, c*1."""
    if t.affines or t.quads or t.mldens or any(t.shifts):
        return None
    nz = [(i, e) for i, e in enumerate(t.params) if e != 0]
    if t.fracs:
        if len(t.fracs) == 1 and not nz:
            return ("frac", t.fracs[0])
        return None
    if not nz:
        return ("const", None)
    if len(nz) == 1:
        i, e = nz[0]
        if e == 1:
            return ("P" if i < 4 else "M", i % 4)
        if e == 2:
            return ("P2" if i < 4 else "M2", i % 4)
        return None
    if len(nz) == 2:
        (i1, e1), (i2, e2) = nz
        if e1 == 1 and e2 == 1 and i1 < 4 and i2 == i1 + 4:
            return ("PM", i1)
    return None



# ---------------------------------------------------------------------------
# printing

def fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _fmt_linform(form: LinearForm) -> str:
    parts = []
    for v in ALL_VARS:
        c = form[v]
        if c == 0.0:
            continue
        mag = abs(c)
        piece = VAR_NAMES[v] if mag == 1.0 else f"{fmt_num(mag)}*{VAR_NAMES[v]}"
        if not parts:
            parts.append(piece if c > 0 else f"-{piece}")
        else:
            parts.append(f" + {piece}" if c > 0 else f" - {piece}")
    return "".join(parts) or "0"


def _fmt_atom(atom) -> str:
    if isinstance(atom, Power):
        if atom.exponent == 1.0:
            return VAR_NAMES[atom.var]
        return f"{VAR_NAMES[atom.var]}^{fmt_num(atom.exponent)}"
    if isinstance(atom, Exp):
        return f"exp({_fmt_linform(atom.form)})"
    if isinstance(atom, Sin):
        return f"sin({_fmt_linform(atom.form)})"
    if isinstance(atom, Cos):
        return f"cos({_fmt_linform(atom.form)})"
    if isinstance(atom, ML):
        head = fmt_num(atom.gamma_)
        if atom.beta != 1.0:
            head += f",{fmt_num(atom.beta)}"
        mag = abs(atom.c)
        arg = (f"{VAR_NAMES[atom.var]}^{fmt_num(atom.gamma_)}" if mag == 1.0
               else f"{fmt_num(mag)}*{VAR_NAMES[atom.var]}^{fmt_num(atom.gamma_)}")
        sign = "-" if atom.c < 0 else ""
        return f"ml({head}; {sign}{arg})"
    if isinstance(atom, Heaviside):
        return "U(" + ",".join(fmt_num(s) for s in atom.shifts) + ")"
    raise TypeError(atom)


def format_expr(expr: Expr) -> str:
    if not expr.terms:
        return "0"
    parts = []
    for coeff, atoms in expr.terms:
        mag = abs(coeff)
        pieces = [_fmt_atom(a) for a in atoms]
        if not pieces or mag != 1.0:
            pieces.insert(0, fmt_num(mag))
        body = "*".join(pieces)
        if not parts:
            parts.append(body if coeff > 0 else f"-{body}")
        else:
            parts.append(f" + {body}" if coeff > 0 else f" - {body}")
    return "".join(parts)


def _fmt_exponent(e0: float, e1: int) -> str:
    if e1 == 0:
        return fmt_num(e0) if e0 >= 0 else f"({fmt_num(e0)})"
    if e1 == 1:
        head = "alpha"
    elif e1 == -1:
        head = "-alpha"
    else:
        head = f"{e1}*alpha"
    if e0 == 0.0:
        return head if e1 == 1 else f"({head})"
    tail = f" + {fmt_num(e0)}" if e0 > 0 else f" - {fmt_num(abs(e0))}"
    return f"({head}{tail})"


def _fmt_pair_ratio(var: int) -> str:
    return f"({PARAM_NAMES[var]}/{MATE_NAMES[var]})"


def _fmt_affine(f) -> str:
    P, M = PARAM_NAMES[f.var], MATE_NAMES[f.var]
    if f.rate == 0.0:
        return P
    mag = abs(f.rate)
    mpart = M if mag == 1.0 else f"{fmt_num(mag)}*{M}"
    op = "-" if f.rate > 0 else "+"
    return f"({P}{op}{mpart})"


def _fmt_quad(f) -> str:
    P, M = PARAM_NAMES[f.var], MATE_NAMES[f.var]
    parts = [f"{P}^2"]
    if f.B != 0.0:
        mag = abs(f.B)
        piece = f"{P}*{M}" if mag == 1.0 else f"{fmt_num(mag)}*{P}*{M}"
        parts.append(f" + {piece}" if f.B > 0 else f" - {piece}")
    if f.C != 0.0:
        mag = abs(f.C)
        piece = f"{M}^2" if mag == 1.0 else f"{fmt_num(mag)}*{M}^2"
        parts.append(f" + {piece}" if f.C > 0 else f" - {piece}")
    return "(" + "".join(parts) + ")"


def _fmt_mlden(f) -> str:
    body = f"{_fmt_pair_ratio(f.var)}^{_fmt_exponent(f.g0, f.g1)}"
    if f.c != 0.0:
        mag = fmt_num(abs(f.c))
        body += f" - {mag}" if f.c > 0 else f" + {mag}"
    return f"({body})"


def _fmt_tf_term(t) -> tuple:
    """(numerator string without sign, denominator string or None)."""
    num = []
    den = []
    for i, e in enumerate(t.params):
        if e == 0:
            continue
        sym = PARAM_SYMBOL_LIST[i]
        target = num if e > 0 else den
        w = abs(e)
        target.append(sym if w == 1 else f"{sym}^{w}")
    for f, w in t.affines:
        target = num if w > 0 else den
        body = _fmt_affine(f)
        target.append(body if abs(w) == 1 else f"{body}^{abs(w)}")
    for f, w in t.quads:
        target = num if w > 0 else den
        body = _fmt_quad(f)
        target.append(body if abs(w) == 1 else f"{body}^{abs(w)}")
    for f in t.fracs:
        num.append(f"{_fmt_pair_ratio(f.var)}^{_fmt_exponent(f.e0, f.e1)}")
    for f, w in t.mldens:
        target = num if w > 0 else den
        body = _fmt_mlden(f)
        target.append(body if abs(w) == 1 else f"{body}^{abs(w)}")
    if any(t.shifts):
        inner = []
        for v in ALL_VARS:
            s = t.shifts[v]
            if s == 0.0:
                continue
            ratio = f"{PARAM_NAMES[v]}/{MATE_NAMES[v]}"
            inner.append(ratio if s == 1.0 else f"{fmt_num(s)}*{ratio}")
        num.append(f"exp(-({' + '.join(inner)}))")
    mag = abs(t.coeff)
    if not num or mag != 1.0:
        num.insert(0, fmt_num(mag))
    return "*".join(num), ("*".join(den) if den else None)


PARAM_SYMBOL_LIST = PARAM_NAMES + MATE_NAMES


def _balanced_parens(piece: str) -> bool:
    if not (piece.startswith("(") and piece.endswith(")")):
        return False
    depth = 0
    for i, ch in enumerate(piece):
        depth += (ch == "(") - (ch == ")")
        if depth == 0 and i < len(piece) - 1:
            return False
    return True


def format_tf(F: TFExpr) -> str:
    if not F.terms:
        return "0"
    parts = []
    for t in F.terms:
        num, den = _fmt_tf_term(t)
        if den is None:
            body = num
        elif _balanced_parens(den) or re.fullmatch(r"\w+(\^\d+)?", den):
            body = f"{num}/{den}"
        else:
            body = f"{num}/({den})"
        if not parts:
            parts.append(body if t.coeff > 0 else f"-{body}")
        else:
            parts.append(f" + {body}" if t.coeff > 0 else f" - {body}")
    return "".join(parts)
