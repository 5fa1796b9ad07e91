"""
Exact rational arithmetic: sparse multivariate polynomials, Laurent
polynomials in one variable and truncated power series.

Scalars are ``fractions.Fraction`` throughout.  All container types are
immutable after construction; never mutate ``.terms`` in place.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

from .errors import InsufficientOrder, NonUnitConstantTerm, NotDivisible

VAR_ORDER = ("x", "y", "z")

ZERO = Fraction(0)
ONE = Fraction(1)


def Q(value) -> Fraction:
    """Coerce int / str / Fraction to an exact rational (rejects floats)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError("floating point input refused; pass a string or Fraction")
    # gmpy2.mpq and friends
    num, den = getattr(value, "numerator", None), getattr(value, "denominator", None)
    if num is not None and den is not None:
        return Fraction(int(num), int(den))
    raise TypeError(f"cannot make an exact scalar from {value!r}")


def frac_str(q: Fraction) -> str:
    """Serialize as 'p/q' (denominator always written)."""
    q = Q(q)
    return f"{q.numerator}/{q.denominator}"


def parse_frac(s: str) -> Fraction:
    return Fraction(s)


def _sorted_vars(names: Iterable[str]) -> Tuple[str, ...]:
    names = set(names)
    known = [v for v in VAR_ORDER if v in names]
    rest = sorted(names - set(VAR_ORDER))
    return tuple(known + rest)


# ---------------------------------------------------------------------------
# MultiPoly


class MultiPoly:
    """Sparse polynomial with rational coefficients.

    ``variables`` is an ordered tuple of names, ``terms`` maps exponent
    tuples (same length) to nonzero Fractions.
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Iterable[str] = ("x",), terms: Mapping | None = None):
        self.variables = tuple(variables)
        nv = len(self.variables)
        clean: Dict[Tuple[int, ...], Fraction] = {}
        if terms:
            for exp, c in terms.items():
                exp = tuple(int(e) for e in exp)
                if len(exp) != nv:
                    raise ValueError(f"exponent {exp} does not match variables {self.variables}")
                if any(e < 0 for e in exp):
                    raise ValueError(f"negative exponent {exp} in a polynomial")
                c = Q(c)
                if c:
                    clean[exp] = clean.get(exp, ZERO) + c
                    if not clean[exp]:
                        del clean[exp]
        self.terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def _raw(cls, variables, terms):
        p = cls.__new__(cls)
        p.variables = variables
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c, variables=("x",)):
        variables = tuple(variables)
        c = Q(c)
        return cls._raw(variables, {(0,) * len(variables): c} if c else {})

    @classmethod
    def var(cls, name: str, variables=None):
        variables = tuple(variables) if variables is not None else (name,)
        exp = tuple(1 if v == name else 0 for v in variables)
        if name not in variables:
            raise ValueError(f"{name} not among {variables}")
        return cls._raw(variables, {exp: ONE})

    @classmethod
    def monomial(cls, exps: Mapping[str, int], c=1, variables=None):
        variables = tuple(variables) if variables is not None else _sorted_vars(exps)
        exp = tuple(int(exps.get(v, 0)) for v in variables)
        return cls(variables, {exp: c})

    @classmethod
    def from_coeffs(cls, coeffs, var="x"):
        """Univariate polynomial from the list [c0, c1, ...]."""
        return cls((var,), {(i,): c for i, c in enumerate(coeffs)})

    # basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def min_total_degree(self):
        if not self.terms:
            return None
        return min(sum(e) for e in self.terms)

    def degree_in(self, name: str) -> int:
        if not self.terms:
            return -1
        i = self.variables.index(name)
        return max(e[i] for e in self.terms)

    def coefficient(self, exps: Mapping[str, int]) -> Fraction:
        for v, e in exps.items():
            if v not in self.variables and e:
                return ZERO
        key = tuple(int(exps.get(v, 0)) for v in self.variables)
        return self.terms.get(key, ZERO)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.variables), ZERO)

    def items(self):
        """Terms in a deterministic (sorted) order."""
        return sorted(self.terms.items())

    # variable management
    def align(self, variables) -> "MultiPoly":
        variables = tuple(variables)
        if variables == self.variables:
            return self
        idx = []
        for v in self.variables:
            if v in variables:
                idx.append(variables.index(v))
            else:
                idx.append(None)
        out = {}
        for exp, c in self.terms.items():
            new = [0] * len(variables)
            for e, j in zip(exp, idx):
                if j is None:
                    if e:
                        raise ValueError(f"cannot drop variable with positive degree from {self}")
                    continue
                new[j] = e
            out[tuple(new)] = c
        return MultiPoly._raw(variables, out)

    def rename(self, mapping: Mapping[str, str], variables=None) -> "MultiPoly":
        """Substitute variables by variables, e.g. {'x': 'y', 'y': 'x'}.

        Several sources may map onto the same target (exponents add).
        """
        targets = [mapping.get(v, v) for v in self.variables]
        variables = tuple(variables) if variables is not None else _sorted_vars(targets)
        pos = [variables.index(t) for t in targets]
        out: Dict[Tuple[int, ...], Fraction] = {}
        for exp, c in self.terms.items():
            new = [0] * len(variables)
            for e, j in zip(exp, pos):
                new[j] += e
            key = tuple(new)
            s = out.get(key, ZERO) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return MultiPoly._raw(variables, out)

    def _common(self, other: "MultiPoly"):
        if self.variables == other.variables:
            return self, other
        vs = _sorted_vars(self.variables + other.variables)
        return self.align(vs), other.align(vs)

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            return other
        return MultiPoly.const(other, self.variables)

    def __add__(self, other):
        a, b = self._common(self._coerce(other))
        out = dict(a.terms)
        for exp, c in b.terms.items():
            s = out.get(exp, ZERO) + c
            if s:
                out[exp] = s
            else:
                out.pop(exp, None)
        return MultiPoly._raw(a.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "MultiPoly":
        c = Q(c)
        if not c:
            return MultiPoly._raw(self.variables, {})
        return MultiPoly._raw(self.variables, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        a, b = self._common(other)
        out: Dict[Tuple[int, ...], Fraction] = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                key = tuple(i + j for i, j in zip(e1, e2))
                s = out.get(key, ZERO) + c1 * c2
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return MultiPoly._raw(a.variables, out)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.const(1, self.variables)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            try:
                other = MultiPoly.const(other, self.variables)
            except TypeError:
                return NotImplemented
        a, b = self._common(other)
        return a.terms == b.terms

    def __hash__(self):
        if self._hash is None:
            trimmed = self.trim()
            self._hash = hash((trimmed.variables, frozenset(trimmed.terms.items())))
        return self._hash

    def trim(self) -> "MultiPoly":
        """Drop variables that do not occur."""
        used = [v for i, v in enumerate(self.variables) if any(e[i] for e in self.terms)]
        return self.align(tuple(used)) if tuple(used) != self.variables else self

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        total = ZERO
        for exp, c in self.terms.items():
            t = c
            for v, e in zip(self.variables, exp):
                if e:
                    t *= Q(point[v]) ** e
            total += t
        return total

    def __repr__(self):
        return f"MultiPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exp, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(
                (v if e == 1 else f"{v}^{e}") for v, e in zip(self.variables, exp) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _lex_lead(p: MultiPoly):
    exp = max(p.terms)
    return exp, p.terms[exp]


def divide_exact(n: MultiPoly, d: MultiPoly) -> MultiPoly:
    """Quotient q with q*d == n; raises NotDivisible otherwise.

    Lex-order division: when d divides n every intermediate remainder is a
    multiple of d, so its leading term is divisible by lead(d).  A leading
    term that is not divisible therefore certifies non-divisibility.
    """
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    n, d = n._common(d)
    nv = len(n.variables)
    d_exp, d_c = _lex_lead(d)
    rem = dict(n.terms)
    quot: Dict[Tuple[int, ...], Fraction] = {}
    d_items = list(d.terms.items())
    while rem:
        r_exp = max(rem)
        r_c = rem[r_exp]
        shift = tuple(r_exp[i] - d_exp[i] for i in range(nv))
        if any(s < 0 for s in shift):
            raise NotDivisible(
                f"{d} does not divide {n}",
                witness=MultiPoly._raw(n.variables, dict(rem)),
            )
        qc = r_c / d_c
        quot[shift] = qc
        for e, c in d_items:
            key = tuple(e[i] + shift[i] for i in range(nv))
            s = rem.get(key, ZERO) - qc * c
            if s:
                rem[key] = s
            else:
                rem.pop(key, None)
    return MultiPoly._raw(n.variables, quot)


# ---------------------------------------------------------------------------
# LaurentPoly


class LaurentPoly:
    """Finite Laurent polynomial sum c_k v^k in one variable ``var``."""

    __slots__ = ("var", "terms", "lo", "hi")

    def __init__(self, terms: Mapping[int, object] | None = None, var: str = "x"):
        self.var = var
        clean: Dict[int, Fraction] = {}
        if terms:
            for k, c in terms.items():
                c = Q(c)
                if c:
                    clean[int(k)] = clean.get(int(k), ZERO) + c
                    if not clean[int(k)]:
                        del clean[int(k)]
        self.terms = clean
        self._bounds()

    def _bounds(self):
        if self.terms:
            self.lo = min(self.terms)
            self.hi = max(self.terms)
        else:
            self.lo = self.hi = None

    @classmethod
    def _raw(cls, terms, var):
        p = cls.__new__(cls)
        p.var = var
        p.terms = terms
        p._bounds()
        return p

    @classmethod
    def monomial(cls, k: int, c=1, var="x"):
        return cls({k: c}, var)

    @classmethod
    def const(cls, c, var="x"):
        return cls({0: c}, var)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def coeff(self, k: int) -> Fraction:
        return self.terms.get(k, ZERO)

    def items(self):
        return sorted(self.terms.items())

    def _coerce(self, other):
        if isinstance(other, LaurentPoly):
            if other.var != self.var:
                raise ValueError(f"variable mismatch {self.var} vs {other.var}")
            return other
        return LaurentPoly.const(other, self.var)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, ZERO) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return LaurentPoly._raw(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw({k: -c for k, c in self.terms.items()}, self.var)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        c = Q(c)
        if not c:
            return LaurentPoly._raw({}, self.var)
        return LaurentPoly._raw({k: v * c for k, v in self.terms.items()}, self.var)

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            return self.scale(other)
        other = self._coerce(other)
        out: Dict[int, Fraction] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                s = out.get(k1 + k2, ZERO) + c1 * c2
                if s:
                    out[k1 + k2] = s
                else:
                    out.pop(k1 + k2, None)
        return LaurentPoly._raw(out, self.var)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise ValueError("only monomials have Laurent inverses")
            ((k, c),) = self.terms.items()
            return LaurentPoly._raw({k * n: c ** n}, self.var)
        result = LaurentPoly.const(1, self.var)
        for _ in range(n):
            result = result * self
        return result

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by var**k."""
        return LaurentPoly._raw({e + k: c for e, c in self.terms.items()}, self.var)

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            try:
                other = LaurentPoly.const(other, self.var)
            except TypeError:
                return NotImplemented
        return self.var == other.var and self.terms == other.terms

    def __hash__(self):
        return hash((self.var, frozenset(self.terms.items())))

    def __repr__(self):
        return f"LaurentPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items(), reverse=True):
            mono = "" if k == 0 else (self.var if k == 1 else f"{self.var}^{k}")
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# TruncSeries


class TruncSeries:
    """Power series known exactly up to (and including) exponent ``order``.

    Asking for a coefficient past ``order`` raises InsufficientOrder.
    """

    __slots__ = ("var", "coeffs", "order")

    def __init__(self, coeffs, order: int | None = None, var: str = "x"):
        coeffs = [Q(c) for c in coeffs]
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("order must be non-negative")
        if len(coeffs) > order + 1:
            coeffs = coeffs[: order + 1]
        coeffs = coeffs + [ZERO] * (order + 1 - len(coeffs))
        self.var = var
        self.coeffs = tuple(coeffs)
        self.order = order

    @classmethod
    def from_poly(cls, p, order: int, var: str | None = None):
        if isinstance(p, MultiPoly):
            if len(p.variables) > 1:
                raise ValueError("series need a univariate polynomial")
            var = var or (p.variables[0] if p.variables else "x")
            coeffs = [ZERO] * (order + 1)
            for (e,), c in p.terms.items():
                if e <= order:
                    coeffs[e] = c
            return cls(coeffs, order, var)
        if isinstance(p, LaurentPoly):
            if p.lo is not None and p.lo < 0:
                raise ValueError("negative exponents in a power series")
            coeffs = [p.coeff(i) for i in range(order + 1)]
            return cls(coeffs, order, var or p.var)
        raise TypeError(p)

    def __getitem__(self, i: int) -> Fraction:
        if i < 0:
            return ZERO
        if i > self.order:
            raise InsufficientOrder(f"coefficient {i} requested from a series known to order {self.order}")
        return self.coeffs[i]

    def truncate(self, order: int) -> "TruncSeries":
        if order > self.order:
            raise InsufficientOrder(f"cannot extend order {self.order} to {order}")
        return TruncSeries(self.coeffs[: order + 1], order, self.var)

    def __add__(self, other):
        if not isinstance(other, TruncSeries):
            other = TruncSeries([Q(other)], self.order, self.var)
        o = min(self.order, other.order)
        return TruncSeries([self.coeffs[i] + other.coeffs[i] for i in range(o + 1)], o, self.var)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries([-c for c in self.coeffs], self.order, self.var)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            c = Q(other)
            return TruncSeries([v * c for v in self.coeffs], self.order, self.var)
        o = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = [sum((a[i] * b[k - i] for i in range(k + 1)), ZERO) for k in range(o + 1)]
        return TruncSeries(out, o, self.var)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs and self.var == other.var

    def __hash__(self):
        return hash((self.var, self.order, self.coeffs))

    def to_laurent(self) -> LaurentPoly:
        return LaurentPoly({i: c for i, c in enumerate(self.coeffs)}, self.var)

    def __repr__(self):
        return f"TruncSeries({self.to_laurent()} + O({self.var}^{self.order + 1}))"


def series_inverse(p, order: int) -> TruncSeries:
    """1/p as a series to the given order; p must have constant term 1."""
    if isinstance(p, MultiPoly):
        if len(p.trim().variables) > 1:
            raise ValueError("series_inverse expects a univariate polynomial")
        var = p.trim().variables[0] if p.trim().variables else (p.variables[0] if p.variables else "x")
        c = {e[0] if e else 0: v for e, v in p.trim().align((var,)).terms.items()}
    elif isinstance(p, LaurentPoly):
        if p.lo is not None and p.lo < 0:
            raise ValueError("series_inverse expects a polynomial")
        var, c = p.var, dict(p.terms)
    elif isinstance(p, TruncSeries):
        var, c = p.var, {i: v for i, v in enumerate(p.coeffs) if v}
        if order > p.order:
            raise InsufficientOrder(f"input known to order {p.order} only")
    else:
        raise TypeError(p)
    if c.get(0, ZERO) != 1:
        raise NonUnitConstantTerm(f"constant term is {c.get(0, ZERO)}, expected 1", witness=c.get(0, ZERO))
    inv = [ONE]
    for k in range(1, order + 1):
        s = ZERO
        for i in range(1, k + 1):
            ci = c.get(i)
            if ci:
                s += ci * inv[k - i]
        inv.append(-s)
    return TruncSeries(inv, order, var)


def residue_pair(f: LaurentPoly, g: LaurentPoly, w: TruncSeries) -> Fraction:
    """Coefficient of x^-1 in f*g*w."""
    h = f * g
    if h.is_zero():
        return ZERO
    need = max(0, -h.lo - 1)
    if h.lo < 0 and need > w.order:
        raise InsufficientOrder(
            f"weight series known to order {w.order}, residue needs order {need}", witness=need
        )
    total = ZERO
    for k, c in h.terms.items():
        if k <= -1:
            total += c * w[-1 - k]
    return total
