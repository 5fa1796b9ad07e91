"""
Trace extensions of F[[x]]: the algebras A(n, alpha) for n = 0, 1, 2 and the
trivial extension A(inf), their trace functionals, and the change of
variable that normalizes the trace.

Elements
--------
Finite kind, n >= 1:  f-part  sum_{i<n} c_i x_f^i   (x_f^n = 0, identity f)
                      e-part  Laurent polynomial in x_e (identity e)
Finite kind, n = 0:   just a Laurent polynomial in x (no f-part).
Infinite kind:        sum_{0<=i<=depth} c_i a_i  +  polynomial in x.

The embedding of F[[x]] sends x^i to x_e^i + x_f^i (resp. x^i).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import _linalg as la
from .errors import DepthExceeded, ObstructionNonzero
from .exact_arith import ONE, ZERO, LaurentPoly, Q, TruncSeries, frac_str, parse_frac


@dataclass(frozen=True)
class TraceExtension:
    """A(n, alpha) (kind='finite') or A(inf) (kind='infinite').

    ``alpha`` lists alpha_{n-2}, alpha_{n-3}, ... (``depth`` entries) for the
    finite kind; it is empty for the infinite kind, whose ``depth`` bounds
    the index of the a_i.
    """

    kind: str
    n: Optional[int] = None
    alpha: Tuple[Fraction, ...] = ()
    depth: int = 0

    def __post_init__(self):
        if self.kind not in ("finite", "infinite"):
            raise ValueError(self.kind)
        if self.kind == "finite":
            if self.n not in (0, 1, 2):
                raise ValueError("n must be 0, 1 or 2")
            object.__setattr__(self, "alpha", tuple(Q(a) for a in self.alpha))
            if self.depth < len(self.alpha):
                object.__setattr__(self, "depth", len(self.alpha))
            if len(self.alpha) < self.depth:
                raise ValueError("alpha shorter than the stated depth")

    # -- constructors
    @classmethod
    def finite(cls, n: int, alpha: Sequence = (), depth: Optional[int] = None):
        alpha = tuple(Q(a) for a in alpha)
        if depth is not None and depth > len(alpha):
            alpha = alpha + (ZERO,) * (depth - len(alpha))
        return cls("finite", n, alpha, len(alpha))

    @classmethod
    def infinite(cls, depth: int):
        return cls("infinite", None, (), depth)

    # -- alpha access
    def alpha_at(self, i: int) -> Fraction:
        """alpha_i for i <= n-2."""
        k = (self.n - 2) - i
        if k < 0:
            raise ValueError(f"alpha_{i} is not part of the data (index must be <= {self.n - 2})")
        if k >= len(self.alpha):
            raise DepthExceeded(f"alpha_{i} lies beyond the stored depth {self.depth}", witness=i)
        return self.alpha[k]

    def tau(self, i: int) -> Fraction:
        """t(x_e^i) (or t(x^i) when n = 0)."""
        n = self.n
        if i >= n:
            return ZERO
        if i == n - 1:
            return ONE
        return self.alpha_at(i)

    def tau_f(self, i: int) -> Fraction:
        """t(x_f^i), 0 <= i."""
        n = self.n
        if i >= n:
            return ZERO
        if i == n - 1:
            return -ONE
        return -self.alpha_at(i)

    # -- elements
    def element(self, e_part=None, f_part=None, a_part=None, poly=None) -> "ExtElem":
        return ExtElem(self, e_part, f_part, a_part, poly)

    def one(self) -> "ExtElem":
        return self.x_power(0)

    def x_power(self, i: int) -> "ExtElem":
        """Image of x^i (i >= 0) under F[[x]] -> A; for n = 0 any integer i."""
        if self.kind == "infinite":
            if i < 0:
                raise ValueError("negative powers of x are not in A(inf)")
            return ExtElem(self, poly={i: ONE})
        if self.n == 0:
            return ExtElem(self, e_part=LaurentPoly({i: 1}, "x"))
        if i < 0:
            raise ValueError("use x_e for negative powers")
        f = {i: ONE} if i < self.n else {}
        return ExtElem(self, e_part=LaurentPoly({i: 1}, "x_e"), f_part=f)

    def x_e(self, i: int) -> "ExtElem":
        if self.kind != "finite":
            raise ValueError("x_e exists only for the finite kind")
        return ExtElem(self, e_part=LaurentPoly({i: 1}, "x" if self.n == 0 else "x_e"))

    def x_f(self, i: int) -> "ExtElem":
        if self.kind != "finite" or self.n == 0:
            raise ValueError("x_f exists only for n >= 1")
        return ExtElem(self, f_part={i: ONE} if i < self.n else {})

    def a(self, i: int) -> "ExtElem":
        if self.kind != "infinite":
            raise ValueError("a_i exists only in A(inf)")
        if not 0 <= i <= self.depth:
            raise DepthExceeded(f"a_{i} beyond depth {self.depth}", witness=i)
        return ExtElem(self, a_part={i: ONE})

    # -- serialization
    def to_json_obj(self):
        return {
            "kind": self.kind,
            "n": self.n,
            "depth": self.depth,
            "alpha": [frac_str(a) for a in self.alpha],
        }

    def to_json(self):
        return json.dumps(self.to_json_obj(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text_or_obj):
        obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
        if obj["kind"] == "infinite":
            return cls.infinite(obj["depth"])
        return cls("finite", obj["n"], tuple(parse_frac(a) for a in obj["alpha"]), obj["depth"])


def _clean(d):
    return {k: v for k, v in d.items() if v}


class ExtElem:
    """Element of a trace extension (see module docstring)."""

    __slots__ = ("ext", "e_part", "f_part", "a_part", "poly")

    def __init__(self, ext: TraceExtension, e_part=None, f_part=None, a_part=None, poly=None):
        self.ext = ext
        var = "x" if ext.n == 0 else "x_e"
        self.e_part = e_part if e_part is not None else LaurentPoly({}, var)
        self.f_part = _clean({k: Q(v) for k, v in (f_part or {}).items() if k < (ext.n or 0)})
        self.a_part = _clean({k: Q(v) for k, v in (a_part or {}).items()})
        self.poly = _clean({k: Q(v) for k, v in (poly or {}).items()})
        if ext.kind == "infinite":
            for i in self.a_part:
                if not 0 <= i <= ext.depth:
                    raise DepthExceeded(f"a_{i} beyond depth {ext.depth}", witness=i)

    def _same(self, other):
        if other.ext != self.ext:
            raise ValueError("elements of different extensions")

    def __add__(self, other: "ExtElem"):
        self._same(other)
        f = dict(self.f_part)
        for k, v in other.f_part.items():
            f[k] = f.get(k, ZERO) + v
        a = dict(self.a_part)
        for k, v in other.a_part.items():
            a[k] = a.get(k, ZERO) + v
        p = dict(self.poly)
        for k, v in other.poly.items():
            p[k] = p.get(k, ZERO) + v
        return ExtElem(self.ext, self.e_part + other.e_part, f, a, p)

    def scale(self, c):
        c = Q(c)
        return ExtElem(self.ext, self.e_part.scale(c), {k: v * c for k, v in self.f_part.items()},
                       {k: v * c for k, v in self.a_part.items()}, {k: v * c for k, v in self.poly.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, ExtElem):
            return NotImplemented
        return (self.ext == other.ext and self.e_part == other.e_part and self.f_part == other.f_part
                and self.a_part == other.a_part and self.poly == other.poly)

    def __hash__(self):
        return hash((self.e_part, tuple(sorted(self.f_part.items())),
                     tuple(sorted(self.a_part.items())), tuple(sorted(self.poly.items()))))

    def __repr__(self):
        bits = []
        if self.e_part:
            bits.append(f"e:{self.e_part}")
        if self.f_part:
            bits.append("f:" + " + ".join(f"{c}*x_f^{k}" for k, c in sorted(self.f_part.items())))
        if self.a_part:
            bits.append("a:" + " + ".join(f"{c}*a_{k}" for k, c in sorted(self.a_part.items())))
        if self.poly:
            bits.append("poly:" + " + ".join(f"{c}*x^{k}" for k, c in sorted(self.poly.items())))
        return "ExtElem(" + ", ".join(bits or ["0"]) + ")"


def trace_mul(u: ExtElem, v: ExtElem) -> ExtElem:
    u._same(v)
    ext = u.ext
    if ext.kind == "finite":
        n = ext.n
        f: Dict[int, Fraction] = {}
        for i, c in u.f_part.items():
            for j, d in v.f_part.items():
                if i + j < n:
                    f[i + j] = f.get(i + j, ZERO) + c * d
        # e * f = 0, so the two parts multiply separately
        return ExtElem(ext, u.e_part * v.e_part, f)
    # A(inf): a_i a_j = 0, a_i x^j = a_{i-j} (i >= j) else 0
    a: Dict[int, Fraction] = {}
    for i, c in u.a_part.items():
        for j, d in v.poly.items():
            if i >= j:
                a[i - j] = a.get(i - j, ZERO) + c * d
    for i, c in v.a_part.items():
        for j, d in u.poly.items():
            if i >= j:
                a[i - j] = a.get(i - j, ZERO) + c * d
    p: Dict[int, Fraction] = {}
    for i, c in u.poly.items():
        for j, d in v.poly.items():
            p[i + j] = p.get(i + j, ZERO) + c * d
    return ExtElem(ext, None, None, a, p)


def trace(u: ExtElem) -> Fraction:
    ext = u.ext
    if ext.kind == "infinite":
        return u.a_part.get(0, ZERO)
    total = ZERO
    for i, c in u.e_part.terms.items():
        total += c * ext.tau(i)
    for i, c in u.f_part.items():
        total += c * ext.tau_f(i)
    return total


def pair(u: ExtElem, v: ExtElem) -> Fraction:
    """(u | v) = t(u v)."""
    return trace(trace_mul(u, v))


# ---------------------------------------------------------------------------
# nondegeneracy of the pairing against F[[x]]


@dataclass
class PerpReport:
    passed: bool
    directions: List[str]
    kernel: List[Dict[str, Fraction]]
    perp_basis: List[str]
    window_depth: int

    def to_json_obj(self):
        return {
            "passed": self.passed,
            "window_depth": self.window_depth,
            "directions": self.directions,
            "kernel": [{k: frac_str(v) for k, v in sorted(vec.items())} for vec in self.kernel],
            "perp_basis": self.perp_basis,
        }


def _extra_directions(ext: TraceExtension, W: int):
    """Window elements spanning a complement of the polynomial part."""
    if ext.kind == "infinite":
        if W > ext.depth:
            raise DepthExceeded(f"window {W} needs a_0..a_{W}, depth is {ext.depth}", witness=W)
        return [(f"a_{i}", ext.a(i)) for i in range(W + 1)]
    n = ext.n
    out = []
    for j in range(W + 1 - n, 0, -1):
        out.append((f"x_e^{-j}" if n else f"x^{-j}", ext.x_e(-j)))
    for i in range(n):
        out.append((f"x_f^{i}", ext.x_f(i)))
    return out


def verify_perp(ext: TraceExtension, window_depth: int,
                trace_fn: Optional[Callable[[ExtElem], Fraction]] = None) -> PerpReport:
    """Within the window, the orthogonal of x^0..x^W is the polynomial part only.

    ``trace_fn`` replaces the trace (used for degenerate negative controls).
    """
    W = window_depth
    tr = trace_fn or trace
    dirs = _extra_directions(ext, W)
    xs = [ext.x_power(i) for i in range(W + 1)]
    rows = []
    for _, d in dirs:
        rows.append([tr(trace_mul(d, x)) for x in xs])
    # c . rows = 0  <=>  sum c_d d is orthogonal to every x^i
    ker = la.left_nullspace(rows, len(xs)) if rows else []
    kernel = [{dirs[k][0]: c for k, c in vec.items()} for vec in ker]
    poly_names = [f"x^{i}" for i in range(W + 1)]
    perp = poly_names + [" + ".join(f"{c}*{k}" for k, c in sorted(vec.items())) for vec in kernel]
    return PerpReport(not kernel, [d[0] for d in dirs], kernel, perp, W)


# ---------------------------------------------------------------------------
# normalization of the trace by a substitution x -> phi(x)


@dataclass
class Normalization:
    n: int
    xi: List[Fraction]          # y = x (1 + sum xi_i x^i)
    eta: List[Fraction]         # x = y (1 + sum eta_i y^i)
    checked: List[int]          # k with t(y^-k) verified to vanish
    residuals: Dict[int, Fraction]

    @property
    def ok(self):
        return all(v == 0 for v in self.residuals.values())

    def to_json_obj(self):
        return {
            "n": self.n,
            "eta": [frac_str(c) for c in self.eta],
            "xi": [frac_str(c) for c in self.xi],
            "checked_k": self.checked,
            "residuals": {str(k): frac_str(v) for k, v in sorted(self.residuals.items())},
            "ok": self.ok,
        }


def _series_pow(coeffs: Sequence[Fraction], k: int, order: int) -> List[Fraction]:
    """(1 + sum_{i>=1} c_i x^i)^k to the given order; k may be negative."""
    u = TruncSeries([ONE] + list(coeffs[:order]), order)
    if k >= 0:
        r = TruncSeries([ONE], order)
        for _ in range(k):
            r = r * u
        return list(r.coeffs)
    from .exact_arith import series_inverse
    inv = series_inverse(u, order)
    r = TruncSeries([ONE], order)
    for _ in range(-k):
        r = r * inv
    return list(r.coeffs)


def _compositional_inverse(xi: Sequence[Fraction], order: int) -> List[Fraction]:
    """Given y = x (1 + sum xi_i x^i), return eta with x = y (1 + sum eta_i y^i)."""
    # fixed point: v = 1 + sum eta_i y^i satisfies v(y) * u(y v(y)) = 1
    eta = [ZERO] * order
    for m in range(1, order + 1):
        # coefficient of y^m in v(y) * u(y v(y)) with eta_m unknown (enters linearly with coeff 1)
        trial = _uv_coeffs(xi, eta, m)
        eta[m - 1] -= trial[m]
    if any(c for c in _uv_coeffs(xi, eta, order)[1:]):
        raise ArithmeticError("compositional inverse failed")
    return eta


def _uv_coeffs(xi, eta, order):
    v = TruncSeries([ONE] + list(eta[:order]), order)
    # y v(y) as a series; u(y v) = 1 + sum xi_i (y v)^i
    yv = TruncSeries([ZERO] + list(v.coeffs[:order]), order)
    acc = TruncSeries([ONE], order)
    p = TruncSeries([ONE], order)
    for i in range(1, order + 1):
        p = p * yv
        if i - 1 < len(xi) and xi[i - 1]:
            acc = acc + p * xi[i - 1]
    return list((v * acc).coeffs)


def _targets(n: int, order: int) -> List[int]:
    if n == 0:
        return list(range(2, order + 2))
    if n == 1:
        return list(range(1, order + 1))
    return list(range(1, order + 1))


def normalize_automorphism(ext: TraceExtension, order: int) -> Normalization:
    """Find phi(x) = x + sum eta_i x^{i+1} normalizing the trace of A(n, alpha).

    Solved degree by degree in the forward variable y = x u(x), then
    inverted.  n = 0 kills t(y^-k) for k = 2..order+1; n = 1 kills
    t(y_e^-k) for k = 1..order; n = 2 (alpha_0 = 0 required) kills
    t(y_e^-k) for k = 1..order with the free coefficient xi_1 set to 0, and
    therefore returns order+1 coefficients.
    """
    if ext.kind != "finite":
        raise ValueError("normalization applies to A(n, alpha)")
    n = ext.n
    if order < 1:
        raise ValueError("order must be >= 1")
    if n == 2 and ext.alpha_at(0) != 0:
        raise ObstructionNonzero(
            "alpha_0 != 0: for n = 2 the pairing admits no Lagrangian complement", witness=ext.alpha_at(0))
    ks = _targets(n, order)
    nxi = order + 1 if n == 2 else order
    # condition k reads t(x_e^-k): alpha_{n-2} .. alpha_{-k}
    need = n - 1 + max(ks)
    if need > ext.depth:
        raise DepthExceeded(f"order {order} needs alpha down to depth {need}, have {ext.depth}", witness=need)
    xi = [ZERO] * nxi

    def t_y(k: int, xi_vals) -> Fraction:
        # t(y^-k) = sum_j [u^-k]_j t(x^{j-k});  only j <= k + n - 1 contribute
        top = k + n - 1
        u = _series_pow(xi_vals, -k, max(top, 0))
        return sum((u[j] * ext.tau(j - k) for j in range(0, top + 1)), ZERO)

    for k in ks:
        # the unknown fixed by condition k is xi_{k+n-1}; it enters as -k * xi * t(x^{n-1}) = -k * xi
        m = k + n - 1
        idx = m - 1
        if idx >= nxi:
            break
        xi[idx] = ZERO
        r0 = t_y(k, xi)
        xi[idx] = r0 / k
        if t_y(k, xi) != 0:
            raise ArithmeticError("triangular solve failed")
    eta = _compositional_inverse(xi, nxi)
    res = {k: _trace_after_substitution(ext, eta, k) for k in ks}
    return Normalization(n, xi, eta, ks, res)


def _trace_after_substitution(ext: TraceExtension, eta: Sequence[Fraction], k: int) -> Fraction:
    """t(y^-k) computed from phi alone via the residue change of variables.

    With x = phi(y) = y v(y) and T(x) = sum_i t(x^i) x^{-i-1}, t(g) = Res_x g T,
    so t(y^-k) = Res_y y^-k T(phi(y)) phi'(y) = [y^{k-1}] T(phi(y)) phi'(y).
    Only i from -k .. n-1 contribute (phi^m has valuation m).
    """
    n = ext.n
    order = k + n + 1
    v = TruncSeries([ONE] + list(eta[:order]), order)
    # phi'(y) = d/dy (y v) = sum (i+1) v_i y^i
    dphi = TruncSeries([(i + 1) * v.coeffs[i] for i in range(order + 1)], order)
    total = ZERO
    # T(phi) phi' = sum_i tau_i phi^{-i-1} phi' ;  phi^{m} = y^m v^m
    for i in range(-k, n):
        tau = ext.tau(i)
        if not tau:
            continue
        m = -i - 1
        vm = _series_pow(list(eta), m, order)
        # coefficient of y^{k-1} in y^m v^m phi'
        want = k - 1 - m
        if want < 0:
            continue
        prod = TruncSeries(vm, order) * dphi
        total += tau * prod[want]
    return total
