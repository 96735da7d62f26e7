"""Exact univariate polynomials over the rationals.

Coefficients are :class:`fractions.Fraction` stored in ascending degree
order, with no trailing zeros (the zero polynomial has no coefficients).
Everything here is exact; no floating point is used anywhere.

Real roots are handled through Sturm sequences.  An isolating interval
``(lo, hi]`` for a square-free ``p`` contains exactly one real root of ``p``
and satisfies ``p(lo) != 0``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import floor, gcd, lcm

from .errors import NotSquareFree, ParseError, PolynomialError, SharedRootError

__all__ = [
    "Polynomial",
    "Interval",
    "X",
    "parse_polynomial",
    "parse_rational",
    "format_rational",
    "poly_gcd",
    "squarefree_part",
    "squarefree_decomposition",
    "coprime_basis",
    "CoprimeBasis",
    "sturm_sequence",
    "count_roots",
    "isolate_roots",
    "refine_root",
    "bisect_root",
    "sign_at_rational",
    "simplest_between",
    "is_sum_of_squares",
]


def _sign(v) -> int:
    return (v > 0) - (v < 0)


class Polynomial:
    """Immutable polynomial in ``x`` with rational coefficients."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs=()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls([c])

    @classmethod
    def linear_root(cls, xi) -> "Polynomial":
        """``x - xi``."""
        return cls([-Fraction(xi), 1])

    # -- basic queries --------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree, ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Fraction:
        if not self.coeffs:
            raise PolynomialError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Polynomial([other]).coeffs
        return NotImplemented

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.coeffs)
            object.__setattr__(self, "_hash", h)
        return h

    def __call__(self, v) -> Fraction:
        v = Fraction(v)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * v + c
        return acc

    # -- arithmetic -----------------------------------------------------

    @staticmethod
    def _coerce(other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Polynomial()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise PolynomialError("negative power")
        result, base = Polynomial([1]), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other):
        other = self._coerce(other)
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lc = other.lc
        if len(rem) - 1 < dq:
            return Polynomial(), self
        quot = [Fraction(0)] * (len(rem) - dq)
        for k in range(len(rem) - 1 - dq, -1, -1):
            c = rem[k + dq] / lc
            quot[k] = c
            if c:
                for i, oc in enumerate(other.coeffs):
                    rem[k + i] -= c * oc
        return Polynomial(quot), Polynomial(rem[:dq])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other) -> "Polynomial":
        q, r = divmod(self, other)
        if r:
            raise PolynomialError(f"{other} does not divide {self}")
        return q

    def divides(self, other) -> bool:
        """True when ``self`` divides ``other``."""
        return not (other % self)

    def derivative(self) -> "Polynomial":
        return Polynomial([i * c for i, c in enumerate(self.coeffs)][1:])

    def monic(self) -> "Polynomial":
        lc = self.lc
        return Polynomial([c / lc for c in self.coeffs])

    def primitive(self, keep_sign: bool = False) -> "Polynomial":
        """Integer-coefficient multiple with content 1.

        The leading coefficient is made positive unless ``keep_sign``; in
        that case only a positive rescaling is applied.
        """
        if not self.coeffs:
            return self
        den = lcm(*(c.denominator for c in self.coeffs))
        ints = [int(c * den) for c in self.coeffs]
        g = gcd(*ints)
        if not keep_sign and ints[-1] < 0:
            g = -g
        return Polynomial([Fraction(i, g) for i in ints])

    def content_sign(self) -> int:
        """Sign of the leading coefficient."""
        return _sign(self.lc)

    # -- text -----------------------------------------------------------

    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({format_polynomial(self)!r})"

    def to_json(self) -> list:
        return [format_rational(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data) -> "Polynomial":
        return cls(parse_rational(str(c)) for c in data)


X = Polynomial([0, 1])


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_polynomial(p: Polynomial) -> str:
    if not p.coeffs:
        return "0"
    parts = []
    for deg in range(p.degree, -1, -1):
        c = p.coeffs[deg]
        if not c:
            continue
        neg = c < 0
        a = -c if neg else c
        if deg == 0:
            body = format_rational(a)
        else:
            mono = "x" if deg == 1 else f"x^{deg}"
            body = mono if a == 1 else f"{format_rational(a)}*{mono}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("-" if neg else "+") + body)
    return "".join(parts)


_RAT_RE = re.compile(r"\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(text: str) -> Fraction:
    m = _RAT_RE.match(text)
    if not m:
        raise ParseError(f"not a rational number: {text!r}", 0, text)
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ParseError(f"zero denominator in {text!r}", 0, text)
    return Fraction(num, den)


# -- polynomial text parser ----------------------------------------------
#
#   expr   := ["+"|"-"] term (("+"|"-") term)*
#   term   := factor (("*"|"/") factor)*        ("/" only by constants)
#   factor := atom ["^" integer]
#   atom   := integer | "x" | "(" expr ")"

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|(x)|([-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    toks = []
    text_len = len(text)
    while pos < text_len:
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[start]!r}", start, text)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            toks.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            toks.append(("x", None, start))
        else:
            toks.append((m.group(3), None, start))
        pos = m.end()
    toks.append(("end", None, len(text)))
    return toks


class _PolyParser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[0]!r}", tok[2], self.text)
        self.i += 1
        return tok

    def parse(self) -> Polynomial:
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[0]!r}", tok[2], self.text)
        return p

    def expr(self):
        sign = 1
        if self.peek()[0] in "+-":
            sign = -1 if self.take()[0] == "-" else 1
        acc = self.term() * sign
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        acc = self.factor()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            f = self.factor()
            if op == "*":
                acc = acc * f
            else:
                if not f.is_constant() or not f:
                    raise ParseError("division only by nonzero constants", pos, self.text)
                acc = acc * Polynomial([1 / f.coeffs[0]])
        return acc

    def factor(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "int":
                raise ParseError("exponent must be a nonnegative integer", pos, self.text)
            base = base**val
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "int":
            return Polynomial([val])
        if kind == "x":
            return X
        if kind == "(":
            inner = self.expr()
            self.take(")")
            return inner
        if kind == "-":
            return -self.factor()
        raise ParseError(f"unexpected {kind!r}", pos, self.text)


def parse_polynomial(text: str) -> Polynomial:
    """Parse ``x^2-2``, ``3*x^3 - 1/2*x + 7``, ``(x-1)*(x+1)`` and the like."""
    return _PolyParser(text).parse()


# -- gcd and factor structure ----------------------------------------------


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd (zero only when both inputs are zero)."""
    while b:
        a, b = b, a % b
    if not a:
        return a
    return a.monic()


def _nonzero(p: Polynomial, what="polynomial"):
    if not isinstance(p, Polynomial):
        raise PolynomialError(f"expected a Polynomial, got {type(p).__name__}")
    if not p:
        raise PolynomialError(f"zero {what} is not allowed")


def squarefree_part(p: Polynomial) -> Polynomial:
    """``p / gcd(p, p')`` in primitive form with positive leading coefficient."""
    _nonzero(p)
    if p.is_constant():
        return Polynomial([1])
    g = poly_gcd(p, p.derivative())
    return p.exact_div(g).primitive()


def squarefree_decomposition(p: Polynomial):
    """Yun's algorithm.

    Returns ``(c, [a_1, a_2, ...])`` with ``p = c * a_1 * a_2^2 * a_3^3 ...``,
    every ``a_i`` monic, square-free and pairwise coprime (some may be 1).
    """
    _nonzero(p)
    c = p.lc
    f = p.monic()
    if f.degree == 0:
        return c, []
    fp = f.derivative()
    a0 = poly_gcd(f, fp)
    b = f.exact_div(a0)
    cc = fp.exact_div(a0)
    d = cc - b.derivative()
    out = []
    while b.degree > 0:
        a = poly_gcd(b, d)
        out.append(a)
        b = b.exact_div(a)
        cc = d.exact_div(a)
        d = cc - b.derivative()
    while out and out[-1].degree == 0:
        out.pop()
    return c, out


def _basis_key(q: Polynomial):
    return (q.degree, q.coeffs)


@dataclass(frozen=True)
class CoprimeBasis:
    """Pairwise coprime square-free refinement of a list of polynomials.

    ``exponents[i][j]`` is the multiplicity of ``basis[j]`` in input ``i``;
    ``constants[i]`` is the rational factor left over, so that
    ``inputs[i] == constants[i] * prod(basis[j] ** exponents[i][j])``.
    """

    basis: tuple
    exponents: tuple
    constants: tuple

    def reconstruct(self, i: int) -> Polynomial:
        acc = Polynomial([self.constants[i]])
        for q, e in zip(self.basis, self.exponents[i]):
            if e:
                acc = acc * q**e
        return acc

    def square_factor(self, i: int) -> Polynomial:
        """The perfect square ``prod(q ** (2 * (e // 2)))`` for input ``i``."""
        acc = Polynomial([1])
        for q, e in zip(self.basis, self.exponents[i]):
            if e >= 2:
                acc = acc * q ** (2 * (e // 2))
        return acc


def coprime_basis(ps) -> CoprimeBasis:
    """Refine square-free parts of ``ps`` into pairwise coprime factors.

    Uses gcd splitting instead of factorization over the rationals: the
    work list starts from the square-free decomposition of every input, and
    whenever two factors share a nontrivial gcd ``g`` they are replaced by
    ``u/g``, ``v/g`` and ``g``.
    """
    ps = list(ps)
    for p in ps:
        _nonzero(p, "input polynomial")
    # Yun parts separate factors of different multiplicity within one input
    work = []
    for p in ps:
        if not p.is_constant():
            work.extend(a.primitive() for a in squarefree_decomposition(p)[1] if a.degree > 0)
    work = list(dict.fromkeys(work))
    changed = True
    while changed:
        changed = False
        for i in range(len(work)):
            for j in range(i + 1, len(work)):
                g = poly_gcd(work[i], work[j])
                if g.degree > 0:
                    u = work[i].exact_div(g)
                    v = work[j].exact_div(g)
                    rest = [w for k, w in enumerate(work) if k not in (i, j)]
                    work = rest + [w.primitive() for w in (u, v, g) if w.degree > 0]
                    changed = True
                    break
            if changed:
                break
    basis = tuple(sorted(set(work), key=_basis_key))
    exponents = []
    constants = []
    for p in ps:
        rem = p
        row = []
        for q in basis:
            e = 0
            while True:
                quo, r = divmod(rem, q)
                if r:
                    break
                rem = quo
                e += 1
            row.append(e)
        if rem.degree != 0:
            raise PolynomialError(f"coprime refinement lost a factor of {p}")
        exponents.append(tuple(row))
        constants.append(rem.coeffs[0])
    return CoprimeBasis(basis, tuple(exponents), tuple(constants))


# -- Sturm sequences and root isolation ------------------------------------


@lru_cache(maxsize=4096)
def sturm_sequence(p: Polynomial) -> tuple:
    """``p, p', -rem(p, p'), ...`` down to the last nonzero remainder."""
    _nonzero(p)
    seq = [p, p.derivative()]
    while seq[-1]:
        seq.append(-(seq[-2] % seq[-1]))
    seq.pop()
    return tuple(seq)


def _variations(signs) -> int:
    nz = [s for s in signs if s]
    return sum(1 for a, b in zip(nz, nz[1:]) if a != b)


def _signs_at(seq, v):
    if v is None:
        raise ValueError
    return [_sign(q(v)) for q in seq]


def _signs_at_inf(seq, positive: bool):
    out = []
    for q in seq:
        s = _sign(q.lc)
        if not positive and q.degree % 2:
            s = -s
        out.append(s)
    return out


def count_roots(p: Polynomial, lo=None, hi=None) -> int:
    """Number of distinct real roots of ``p`` in ``(lo, hi]``.

    ``None`` stands for an infinite endpoint.
    """
    seq = sturm_sequence(p)
    vlo = _variations(_signs_at_inf(seq, False) if lo is None else _signs_at(seq, Fraction(lo)))
    vhi = _variations(_signs_at_inf(seq, True) if hi is None else _signs_at(seq, Fraction(hi)))
    return vlo - vhi


@dataclass(frozen=True)
class Interval:
    """Half-open rational interval ``(lo, hi]``."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval ({self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, v):
        return self.lo < v <= self.hi

    def __str__(self):
        return f"({format_rational(self.lo)}, {format_rational(self.hi)}]"


def _require_squarefree(p: Polynomial):
    _nonzero(p)
    if p.degree > 0 and poly_gcd(p, p.derivative()).degree > 0:
        raise NotSquareFree(f"{p} is not square-free")


def _cauchy_bound(p: Polynomial) -> Fraction:
    lc = abs(p.lc)
    return 1 + max(abs(c) / lc for c in p.coeffs[:-1])


@lru_cache(maxsize=4096)
def _isolate_cached(p: Polynomial) -> tuple:
    if p.degree <= 0:
        return ()
    bound = Fraction(floor(_cauchy_bound(p)) + 1)
    out = []
    stack = [(-bound, bound)]
    while stack:
        lo, hi = stack.pop()
        n = count_roots(p, lo, hi)
        if n == 0:
            continue
        if n == 1:
            out.append(Interval(lo, hi))
            continue
        mid = (lo + hi) / 2
        while p(mid) == 0:
            mid = (mid + hi) / 2
        stack.append((mid, hi))
        stack.append((lo, mid))
    return tuple(out)


def isolate_roots(p: Polynomial) -> list:
    """One isolating interval per real root of square-free ``p``, ascending."""
    _require_squarefree(p)
    return list(_isolate_cached(p))


def bisect_root(p: Polynomial, iv: Interval) -> Interval:
    """One bisection step keeping the isolated root of ``p``."""
    mid = (iv.lo + iv.hi) / 2
    if count_roots(p, iv.lo, mid) == 1:
        return Interval(iv.lo, mid)
    return Interval(mid, iv.hi)


def _root_free_closed(q: Polynomial, lo: Fraction, hi: Fraction) -> bool:
    if q.is_constant():
        return True
    if q(lo) == 0:
        return False
    return count_roots(squarefree_part(q), lo, hi) == 0


def refine_root(p: Polynomial, iv: Interval, exclude=()) -> Interval:
    """Shrink ``iv`` around its root of ``p`` until no polynomial in
    ``exclude`` has a root in the closed interval.

    Raises :class:`SharedRootError` if some excluded polynomial vanishes at
    the isolated root itself.
    """
    exclude = [q for q in exclude if not q.is_constant()]
    for q in exclude:
        _nonzero(q)
        g = poly_gcd(p, q)
        if g.degree > 0 and count_roots(g, iv.lo, iv.hi) > 0:
            raise SharedRootError(f"{q} vanishes at the root of {p} in {iv}")
    while not all(_root_free_closed(q, iv.lo, iv.hi) for q in exclude):
        iv = bisect_root(p, iv)
    return iv


def sign_at_rational(p: Polynomial, q) -> int:
    return _sign(p(q))


def simplest_between(lo, hi=None) -> Fraction:
    """Rational with the smallest denominator (then smallest absolute
    numerator) in the open interval ``(lo, hi)``; ``hi=None`` is ``+inf``."""
    lo = Fraction(lo)
    if hi is not None:
        hi = Fraction(hi)
        if lo >= hi:
            raise ValueError("empty interval")
        if hi <= 0:
            return -simplest_between(-hi, -lo)
    if lo < 0:
        return Fraction(0)
    n = floor(lo) + 1
    if hi is None or n < hi:
        return Fraction(n)
    fl = floor(lo)
    inner = simplest_between(1 / (hi - fl), None if lo == fl else 1 / (lo - fl))
    return fl + 1 / inner


def is_sum_of_squares(p: Polynomial) -> bool:
    """Whether ``p`` is nonnegative on the reals.

    For univariate rational polynomials this is the same as being a sum of
    squares in ``Q[x]``, i.e. representing the identity of the square class
    group of ``Q(x)``.
    """
    _nonzero(p)
    c, parts = squarefree_decomposition(p)
    if c < 0:
        return False
    odd = Polynomial([1])
    for i, a in enumerate(parts, start=1):
        if i % 2:
            odd = odd * a
    return odd.degree <= 0 or count_roots(odd) == 0
