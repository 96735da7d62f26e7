"""Finite quotients of the space of orderings of Q(x).

Given polynomials ``p_1, ..., p_m`` the construction produces a finite
quotient ``(X_0, G_0)`` with every ``p_i`` in ``G_0``:

* the square-free parts are refined into pairwise coprime factors;
* all real roots are isolated and separated by rational lines
  ``x - xi_0 < ... < x - xi_N``, consecutive roots sharing a line;
* each factor ``p_k`` gives a component: the direct sum of the one-point
  spaces generated by the cell products ``(x - xi_{i-1})(x - xi_i)``,
  extended by ``h_k = eps * p_k * prod(x - xi_i)`` over its roots;
* two boundary points ``inf-`` and ``inf+`` come from ``x - xi_0`` and
  ``-(x - xi_N)``.

Point ``sigma{k}_{j}-`` is the ordering just left of the ``j``-th root of
the ``k``-th factor and ``sigma{k}_{j}+`` the one just right of it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import gf2
from .errors import (
    ConstructionError,
    InvalidSpace,
    NoMatchingPoint,
    NoRealRoots,
    ParseError,
    PolynomialError,
    RefinementNeeded,
)
from .ratpoly import (
    Interval,
    Polynomial,
    bisect_root,
    coprime_basis,
    count_roots,
    format_rational,
    is_sum_of_squares,
    isolate_roots,
    parse_polynomial,
    parse_rational,
    poly_gcd,
    refine_root,
    sign_at_rational,
    simplest_between,
    squarefree_part,
)
from .space import FiniteSpace, one_point, pullback, verify_axioms
from .structure import direct_sum, group_extension

# -- orderings of Q(x) ---------------------------------------------------------


def _check_side(side):
    if side not in ("+", "-"):
        raise ValueError(f"side must be '+' or '-', got {side!r}")


@dataclass(frozen=True)
class AlgebraicSide:
    """Ordering just left (``-``) or right (``+``) of a real root of ``poly``."""

    poly: Polynomial
    root_index: int  # 1-based, ascending
    side: str

    def __post_init__(self):
        _check_side(self.side)
        if self.poly.is_constant():
            raise PolynomialError("root() needs a non-constant polynomial")
        if poly_gcd(self.poly, self.poly.derivative()).degree > 0:
            raise PolynomialError(f"{self.poly} is not square-free")
        n = len(isolate_roots(self.poly))
        if not 1 <= self.root_index <= n:
            raise ValueError(f"{self.poly} has {n} real roots, no root number {self.root_index}")

    @property
    def interval(self) -> Interval:
        return isolate_roots(self.poly)[self.root_index - 1]

    def __str__(self):
        return f"root({self.poly},{self.root_index},{self.side})"


@dataclass(frozen=True)
class InfinitySide:
    side: str

    def __post_init__(self):
        _check_side(self.side)

    def __str__(self):
        return f"inf{self.side}"


@dataclass(frozen=True)
class TranscendentalCut:
    """An ordering given by an embedding ``x -> zeta`` with ``zeta`` somewhere
    in the open window ``(lo, hi)``, known to avoid the relevant roots."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if not self.lo < self.hi:
            raise ValueError("cut window needs lo < hi")

    def __str__(self):
        return f"cut({format_rational(self.lo)},{format_rational(self.hi)})"


_ROOT_RE = re.compile(r"^root\((.*),\s*(\d+)\s*,\s*([+-])\s*\)$")
_CUT_RE = re.compile(r"^cut\(([^,]*),([^,]*)\)$")


def parse_ordering(text: str):
    """Parse ``inf+``, ``inf-``, ``root(<poly>,<index>,<+|->)`` or
    ``cut(<lo>,<hi>)``."""
    s = text.strip()
    if s in ("inf+", "inf-"):
        return InfinitySide(s[-1])
    m = _ROOT_RE.match(s)
    if m:
        return AlgebraicSide(parse_polynomial(m.group(1)), int(m.group(2)), m.group(3))
    m = _CUT_RE.match(s)
    if m:
        return TranscendentalCut(parse_rational(m.group(1)), parse_rational(m.group(2)))
    raise ParseError(f"cannot parse ordering {text!r}", 0, text)


def _lc_sign(q: Polynomial) -> int:
    return 1 if q.lc > 0 else -1


def _vanishes_at(q: Polynomial, p: Polynomial, iv: Interval) -> bool:
    if q.is_constant():
        return False
    g = poly_gcd(p, q)
    return g.degree > 0 and count_roots(g, iv.lo, iv.hi) > 0


def _roots_in_open(q: Polynomial, lo: Fraction, hi: Fraction) -> int:
    r = squarefree_part(q)
    return count_roots(r, lo, hi) - (1 if r(hi) == 0 else 0)


@lru_cache(maxsize=1 << 16)
def sign_at(q: Polynomial, ordering) -> int:
    """Sign of ``q`` in the given ordering of Q(x)."""
    if q.is_zero():
        raise PolynomialError("the zero polynomial has no sign")
    if q.is_constant():
        return _lc_sign(q)
    if isinstance(ordering, InfinitySide):
        s = _lc_sign(q)
        return s if ordering.side == "+" or q.degree % 2 == 0 else -s
    if isinstance(ordering, TranscendentalCut):
        if _roots_in_open(q, ordering.lo, ordering.hi):
            raise RefinementNeeded(f"{q} has a root inside {ordering}")
        return sign_at_rational(q, (ordering.lo + ordering.hi) / 2)
    if isinstance(ordering, AlgebraicSide):
        # first derivative not vanishing at the root decides both sides
        p, iv = ordering.poly, ordering.interval
        d, k = q, 0
        while _vanishes_at(d, p, iv):
            d, k = d.derivative(), k + 1
        iv = refine_root(p, iv, [d])
        s = sign_at_rational(d, iv.hi)
        return s if ordering.side == "+" or k % 2 == 0 else -s
    raise TypeError(f"not an ordering: {ordering!r}")


# -- the construction ----------------------------------------------------------


@dataclass(frozen=True)
class QuotientResult:
    space: FiniteSpace
    generator_reps: tuple  # one Polynomial per generator of space
    separators: tuple  # xi_0 < ... < xi_N
    orderings: dict  # point label -> ordering restricting to it
    inputs: tuple
    input_expressions: tuple  # element of space for each input
    factors: tuple = ()  # coprime factors with real roots, in component order
    epsilons: tuple = ()

    def reps_by_name(self) -> dict:
        return dict(zip(self.space.generators, self.generator_reps))

    def element_poly(self, a: int) -> Polynomial:
        """Product of the generator reps selected by ``a``."""
        acc = Polynomial([1])
        for i, rep in enumerate(self.generator_reps):
            if a >> i & 1:
                acc = acc * rep
        return acc

    def to_json(self) -> dict:
        sp = self.space
        return {
            "space": sp.to_json(),
            "labels": list(sp.labels),
            "separators": [format_rational(v) for v in self.separators],
            "generator_reps": [str(p) for p in self.generator_reps],
            "orderings": {lab: str(self.orderings[lab]) for lab in sp.labels},
            "inputs": [str(p) for p in self.inputs],
            "input_expressions": [gf2.int_to_bits(e, sp.rank) for e in self.input_expressions],
            "factors": [str(p) for p in self.factors],
            "epsilons": list(self.epsilons),
        }

    @classmethod
    def from_json(cls, data) -> "QuotientResult":
        try:
            space = FiniteSpace.from_json(data["space"])
            reps = tuple(parse_polynomial(s) for s in data["generator_reps"])
            seps = tuple(parse_rational(s) for s in data["separators"])
            ords = {lab: parse_ordering(t) for lab, t in data["orderings"].items()}
            inputs = tuple(parse_polynomial(s) for s in data.get("inputs", ()))
            exprs = tuple(gf2.bits_to_int(b) for b in data.get("input_expressions", ()))
            factors = tuple(parse_polynomial(s) for s in data.get("factors", ()))
            eps = tuple(data.get("epsilons", ()))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpace(f"malformed quotient JSON: {exc}") from None
        if len(reps) != space.rank:
            raise InvalidSpace("need one generator rep per generator")
        return cls(space, reps, seps, ords, inputs, exprs, factors, eps)


def _separate(roots):
    """Refine isolating intervals (in place, sorted by position) until each
    closes strictly before the next one opens."""
    while True:
        clash = False
        for i in range(len(roots) - 1):
            a, b = roots[i], roots[i + 1]
            if a[2].hi >= b[2].lo:
                clash = True
                roots[i] = (a[0], a[1], bisect_root(a[0], a[2]))
                roots[i + 1] = (b[0], b[1], bisect_root(b[0], b[2]))
        if not clash:
            return
        roots.sort(key=lambda r: r[2].lo)


def construct_quotient(ps) -> QuotientResult:
    """Build the finite quotient ``(X_0, G_0)`` with ``ps`` inside ``G_0``."""
    ps = tuple(ps)
    if not ps:
        raise InvalidSpace("need at least one polynomial")
    for p in ps:
        if p.is_zero():
            raise PolynomialError("the zero polynomial is not a group element")
    cb = coprime_basis(ps)
    real = [q for q in cb.basis if count_roots(q) > 0]
    if not real:
        raise NoRealRoots("no input polynomial has a real root")

    # isolate, refine against the other factors, make closures disjoint
    roots = []
    for q in real:
        others = [o for o in real if o is not q]
        for j, iv in enumerate(isolate_roots(q), start=1):
            roots.append((q, j, refine_root(q, iv, others)))
    roots.sort(key=lambda r: r[2].lo)
    _separate(roots)
    n = len(roots)
    xi = [simplest_between(roots[0][2].lo - 1, roots[0][2].lo)]
    for i in range(n - 1):
        xi.append(simplest_between(roots[i][2].hi, roots[i + 1][2].lo))
    xi.append(simplest_between(roots[-1][2].hi, roots[-1][2].hi + 1))
    line = [Polynomial([-v, 1]) for v in xi]
    position = {(id(q), j): i + 1 for i, (q, j, _) in enumerate(roots)}

    # components ordered by smallest root
    real.sort(key=lambda q: position[(id(q), 1)])

    reps = {"l_left": line[0]}
    comps = [one_point("inf-", generator="l_left")]
    labels = {"inf-": "inf-"}
    orderings = {"inf-": InfinitySide("-")}
    epsilons = []
    for k, q in enumerate(real, start=1):
        nroots = len(isolate_roots(q))
        pos = [position[(id(q), j)] for j in range(1, nroots + 1)]
        singles = []
        h = q
        for j, i in enumerate(pos, start=1):
            name = f"c{k}_{j}"
            reps[name] = line[i - 1] * line[i]
            singles.append(one_point(f"sigma{k}_{j}", generator=name))
            h = h * line[i]
        eps = _choose_epsilon(h, [roots[i - 1][2] for i in pos], [xi[i] for i in pos])
        epsilons.append(eps)
        reps[f"h{k}"] = h if eps == 1 else -h
        comp = group_extension(direct_sum(singles), 1, [f"h{k}"])
        comps.append(comp)
        for j in range(1, nroots + 1):
            # h is +1 just left of each root and -1 just right of it
            labels[f"sigma{k}_{j}.+"] = f"sigma{k}_{j}-"
            labels[f"sigma{k}_{j}.-"] = f"sigma{k}_{j}+"
            orderings[f"sigma{k}_{j}-"] = AlgebraicSide(q, j, "-")
            orderings[f"sigma{k}_{j}+"] = AlgebraicSide(q, j, "+")
    reps["l_right"] = -line[-1]
    comps.append(one_point("inf+", generator="l_right"))
    labels["inf+"] = "inf+"
    orderings["inf+"] = InfinitySide("+")

    space = direct_sum(comps)
    space = space.relabel(labels=[labels[lab] for lab in space.labels])
    rep_list = tuple(reps[g] for g in space.generators)

    # the analytic sign table must match the abstract one
    for lab in space.labels:
        for i, rep in enumerate(rep_list):
            if sign_at(rep, orderings[lab]) != space.sign(1 << i, lab):
                raise ConstructionError(
                    f"sign of {space.generators[i]} at {lab} disagrees with the construction"
                )
    verdict = verify_axioms(space)
    if not verdict.ok:
        raise ConstructionError("constructed quotient fails the axiom check")

    exprs = []
    result = QuotientResult(
        space, rep_list, tuple(xi), orderings, ps, (), tuple(real), tuple(epsilons)
    )
    for p in ps:
        e = space.element_from_signs([sign_at(p, orderings[lab]) for lab in space.labels])
        if e is None:
            raise ConstructionError(f"{p} does not restrict into the quotient group")
        if not is_sum_of_squares(p * result.element_poly(e)):
            raise ConstructionError(f"{p} is not congruent to its expression modulo squares")
        exprs.append(e)
    return QuotientResult(
        space, rep_list, tuple(xi), orderings, ps, tuple(exprs), tuple(real), tuple(epsilons)
    )


def _choose_epsilon(h: Polynomial, ivs, right_lines) -> int:
    """Sign making ``h`` positive everywhere except on ``(alpha, xi^+)``.

    The real roots of ``h`` are the roots ``alpha`` of its factor, each
    isolated in ``ivs`` strictly inside its cell, and the right lines
    ``xi^+``.  One rational is sampled in every interval between
    consecutive roots, and the pattern is checked exactly.
    """
    eps = sign_at_rational(h, right_lines[-1] + 1)
    for iv, right in zip(ivs, right_lines):
        left_sample = iv.lo  # between the previous root of h and alpha
        right_sample = simplest_between(iv.hi, right)
        if eps * sign_at_rational(h, left_sample) != 1:
            raise ConstructionError("h is negative left of a root")
        if eps * sign_at_rational(h, right_sample) != -1:
            raise ConstructionError("h is positive right of a root")
    return eps


def restrict(ordering, q: QuotientResult) -> str:
    """Label of the point of ``X_0`` the ordering restricts to."""
    row = 0
    for i, rep in enumerate(q.generator_reps):
        if sign_at(rep, ordering) < 0:
            row |= 1 << i
    k = q.space.point_with_row(row)
    if k is None:
        raise NoMatchingPoint(f"{ordering} restricts to no point of the quotient")
    return q.space.labels[k]


# -- towers --------------------------------------------------------------------


@dataclass(frozen=True)
class Tower:
    """Finite chain of quotients with increasing groups.

    ``point_maps[(i, j)]`` (``i > j``, levels numbered from 0) sends level
    ``i`` labels to level ``j`` labels; ``group_maps[(j, i)]`` lists the image
    in level ``i`` of each generator of level ``j``.
    """

    levels: tuple
    point_maps: dict = field(default_factory=dict)
    group_maps: dict = field(default_factory=dict)

    def push_element(self, a: int, j: int, i: int) -> int:
        """Image of ``a`` in level ``i`` under the group injection from ``j``."""
        if i == j:
            return a
        imgs = self.group_maps[(j, i)]
        out = 0
        for g, img in enumerate(imgs):
            if a >> g & 1:
                out ^= img
        return out

    def to_json(self) -> dict:
        maps = []
        for (i, j), pm in sorted(self.point_maps.items()):
            src = self.levels[i].space
            dst = self.levels[j].space
            maps.append(
                {
                    "from": i,
                    "to": j,
                    "points": {lab: pm[lab] for lab in src.labels},
                    "group": [gf2.int_to_bits(e, src.rank) for e in self.group_maps[(j, i)]],
                    "group_generators": list(dst.generators),
                }
            )
        return {"levels": [lv.to_json() for lv in self.levels], "maps": maps}

    @classmethod
    def from_json(cls, data) -> "Tower":
        try:
            levels = tuple(QuotientResult.from_json(lv) for lv in data["levels"])
            pms, gms = {}, {}
            for m in data.get("maps", ()):
                i, j = int(m["from"]), int(m["to"])
                pms[(i, j)] = dict(m["points"])
                gms[(j, i)] = tuple(gf2.bits_to_int(b) for b in m["group"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpace(f"malformed tower JSON: {exc}") from None
        return cls(levels, pms, gms)


def _link(fine: QuotientResult, coarse: QuotientResult):
    pmap = {lab: restrict(fine.orderings[lab], coarse) for lab in fine.space.labels}
    gmap = []
    for g in range(coarse.space.rank):
        img = pullback(coarse.space, 1 << g, fine.space, pmap)
        if img is None:
            raise ConstructionError("coarse group does not embed in the finer level")
        gmap.append(img)
    return pmap, tuple(gmap)


def build_tower(generator_lists) -> Tower:
    """Build quotients level by level; level ``i`` is constructed from the
    previous level's generator reps and inputs together with the new
    polynomials, so the groups increase."""
    lists = [list(ps) for ps in generator_lists]
    if not lists or any(not ps for ps in lists):
        raise InvalidSpace("every tower level needs at least one polynomial")
    levels = []
    for ps in lists:
        if levels:
            prev = levels[-1]
            ps = list(prev.generator_reps) + list(prev.inputs) + ps
        levels.append(construct_quotient(_unique(ps)))
    pms, gms = {}, {}
    for i in range(len(levels)):
        for j in range(i):
            pms[(i, j)], gms[(j, i)] = _link(levels[i], levels[j])
    tower = Tower(tuple(levels), pms, gms)
    verdict = verify_inverse_system(tower)
    if not verdict.ok:
        raise ConstructionError(f"tower fails the inverse-system check: {verdict.reason}")
    return tower


def _unique(ps):
    seen, out = set(), []
    for p in ps:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


@dataclass(frozen=True)
class TowerVerdict:
    ok: bool
    pair: tuple | None = None
    reason: str | None = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "pair": list(self.pair) if self.pair else None, "reason": self.reason}


def verify_inverse_system(t: Tower) -> TowerVerdict:
    """Surjectivity of the point maps, injectivity and compatibility of the
    group maps, and ``F_ik = F_jk o F_ij`` for all ``i > j > k``."""
    n = len(t.levels)
    for i in range(n):
        for j in range(i):
            if (i, j) not in t.point_maps or (j, i) not in t.group_maps:
                return TowerVerdict(False, (i, j), "missing map")
            fine, coarse = t.levels[i].space, t.levels[j].space
            pm = t.point_maps[(i, j)]
            if set(pm) != set(fine.labels) or not set(pm.values()) <= set(coarse.labels):
                return TowerVerdict(False, (i, j), "point map has the wrong domain or codomain")
            if set(pm.values()) != set(coarse.labels):
                return TowerVerdict(False, (i, j), "point map is not surjective")
            imgs = t.group_maps[(j, i)]
            if len(imgs) != coarse.rank or gf2.rank(imgs) != coarse.rank:
                return TowerVerdict(False, (i, j), "group map is not injective")
            for g, img in enumerate(imgs):
                for lab in fine.labels:
                    if fine.sign(img, lab) != coarse.sign(1 << g, pm[lab]):
                        return TowerVerdict(
                            False, (i, j), f"group map disagrees with point map at {lab}"
                        )
    for i in range(n):
        for j in range(i):
            for k in range(j):
                a, b, c = t.point_maps[(i, k)], t.point_maps[(i, j)], t.point_maps[(j, k)]
                for lab in t.levels[i].space.labels:
                    if a[lab] != c[b[lab]]:
                        return TowerVerdict(
                            False, (i, k), f"composition through level {j} differs at {lab}"
                        )
    return TowerVerdict(True)
