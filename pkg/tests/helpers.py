"""Independent reference implementations and generators shared by the tests.

The oracles here work on plain sign tables (lists of +-1 per point) built
from a space's JSON form, so they share no code with the library's bitmask
machinery.
"""

from __future__ import annotations

import random
from itertools import product

from hypothesis import strategies as st

from ordspace import gf2
from ordspace.ratpoly import Polynomial, parse_polynomial
from ordspace.space import FiniteSpace, one_point
from ordspace.structure import direct_sum, group_extension


class SignTable:
    """All group elements of a space as explicit sign vectors over points."""

    def __init__(self, space: FiniteSpace):
        data = space.to_json()
        self.labels = [p["label"] for p in data["points"]]
        cols = list(zip(*[p["signs"] for p in data["points"]]))  # per generator
        r = len(data["generators"])
        self.rank = r
        self.vectors = []
        for a in range(1 << r):
            vec = [1] * len(self.labels)
            for i in range(r):
                if a >> i & 1:
                    vec = [v * c for v, c in zip(vec, cols[i])]
            self.vectors.append(tuple(vec))
        self.index = {v: a for a, v in enumerate(self.vectors)}
        m1 = sum(b << i for i, b in enumerate(data["minus_one"]))
        self.minus_one = m1

    def D(self, a, b):
        va, vb = self.vectors[a], self.vectors[b]
        return {
            c
            for c, vc in enumerate(self.vectors)
            if all(x == y or x == z for x, y, z in zip(vc, va, vb))
        }

    def associativity_failures(self, limit=1):
        """Triples violating the value-set associativity law (brute force)."""
        n = len(self.vectors)
        Dc = {}

        def D(a, b):
            key = (a, b) if a <= b else (b, a)
            if key not in Dc:
                Dc[key] = frozenset(self.D(*key))
            return Dc[key]

        out = []
        for a, b, c in product(range(n), repeat=3):
            left = set().union(*(D(a, s) for s in D(b, c)))
            right = set().union(*(D(r, c) for r in D(a, b)))
            if left != right:
                out.append((a, b, c))
                if len(out) >= limit:
                    break
        return out

    def in_D1(self, p, q):
        """``p in D(1, q)`` by the pointwise definition."""
        vp, vq = self.vectors[p], self.vectors[q]
        return all(x == 1 or x == y for x, y in zip(vp, vq))


def oracle_pp(space: FiniteSpace, formula, binding):
    """Brute-force truth value and lexicographically first witness."""
    tab = SignTable(space)

    def mono(m, values):
        a = tab.minus_one if m.negative else 0
        for name in m.names:
            a ^= values[name]
        return a

    for combo in product(range(len(tab.vectors)), repeat=len(formula.variables)):
        values = dict(binding)
        values.update(zip(formula.variables, combo))
        if all(tab.in_D1(mono(at.p, values), mono(at.q, values)) for at in formula.atoms):
            return True, dict(zip(formula.variables, combo))
    return False, None


# -- random spaces from the construction grammar ---------------------------------


def tree_size(t):
    if t[0] == "leaf":
        return 1
    if t[0] == "sum":
        return sum(tree_size(c) for c in t[1])
    return tree_size(t[1]) << t[2]


def random_tree(rng: random.Random, budget: int = 16, depth: int = 0):
    """Random sum/extension description with at most ``budget`` points."""
    if budget < 2 or depth > 4:
        return ("leaf",)
    kind = rng.choice(["leaf", "sum", "sum", "ext", "ext"])
    if kind == "leaf":
        return ("leaf",)
    if kind == "ext":
        dmax = min(3, budget.bit_length() - 1)
        d = rng.randint(1, dmax)
        return ("ext", random_tree(rng, budget >> d, depth + 1), d)
    n = rng.randint(2, min(4, budget))
    kids, left = [], budget
    for i in range(n):
        # leave at least one point for every remaining child
        kid = random_tree(rng, left - (n - i - 1), depth + 1)
        kids.append(kid)
        left -= tree_size(kid)
    return ("sum", tuple(kids))


def build_tree(t, counter=None) -> FiniteSpace:
    counter = counter if counter is not None else [0]
    if t[0] == "leaf":
        counter[0] += 1
        return one_point(f"p{counter[0]}", generator=f"g{counter[0]}")
    if t[0] == "sum":
        return direct_sum([build_tree(c, counter) for c in t[1]])
    counter[0] += 1
    k = counter[0]
    base = build_tree(t[1], counter)
    return group_extension(base, t[2], [f"t{k}_{j}" for j in range(t[2])])


@st.composite
def grammar_spaces(draw, budget=16):
    seed = draw(st.integers(0, 2**32 - 1))
    return build_tree(random_tree(random.Random(seed), budget))


@st.composite
def candidate_structures(draw, max_rank=4):
    """Arbitrary full-rank sets of characters with ``-1`` as generator 0;
    many are not spaces of orderings."""
    r = draw(st.integers(1, max_rank))
    pool = [1 | k << 1 for k in range(1 << (r - 1))]
    rows = draw(st.lists(st.sampled_from(pool), min_size=1, unique=True))
    if gf2.rank(rows) != r:
        # pad with characters until the rank is full
        for row in pool:
            if gf2.rank(rows + [row]) > gf2.rank(rows):
                rows.append(row)
    gens = tuple(["-1"] + [f"g{i}" for i in range(1, r)])
    labels = tuple(f"x{i}" for i in range(len(rows)))
    return FiniteSpace(gens, 1, labels, tuple(rows))


# irreducible factors over Q with their number of real roots
IRREDUCIBLES = [
    ("x", 1), ("x-1", 1), ("x+1", 1), ("x-1/2", 1), ("x+3", 1), ("x-5/2", 1),
    ("x^2-2", 2), ("x^2-3", 2), ("x^2-5", 2), ("x^2-6", 2), ("x^2-x-1", 2),
    ("x^3-2", 1), ("x^2+1", 0), ("x^2+x+1", 0),
]


def random_planted(rnd: random.Random, max_roots=8, max_inputs=4):
    """Input polynomials assembled from known irreducibles.

    Returns ``(polys, N, m)`` where ``N`` is the number of distinct real roots
    and ``m`` the number of real-rooted coprime-basis factors.  The basis is
    predicted without computing any gcd: irreducibles appearing with the same
    exponent in every input end up in the same basis factor.
    """
    k = rnd.randint(1, max_inputs)
    chosen = rnd.sample(range(len(IRREDUCIBLES)), rnd.randint(1, 6))
    used, roots = [], 0
    for idx in chosen:
        n = IRREDUCIBLES[idx][1]
        if roots + n <= max_roots:
            used.append(idx)
            roots += n
    if roots == 0:
        used.append(1)
        roots = 1
    exps = {}
    for idx in used:
        e = [rnd.randint(0, 3) for _ in range(k)]
        if not any(e):
            # every factor appears in at least one input
            e[rnd.randrange(k)] = rnd.randint(1, 3)
        exps[idx] = tuple(e)
    polys = []
    for i in range(k):
        p = Polynomial([rnd.choice([1, -1, 2, -3])])
        for idx in used:
            p = p * parse_polynomial(IRREDUCIBLES[idx][0]) ** exps[idx][i]
        polys.append(p)
    groups = {}
    for idx in used:
        groups[exps[idx]] = groups.get(exps[idx], 0) + IRREDUCIBLES[idx][1]
    m = sum(1 for n in groups.values() if n > 0)
    return polys, roots, m


@st.composite
def planted_inputs(draw, max_roots=8, max_inputs=4):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_planted(random.Random(seed), max_roots, max_inputs)


def scramble(space: FiniteSpace, rnd: random.Random) -> FiniteSpace:
    """Isomorphic copy: points shuffled and relabelled, group basis changed
    by random elementary operations ``g_i <- g_i * g_j``."""
    rows = list(space.rows)
    m1 = space.minus_one
    r = space.rank
    for _ in range(3 * r if r > 1 else 0):
        i, j = rnd.sample(range(r), 2)
        rows = [row ^ ((row >> j & 1) << i) for row in rows]
        if m1 >> i & 1:
            m1 ^= 1 << j
    order = list(range(space.size))
    rnd.shuffle(order)
    labels = tuple(f"y{k}" for k in range(space.size))
    gens = tuple(f"h{k}" for k in range(r))
    return FiniteSpace(gens, m1, labels, tuple(rows[k] for k in order))


def fan_minus_point() -> FiniteSpace:
    """Three characters of the 4-point fan, keeping all 8 group elements."""
    return FiniteSpace(("-1", "f1", "f2"), 1, ("x0", "x1", "x2"), (1, 3, 5))


def glued_fans() -> FiniteSpace:
    """Two 4-fans sharing one point: connected with 7 points, so neither a
    sum nor an extension, hence not a space of orderings."""
    rows = (1, 3, 5, 1 ^ 3 ^ 5, 9, 17, 1 ^ 9 ^ 17)
    gens = ("-1", "u", "v", "w", "z")
    return FiniteSpace(gens, 1, tuple(f"x{i}" for i in range(1, 8)), rows)
