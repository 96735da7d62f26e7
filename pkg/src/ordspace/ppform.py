"""Positive-primitive formulas over value sets.

A formula has the shape ::

    E t1 t2 : t1*a1 in D(1, t2) & -a1 in D(1, t1*t2)

that is, existentially quantified variables followed by a conjunction of
atoms ``p in D(1, q)``, where ``p`` and ``q`` are signed products of
variables and parameters.  Identifiers that are not quantified are
parameters; their values come from a binding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb

import numpy as np

from .errors import CapExceeded, InvalidSpace, MonotonicityViolation, ParseError
from .space import FiniteSpace, push_element, subspace_generated

DEFAULT_ASSIGNMENT_CAP = 1 << 24
DEFAULT_SEED_CAP = 1 << 20
DEFAULT_BIT_BUDGET = 1 << 16

KEYWORDS = {"E", "in", "D"}


# -- syntax --------------------------------------------------------------------


@dataclass(frozen=True)
class Monomial:
    """``(-1)^negative * prod(names)`` with squares already cancelled."""

    negative: bool
    names: frozenset

    def __str__(self):
        body = "*".join(sorted(self.names)) or "1"
        return f"-{body}" if self.negative else body


@dataclass(frozen=True)
class Atom:
    p: Monomial
    q: Monomial

    def __str__(self):
        return f"{self.p} in D(1, {self.q})"


@dataclass(frozen=True)
class PPFormula:
    variables: tuple
    parameters: tuple
    atoms: tuple

    def __str__(self):
        head = " ".join(("E",) + self.variables)
        return f"{head} : " + " & ".join(str(a) for a in self.atoms)


_TOKEN_RE = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(1)|([-*:&(),]))")


def _tokenize(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start, text)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("kw" if m.group(1) in KEYWORDS else "id", m.group(1), start))
        elif m.group(2):
            out.append(("one", "1", start))
        else:
            out.append((m.group(3), m.group(3), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, parameters):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.declared_params = None if parameters is None else set(parameters)

    def peek(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, tok[2], self.text)

    def expect(self, kind, value=None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise self.error(f"expected {want!r}, got {got!r}")
        self.i += 1
        return tok

    def formula(self):
        self.expect("kw", "E")
        variables = []
        while self.peek()[0] == "id":
            tok = self.expect("id")
            if tok[1] in variables:
                raise self.error(f"variable {tok[1]!r} declared twice", tok)
            variables.append(tok[1])
        self.variables = tuple(variables)
        self.params = []
        self.expect(":")
        if self.peek()[0] == "end":
            raise self.error("formula needs at least one atom")
        atoms = [self.atom()]
        while self.peek()[0] == "&":
            self.i += 1
            atoms.append(self.atom())
        self.expect("end")
        return PPFormula(self.variables, tuple(self.params), tuple(atoms))

    def atom(self):
        p = self.term()
        self.expect("kw", "in")
        self.expect("kw", "D")
        self.expect("(")
        self.expect("one")
        self.expect(",")
        q = self.term()
        self.expect(")")
        return Atom(p, q)

    def term(self):
        negative = False
        if self.peek()[0] == "-":
            negative = True
            self.i += 1
        names = set()
        self.factor(names)
        while self.peek()[0] == "*":
            self.i += 1
            self.factor(names)
        return Monomial(negative, frozenset(names))

    def factor(self, names):
        tok = self.peek()
        if tok[0] == "one":
            self.i += 1
            return
        if tok[0] != "id":
            raise self.error(f"expected an identifier or 1, got {tok[1] or 'end of input'!r}")
        self.i += 1
        name = tok[1]
        if name not in self.variables:
            if self.declared_params is not None and name not in self.declared_params:
                raise self.error(f"undeclared identifier {name!r}", tok)
            if name not in self.params:
                self.params.append(name)
        names ^= {name}


def parse(text: str, parameters=None) -> PPFormula:
    """Parse one formula.

    Identifiers that are not quantified are parameters.  When
    ``parameters`` is given, any other identifier is an error.
    """
    return _Parser(text, parameters).formula()


def parse_formula_file(text: str, parameters=None) -> list:
    """Formulas from a text with one formula per line and ``#`` comments."""
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse(line, parameters))
    return out


# -- semantics -----------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: dict | None = None  # variable -> element
    level: int | None = None
    space: FiniteSpace | None = field(default=None, compare=False, repr=False)

    def to_json(self, space: FiniteSpace | None = None) -> dict:
        sp = space or self.space
        wit = None
        if self.witness is not None:
            wit = {v: sp.format_element(e) for v, e in self.witness.items()}
        return {"holds": self.holds, "witness": wit, "level": self.level}


def bind(space: FiniteSpace, f: PPFormula, binding) -> dict:
    """Normalize a binding to ``{parameter: element}``; values may be bit
    lists, integers or element text such as ``"-c1_1*h1"``."""
    binding = dict(binding or {})
    out = {}
    for name in f.parameters:
        if name not in binding:
            raise InvalidSpace(f"parameter {name!r} is not bound")
        out[name] = space.parse_element(binding[name])
    return out


def _monomial_value(space, m: Monomial, values) -> int:
    a = space.minus_one if m.negative else 0
    for n in m.names:
        a ^= values[n]
    return a


def holds_with(space: FiniteSpace, f: PPFormula, params: dict, witness: dict) -> bool:
    """Whether the given assignment satisfies every atom."""
    values = {**params, **witness}
    for atom in f.atoms:
        p = space.element_mask(_monomial_value(space, atom.p, values))
        q = space.element_mask(_monomial_value(space, atom.q, values))
        # p in D(1, q): wherever p is -1, q is -1 too
        if p & ~q:
            return False
    return True


def evaluate(space: FiniteSpace, f: PPFormula, binding=None, cap: int = DEFAULT_ASSIGNMENT_CAP) -> Verdict:
    """Decide ``f`` on ``space``.  Variables range over the whole group; the
    witness is the lexicographically first satisfying assignment (elements
    compared as integers, first variable most significant)."""
    params = bind(space, f, binding)
    n = len(f.variables)
    if space.order**n > cap:
        raise CapExceeded(
            f"{space.order}^{n} assignments exceed the cap {cap}", kind="assignments"
        )
    if n == 0:
        ok = holds_with(space, f, params, {})
        return Verdict(ok, {} if ok else None, space=space)
    masks = space.element_masks()
    pmask = {k: space.element_mask(v) for k, v in params.items()}
    m1 = space.element_mask(space.minus_one)
    last = f.variables[-1]
    outer = f.variables[:-1]

    def const_part(m: Monomial, assign):
        acc = m1 if m.negative else 0
        for name in m.names:
            if name == last:
                continue
            acc ^= pmask[name] if name in pmask else masks[assign[name]]
        return acc

    vec = np.array(masks, dtype=np.uint64) if space.size <= 64 else None
    for combo in product(range(space.order), repeat=n - 1):
        assign = dict(zip(outer, combo))
        if vec is not None:
            good = np.ones(space.order, dtype=bool)
            for atom in f.atoms:
                p0 = np.uint64(const_part(atom.p, assign))
                q0 = np.uint64(const_part(atom.q, assign))
                pv = vec ^ p0 if last in atom.p.names else p0
                qv = vec ^ q0 if last in atom.q.names else q0
                good &= (pv & ~qv) == 0
            hits = np.flatnonzero(good)
            if hits.size:
                assign[last] = int(hits[0])
                return Verdict(True, assign, space=space)
        else:
            for t in range(space.order):
                assign[last] = t
                if holds_with(space, f, params, assign):
                    return Verdict(True, dict(assign), space=space)
    return Verdict(False, None, space=space)


def evaluate_on_subspace(space: FiniteSpace, seed, f: PPFormula, binding=None, cap: int = DEFAULT_ASSIGNMENT_CAP) -> Verdict:
    """Evaluate ``f`` on the subspace generated by ``seed``, with parameters
    restricted and variables ranging over the restricted group."""
    sub = subspace_generated(space, seed)
    params = bind(space, f, binding)
    pushed = {k: push_element(space, sub, v) for k, v in params.items()}
    return evaluate(sub.space, f, pushed, cap)


@dataclass(frozen=True)
class Counterexample:
    seed: tuple
    subspace: tuple  # labels of the generated subspace

    def to_json(self) -> dict:
        return {"seed": list(self.seed), "subspace": list(self.subspace)}


def search_counterexample_subspace(
    space: FiniteSpace,
    f: PPFormula,
    binding=None,
    max_points: int = 1,
    cap: int = DEFAULT_ASSIGNMENT_CAP,
    seed_cap: int = DEFAULT_SEED_CAP,
):
    """First seed (by size, then lexicographically by point order) whose
    generated subspace falsifies ``f``; ``None`` if there is none among
    seeds with at most ``max_points`` points.  Seeds generating an already
    tested subspace are skipped."""
    if not 1 <= max_points <= space.size:
        raise InvalidSpace(f"max_points must lie in 1..{space.size}")
    total = sum(comb(space.size, s) for s in range(1, max_points + 1))
    if total > seed_cap:
        raise CapExceeded(f"{total} seeds exceed the cap {seed_cap}", kind="seeds")
    params = bind(space, f, binding)
    seen = set()
    for size in range(1, max_points + 1):
        for seed in combinations(range(space.size), size):
            sub = subspace_generated(space, seed)
            key = frozenset(sub.space.labels)
            if key in seen:
                continue
            seen.add(key)
            pushed = {k: push_element(space, sub, v) for k, v in params.items()}
            if not evaluate(sub.space, f, pushed, cap).holds:
                labels = tuple(space.labels[k] for k in seed)
                return Counterexample(labels, tuple(sub.space.labels))
    return None


# -- the size bound ------------------------------------------------------------


@dataclass(frozen=True)
class BoundOverflow:
    """``B(n, k)`` too large to write out; ``tower`` is its symbolic form and
    ``log2`` the exact exponent when that still fits the budget."""

    n: int
    k: int
    tower: str
    log2: int | None = None

    def to_json(self) -> dict:
        return {
            "overflow": True,
            "n": self.n,
            "k": self.k,
            "tower": self.tower,
            "log2": None if self.log2 is None else str(self.log2),
        }


def _power_text(e: int) -> str:
    return "1" if e == 0 else f"2^{e}"


def bound_B(n: int, k: int, bit_budget: int = DEFAULT_BIT_BUDGET):
    """``B(n, 0) = 1`` and ``B(n, k) = 2^k * 2^(2^(nk) * B(n, k-1))``.

    Returns the exact integer when it has at most ``bit_budget`` bits,
    otherwise a :class:`BoundOverflow`.
    """
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    # B(n, j) = 2^e with e = j + 2^(nj + e_prev); keep e while it fits
    e, text = 0, "1"
    for j in range(1, k + 1):
        text = f"2^({j} + 2^{n * j}*{text})"
        if e is not None and n * j + e <= bit_budget:
            e = j + (1 << (n * j + e))
        else:
            e = None
        if e is not None and e < bit_budget:
            text = _power_text(e)
    if e is not None and e < bit_budget:
        return 1 << e
    return BoundOverflow(n, k, text, e)


# -- towers --------------------------------------------------------------------


@dataclass(frozen=True)
class TowerCheck:
    holds: bool
    level: int | None
    witness: dict | None
    per_level: tuple  # holds at each level from the start level on

    def to_json(self, tower) -> dict:
        wit = None
        if self.witness is not None:
            sp = tower.levels[self.level].space
            wit = {v: sp.format_element(e) for v, e in self.witness.items()}
        return {"holds": self.holds, "witness": wit, "level": self.level}


def check_tower(tower, f: PPFormula, binding=None, level: int = 0, cap: int = DEFAULT_ASSIGNMENT_CAP) -> TowerCheck:
    """Least level ``>= level`` where ``f`` holds, with parameters pushed
    forward along the group injections.

    Once a witness is found it is pushed to every finer level and must
    still satisfy the formula there.
    """
    if not 0 <= level < len(tower.levels):
        raise InvalidSpace(f"level must lie in 0..{len(tower.levels) - 1}")
    base = tower.levels[level].space
    params = bind(base, f, binding)
    first, witness, per_level = None, None, []
    for i in range(level, len(tower.levels)):
        sp = tower.levels[i].space
        pushed = {k: tower.push_element(v, level, i) for k, v in params.items()}
        verdict = evaluate(sp, f, pushed, cap)
        per_level.append(verdict.holds)
        if first is None:
            if verdict.holds:
                first, witness = i, verdict.witness
            continue
        moved = {v: tower.push_element(e, first, i) for v, e in witness.items()}
        if not verdict.holds or not holds_with(sp, f, pushed, moved):
            raise MonotonicityViolation(
                f"formula holds at level {first} but its pushed witness fails at level {i}"
            )
    return TowerCheck(first is not None, first, witness, tuple(per_level))
