"""Direct sums, group extensions, fans, connectivity and the structure
decomposition of finite spaces of orderings."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from . import gf2
from .errors import CapExceeded, DecompositionError, InvalidSpace
from .space import (
    FiniteSpace,
    one_point,
    pullback,
    quotient_structure,
    restrict_to,
    subspace_generated,
    translation_stabilizer,
)

DEFAULT_STABILITY_CAP = 24
DEFAULT_ISO_CAP = 64


# -- constructions -------------------------------------------------------------


def _dedupe(names, tag):
    """Rename repeated names by appending ``tag`` and a counter, never
    producing a name already in use."""
    taken = set(names)
    seen = set()
    out = []
    for n in names:
        if n in seen:
            k = 1
            while f"{n}{tag}{k}" in taken:
                k += 1
            n = f"{n}{tag}{k}"
            taken.add(n)
        seen.add(n)
        out.append(n)
    return out


def direct_sum(spaces) -> FiniteSpace:
    """Disjoint union of the point sets, ``G = G_1 (+) ... (+) G_n`` and
    ``-1 = (-1, ..., -1)``.  A point of one summand sees the generators of
    the other summands as ``+1``."""
    spaces = list(spaces)
    if not spaces:
        raise InvalidSpace("direct_sum needs at least one space")
    labels, gens = [], []
    for s in spaces:
        labels.extend(s.labels)
        gens.extend(s.generators)
    if len(set(labels)) != len(labels):
        labels = [f"{i}:{lab}" for i, s in enumerate(spaces) for lab in s.labels]
    gens = _dedupe(gens, "~")
    rows, m1, shift = [], 0, 0
    for s in spaces:
        rows.extend(row << shift for row in s.rows)
        m1 |= s.minus_one << shift
        shift += s.rank
    return FiniteSpace(tuple(gens), m1, tuple(labels), tuple(rows))


def group_extension(base: FiniteSpace, d: int, names=None) -> FiniteSpace:
    """``(X, G) = (base) x H`` with ``|H| = 2^d``: every base point extended by
    every sign pattern on the ``d`` new generators."""
    if d < 1:
        raise InvalidSpace("extension rank must be at least 1")
    if names is None:
        names = [f"t{j + 1}" for j in range(d)]
    names = list(names)
    if len(names) != d:
        raise InvalidSpace(f"need {d} new generator names")
    gens = _dedupe(list(base.generators) + names, "~")
    r = base.rank
    labels, rows = [], []
    for lab, row in zip(base.labels, base.rows):
        for pattern in range(1 << d):
            suffix = "".join("-" if pattern >> j & 1 else "+" for j in range(d))
            labels.append(f"{lab}.{suffix}")
            rows.append(row | pattern << r)
    return FiniteSpace(tuple(gens), base.minus_one, tuple(labels), tuple(rows))


def make_fan(r: int) -> FiniteSpace:
    """The fan with group rank ``r``: all ``2^(r-1)`` characters sending
    ``-1`` to ``-1``."""
    if r < 1:
        raise InvalidSpace("fan rank must be at least 1")
    gens = ("-1",) + tuple(f"f{i}" for i in range(1, r))
    rows = tuple(1 | k << 1 for k in range(1 << (r - 1)))
    width = len(str(len(rows) - 1))
    labels = tuple(f"x{k:0{width}d}" for k in range(len(rows)))
    return FiniteSpace(gens, 1, labels, rows)


# -- fans and connectivity -----------------------------------------------------


def _is_fan_subset(space: FiniteSpace, idx) -> bool:
    rows = [space.rows[k] for k in idx]
    if (1 << gf2.rank(rows)) != 2 * len(idx):
        return False
    sub = subspace_generated(space, idx).space
    return sub.size == len(idx)


def four_fans(space: FiniteSpace) -> list:
    """All 4-element fans: quadruples of points whose character product is
    trivial, each confirmed to have ``|G|_F| = 8`` and to be a subspace.
    Each fan is a label tuple sorted by label; the list is sorted."""
    n = space.size
    rows = space.rows
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            rij = rows[i] ^ rows[j]
            for k in range(j + 1, n):
                l = space.point_with_row(rij ^ rows[k])
                if l is None or l <= k:
                    continue
                quad = (i, j, k, l)
                if _is_fan_subset(space, quad):
                    out.append(tuple(sorted(space.labels[q] for q in quad)))
    return sorted(out)


def components(space: FiniteSpace) -> list:
    """Connected components: classes of the transitive closure of lying in a
    common 4-element fan.  Each class sorted by label, classes sorted."""
    parent = {lab: lab for lab in space.labels}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for fan in four_fans(space):
        root = find(fan[0])
        for lab in fan[1:]:
            parent[find(lab)] = root
    classes = {}
    for lab in space.labels:
        classes.setdefault(find(lab), []).append(lab)
    return sorted(sorted(c) for c in classes.values())


def fan_graph_dot(space: FiniteSpace, name: str = "fans") -> str:
    """DOT graph: nodes are points, edges join points sharing a 4-fan."""
    edges = set()
    for fan in four_fans(space):
        for a, b in combinations(fan, 2):
            edges.add((a, b))
    lines = [f"graph {name} {{"]
    for lab in sorted(space.labels):
        lines.append(f'  "{lab}";')
    for a, b in sorted(edges):
        lines.append(f'  "{a}" -- "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _affine_flats(space: FiniteSpace, idx):
    """Affine flats (sets closed under triple products) of the given points,
    grouped by dimension, as frozensets of rows."""
    rowset = {space.rows[k] for k in idx}
    level = {frozenset([r]) for r in rowset}
    out = [level]
    while True:
        nxt = set()
        for flat in level:
            x0 = next(iter(flat))
            for y in rowset - flat:
                shift = x0 ^ y
                grown = flat | {f ^ shift for f in flat}
                if grown <= rowset:
                    nxt.add(frozenset(grown))
        if not nxt:
            return out
        out.append(nxt)
        level = nxt


def fans(space: FiniteSpace, max_points: int = DEFAULT_STABILITY_CAP) -> list:
    """Every fan of ``space`` with at least 4 points, as sorted label
    tuples (largest first).  Searched inside each connected component."""
    found = []
    for comp in components(space):
        if len(comp) < 4:
            continue
        if len(comp) > max_points:
            raise CapExceeded(
                f"fan search in a component of {len(comp)} points exceeds the cap {max_points}",
                kind="stability",
            )
        idx = [space.index(lab) for lab in comp]
        for dim, flats in enumerate(_affine_flats(space, idx)):
            if dim < 2:
                continue
            for flat in flats:
                pidx = [space.point_with_row(r) for r in flat]
                if _is_fan_subset(space, pidx):
                    found.append(tuple(sorted(space.labels[k] for k in pidx)))
    return sorted(found, key=lambda f: (-len(f), f))


def stability_index(space: FiniteSpace, max_points: int = DEFAULT_STABILITY_CAP) -> int:
    """Largest ``s`` with a fan of ``2^s`` points.

    Fans with 4 or more points are connected, so they are searched per
    component; the cap applies to the largest component searched.
    """
    big = fans(space, max_points)
    if big:
        return len(big[0]).bit_length() - 1
    for i, j in combinations(range(space.size), 2):
        if _is_fan_subset(space, (i, j)):
            return 1
    return 0


# -- decomposition -------------------------------------------------------------


@dataclass(frozen=True)
class DecompositionTree:
    kind: str  # "leaf" | "sum" | "ext"
    children: tuple = ()
    d: int = 0
    label: str | None = None
    points: tuple = field(default=())

    def to_json(self) -> dict:
        if self.kind == "leaf":
            return {"kind": "leaf", "label": self.label}
        if self.kind == "sum":
            return {"kind": "sum", "children": [c.to_json() for c in self.children]}
        return {
            "kind": "ext",
            "d": self.d,
            "child": self.children[0].to_json(),
            "points": list(self.points),
        }

    @classmethod
    def from_json(cls, data) -> "DecompositionTree":
        kind = data["kind"]
        if kind == "leaf":
            return cls("leaf", label=data["label"], points=(data["label"],))
        if kind == "sum":
            kids = tuple(cls.from_json(c) for c in data["children"])
            pts = tuple(p for k in kids for p in k.points)
            return cls("sum", kids, points=pts)
        if kind == "ext":
            child = cls.from_json(data["child"])
            return cls("ext", (child,), d=int(data["d"]), points=tuple(data.get("points", ())))
        raise InvalidSpace(f"unknown tree node kind {kind!r}")

    def size(self) -> int:
        """Number of points the node stands for."""
        if self.kind == "leaf":
            return 1
        if self.kind == "sum":
            return sum(c.size() for c in self.children)
        return self.children[0].size() << self.d

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        if self.kind == "leaf":
            return f"{pad}leaf {self.label}"
        if self.kind == "sum":
            return "\n".join([f"{pad}sum"] + [c.render(indent + 1) for c in self.children])
        return f"{pad}ext d={self.d}\n" + self.children[0].render(indent + 1)


def _leaf(label):
    return DecompositionTree("leaf", label=label, points=(label,))


def decompose(space: FiniteSpace) -> DecompositionTree:
    """Structure-theorem decomposition into one-point spaces, sums and
    extensions.  A two-point space is always reported as ``ext(leaf, 1)``."""
    if space.size == 1:
        return _leaf(space.labels[0])
    if space.size == 2:
        first = min(space.labels)
        return DecompositionTree("ext", (_leaf(first),), d=1, points=tuple(sorted(space.labels)))
    comps = components(space)
    if len(comps) > 1:
        kids = tuple(decompose(restrict_to(space, c)) for c in comps)
        return DecompositionTree("sum", kids, points=tuple(p for c in comps for p in c))
    delta = translation_stabilizer(space)
    closed = set(delta)
    if not all((u ^ v) in closed for u in delta for v in delta):
        raise DecompositionError("translation set is not a group")
    if len(delta) == 1:
        raise DecompositionError(
            f"connected set of {space.size} points is neither a point nor a group extension"
        )
    d = len(delta).bit_length() - 1
    ann = gf2.annihilator(delta, space.rank)
    base = quotient_structure(space, ann).space
    child = decompose(base)
    if child.kind == "ext":
        child, d = child.children[0], d + child.d
    return DecompositionTree("ext", (child,), d=d, points=tuple(sorted(space.labels)))


def rebuild(tree: DecompositionTree) -> FiniteSpace:
    """Assemble the space a tree describes from one-point spaces."""
    counter = [0]

    def build(node):
        if node.kind == "leaf":
            return one_point(node.label, generator=f"u[{node.label}]")
        if node.kind == "sum":
            return direct_sum([build(c) for c in node.children])
        base = build(node.children[0])
        counter[0] += 1
        names = [f"t{counter[0]}_{j + 1}" for j in range(node.d)]
        return group_extension(base, node.d, names)

    return build(tree)


# -- isomorphism -----------------------------------------------------------


@dataclass(frozen=True)
class IsoResult:
    found: bool
    point_map: dict | None = None  # label in a -> label in b
    group_map: dict | None = None  # generator of b -> element of a (b o F)

    def __bool__(self):
        return self.found


def _quad_counts(space: FiniteSpace) -> list:
    n = space.size
    rows = space.rows
    counts = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            rij = rows[i] ^ rows[j]
            for k in range(j + 1, n):
                l = space.point_with_row(rij ^ rows[k])
                if l is not None and l > k:
                    for q in (i, j, k, l):
                        counts[q] += 1
    return counts


def is_isomorphic(a: FiniteSpace, b: FiniteSpace, max_points: int = DEFAULT_ISO_CAP) -> IsoResult:
    """Search for a bijection of points induced by a linear isomorphism of
    character groups.

    Points of ``a`` are processed along a basis of its character rows; once
    the images of a basis prefix are fixed, every point in their span has a
    forced image, which must be an unused point of ``b`` with the same
    invariant (number of trivial-product quadruples through it).
    """
    if max(a.size, b.size) > max_points:
        raise CapExceeded(f"isomorphism search beyond {max_points} points", kind="isomorphism")
    if a.size != b.size or a.rank != b.rank:
        return IsoResult(False)
    inv_a, inv_b = _quad_counts(a), _quad_counts(b)
    if sorted(inv_a) != sorted(inv_b):
        return IsoResult(False)
    freq = {}
    for v in inv_a:
        freq[v] = freq.get(v, 0) + 1
    order = sorted(range(a.size), key=lambda k: (freq[inv_a[k]], k))
    basis = gf2.Basis()
    bpts = [k for k in order if basis.add(a.rows[k])]
    combo = {}
    level = {}
    for k in range(a.size):
        c = basis.express(a.rows[k])
        combo[k] = c
        level.setdefault(c.bit_length() - 1, []).append(k)
    by_inv = {}
    for k, v in enumerate(inv_b):
        by_inv.setdefault(v, []).append(k)

    def image(k, imgs):
        c, out, i = combo[k], 0, 0
        while c:
            if c & 1:
                out ^= imgs[i]
            c >>= 1
            i += 1
        return out

    def search(depth, imgs, assign, used):
        if depth == len(bpts):
            return dict(assign)
        x = bpts[depth]
        # same label first, so that a space matched with itself gets the identity
        cands = sorted(by_inv[inv_a[x]], key=lambda y: (b.labels[y] != a.labels[x], y))
        for y in cands:
            if y in used:
                continue
            imgs.append(b.rows[y])
            added = []
            ok = True
            for k in level.get(depth, ()):
                yk = b.point_with_row(image(k, imgs))
                if yk is None or yk in used or inv_b[yk] != inv_a[k]:
                    ok = False
                    break
                assign[k] = yk
                used.add(yk)
                added.append(k)
            if ok:
                res = search(depth + 1, imgs, assign, used)
                if res is not None:
                    return res
            for k in added:
                used.discard(assign.pop(k))
            imgs.pop()
        return None

    found = search(0, [], {}, set())
    if found is None:
        return IsoResult(False)
    pmap = {a.labels[k]: b.labels[v] for k, v in found.items()}
    gmap = {g: pullback(b, 1 << i, a, pmap) for i, g in enumerate(b.generators)}
    return IsoResult(True, pmap, gmap)
