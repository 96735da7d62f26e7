"""Linear algebra over the two-element field on Python int bit vectors."""

from __future__ import annotations


def parity(v: int) -> int:
    return v.bit_count() & 1


def bits_to_int(bits) -> int:
    out = 0
    for i, b in enumerate(bits):
        if b not in (0, 1, True, False):
            raise ValueError(f"bit vector entries must be 0 or 1, got {b!r}")
        if b:
            out |= 1 << i
    return out


def int_to_bits(v: int, n: int) -> list:
    return [(v >> i) & 1 for i in range(n)]


class Basis:
    """Incrementally built echelon basis that remembers how each reduced
    vector was combined from the inserted ones.

    ``add`` returns True when the vector was independent.  ``express`` gives
    the combination (bit ``i`` = ``i``-th inserted independent vector) that
    produces a target, or ``None`` when it is outside the span.
    """

    def __init__(self):
        self._rows = {}  # pivot bit -> (reduced vector, combination mask)
        self.vectors = []

    def __len__(self):
        return len(self.vectors)

    def _reduce(self, v: int):
        combo = 0
        while v:
            top = v.bit_length() - 1
            row = self._rows.get(top)
            if row is None:
                break
            v ^= row[0]
            combo ^= row[1]
        return v, combo

    def add(self, v: int) -> bool:
        r, combo = self._reduce(v)
        if not r:
            return False
        idx = len(self.vectors)
        self.vectors.append(v)
        self._rows[r.bit_length() - 1] = (r, combo | (1 << idx))
        return True

    def contains(self, v: int) -> bool:
        return self._reduce(v)[0] == 0

    def express(self, v: int):
        r, combo = self._reduce(v)
        return None if r else combo


def rank(vectors) -> int:
    b = Basis()
    for v in vectors:
        b.add(v)
    return len(b)


def independent_subset(vectors) -> list:
    """Indices of a greedily chosen maximal independent subset."""
    b = Basis()
    return [i for i, v in enumerate(vectors) if b.add(v)]


def solve(rows, rhs, nvars: int):
    """Find ``a`` (bit mask over ``nvars``) with ``parity(a & rows[k]) == rhs[k]``.

    Returns ``None`` when the system is inconsistent.  When the system is
    underdetermined the free variables are set to zero.
    """
    aug = []
    for row, b in zip(rows, rhs):
        aug.append(row | ((b & 1) << nvars))
    pivots = []
    for col in range(nvars):
        bit = 1 << col
        piv = next((k for k in range(len(pivots), len(aug)) if aug[k] & bit), None)
        if piv is None:
            continue
        r = len(pivots)
        aug[r], aug[piv] = aug[piv], aug[r]
        for k in range(len(aug)):
            if k != r and aug[k] & bit:
                aug[k] ^= aug[r]
        pivots.append(col)
    mask = (1 << nvars) - 1
    for k in range(len(pivots), len(aug)):
        if aug[k] & ~mask:
            return None
    a = 0
    for r, col in enumerate(pivots):
        if aug[r] >> nvars & 1:
            a |= 1 << col
    return a


def annihilator(vectors, nbits: int) -> list:
    """Basis of ``{a : parity(a & v) == 0 for every v}`` inside ``F2^nbits``."""
    vecs = list(vectors)
    # solve the homogeneous system by elimination and read off the null space
    pivrows = {}
    for v in vecs:
        for col, row in pivrows.items():
            if v >> col & 1:
                v ^= row
        if not v:
            continue
        col = v.bit_length() - 1
        for c in list(pivrows):
            if pivrows[c] >> col & 1:
                pivrows[c] ^= v
        pivrows[col] = v
    free = [c for c in range(nbits) if c not in pivrows]
    out = []
    for f in free:
        a = 1 << f
        for col, row in pivrows.items():
            if row >> f & 1:
                a |= 1 << col
        out.append(a)
    return out


def span(vectors) -> list:
    """All ``2^k`` combinations of ``vectors``; entry ``i`` combines the
    vectors selected by the bits of ``i``."""
    out = [0]
    for v in vectors:
        out += [w ^ v for w in out]
    return out
