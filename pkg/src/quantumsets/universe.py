"""Hash-consed quantum sets: the finite-rank fragment of V^(Q).

A :class:`QSet` maps child QSets to projections.  Nodes are interned: two
constructions with the same children and (numerically) the same entry
projections return the very same object, so node identity can serve as a
memoization key.
"""

from __future__ import annotations

import threading
import weakref
from fractions import Fraction
from itertools import count

import numpy as np

from .errors import DimensionError, NotAProjectionError
from .logic import boolean_domain
from .projmath import Projection, identity, join, meet

__all__ = [
    "QSet",
    "make_qset",
    "empty",
    "support",
    "check_embed",
    "hf",
    "rational_hf",
    "restrict",
    "qset_boolean_domain",
]

_KEY_DECIMALS = 10


def _projection_key(p: Projection) -> bytes:
    m = np.round(p.matrix, _KEY_DECIMALS) + 0.0
    return m.tobytes()


class QSet:
    """A node of V^(Q) with finite domain.

    Do not call the constructor directly; use :func:`make_qset`.
    """

    __slots__ = ("entries", "dim", "rank", "uid", "classical", "_support", "__weakref__")

    def __repr__(self):
        return f"QSet#{self.uid}(rank={self.rank}, size={len(self.entries)})"

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def children(self):
        return [c for c, _ in self.entries]

    def value(self, child: "QSet") -> Projection | None:
        for c, p in self.entries:
            if c is child:
                return p
        return None


_table: "weakref.WeakValueDictionary[tuple, QSet]" = weakref.WeakValueDictionary()
_lock = threading.Lock()
_uids = count()


def make_qset(entries, dim: int | None = None) -> QSet:
    """Intern the node with the given ``(child, projection)`` entries.

    ``entries`` may be a mapping or an iterable of pairs.  A child listed twice
    gets the join of its values.
    """
    pairs = list(entries.items()) if hasattr(entries, "items") else list(entries)
    dims = set() if dim is None else {dim}
    merged: dict[int, tuple[QSet, Projection]] = {}
    for child, p in pairs:
        if not isinstance(child, QSet):
            raise TypeError(f"child must be a QSet, got {type(child).__name__}")
        if not isinstance(p, Projection):
            raise NotAProjectionError(f"entry value must be a Projection, got {type(p).__name__}")
        dims.update((p.dim, child.dim) if child.dim is not None else (p.dim,))
        if child.uid in merged:
            merged[child.uid] = (child, join(merged[child.uid][1], p))
        else:
            merged[child.uid] = (child, p)
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    d = dims.pop() if dims and merged else None
    ordered = tuple(merged[k] for k in sorted(merged))
    key = (d, tuple((c.uid, _projection_key(p)) for c, p in ordered))
    with _lock:
        node = _table.get(key)
        if node is None:
            node = QSet.__new__(QSet)
            node.entries = ordered
            node.dim = d
            node.rank = 1 + max((c.rank for c, _ in ordered), default=-1)
            node.uid = next(_uids)
            node.classical = all(c.classical and p.is_one() for c, p in ordered)
            node._support = None
            _table[key] = node
    return node


def empty() -> QSet:
    """The empty set, shared by every dimension (its ``dim`` is None)."""
    return make_qset(())


def support(u: QSet) -> tuple[Projection, ...]:
    """L(u): every entry projection occurring anywhere below ``u``, without repeats."""
    if u._support is None:
        found: list[Projection] = []
        keys: set[bytes] = set()

        def add(p):
            k = _projection_key(p)
            if k not in keys:
                keys.add(k)
                found.append(p)

        for child, p in u.entries:
            for q in support(child):
                add(q)
            add(p)
        u._support = tuple(found)
    return u._support


def hf(*members) -> frozenset:
    """Build a hereditarily finite set: ``hf()`` is the empty set, ``hf(hf())`` is {0}."""
    return frozenset(members)


def _hf_from_int(n: int) -> frozenset:
    # Ackermann coding: n = sum of 2**i over the codes i of the members
    return frozenset(_hf_from_int(i) for i in range(n.bit_length()) if n >> i & 1)


def rational_hf(r) -> frozenset:
    """Injective coding of a rational as a hereditarily finite set.

    The reduced fraction p/q becomes the Kuratowski pair of the zig-zag code of
    p and the Ackermann code of q.
    """
    r = Fraction(r)
    p, q = r.numerator, r.denominator
    a = _hf_from_int(2 * p if p >= 0 else -2 * p - 1)
    b = _hf_from_int(q)
    return frozenset({frozenset({a}), frozenset({a, b})})


def check_embed(v, dim: int) -> QSet:
    """The canonical copy of a hereditarily finite set, every entry equal to 1."""
    one = identity(dim)
    memo: dict[frozenset, QSet] = {}

    def go(s):
        if not isinstance(s, frozenset):
            raise TypeError(f"hereditarily finite sets are frozensets, got {type(s).__name__}")
        if s not in memo:
            memo[s] = make_qset([(go(m), one) for m in s], dim)
        return memo[s]

    return go(v)


def restrict(u: QSet, p: Projection) -> QSet:
    """u|p: restrict every entry, recursively, by meeting it with ``p``."""
    if u.dim is not None and u.dim != p.dim:
        raise DimensionError(f"dimension mismatch: {u.dim} vs {p.dim}")
    memo: dict[int, QSet] = {}

    def go(x):
        if x.uid not in memo:
            memo[x.uid] = make_qset([(go(c), meet(q, p)) for c, q in x.entries], p.dim)
        return memo[x.uid]

    return go(u)


def qset_boolean_domain(us, dim: int | None = None) -> Projection:
    """Boolean domain of the union of the supports of a QSet family."""
    us = list(us)
    dims = {u.dim for u in us if u.dim is not None}
    if dim is not None:
        dims.add(dim)
    if len(dims) != 1:
        raise DimensionError(f"cannot determine a single dimension from {sorted(dims)}")
    d = dims.pop()
    family = []
    keys = set()
    for u in us:
        for q in support(u):
            k = _projection_key(q)
            if k not in keys:
                keys.add(k)
                family.append(q)
    if not family:
        return identity(d)
    return boolean_domain(family, d)
