"""Projections on a finite-dimensional complex Hilbert space and their lattice.

A :class:`Projection` is an immutable wrapper around a Hermitian idempotent
matrix.  Every lattice operation returns a freshly canonicalized projection
(symmetrized, eigenvalues snapped to {0, 1}) so tolerance errors do not
accumulate through deep compositions.

>>> import numpy as np
>>> P = Projection(np.diag([1.0, 0.0]))
>>> Q = projection_from_span([np.array([1.0, 1.0]) / np.sqrt(2)])
>>> meet(P, Q).rank, join(P, Q).rank
(0, 2)
>>> sasaki_imply(P, Q).allclose(complement(P))
True
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DimensionError, NotAProjectionError

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "Projection",
    "StateVector",
    "identity",
    "zero",
    "projection_from_span",
    "meet",
    "meet_all",
    "join",
    "join_all",
    "complement",
    "leq",
    "commutes",
    "commutator",
    "sasaki_imply",
    "kotas_imply2",
    "kotas_imply3",
    "titani_kozawa_imply",
    "CONNECTIVES",
    "get_connective",
    "logical_equiv",
    "range_projection",
    "null_projection",
    "null_basis",
    "meet_by_iteration",
]


@dataclass(frozen=True)
class Tolerance:
    """Singular-value threshold used for every rank decision and comparison."""

    eps: float = 1e-9

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"tolerance must be positive, got {self.eps!r}")


DEFAULT_TOL = Tolerance()


def _eps(tol) -> float:
    if tol is None:
        return DEFAULT_TOL.eps
    if isinstance(tol, Tolerance):
        return tol.eps
    return Tolerance(float(tol)).eps


def _canonical(matrix: np.ndarray) -> np.ndarray:
    h = (matrix + matrix.conj().T) / 2
    w, v = np.linalg.eigh(h)
    v = v[:, w > 0.5]
    return v @ v.conj().T


class Projection:
    """Orthogonal projection onto a subspace of C^d.

    The constructor validates its input; lattice operations build results
    through :meth:`_trusted` and skip validation.
    """

    __slots__ = ("matrix", "dim", "_rank")

    def __init__(self, matrix, tol=None, canonicalize=True):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionError(f"projection needs a square matrix, got shape {m.shape}")
        d = m.shape[0]
        eps = _eps(tol)
        if np.linalg.norm(m - m.conj().T) > eps * d:
            raise NotAProjectionError("matrix is not Hermitian")
        if np.linalg.norm(m @ m - m) > eps * d:
            raise NotAProjectionError("matrix is not idempotent")
        if canonicalize:
            m = _canonical(m)
        self._init(m)

    def _init(self, m):
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim", m.shape[0])
        object.__setattr__(self, "_rank", None)

    @classmethod
    def _trusted(cls, matrix, canonicalize=True):
        p = cls.__new__(cls)
        p._init(_canonical(matrix) if canonicalize else np.array(matrix, dtype=complex))
        return p

    @classmethod
    def from_basis(cls, basis: np.ndarray, dim: int) -> "Projection":
        """Projection V V* for a d x k matrix V with orthonormal columns."""
        if basis.size == 0:
            return cls._trusted(np.zeros((dim, dim), dtype=complex), canonicalize=False)
        return cls._trusted(basis @ basis.conj().T)

    def __setattr__(self, name, value):
        raise AttributeError("Projection is immutable")

    @property
    def rank(self) -> int:
        if self._rank is None:
            object.__setattr__(self, "_rank", int(round(np.trace(self.matrix).real)))
        return self._rank

    def is_zero(self, tol=None) -> bool:
        return bool(np.linalg.norm(self.matrix) <= _eps(tol) * self.dim)

    def is_one(self, tol=None) -> bool:
        return bool(np.linalg.norm(self.matrix - np.eye(self.dim)) <= _eps(tol) * self.dim)

    def allclose(self, other: "Projection", tol=None) -> bool:
        _check_dims(self, other)
        return bool(np.linalg.norm(self.matrix - other.matrix) <= _eps(tol) * self.dim)

    def distance(self, other: "Projection") -> float:
        """Frobenius distance between the two matrices."""
        _check_dims(self, other)
        return float(np.linalg.norm(self.matrix - other.matrix))

    def range_basis(self) -> np.ndarray:
        w, v = np.linalg.eigh(self.matrix)
        return v[:, w > 0.5]

    def apply(self, vector) -> np.ndarray:
        return self.matrix @ np.asarray(vector, dtype=complex)

    def __and__(self, other):
        return meet(self, other)

    def __or__(self, other):
        return join(self, other)

    def __invert__(self):
        return complement(self)

    def __le__(self, other):
        return leq(self, other)

    def __ge__(self, other):
        return leq(other, self)

    def __repr__(self):
        return f"Projection(dim={self.dim}, rank={self.rank})"


class StateVector:
    """Unit vector of C^d."""

    __slots__ = ("components", "dim")

    def __init__(self, components, tol=None):
        v = np.array(components, dtype=complex).reshape(-1)
        if v.size == 0:
            raise DimensionError("state vector must be nonempty")
        if abs(np.linalg.norm(v) - 1.0) > max(_eps(tol), 1e-9) * 10:
            raise ValueError(f"state vector is not normalized (norm {np.linalg.norm(v):.3g})")
        v.flags.writeable = False
        object.__setattr__(self, "components", v)
        object.__setattr__(self, "dim", v.size)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @classmethod
    def normalized(cls, components) -> "StateVector":
        v = np.asarray(components, dtype=complex).reshape(-1)
        return cls(v / np.linalg.norm(v))

    def __repr__(self):
        return f"StateVector(dim={self.dim})"


def _check_dims(*ps):
    dims = {p.dim for p in ps}
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")


def identity(dim: int) -> Projection:
    return Projection._trusted(np.eye(dim, dtype=complex), canonicalize=False)


def zero(dim: int) -> Projection:
    return Projection._trusted(np.zeros((dim, dim), dtype=complex), canonicalize=False)


def null_basis(matrix, tol=None) -> np.ndarray:
    """Orthonormal basis (as columns) of the kernel of ``matrix``.

    Singular values below ``eps * max(1, largest)`` count as zero.  The floor of
    one keeps pure round-off (for instance a commutator of commuting
    projections) from being promoted to full rank.
    """
    a = np.atleast_2d(np.asarray(matrix, dtype=complex))
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    cut = _eps(tol) * max(1.0, s[0] if s.size else 0.0)
    r = int(np.count_nonzero(s > cut))
    return vh[r:].conj().T


def _range_basis(matrix, tol=None) -> np.ndarray:
    a = np.atleast_2d(np.asarray(matrix, dtype=complex))
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    cut = _eps(tol) * max(1.0, s[0] if s.size else 0.0)
    r = int(np.count_nonzero(s > cut))
    return u[:, :r]


def projection_from_span(vectors: Iterable, dim: int | None = None, tol=None) -> Projection:
    """Projection onto the span of ``vectors``; ``dim`` is required when empty."""
    vs = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    if not vs:
        if dim is None:
            raise DimensionError("empty span needs an explicit dimension")
        return zero(dim)
    sizes = {v.size for v in vs}
    if dim is not None:
        sizes.add(dim)
    if len(sizes) != 1:
        raise DimensionError(f"vectors of mixed dimension: {sorted(sizes)}")
    d = sizes.pop()
    return Projection.from_basis(_range_basis(np.column_stack(vs), tol), d)


def range_projection(matrix, tol=None) -> Projection:
    """Projection onto the (closure of the) range of an arbitrary square matrix."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"need a square matrix, got shape {a.shape}")
    return Projection.from_basis(_range_basis(a, tol), a.shape[0])


def null_projection(matrix, tol=None) -> Projection:
    """Projection onto the kernel; equals the complement of range_projection(A*)."""
    a = np.atleast_2d(np.asarray(matrix, dtype=complex))
    return Projection.from_basis(null_basis(a, tol), a.shape[1])


def complement(p: Projection) -> Projection:
    return Projection._trusted(np.eye(p.dim) - p.matrix, canonicalize=False)


def meet_all(ps: Sequence[Projection], dim: int | None = None, tol=None) -> Projection:
    """Infimum of a finite family: the kernel of the sum of the complements."""
    ps = list(ps)
    if not ps:
        if dim is None:
            raise DimensionError("empty meet needs an explicit dimension")
        return identity(dim)
    _check_dims(*ps)
    d = ps[0].dim
    if len(ps) == 1:
        return ps[0]
    s = len(ps) * np.eye(d) - sum(p.matrix for p in ps)
    w, v = np.linalg.eigh((s + s.conj().T) / 2)
    cut = _eps(tol) * max(1.0, float(w[-1]))
    return Projection.from_basis(v[:, w <= cut], d)


def meet(p: Projection, q: Projection, tol=None) -> Projection:
    return meet_all([p, q], tol=tol)


def join_all(ps: Sequence[Projection], dim: int | None = None, tol=None) -> Projection:
    ps = list(ps)
    if not ps:
        if dim is None:
            raise DimensionError("empty join needs an explicit dimension")
        return zero(dim)
    return complement(meet_all([complement(p) for p in ps], tol=tol))


def join(p: Projection, q: Projection, tol=None) -> Projection:
    return join_all([p, q], tol=tol)


def leq(p: Projection, q: Projection, tol=None) -> bool:
    """Subspace containment R(P) <= R(Q), decided by ||QP - P||_F."""
    _check_dims(p, q)
    return bool(np.linalg.norm(q.matrix @ p.matrix - p.matrix) <= _eps(tol) * p.dim)


def commutator(a, b) -> np.ndarray:
    a = getattr(a, "matrix", a)
    b = getattr(b, "matrix", b)
    return a @ b - b @ a


def commutes(p: Projection, q: Projection, tol=None) -> bool:
    _check_dims(p, q)
    return bool(np.linalg.norm(commutator(p, q)) <= _eps(tol) * p.dim)


def sasaki_imply(p: Projection, q: Projection, tol=None) -> Projection:
    return join(complement(p), meet(p, q, tol), tol)


def kotas_imply2(p: Projection, q: Projection, tol=None) -> Projection:
    return join(complement(join(p, q, tol)), q, tol)


def kotas_imply3(p: Projection, q: Projection, tol=None) -> Projection:
    pc, qc = complement(p), complement(q)
    return join_all([meet(p, q, tol), meet(pc, q, tol), meet(pc, qc, tol)], tol=tol)


def titani_kozawa_imply(p: Projection, q: Projection, tol=None) -> Projection:
    """Two-valued arrow: 1 when P <= Q, else 0.  Kept only to exhibit its failure of (LB)."""
    return identity(p.dim) if leq(p, q, tol) else zero(p.dim)


Connective = Callable[..., Projection]

CONNECTIVES: dict[str, Connective] = {
    "sasaki": sasaki_imply,
    "kotas2": kotas_imply2,
    "kotas3": kotas_imply3,
}


def get_connective(name: str) -> Connective:
    try:
        return CONNECTIVES[name]
    except KeyError:
        raise ValueError(
            f"unknown connective {name!r}; choose one of {', '.join(CONNECTIVES)}"
        ) from None


def logical_equiv(p: Projection, q: Projection, connective="sasaki", tol=None) -> Projection:
    imply = get_connective(connective) if isinstance(connective, str) else connective
    return meet(imply(p, q, tol), imply(q, p, tol), tol)


def meet_by_iteration(p: Projection, q: Projection, steps: int = 4096) -> np.ndarray:
    """The limit (PQP)^n for large n; only used to validate :func:`meet`."""
    _check_dims(p, q)
    m = p.matrix @ q.matrix @ p.matrix
    return reduce(lambda acc, _: acc @ acc, range(max(1, int(np.log2(steps)))), m)
