"""Logics of projections, commutants and Boolean domains.

A logic is represented through the unital *-algebra its generators span
(the finite-dimensional double commutant), stored as an orthonormal basis in
the Frobenius inner product together with a basis of its commutant.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DimensionError, NotAProjectionError
from .projmath import (
    Projection,
    _eps,
    commutator,
    commutes,
    identity,
    meet,
    null_basis,
    null_projection,
)

__all__ = [
    "Logic",
    "generate_logic",
    "algebra_basis",
    "commutant_basis",
    "logic_contains",
    "commutant_logic",
    "is_boolean",
    "is_boolean_subdomain",
    "boolean_domain",
    "boolean_domain_via_algebra",
    "spectral_projections",
]


def _family_dim(ps, dim=None) -> int:
    dims = {p.dim for p in ps}
    if dim is not None:
        dims.add(dim)
    if not dims:
        raise DimensionError("cannot infer the dimension of an empty family")
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def _orthonormalize(mats: np.ndarray, tol=None) -> np.ndarray:
    """Frobenius-orthonormal basis (k x d x d) of the span of a stack of matrices."""
    n, d, _ = mats.shape
    flat = mats.reshape(n, d * d)
    _, s, vh = np.linalg.svd(flat, full_matrices=False)
    cut = _eps(tol) * max(1.0, s[0] if s.size else 0.0)
    r = int(np.count_nonzero(s > cut))
    return vh[:r].reshape(r, d, d)


def algebra_basis(generators, dim=None, tol=None) -> np.ndarray:
    """Basis of the unital *-algebra generated by ``generators``.

    Left multiplication by generators (and their adjoints) is alternated with
    re-orthonormalization until the span stops growing; the span of all words
    is reached after at most d^2 rounds.
    """
    mats = [getattr(g, "matrix", g) for g in generators]
    d = dim if dim is not None else (mats[0].shape[0] if mats else None)
    if d is None:
        raise DimensionError("cannot infer the dimension of an empty family")
    gens = []
    for m in mats:
        gens.append(m)
        if np.linalg.norm(m - m.conj().T) > _eps(tol) * d:
            gens.append(m.conj().T)
    basis = _orthonormalize(np.array([np.eye(d, dtype=complex)] + mats), tol)
    while True:
        products = [g @ b for g in gens for b in basis]
        grown = _orthonormalize(np.concatenate([basis, np.array(products)]) if products else basis, tol)
        if len(grown) == len(basis):
            return grown
        basis = grown


def commutant_basis(mats, dim: int, tol=None) -> np.ndarray:
    """Basis of {X : GX = XG for every G}, from the kernel of the stacked maps."""
    eye = np.eye(dim)
    blocks = [np.kron(g, eye) - np.kron(eye, g.T) for g in mats]
    if not blocks:
        blocks = [np.zeros((1, dim * dim))]
    ker = null_basis(np.vstack(blocks), tol)
    return ker.T.reshape(-1, dim, dim)


def spectral_projections(h: np.ndarray, tol=None) -> list[Projection]:
    """Eigenprojections of a Hermitian matrix, grouping numerically equal eigenvalues."""
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    gap = max(_eps(tol), 1e-9) * scale * 10
    groups, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > gap:
            groups.append(Projection.from_basis(v[:, start:i], h.shape[0]))
            start = i
    return groups


@dataclass(frozen=True, eq=False)
class Logic:
    """The projection lattice P(A'') of the algebra generated by ``generators``."""

    dim: int
    generators: tuple
    algebra_basis: np.ndarray
    commutant_basis: np.ndarray

    @property
    def algebra_dim(self) -> int:
        return len(self.algebra_basis)

    @property
    def commutant_dim(self) -> int:
        return len(self.commutant_basis)

    def closure_residual(self) -> float:
        """How far products and adjoints of basis elements leave the span."""
        b = self.algebra_basis
        flat = b.reshape(len(b), -1)
        worst = 0.0
        for x in b:
            for y in list(b) + [np.eye(self.dim)]:
                for m in (x @ y, x.conj().T):
                    v = m.reshape(-1)
                    proj = flat.T @ (flat.conj() @ v)
                    worst = max(worst, float(np.linalg.norm(v - proj)))
        return worst

    def __contains__(self, p: Projection) -> bool:
        return logic_contains(self, p)

    def __repr__(self):
        return (
            f"Logic(dim={self.dim}, generators={len(self.generators)}, "
            f"algebra_dim={self.algebra_dim}, commutant_dim={self.commutant_dim})"
        )


def generate_logic(projections, dim=None, tol=None) -> Logic:
    ps = list(projections)
    for p in ps:
        if not isinstance(p, Projection):
            raise NotAProjectionError(f"expected a Projection, got {type(p).__name__}")
    d = _family_dim(ps, dim)
    mats = [p.matrix for p in ps]
    return Logic(
        dim=d,
        generators=tuple(ps),
        algebra_basis=algebra_basis(mats, d, tol),
        commutant_basis=commutant_basis(mats, d, tol),
    )


def _span_residual(basis: np.ndarray, m: np.ndarray) -> float:
    flat = basis.reshape(len(basis), -1)
    v = m.reshape(-1)
    return float(np.linalg.norm(v - flat.T @ (flat.conj() @ v)))


def logic_contains(logic: Logic, p: Projection, tol=None) -> bool:
    if p.dim != logic.dim:
        raise DimensionError(f"dimension mismatch: {logic.dim} vs {p.dim}")
    return _span_residual(logic.algebra_basis, p.matrix) <= _eps(tol) * logic.dim * 10


def commutant_logic(logic: Logic, tol=None) -> Logic:
    gens = []
    for x in logic.commutant_basis:
        for h in ((x + x.conj().T) / 2, (x - x.conj().T) / 2j):
            if np.linalg.norm(h) > _eps(tol):
                gens.extend(spectral_projections(h, tol))
    if not gens:
        gens = [identity(logic.dim)]
    return generate_logic(gens, logic.dim, tol)


def is_boolean(logic: Logic, tol=None) -> bool:
    b = logic.algebra_basis
    cut = _eps(tol) * logic.dim
    return all(np.linalg.norm(commutator(x, y)) <= cut for x, y in combinations(b, 2))


def is_boolean_subdomain(e: Projection, family, tol=None) -> bool:
    """E commutes with each member and the cut-downs P ^ E pairwise commute."""
    ps = list(family)
    _family_dim(ps + [e])
    if not all(commutes(e, p, tol) for p in ps):
        return False
    cut = [meet(p, e, tol) for p in ps]
    return all(commutes(a, b, tol) for a, b in combinations(cut, 2))


def boolean_domain(family, dim=None, tol=None) -> Projection:
    """Largest E making the family commute below E.

    Computed as the common kernel of [P_i, P_j] P_k over all triples, with the
    identity admitted as P_k (adjoining 1 to a family leaves its Boolean domain
    unchanged).  See :func:`boolean_domain_via_algebra` for the algebra-level
    formula.
    """
    ps = list(family)
    d = _family_dim(ps, dim)
    mats = [p.matrix for p in ps]
    blocks = []
    for i, j in combinations(range(len(mats)), 2):
        c = commutator(mats[i], mats[j])
        if np.linalg.norm(c) <= _eps(tol) * d:
            continue
        blocks.append(c)
        blocks.extend(c @ m for m in mats)
    if not blocks:
        return identity(d)
    return null_projection(np.vstack(blocks), tol)


def boolean_domain_via_algebra(family, dim=None, tol=None) -> Projection:
    """Common kernel of [A, B] for A, B ranging over a basis of the generated algebra."""
    ps = list(family)
    d = _family_dim(ps, dim)
    basis = algebra_basis([p.matrix for p in ps], d, tol)
    blocks = [commutator(a, b) for a, b in combinations(basis, 2)]
    if not blocks:
        return identity(d)
    return null_projection(np.vstack(blocks), tol)
