"""Quantum reals on a finite rational grid and their correspondence with observables.

A :class:`QReal` is a ladder ``r -> u(r)`` of projections over a finite,
strictly increasing grid of rationals, nondecreasing in ``r``, starting at 0
and ending at 1.  A Hermitian matrix ``A`` corresponds to the ladder of its
spectral projections ``E^A(r)`` and is recovered from the jumps of the ladder.

>>> import numpy as np
>>> z = Observable(np.diag([1.0, -1.0]))
>>> u = to_qreal(z, RationalGrid.of(-2, -1, 0, 1))
>>> [p.rank for p in u.ladder]
[0, 1, 1, 2]
>>> np.allclose(to_operator(u).matrix, z.matrix)
True
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .errors import ConsistencyError, DimensionError, QuantumSetError
from .logic import boolean_domain
from .projmath import (
    Projection,
    StateVector,
    _eps,
    commutator,
    commutes,
    complement,
    get_connective,
    identity,
    leq,
    logical_equiv,
    meet,
    meet_all,
    null_projection,
    zero,
)
from .universe import QSet, check_embed, make_qset, rational_hf

__all__ = [
    "RationalGrid",
    "Interval",
    "QReal",
    "Observable",
    "NoncommutingError",
    "adequate_grid",
    "snap_rational",
    "scalar",
    "to_qreal",
    "to_operator",
    "eq_value",
    "le_value",
    "lt_value",
    "in_interval_value",
    "observable_in_interval",
    "pair_boolean_domain",
    "reals_boolean_domain",
    "prob",
    "joint_prob",
    "CorrelationReport",
    "perfectly_correlated",
    "apply_function",
    "as_qset",
]


class NoncommutingError(QuantumSetError, ValueError):
    pass


def _frac(r) -> Fraction:
    if isinstance(r, float):
        return Fraction(r)
    return Fraction(r)


@dataclass(frozen=True)
class RationalGrid:
    points: tuple

    def __post_init__(self):
        pts = tuple(_frac(r) for r in self.points)
        if len(pts) < 2:
            raise ValueError("a grid needs at least two points")
        if any(a >= b for a, b in zip(pts, pts[1:])):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, *points) -> "RationalGrid":
        return cls(tuple(points))

    @classmethod
    def covering(cls, points) -> "RationalGrid":
        """Sorted, de-duplicated grid from arbitrary rationals."""
        return cls(tuple(sorted({_frac(r) for r in points})))

    def merge(self, *others: "RationalGrid") -> "RationalGrid":
        pts = set(self.points)
        for g in others:
            pts.update(g.points)
        return RationalGrid(tuple(sorted(pts)))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class Interval:
    """Half-open interval (a, b]."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        a, b = _frac(self.a), _frac(self.b)
        if not a < b:
            raise ValueError(f"interval needs a < b, got ({a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __contains__(self, x) -> bool:
        return self.a < x <= self.b


def _snap(x: float) -> float:
    return 1e-9 * max(1.0, abs(x))


class Observable:
    """Hermitian matrix with its spectral atoms (distinct eigenvalue, eigenprojection)."""

    def __init__(self, matrix, tol=None, quantized: bool = False):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"observable needs a square matrix, got shape {m.shape}")
        d = m.shape[0]
        if np.linalg.norm(m - m.conj().T) > _eps(tol) * d * max(1.0, np.linalg.norm(m)):
            raise ValueError("observable matrix is not Hermitian")
        m = (m + m.conj().T) / 2
        m.flags.writeable = False
        self.matrix = m
        self.dim = d
        self.quantized = quantized
        w, v = np.linalg.eigh(m)
        atoms, start = [], 0
        for i in range(1, d + 1):
            if i == d or w[i] - w[i - 1] > _snap(w[i]):
                block = w[start:i]
                atoms.append((float(np.mean(block)), Projection.from_basis(v[:, start:i], d)))
                start = i
        self.atoms: tuple[tuple[float, Projection], ...] = tuple(atoms)

    @property
    def eigenvalues(self) -> list[float]:
        return [lam for lam, _ in self.atoms]

    def spectral_projection(self, r) -> Projection:
        """E^A(r): sum of the eigenprojections with eigenvalue <= r."""
        x = float(r)
        mats = [p.matrix for lam, p in self.atoms if lam <= x + _snap(lam)]
        if not mats:
            return zero(self.dim)
        return Projection._trusted(sum(mats))

    def interval_projection(self, interval: Interval) -> Projection:
        a, b = float(interval.a), float(interval.b)
        mats = [
            p.matrix for lam, p in self.atoms if a + _snap(lam) < lam <= b + _snap(lam)
        ]
        if not mats:
            return zero(self.dim)
        return Projection._trusted(sum(mats))

    def __repr__(self):
        vals = ", ".join(f"{lam:.6g}" for lam in self.eigenvalues)
        return f"Observable(dim={self.dim}, spectrum=[{vals}])"


class QReal:
    """Monotone projection ladder over a rational grid."""

    __slots__ = ("grid", "ladder", "quantized")

    def __init__(self, grid: RationalGrid, ladder: Sequence[Projection], tol=None, quantized=False):
        if not isinstance(grid, RationalGrid):
            grid = RationalGrid(tuple(grid))
        ladder = tuple(ladder)
        if len(ladder) != len(grid):
            raise ValueError(f"{len(grid)} grid points but {len(ladder)} ladder entries")
        dims = {p.dim for p in ladder}
        if len(dims) != 1:
            raise DimensionError(f"ladder mixes dimensions {sorted(dims)}")
        if not ladder[0].is_zero(tol):
            raise ValueError("ladder must start at 0: the grid does not reach below the spectrum")
        if not ladder[-1].is_one(tol):
            raise ValueError("ladder must end at 1: the grid does not reach the top of the spectrum")
        for lo, hi in zip(ladder, ladder[1:]):
            if not leq(lo, hi, tol):
                raise ValueError("ladder is not monotone")
        for p, q in combinations(ladder, 2):
            if not commutes(p, q, tol):
                raise ValueError("ladder projections do not commute")
        self.grid = grid
        self.ladder = ladder
        self.quantized = quantized

    @property
    def dim(self) -> int:
        return self.ladder[0].dim

    def value_at(self, r) -> Projection:
        """u(r), extended off the grid as a right-continuous step function."""
        r = _frac(r)
        pts = self.grid.points
        if r < pts[0]:
            return zero(self.dim)
        idx = max(i for i, x in enumerate(pts) if x <= r)
        return self.ladder[idx]

    def refine(self, grid: RationalGrid) -> "QReal":
        return QReal(grid, [self.value_at(r) for r in grid], quantized=self.quantized)

    def __repr__(self):
        return f"QReal(dim={self.dim}, grid={[str(r) for r in self.grid]})"


def snap_rational(x: float, max_denominator: int = 10**6) -> Fraction:
    """Nearest simple rational when within tolerance of ``x``, else ``x`` exactly."""
    r = Fraction(x).limit_denominator(max_denominator)
    return r if abs(float(r) - x) <= _snap(x) else Fraction(x)


def adequate_grid(a: Observable, *extra) -> RationalGrid:
    """Grid holding every (snapped) eigenvalue, padded by one unit below the spectrum."""
    lams = a.eigenvalues
    pts = {snap_rational(lam) for lam in lams}
    pts.add(Fraction(np.floor(min(lams))) - 1)
    pts.update(_frac(r) for r in extra)
    return RationalGrid.covering(pts)


def to_qreal(a: Observable, grid: RationalGrid | None = None) -> QReal:
    """Ladder of spectral projections E^A(r) over ``grid``."""
    if not isinstance(a, Observable):
        a = Observable(a)
    grid = adequate_grid(a) if grid is None else grid
    lo, hi = float(grid.points[0]), float(grid.points[-1])
    lams = a.eigenvalues
    if not lo < lams[0] - _snap(lams[0]) or lams[-1] > hi + _snap(lams[-1]):
        raise ValueError(
            f"grid [{grid.points[0]}, {grid.points[-1]}] does not span the spectrum "
            f"[{lams[0]:.6g}, {lams[-1]:.6g}]"
        )
    on_grid = all(any(abs(lam - float(r)) <= _snap(lam) for r in grid) for lam in lams)
    ladder = [a.spectral_projection(r) for r in grid]
    return QReal(grid, ladder, quantized=not on_grid)


def to_operator(u: QReal) -> Observable:
    """Operator sum_i r_i (u(r_i) - u(r_{i-1})) rebuilt from the jumps of the ladder."""
    m = np.zeros((u.dim, u.dim), dtype=complex)
    prev = np.zeros_like(m)
    for r, p in zip(u.grid, u.ladder):
        m += float(r) * (p.matrix - prev)
        prev = p.matrix
    return Observable(m, quantized=u.quantized)


def scalar(a, dim: int, grid: RationalGrid | None = None) -> QReal:
    """The real corresponding to the scalar operator a*1."""
    a = _frac(a)
    grid = RationalGrid.of(a - 1, a) if grid is None else grid
    if not grid.points[0] < a <= grid.points[-1]:
        raise ValueError(f"grid does not span the scalar {a}")
    return QReal(grid, [identity(dim) if a <= r else zero(dim) for r in grid])


def _common(u: QReal, v: QReal):
    if u.dim != v.dim:
        raise DimensionError(f"dimension mismatch: {u.dim} vs {v.dim}")
    g = u.grid.merge(v.grid)
    return g, [u.value_at(r) for r in g], [v.value_at(r) for r in g]


def eq_value(u: QReal, v: QReal, connective="sasaki") -> Projection:
    """[[u = v]]: the meet over the merged grid of u(r) <=> v(r)."""
    _, us, vs = _common(u, v)
    return meet_all([logical_equiv(p, q, connective) for p, q in zip(us, vs)])


def le_value(u: QReal, v: QReal, connective="sasaki") -> Projection:
    """[[u <= v]], that is [[v subset u]]: the meet of v(r) => u(r)."""
    imply = get_connective(connective)
    _, us, vs = _common(u, v)
    return meet_all([imply(q, p) for p, q in zip(us, vs)])


def lt_value(u: QReal, v: QReal, connective="sasaki") -> Projection:
    return meet(le_value(u, v, connective), complement(eq_value(u, v, connective)))


def in_interval_value(u: QReal, interval: Interval, connective="sasaki") -> Projection:
    """[[a~ < u]] /\\ [[u <= b~]] for the interval (a, b]."""
    lower = scalar(interval.a, u.dim)
    upper = scalar(interval.b, u.dim)
    return meet(lt_value(lower, u, connective), le_value(u, upper, connective))


def observable_in_interval(a: Observable, interval: Interval, connective="sasaki") -> Projection:
    """Truth value of "A lies in (a, b]" on a grid adequate for A and both endpoints."""
    u = to_qreal(a, adequate_grid(a, interval.a, interval.b))
    return in_interval_value(u, interval, connective)


def _ladder_boolean_domain(ladders, dim) -> Projection:
    blocks = []
    for xs, ys in combinations(ladders, 2):
        for p in xs:
            for q in ys:
                c = commutator(p, q)
                if np.linalg.norm(c) > 1e-12:
                    blocks.append(c)
    if not blocks:
        return identity(dim)
    return null_projection(np.vstack(blocks))


def pair_boolean_domain(u: QReal, v: QReal) -> Projection:
    """Common kernel of the commutators [u(x), v(y)] over both grids."""
    if u.dim != v.dim:
        raise DimensionError(f"dimension mismatch: {u.dim} vs {v.dim}")
    return _ladder_boolean_domain([u.ladder, v.ladder], u.dim)


def reals_boolean_domain(reals: Sequence[QReal]) -> Projection:
    """Boolean domain of every ladder projection of a family of reals."""
    reals = list(reals)
    dims = {u.dim for u in reals}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    family = [p for u in reals for p in u.ladder]
    return boolean_domain(family)


def _vector(psi) -> np.ndarray:
    if isinstance(psi, StateVector):
        return psi.components
    return StateVector(psi).components


def prob(p: Projection, psi) -> float:
    """Born probability ||P psi||^2."""
    v = _vector(psi)
    if v.size != p.dim:
        raise DimensionError(f"state of dimension {v.size} against projection of dimension {p.dim}")
    return float(np.vdot(p.matrix @ v, p.matrix @ v).real)


def _observables_commute(a: Observable, b: Observable, tol=None) -> bool:
    return all(commutes(p, q, tol) for _, p in a.atoms for _, q in b.atoms)


def joint_prob(observables: Sequence[Observable], intervals: Sequence[Interval], psi, tol=1e-9) -> float:
    """Probability that commuting observables fall in their intervals, computed twice.

    Once as the Born probability of the meet of the interval truth values, once
    as ||E^{A_1}(I_1) ... E^{A_n}(I_n) psi||^2; a mismatch raises
    :class:`ConsistencyError`.
    """
    obs = [a if isinstance(a, Observable) else Observable(a) for a in observables]
    if len(obs) != len(intervals) or not obs:
        raise ValueError("need one interval per observable")
    for a, b in combinations(obs, 2):
        if not _observables_commute(a, b):
            raise NoncommutingError("joint probabilities need mutually commuting observables")
    v = _vector(psi)
    conj = meet_all([observable_in_interval(a, i) for a, i in zip(obs, intervals)])
    via_logic = prob(conj, v)
    w = v
    for a, i in reversed(list(zip(obs, intervals))):
        w = a.interval_projection(i).matrix @ w
    via_spectra = float(np.vdot(w, w).real)
    if abs(via_logic - via_spectra) > tol:
        raise ConsistencyError(
            f"joint probability mismatch: {via_logic!r} (truth value) vs {via_spectra!r} (spectral product)"
        )
    return via_logic


CONDITIONS = ("i", "ii", "iii", "iv", "v")


@dataclass
class CorrelationReport:
    """Verdicts of the equivalent perfect-correlation conditions.

    (i) psi lies in the range of [[A~ = B~]]; (ii) E^A(r) psi = E^B(r) psi on the
    merged spectral grid; (iii) f(A) psi = f(B) psi for every indicator of a
    spectral atom; (iv) <E^A(D) psi, E^B(G) psi> = 0 for disjoint atom sets;
    (v) the joint distribution over atoms exists and is carried by the diagonal.
    """

    conditions: dict
    residuals: dict
    spectrum: list = field(default_factory=list)

    @property
    def unanimous(self) -> bool:
        return len(set(self.conditions.values())) == 1

    @property
    def verdict(self) -> bool:
        if not self.unanimous:
            raise ConsistencyError(f"perfect-correlation conditions disagree: {self.conditions}")
        return self.conditions["i"]

    def __bool__(self):
        return self.verdict


def _shared_atoms(a: Observable, b: Observable):
    """Spectral atoms of A and B indexed by a common list of eigenvalues."""
    values = sorted(set(a.eigenvalues) | set(b.eigenvalues))
    reps: list[float] = []
    for lam in values:
        if not reps or lam - reps[-1] > _snap(lam):
            reps.append(lam)

    def index(lam):
        return min(range(len(reps)), key=lambda k: abs(reps[k] - lam))

    d = a.dim
    ea = [np.zeros((d, d), dtype=complex) for _ in reps]
    eb = [np.zeros((d, d), dtype=complex) for _ in reps]
    for lam, p in a.atoms:
        ea[index(lam)] = p.matrix
    for lam, p in b.atoms:
        eb[index(lam)] = p.matrix
    return reps, ea, eb


def perfectly_correlated(a, b, psi, check_tol: float = 1e-7, strict: bool = True) -> CorrelationReport:
    """Evaluate every perfect-correlation condition for A, B in state psi.

    With ``strict`` a disagreement between the conditions raises
    :class:`ConsistencyError`; otherwise it is left to the caller to inspect
    :attr:`CorrelationReport.unanimous`.
    """
    a = a if isinstance(a, Observable) else Observable(a)
    b = b if isinstance(b, Observable) else Observable(b)
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    v = _vector(psi)
    if v.size != a.dim:
        raise DimensionError(f"state of dimension {v.size} for observables of dimension {a.dim}")
    reps, ea, eb = _shared_atoms(a, b)
    grid = RationalGrid.covering([snap_rational(r) for r in reps] + [Fraction(np.floor(reps[0])) - 1])
    res = {}

    e = eq_value(to_qreal(a, grid), to_qreal(b, grid))
    res["i"] = float(np.linalg.norm(e.matrix @ v - v))

    cum_a = np.cumsum(np.array(ea), axis=0)
    cum_b = np.cumsum(np.array(eb), axis=0)
    res["ii"] = max(float(np.linalg.norm((x - y) @ v)) for x, y in zip(cum_a, cum_b))

    res["iii"] = max(float(np.linalg.norm((x - y) @ v)) for x, y in zip(ea, eb))

    va = [x @ v for x in ea]
    vb = [y @ v for y in eb]
    n = len(reps)
    res["iv"] = max(
        (float(abs(np.vdot(va[j], vb[k]))) for j in range(n) for k in range(n) if j != k), default=0.0
    )

    # joint distribution exists iff every atom pair commutes on psi; then its
    # diagonal mass is sum_k <psi, (E^A_k ^ E^B_k) psi>
    gudder = max(
        (float(np.linalg.norm(commutator(x, y) @ v)) for x in ea for y in eb), default=0.0
    )
    diag = 0.0
    for x, y in zip(ea, eb):
        if np.any(x) and np.any(y):
            m = meet(Projection._trusted(x), Projection._trusted(y))
            diag += prob(m, v)
    res["v"] = max(gudder, abs(1.0 - diag))

    conditions = {k: bool(res[k] <= check_tol) for k in CONDITIONS}
    report = CorrelationReport(conditions, res, reps)
    if strict and not report.unanimous:
        raise ConsistencyError(f"perfect-correlation conditions disagree: {conditions}")
    return report


def apply_function(a: Observable, f: Callable[[float], complex]) -> np.ndarray:
    """f(A) = sum over spectral atoms of f(lambda) E_lambda."""
    a = a if isinstance(a, Observable) else Observable(a)
    out = np.zeros((a.dim, a.dim), dtype=complex)
    for lam, p in a.atoms:
        out += complex(f(lam)) * p.matrix
    return out


def as_qset(u: QReal, grid: RationalGrid | None = None) -> QSet:
    """Embed the ladder as a quantum set: r-check maps to u(r) for r in ``grid``."""
    grid = u.grid if grid is None else grid
    return make_qset([(check_embed(rational_hf(r), u.dim), u.value_at(r)) for r in grid], u.dim)
