"""Projection-valued truth values for formulas over quantum sets.

Atomic values follow the mutual recursion::

    [[u = v]] = /\\_{u'} (u(u') => [[u' in v]])  /\\  /\\_{v'} (v(v') => [[v' in u]])
    [[u in v]] = \\/_{v'} (v(v') /\\ [[u = v']])

which terminates because every recursive call lowers the rank of one side.
Compound formulas use the lattice operations; ``=>`` is the connective chosen in
the :class:`Environment` (Sasaki by default).  Unbounded quantifiers range over
an explicitly supplied finite fragment of the universe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, SemanticError
from .lang import (
    And,
    BoundedExists,
    BoundedForall,
    Equality,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Membership,
    Not,
    Or,
    free_vars,
    is_delta0,
    parse,
)
from .projmath import (
    DEFAULT_TOL,
    Projection,
    Tolerance,
    commutes,
    complement,
    get_connective,
    identity,
    join_all,
    meet,
    meet_all,
    zero,
)
from .universe import QSet, empty, make_qset, qset_boolean_domain, restrict, support

__all__ = [
    "Environment",
    "Evaluator",
    "truth_value",
    "containment_residual",
    "CheckReport",
    "check_equality_laws",
    "unguarded_transitivity_margin",
    "transitivity_counterexample",
    "check_restriction",
    "check_transfer",
    "load_corpus",
    "default_corpus",
]


@dataclass
class Environment:
    """Names in scope, the fragment used by unbounded quantifiers, and settings."""

    bindings: dict = field(default_factory=dict)
    fragment: list = field(default_factory=list)
    connective: str = "sasaki"
    tol: Tolerance = DEFAULT_TOL
    dim: int | None = None

    def __post_init__(self):
        get_connective(self.connective)
        dims = {u.dim for u in list(self.bindings.values()) + list(self.fragment) if u.dim is not None}
        if self.dim is not None:
            dims.add(self.dim)
        if len(dims) > 1:
            raise DimensionError(f"environment mixes dimensions {sorted(dims)}")
        if dims:
            self.dim = dims.pop()

    def with_bindings(self, **names) -> "Environment":
        return Environment(
            {**self.bindings, **names}, self.fragment, self.connective, self.tol, self.dim
        )


class Evaluator:
    """One evaluation session: an environment plus its truth-value cache.

    The cache maps ``(uid, uid, relation)`` to projections; node identity is a
    sound key because QSets are interned.  With ``classical_shortcut`` on, two
    check-embedded sets are compared by identity, which yields exactly the
    two-valued answer the recursion would produce.
    """

    def __init__(self, env: Environment, cache: bool = True, classical_shortcut: bool = True):
        self.env = env
        self.use_cache = cache
        self.classical_shortcut = classical_shortcut
        self.cache: dict[tuple[int, int, str], Projection] = {}
        self.imply = get_connective(env.connective)
        self.tol = env.tol

    def _dim(self, *us):
        if self.env.dim is not None:
            return self.env.dim
        for u in us:
            if u.dim is not None:
                return u.dim
        raise DimensionError("cannot determine the Hilbert dimension; set Environment.dim")

    def _check_dim(self, u):
        if u.dim is not None and self.env.dim is not None and u.dim != self.env.dim:
            raise DimensionError(f"QSet of dimension {u.dim} in a {self.env.dim}-dimensional session")

    def equals(self, u: QSet, v: QSet) -> Projection:
        key = (u.uid, v.uid, "=")
        if self.use_cache and key in self.cache:
            return self.cache[key]
        self._check_dim(u)
        self._check_dim(v)
        d = self._dim(u, v)
        if self.classical_shortcut and u.classical and v.classical:
            result = identity(d) if u is v else zero(d)
        else:
            parts = [self.imply(p, self.member(x, v), self.tol) for x, p in u.entries]
            parts += [self.imply(q, self.member(y, u), self.tol) for y, q in v.entries]
            result = meet_all(parts, dim=d, tol=self.tol)
        if self.use_cache:
            self.cache[key] = result
        return result

    def member(self, u: QSet, v: QSet) -> Projection:
        key = (u.uid, v.uid, "in")
        if self.use_cache and key in self.cache:
            return self.cache[key]
        d = self._dim(u, v)
        parts = [meet(q, self.equals(u, y), self.tol) for y, q in v.entries]
        result = join_all(parts, dim=d, tol=self.tol)
        if self.use_cache:
            self.cache[key] = result
        return result

    def subset(self, u: QSet, v: QSet) -> Projection:
        d = self._dim(u, v)
        return meet_all([self.imply(p, self.member(x, v), self.tol) for x, p in u.entries], dim=d, tol=self.tol)

    def truth(self, phi: Formula, scope: dict | None = None) -> Projection:
        return self._eval(phi, dict(self.env.bindings, **(scope or {})))

    def _lookup(self, name, scope):
        try:
            return scope[name]
        except KeyError:
            raise SemanticError(f"unbound name {name!r}") from None

    def _eval(self, phi, scope):
        tol = self.tol
        if isinstance(phi, Membership):
            return self.member(self._lookup(phi.element, scope), self._lookup(phi.container, scope))
        if isinstance(phi, Equality):
            return self.equals(self._lookup(phi.left, scope), self._lookup(phi.right, scope))
        if isinstance(phi, Not):
            return complement(self._eval(phi.body, scope))
        if isinstance(phi, And):
            return meet(self._eval(phi.left, scope), self._eval(phi.right, scope), tol)
        if isinstance(phi, Or):
            return join_all([self._eval(phi.left, scope), self._eval(phi.right, scope)], tol=tol)
        if isinstance(phi, Implies):
            return self.imply(self._eval(phi.left, scope), self._eval(phi.right, scope), tol)
        if isinstance(phi, Iff):
            a, b = self._eval(phi.left, scope), self._eval(phi.right, scope)
            return meet(self.imply(a, b, tol), self.imply(b, a, tol), tol)
        if isinstance(phi, BoundedForall):
            bound = self._lookup(phi.bound, scope)
            parts = [
                self.imply(p, self._eval(phi.body, {**scope, phi.var: x}), tol)
                for x, p in bound.entries
            ]
            return meet_all(parts, dim=self._dim_of_scope(scope), tol=tol)
        if isinstance(phi, BoundedExists):
            bound = self._lookup(phi.bound, scope)
            parts = [
                meet(p, self._eval(phi.body, {**scope, phi.var: x}), tol)
                for x, p in bound.entries
            ]
            return join_all(parts, dim=self._dim_of_scope(scope), tol=tol)
        if isinstance(phi, (Forall, Exists)):
            if not self.env.fragment:
                raise SemanticError(
                    f"unbounded quantifier over {phi.var!r} needs a nonempty fragment"
                )
            parts = [self._eval(phi.body, {**scope, phi.var: x}) for x in self.env.fragment]
            if isinstance(phi, Forall):
                return meet_all(parts, tol=tol)
            return join_all(parts, tol=tol)
        raise TypeError(f"not a formula: {phi!r}")

    def _dim_of_scope(self, scope):
        if self.env.dim is not None:
            return self.env.dim
        for u in scope.values():
            if u.dim is not None:
                return u.dim
        raise DimensionError("cannot determine the Hilbert dimension; set Environment.dim")


def truth_value(phi, env: Environment, cache: bool = True) -> Projection:
    """Truth value of ``phi`` (a formula or its text) in ``env``."""
    if isinstance(phi, str):
        phi = parse(phi)
    missing = free_vars(phi) - set(env.bindings)
    if missing:
        raise SemanticError(f"unbound name(s): {', '.join(sorted(missing))}")
    return Evaluator(env, cache=cache).truth(phi)


def containment_residual(p: Projection, q: Projection) -> float:
    """||QP - P||_F: zero exactly when P <= Q."""
    return float(np.linalg.norm(q.matrix @ p.matrix - p.matrix))


def _margin(p: Projection, q: Projection) -> float:
    return float(np.linalg.norm(q.matrix @ p.matrix - p.matrix, 2))


@dataclass
class CheckReport:
    """Outcome of a theorem-instance check."""

    name: str
    passed: bool
    worst_residual: float
    checks: int = 0
    details: list = field(default_factory=list)

    def __bool__(self):
        return self.passed

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.name}: {self.checks} checks, worst residual {self.worst_residual:.3e}"


def check_equality_laws(
    us, connective="sasaki", tol: float = 1e-8, evaluator: Evaluator | None = None
) -> CheckReport:
    """The five guarded equality laws over every tuple drawn from ``us``.

    (i) [[u=u]] = 1, (ii) [[u=v]] = [[v=u]], and for (iii)-(v) the left side
    meets the Boolean domain of the three sets involved before being compared
    with the right side.
    """
    us = list(us)
    ev = evaluator or Evaluator(Environment(connective=connective, dim=_family_dim(us)))
    worst, n, details = 0.0, 0, []
    dom_cache = {}

    def dom(*xs):
        key = tuple(sorted(x.uid for x in xs))
        if key not in dom_cache:
            dom_cache[key] = qset_boolean_domain(xs, dim=ev.env.dim)
        return dom_cache[key]

    def record(law, res, who):
        nonlocal worst, n
        n += 1
        worst = max(worst, res)
        if res > tol:
            details.append((law, res, who))

    for u in us:
        record("i", ev.equals(u, u).distance(identity(ev.env.dim)), (u.uid,))
    for u, v in itertools.product(us, repeat=2):
        record("ii", ev.equals(u, v).distance(ev.equals(v, u)), (u.uid, v.uid))
    for a, b, c in itertools.product(us, repeat=3):
        # (iii) u=a, v=b, u'=c
        lhs = meet_all([dom(a, b, c), ev.equals(a, c), ev.member(a, b)])
        record("iii", containment_residual(lhs, ev.member(c, b)), (a.uid, b.uid, c.uid))
        # (iv) u=a, v=b, v'=c
        lhs = meet_all([dom(a, b, c), ev.member(a, b), ev.equals(b, c)])
        record("iv", containment_residual(lhs, ev.member(a, c)), (a.uid, b.uid, c.uid))
        # (v) u=a, v=b, w=c
        lhs = meet_all([dom(a, b, c), ev.equals(a, b), ev.equals(b, c)])
        record("v", containment_residual(lhs, ev.equals(a, c)), (a.uid, b.uid, c.uid))
    return CheckReport("equality laws", not details, worst, n, details)


def unguarded_transitivity_margin(u: QSet, v: QSet, w: QSet, connective="sasaki") -> float:
    """Operator-norm failure of [[u=v]] /\\ [[v=w]] <= [[u=w]] without the domain guard."""
    ev = Evaluator(Environment(connective=connective, dim=_family_dim([u, v, w])))
    lhs = meet(ev.equals(u, v), ev.equals(v, w))
    return _margin(lhs, ev.equals(u, w))


def transitivity_counterexample():
    """Three qubit sets where transitivity of equality fails without the domain guard.

    With P = diag(1, 0) and Q the projection onto (1, 1)/sqrt(2)::

        u = {0 -> 1}
        v = {0 -> 1, {0 -> 1} -> P}
        w = {0 -> 1 - P, {0 -> P} -> Q}

    [[u=v]] and [[v=w]] both equal 1 - P while [[u=w]] = 0, a failure of
    operator-norm size 1.  Their Boolean domain is 0, so the guarded law holds.
    """
    p = Projection(np.diag([1.0, 0.0]))
    q = Projection(np.full((2, 2), 0.5))
    nothing, one = empty(), identity(2)
    a = make_qset([(nothing, one)], 2)
    b = make_qset([(nothing, p)], 2)
    u = a
    v = make_qset([(nothing, one), (a, p)], 2)
    w = make_qset([(nothing, complement(p)), (b, q)], 2)
    return u, v, w


def _family_dim(us) -> int | None:
    dims = {u.dim for u in us if u.dim is not None}
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop() if dims else None


def _bind(phi, assignment):
    names = free_vars(phi)
    missing = names - set(assignment)
    if missing:
        raise SemanticError(f"unbound name(s): {', '.join(sorted(missing))}")
    return {k: assignment[k] for k in names}


def check_restriction(
    phi, assignment: dict, p: Projection, connective="sasaki", tol: float = 1e-8
) -> CheckReport:
    """[[phi(u)]] /\\ p == [[phi(u|p)]] /\\ p for p commuting with every support projection."""
    if isinstance(phi, str):
        phi = parse(phi)
    if not is_delta0(phi):
        raise SemanticError("restriction identity only covers Delta0 formulas")
    bound = _bind(phi, assignment)
    for u in bound.values():
        for q in support(u):
            if not commutes(p, q, tol):
                raise SemanticError("p must commute with every projection in the supports")
    env = Environment(bound, connective=connective, dim=p.dim)
    lhs = meet(truth_value(phi, env), p)
    restricted = {k: restrict(u, p) for k, u in bound.items()}
    rhs = meet(truth_value(phi, Environment(restricted, connective=connective, dim=p.dim)), p)
    res = lhs.distance(rhs)
    return CheckReport("restriction", res <= tol, res, 1)


def check_transfer(
    phi, assignment: dict, connective="sasaki", tol: float = 1e-8, dim: int | None = None
) -> CheckReport:
    """Boolean domain of the named sets lies below the truth value of ``phi``."""
    if isinstance(phi, str):
        phi = parse(phi)
    if not is_delta0(phi):
        raise SemanticError("transfer only applies to Delta0 formulas")
    bound = _bind(phi, assignment)
    found = _family_dim(bound.values())
    if dim is not None and found is not None and found != dim:
        raise DimensionError(f"dimension mismatch: {found} vs {dim}")
    dim = dim if found is None else found
    env = Environment(bound, connective=connective, dim=dim)
    dom = qset_boolean_domain(bound.values(), dim=dim)
    res = containment_residual(dom, truth_value(phi, env))
    return CheckReport("transfer", res <= tol, res, 1)


def load_corpus(text: str) -> list[Formula]:
    """One formula per line; blank lines and ``#`` comments are skipped."""
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(parse(line))
    return out


def default_corpus() -> list[Formula]:
    from importlib.resources import files

    return load_corpus(files("quantumsets").joinpath("data/transfer_corpus.txt").read_text())
