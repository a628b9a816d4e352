from fractions import Fraction as F

import numpy as np
import pytest

import oracles
from quantumsets.errors import ConsistencyError, DimensionError
from quantumsets.evaluation import Environment, truth_value
from quantumsets.projmath import Projection, identity, leq, meet, meet_all, zero
from quantumsets.reals import (
    Interval,
    NoncommutingError,
    Observable,
    QReal,
    RationalGrid,
    adequate_grid,
    apply_function,
    as_qset,
    eq_value,
    in_interval_value,
    joint_prob,
    le_value,
    lt_value,
    observable_in_interval,
    pair_boolean_domain,
    perfectly_correlated,
    prob,
    reals_boolean_domain,
    scalar,
    to_operator,
    to_qreal,
)
from quantumsets.universe import check_embed, qset_boolean_domain, rational_hf
from randomgen import (
    correlated_pair,
    random_delta0,
    random_hermitian,
    random_state,
    random_unitary,
    rational_spectrum_observable,
    spanning_grid,
)

S = 1 / np.sqrt(2)
SZ = Observable(np.diag([1.0, -1.0]))
SX = Observable(np.array([[0.0, 1.0], [1.0, 0.0]]))
G = RationalGrid.of(-2, -1, 0, 1)
E2 = np.diag([0.0, 1.0])


def test_grid_validation():
    with pytest.raises(ValueError):
        RationalGrid.of(1)
    with pytest.raises(ValueError):
        RationalGrid.of(0, 0, 1)
    with pytest.raises(ValueError):
        Interval(1, 1)
    assert RationalGrid.of("1/2", 1).points == (F(1, 2), F(1))
    assert RationalGrid.of(0, 2).merge(RationalGrid.of(1, 2)).points == (0, 1, 2)


def test_to_qreal_examples():
    u = to_qreal(SZ, G)
    expected = [np.zeros((2, 2)), E2, E2, np.eye(2)]
    assert all(np.allclose(p.matrix, m) for p, m in zip(u.ladder, expected))
    assert not u.quantized
    z = to_qreal(Observable(np.zeros((2, 2))), RationalGrid.of(-1, 0, 1))
    assert [p.rank for p in z.ladder] == [0, 2, 2]


def test_scalar_ladder():
    a = scalar(F(1, 3), 2, RationalGrid.of(-1, 0, F(1, 3), 1))
    assert [p.is_one() for p in a.ladder] == [False, False, True, True]
    assert np.allclose(to_operator(a).matrix, np.eye(2) / 3)
    assert np.allclose(to_operator(scalar(5, 3)).matrix, 5 * np.eye(3))


def test_to_qreal_rejects_short_grid():
    with pytest.raises(ValueError):
        to_qreal(SZ, RationalGrid.of(-1, 0, 1))
    with pytest.raises(ValueError):
        to_qreal(SZ, RationalGrid.of(-2, 0))


def test_qreal_invariants(qubit_pair):
    p, q = qubit_pair
    with pytest.raises(ValueError):
        QReal(G, [zero(2), p, zero(2), identity(2)])
    with pytest.raises(ValueError):
        QReal(RationalGrid.of(0, 1), [p, identity(2)])
    with pytest.raises(ValueError):
        QReal(RationalGrid.of(0, 1, 2), [zero(2), p, q])


def test_to_operator_examples():
    assert np.allclose(to_operator(to_qreal(SZ, G)).matrix, SZ.matrix)
    jump = QReal(RationalGrid.of(0, F(1, 2)), [zero(2), identity(2)])
    assert np.allclose(to_operator(jump).matrix, 0.5 * np.eye(2))


def test_roundtrip_on_rational_spectra(rng):
    for _ in range(40):
        d = int(rng.integers(1, 7))
        m, vals = rational_spectrum_observable(rng, d)
        a = Observable(m)
        grid = RationalGrid.covering(vals + spanning_grid(rng, [float(v) for v in vals]))
        u = to_qreal(a, grid)
        assert not u.quantized
        assert np.linalg.norm(to_operator(u).matrix - m) <= 1e-9


def test_quantized_flag_for_off_grid_spectrum():
    a = Observable(np.diag([np.sqrt(2), 0.0]))
    u = to_qreal(a, RationalGrid.of(-1, 0, 1, 2))
    assert u.quantized
    back = to_operator(u)
    assert back.quantized
    assert np.allclose(back.matrix, np.diag([2.0, 0.0]))


def test_eq_value_examples():
    u = to_qreal(SZ, G)
    assert eq_value(u, u).is_one()
    assert eq_value(to_qreal(SX, G), u).is_zero()
    i2 = np.eye(2)
    a = to_qreal(Observable(np.kron(SZ.matrix, i2)))
    b = to_qreal(Observable(np.kron(i2, SZ.matrix)))
    bell = np.array([S, 0, 0, S])
    e = eq_value(a, b)
    assert np.allclose(e.matrix @ bell, bell)


def test_eq_value_dimension_mismatch():
    with pytest.raises(DimensionError):
        eq_value(to_qreal(SZ), scalar(0, 3))


def test_order_examples():
    u = to_qreal(SZ, G)
    assert le_value(u, u).is_one()
    assert lt_value(u, u).is_zero()
    for a in (-1, 0, F(1, 2), 2):
        for b in (-1, 0, F(1, 2), 2):
            v = le_value(scalar(a, 2), scalar(b, 2))
            assert v.is_one() if a <= b else v.is_zero()
            w = lt_value(scalar(a, 2), scalar(b, 2))
            assert w.is_one() if a < b else w.is_zero()


def test_le_scalar_is_meet_of_ladder_above(rng):
    # on a grid: [[u <= t~]] is the meet of u(x) over grid points x >= t
    for _ in range(30):
        d = int(rng.integers(2, 5))
        h = random_hermitian(rng, d)
        grid = RationalGrid.covering(spanning_grid(rng, np.linalg.eigvalsh(h), extra=6))
        u = to_qreal(Observable(h), grid)
        t = grid.points[int(rng.integers(1, len(grid)))]
        above = [u.value_at(x) for x in grid if x >= t]
        assert le_value(u, scalar(t, d)).allclose(meet_all(above, dim=d), 1e-8)


def test_in_interval_examples():
    u = to_qreal(SZ, G)
    assert np.allclose(in_interval_value(u, Interval(-2, 0)).matrix, E2)
    assert in_interval_value(u, Interval(-5, 5)).is_one()
    assert in_interval_value(u, Interval(2, 3)).is_zero()
    assert in_interval_value(u, Interval(-1, 1)).rank == 1


def test_in_interval_equals_spectral_projection(rng):
    for _ in range(60):
        d = int(rng.integers(1, 7))
        h = random_hermitian(rng, d)
        grid = RationalGrid.covering(spanning_grid(rng, np.linalg.eigvalsh(h)))
        u = to_qreal(Observable(h), grid)
        a, b = sorted(rng.choice(grid.points, size=2, replace=False))
        ref = oracles.spectral_interval(h, float(a), float(b))
        assert np.linalg.norm(in_interval_value(u, Interval(a, b)).matrix - ref) <= 1e-9


def test_pair_boolean_domain_examples(rng):
    u = random_unitary(rng, 3)
    a = Observable(u @ np.diag([1.0, 2.0, 3.0]) @ u.conj().T)
    b = Observable(u @ np.diag([0.0, 0.0, 1.0]) @ u.conj().T)
    assert pair_boolean_domain(to_qreal(a), to_qreal(b)).is_one()
    assert pair_boolean_domain(to_qreal(SX, G), to_qreal(SZ, G)).is_zero()
    bx = np.zeros((3, 3), dtype=complex)
    bx[:2, :2] = SX.matrix
    bz = np.diag([1.0, -1.0, 1.0])
    dom = pair_boolean_domain(to_qreal(Observable(bx)), to_qreal(Observable(bz)))
    assert np.allclose(dom.matrix, np.diag([0, 0, 1]))


def test_prob_examples():
    plus = np.array([S, S])
    assert prob(identity(2), plus) == pytest.approx(1.0)
    assert prob(zero(2), plus) == 0.0
    value = prob(in_interval_value(to_qreal(SZ, G), Interval(-2, 0)), plus)
    assert abs(value - 0.5) <= 1e-12


def test_joint_prob_examples(rng):
    a = Observable(np.diag([1.0, 2.0, 3.0]))
    b = Observable(np.diag([0.0, 0.0, 1.0]))
    e0 = np.array([1.0, 0, 0])
    assert joint_prob([a], [Interval(0, 1)], e0) == pytest.approx(1.0)
    assert joint_prob([a, b], [Interval(0, 1), Interval(-1, 0)], e0) == pytest.approx(1.0)
    assert joint_prob([a, b], [Interval(0, 1), Interval(0, 1)], e0) == pytest.approx(0.0)
    for _ in range(20):
        d = int(rng.integers(2, 6))
        u = random_unitary(rng, d)
        obs = [Observable(u @ np.diag(rng.integers(-2, 3, size=d).astype(float)) @ u.conj().T)
               for _ in range(3)]
        ivs = [Interval(-3, int(rng.integers(-2, 3))) for _ in range(3)]
        psi = random_state(rng, d)
        single = prob(observable_in_interval(obs[0], ivs[0]), psi)
        assert joint_prob(obs[:1], ivs[:1], psi) == pytest.approx(single, abs=1e-12)
        joint_prob(obs, ivs, psi)


def test_joint_prob_rejects_noncommuting():
    with pytest.raises(NoncommutingError):
        joint_prob([SX, SZ], [Interval(0, 1), Interval(0, 1)], np.array([1.0, 0.0]))


def test_perfect_correlation_examples(rng):
    for _ in range(5):
        psi = random_state(rng, 2)
        assert perfectly_correlated(SZ, SZ, psi).verdict
        assert not perfectly_correlated(SX, SZ, psi).verdict
    i2 = np.eye(2)
    bell = np.array([S, 0, 0, S])
    report = perfectly_correlated(np.kron(SZ.matrix, i2), np.kron(i2, SZ.matrix), bell)
    assert report.verdict and all(report.conditions.values())


def test_perfect_correlation_errors():
    with pytest.raises(DimensionError):
        perfectly_correlated(SZ, Observable(np.eye(3)), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        perfectly_correlated(SZ, SZ, np.array([1.0, 1.0]))


def test_perfect_correlation_on_constructed_pairs(rng):
    for _ in range(60):
        d = int(rng.integers(2, 6))
        a, b, span = correlated_pair(rng, d)
        for psi in (random_state(rng, d, span), random_state(rng, d)):
            report = perfectly_correlated(a, b, psi)
            assert report.unanimous
        if span.shape[1]:
            assert perfectly_correlated(a, b, random_state(rng, d, span)).verdict


def test_apply_function_examples(rng):
    h = random_hermitian(rng, 4)
    a = Observable(h)
    assert np.allclose(apply_function(a, lambda x: x), h)
    assert np.allclose(apply_function(a, lambda x: 1), np.eye(4))
    r = float(np.median(a.eigenvalues))
    assert np.allclose(apply_function(a, lambda x: float(x <= r)), a.spectral_projection(r).matrix)


def test_as_qset_membership_recovers_ladder(rng):
    u = to_qreal(SZ, G)
    q = as_qset(u)
    for r in G:
        rc = check_embed(rational_hf(r), 2)
        value = truth_value("r in u", Environment({"r": rc, "u": q}))
        assert value.allclose(u.value_at(r))
    a = as_qset(scalar(1, 2))
    assert all(p.is_zero() or p.is_one() for _, p in a.entries)


def _random_qreal(rng, d, grid=None):
    h = random_hermitian(rng, d)
    if grid is None:
        grid = RationalGrid.covering(spanning_grid(rng, np.linalg.eigvalsh(h)))
    return to_qreal(Observable(h), grid)


def test_eq_value_agrees_with_qset_equality(rng):
    for _ in range(30):
        d = int(rng.integers(2, 5))
        a, b, _ = correlated_pair(rng, d)
        u, v = to_qreal(Observable(a)), to_qreal(Observable(b))
        g = u.grid.merge(v.grid)
        env = Environment({"u": as_qset(u, g), "v": as_qset(v, g)})
        assert truth_value("u = v", env).allclose(eq_value(u, v), 1e-8)


def test_equality_characterizations(rng):
    # psi in R([[u=v]]) <=> u(x)psi = v(x)psi <=> u(x)v(y)psi = v(min)psi
    #                  <=> <u(x)psi, v(y)psi> = ||v(min)psi||^2
    for _ in range(40):
        d = int(rng.integers(2, 5))
        a, b, span = correlated_pair(rng, d)
        u, v = to_qreal(Observable(a)), to_qreal(Observable(b))
        g = u.grid.merge(v.grid)
        e = eq_value(u, v)
        for psi in (random_state(rng, d, span), random_state(rng, d)):
            c1 = np.linalg.norm(e.matrix @ psi - psi) <= 1e-8
            c2 = all(np.linalg.norm((u.value_at(x).matrix - v.value_at(x).matrix) @ psi) <= 1e-8 for x in g)
            c3 = c4 = True
            for x in g:
                for y in g:
                    ux, vy, vm = (u.value_at(x).matrix, v.value_at(y).matrix, v.value_at(min(x, y)).matrix)
                    c3 &= np.linalg.norm(ux @ vy @ psi - vm @ psi) <= 1e-8
                    c4 &= abs(np.vdot(ux @ psi, vy @ psi) - np.linalg.norm(vm @ psi) ** 2) <= 1e-8
            assert c1 == c2 == c3 == c4


def test_equality_is_an_equivalence(rng):
    for _ in range(30):
        d = int(rng.integers(2, 5))
        a, b, _ = correlated_pair(rng, d)
        c = a if rng.random() < 0.5 else correlated_pair(rng, d)[1]
        u, v, w = (to_qreal(Observable(m)) for m in (a, b, c))
        assert eq_value(u, v).allclose(eq_value(v, u))
        assert leq(meet(eq_value(u, v), eq_value(v, w)), eq_value(u, w), 1e-8)


def test_equality_chain_below_boolean_domain(rng):
    for _ in range(30):
        d = int(rng.integers(2, 5))
        a, b, _ = correlated_pair(rng, d)
        us = [to_qreal(Observable(m)) for m in (a, b, a)]
        chain = meet(eq_value(us[0], us[1]), eq_value(us[1], us[2]))
        assert leq(chain, reals_boolean_domain(us), 1e-8)
        assert leq(eq_value(us[0], us[1]), pair_boolean_domain(us[0], us[1]), 1e-8)


def _embedded(rng, d, n):
    a, b, _ = correlated_pair(rng, d)
    others = [correlated_pair(rng, d)[1] for _ in range(n - 2)]
    reals = [to_qreal(Observable(m)) for m in [a, b] + others]
    g = reals[0].grid.merge(*[x.grid for x in reals[1:]])
    return [as_qset(x, g) for x in reals]


def test_substitution_single_variable(rng):
    # [[u = v]] ^ [[phi(u)]] <= [[phi(v)]] for Delta0 phi(s)
    for _ in range(40):
        u, v = _embedded(rng, int(rng.integers(2, 4)), 2)
        phi = random_delta0(rng, ["s"], depth=3)
        lhs = meet(truth_value("u = v", Environment({"u": u, "v": v})), truth_value(phi, Environment({"s": u})))
        assert leq(lhs, truth_value(phi, Environment({"s": v})), 1e-8)


def test_substitution_with_parameter_under_domain_guard(rng):
    # with a further real w held fixed the law needs the Boolean domain of (u, v, w)
    for _ in range(40):
        u, v, w = _embedded(rng, int(rng.integers(2, 4)), 3)
        phi = random_delta0(rng, ["s", "w"], depth=2)
        dom = qset_boolean_domain([u, v, w])
        lhs = meet_all([dom, truth_value("u = v", Environment({"u": u, "v": v})),
                        truth_value(phi, Environment({"s": u, "w": w}))])
        assert leq(lhs, truth_value(phi, Environment({"s": v, "w": w})), 1e-8)


def test_substitution_with_parameter_fails_unguarded():
    def line(*v):
        v = np.array(v, dtype=float)
        return np.outer(v, v) / v.dot(v)

    a, b = Observable(line(1, 1, 1)), Observable(line(0, 1, -1))
    c = Observable(np.eye(3) - line(1, -1, -1))
    u, v, w = (as_qset(to_qreal(x, RationalGrid.of(-1, 0, 1))) for x in (a, b, c))
    phi = "!(w = s)"
    lhs = meet(truth_value("u = v", Environment({"u": u, "v": v})), truth_value(phi, Environment({"s": u, "w": w})))
    rhs = truth_value(phi, Environment({"s": v, "w": w}))
    assert np.linalg.norm(rhs.matrix @ lhs.matrix - lhs.matrix, 2) >= 0.9
    assert leq(meet(lhs, qset_boolean_domain([u, v, w])), rhs, 1e-8)


def test_adequate_grid_contains_spectrum(rng):
    m, vals = rational_spectrum_observable(rng, 4)
    g = adequate_grid(Observable(m))
    assert set(vals) <= set(g.points)


def test_consistency_error_surface():
    assert issubclass(ConsistencyError, Exception)
