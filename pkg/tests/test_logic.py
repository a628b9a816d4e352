import numpy as np
import pytest

import oracles
from quantumsets.errors import DimensionError
from quantumsets.logic import (
    boolean_domain,
    boolean_domain_via_algebra,
    commutant_logic,
    generate_logic,
    is_boolean,
    is_boolean_subdomain,
    logic_contains,
    spectral_projections,
)
from quantumsets.projmath import Projection, commutator, identity, leq, meet, projection_from_span, zero
from randomgen import block_pool, random_commuting_pair, random_projection

S = 1 / np.sqrt(2)


def diag_logic():
    return generate_logic([Projection(np.diag([1.0, 0.0]))])


def full_logic(qubit_pair):
    return generate_logic(list(qubit_pair))


def test_generate_logic_examples(qubit_pair):
    scalars = generate_logic([zero(2), identity(2)])
    assert scalars.algebra_dim == 1 and scalars.commutant_dim == 4
    d = diag_logic()
    assert d.algebra_dim == 2 and d.commutant_dim == 2
    full = full_logic(qubit_pair)
    assert full.algebra_dim == 4 and full.commutant_dim == 1


def test_algebra_is_closed(rng):
    for _ in range(20):
        dim = int(rng.integers(2, 5))
        logic = generate_logic([random_projection(rng, dim) for _ in range(2)])
        assert logic.closure_residual() <= 1e-8


def test_double_commutant_recovers_algebra(rng):
    for _ in range(15):
        pool = block_pool(rng, 4, size=2)
        logic = generate_logic(pool[2:])
        again = commutant_logic(commutant_logic(logic))
        assert again.algebra_dim == logic.algebra_dim
        for b in logic.algebra_basis:
            h = (b + b.conj().T) / 2
            for p in spectral_projections(h):
                assert logic_contains(again, p)


def test_commutant_solves_commutation_equations(rng):
    for _ in range(10):
        logic = generate_logic([random_projection(rng, 3) for _ in range(2)])
        for x in logic.commutant_basis:
            for g in logic.generators:
                assert np.linalg.norm(commutator(x, g.matrix)) <= 1e-8


def test_generate_logic_is_idempotent(rng):
    pool = block_pool(rng, 4, size=3, classical_dim=2)
    logic = generate_logic(pool[2:])
    projections = [p for b in logic.algebra_basis for p in spectral_projections((b + b.conj().T) / 2)]
    assert generate_logic(projections).algebra_dim == logic.algebra_dim


def test_logic_contains_examples():
    d = diag_logic()
    assert logic_contains(d, identity(2))
    assert logic_contains(d, Projection(np.diag([1.0, 0.0])))
    assert not logic_contains(d, projection_from_span([np.array([S, S])]))


def test_commutant_logic_examples(qubit_pair):
    scalars = generate_logic([identity(2)])
    assert commutant_logic(scalars).algebra_dim == 4
    assert commutant_logic(full_logic(qubit_pair)).algebra_dim == 1
    c = commutant_logic(diag_logic())
    assert c.algebra_dim == 2
    assert logic_contains(c, Projection(np.diag([1.0, 0.0])))


def test_is_boolean_examples(qubit_pair):
    assert is_boolean(diag_logic())
    assert not is_boolean(full_logic(qubit_pair))
    assert is_boolean(generate_logic([zero(2), identity(2)]))


def test_is_boolean_subdomain_examples(qubit_pair, rng):
    family = list(qubit_pair)
    assert is_boolean_subdomain(zero(2), family)
    a, b = random_commuting_pair(rng, 3)
    assert is_boolean_subdomain(identity(3), [a, b])
    assert not is_boolean_subdomain(identity(2), family)


def block_pair():
    p = np.zeros((3, 3))
    p[:2, :2] = np.diag([1.0, 0.0])
    p[2, 2] = 1
    q = np.zeros((3, 3))
    q[:2, :2] = 0.5
    q[2, 2] = 1
    return Projection(p), Projection(q)


def test_boolean_domain_worked_examples(qubit_pair, rng):
    a, b = random_commuting_pair(rng, 4)
    assert boolean_domain([a, b]).is_one()
    assert boolean_domain(list(qubit_pair)).is_zero()
    dom = boolean_domain(list(block_pair()))
    assert np.allclose(dom.matrix, np.diag([0, 0, 1]))


def test_boolean_domain_singleton_is_one(rng):
    assert boolean_domain([random_projection(rng, 4)]).is_one()


def test_boolean_domain_formulas_agree(rng):
    for _ in range(100):
        d = int(rng.integers(2, 6))
        pool = block_pool(rng, d, size=3)
        fam = [pool[int(i)] for i in rng.choice(range(2, len(pool)), size=int(rng.integers(1, 4)))]
        assert boolean_domain(fam).distance(boolean_domain_via_algebra(fam)) <= 1e-8


def test_boolean_domain_matches_oracle(rng):
    # independent: kernel of the stacked triple products via scipy
    for _ in range(50):
        d = int(rng.integers(2, 6))
        pool = block_pool(rng, d, size=3)
        fam = [p.matrix for p in pool[2:]]
        rows = [commutator(x, y) @ z for x in fam for y in fam for z in fam + [np.eye(d)]]
        ref = oracles.kernel_projection(np.vstack(rows))
        assert np.linalg.norm(boolean_domain(pool[2:]).matrix - ref) <= 1e-8


def test_boolean_domain_is_maximal_subdomain(rng):
    for _ in range(30):
        d = int(rng.integers(3, 6))
        pool = block_pool(rng, d, size=3, classical_dim=int(rng.integers(1, d - 1)))
        fam = pool[2:]
        dom = boolean_domain(fam)
        assert is_boolean_subdomain(dom, fam, tol=1e-7)
        # random E below the domain, commuting with the family, is a subdomain
        basis = dom.range_basis()
        if basis.shape[1]:
            sub = random_projection(rng, basis.shape[1])
            e = Projection(basis @ sub.matrix @ basis.conj().T)
            if is_boolean_subdomain(e, fam, tol=1e-7):
                assert leq(e, dom, tol=1e-7)
        # and a random E beyond the domain never is
        e = random_projection(rng, d, rank=int(rng.integers(1, d + 1)))
        if is_boolean_subdomain(e, fam, tol=1e-7):
            assert leq(e, dom, tol=1e-7)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        boolean_domain([identity(2), identity(3)])
    with pytest.raises(DimensionError):
        generate_logic([identity(2), identity(3)])


def test_spectral_projections_resolve_identity(rng):
    from randomgen import random_hermitian

    h = random_hermitian(rng, 4)
    ps = spectral_projections(h)
    assert np.allclose(sum(p.matrix for p in ps), np.eye(4))
    for i, p in enumerate(ps):
        for q in ps[i + 1 :]:
            assert meet(p, q).is_zero()
