import math

import numpy as np
import pytest

from motlab import (
    CapExceededError,
    CouplingTensor,
    DenseCost,
    MarginalSpec,
    entropy,
    inner_product,
    is_coupling,
    marginal,
    round_to_polytope,
)
from motlab.corpus import random_dense, random_marginals
from motlab.tensors import marginal_matrix


def random_sparse_coupling(rng, n, k, m):
    total = n**k
    flats = rng.choice(total, size=min(m, total), replace=False)
    idx = np.stack(np.unravel_index(flats, (n,) * k), axis=1)
    vals = rng.random(len(flats)) + 0.05
    return CouplingTensor.from_entries(n, k, [(tuple(r), v) for r, v in zip(idx, vals)])


def test_marginal_point_mass():
    P = CouplingTensor.point_mass(2, (0, 1))
    assert np.allclose(marginal(P, 1), [0.0, 1.0])
    assert np.allclose(marginal(P, 0), [1.0, 0.0])


def test_marginal_uniform_tensor():
    P = CouplingTensor.from_dense(np.full((3, 3), 1 / 9))
    for i in range(2):
        assert np.allclose(marginal(P, i), np.full(3, 1 / 3))


def test_marginal_sparse_matches_dense_materialization():
    rng = np.random.default_rng(0)
    P = random_sparse_coupling(rng, 3, 3, 5)
    dense = P.to_dense()
    for i in range(3):
        axes = tuple(ax for ax in range(3) if ax != i)
        assert np.allclose(marginal(P, i), dense.sum(axis=axes))


def test_marginal_mode_out_of_range():
    P = CouplingTensor.point_mass(2, (0, 0))
    with pytest.raises(ValueError):
        marginal(P, 2)


def test_marginal_sums_equal_total_mass():
    rng = np.random.default_rng(1)
    for _ in range(20):
        P = random_sparse_coupling(rng, 3, 3, 6)
        for i in range(3):
            assert abs(marginal(P, i).sum() - P.total_mass()) < 1e-9


def test_is_coupling_product_measure():
    mu = np.array([0.3, 0.7])
    nu = np.array([0.6, 0.4])
    P = CouplingTensor.from_dense(np.multiply.outer(mu, nu))
    assert is_coupling(P, MarginalSpec.fully_fixed([mu, nu]), 1e-9)


def test_is_coupling_rejects_negative_entry():
    # bypass the validating constructor to exercise the sign check
    P = CouplingTensor(n=2, k=2, dense=np.array([[-1e-3, 0.251], [0.5, 0.25]]))
    spec = MarginalSpec.fully_fixed([np.array([0.25, 0.75]), np.array([0.499, 0.501])])
    assert not is_coupling(P, spec, 1e-9)


def test_is_coupling_dimension_mismatch():
    P = CouplingTensor.point_mass(2, (0, 0))
    with pytest.raises(ValueError):
        is_coupling(P, MarginalSpec.fully_fixed([np.ones(3) / 3] * 2), 1e-9)


def test_entropy_point_mass_zero():
    assert entropy(CouplingTensor.point_mass(3, (1, 2))) == 0.0


def test_entropy_uniform_is_k_ln_n():
    P = CouplingTensor.from_dense(np.full((2, 2, 2), 1 / 8))
    assert math.isclose(entropy(P), 3 * math.log(2), rel_tol=1e-12)


def test_entropy_direct_summation_example():
    P = CouplingTensor.from_dense(np.array([[0.5, 0.25], [0.25, 0.0]]))
    assert math.isclose(entropy(P), 1.5 * math.log(2), rel_tol=1e-12)


def test_entropy_requires_normalization():
    with pytest.raises(ValueError):
        entropy(CouplingTensor.from_dense(np.full((2, 2), 1.0)))


def test_entropy_range_and_uniform_maximum():
    rng = np.random.default_rng(2)
    for n, k in [(2, 2), (2, 3)]:
        bound = k * math.log(n)
        for _ in range(25):
            arr = rng.random((n,) * k)
            arr /= arr.sum()
            h = entropy(CouplingTensor.from_dense(arr))
            assert -1e-12 <= h <= bound + 1e-12
            # only the uniform tensor attains the bound
            if not np.allclose(arr, 1 / n**k, atol=1e-3):
                assert h < bound - 1e-6


def test_round_fixed_point():
    mu = np.array([0.3, 0.7])
    P = CouplingTensor.from_dense(np.multiply.outer(mu, mu))
    spec = MarginalSpec.fully_fixed([mu, mu])
    out = round_to_polytope(P, spec)
    assert np.allclose(out.to_dense(), P.to_dense(), atol=1e-15)


def test_round_hand_example():
    # scale mode-0 slice 1 by 0.8, mode-1 scaling is then a no-op, and the
    # deficit correction adds 0.1 at (0, 0)
    P = CouplingTensor.from_dense(np.array([[0.5, 0.0], [0.0, 0.5]]))
    mu = np.array([0.6, 0.4])
    spec = MarginalSpec.fully_fixed([mu, mu])
    out = round_to_polytope(P, spec)
    assert np.allclose(out.to_dense(), [[0.6, 0.0], [0.0, 0.4]], atol=1e-12)
    moved = np.abs(out.to_dense() - P.to_dense()).sum()
    assert moved <= 2 * (0.2 + 0.2) + 1e-12


def test_round_requires_fully_fixed():
    P = CouplingTensor.from_dense(np.full((2, 2), 0.25))
    spec = MarginalSpec.partial(2, 2, {0: np.array([0.5, 0.5])})
    with pytest.raises(ValueError):
        round_to_polytope(P, spec)


def test_round_bound_and_feasibility_random():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(2, 5))
        arr = rng.random((n,) * k) ** 2
        arr /= arr.sum()
        P = CouplingTensor.from_dense(arr)
        spec = MarginalSpec.fully_fixed(random_marginals(rng, n, k))
        out = round_to_polytope(P, spec)
        assert is_coupling(out, spec, 1e-9)
        err = sum(np.abs(marginal(P, i) - spec.marginals[i]).sum() for i in range(k))
        assert np.abs(out.to_dense() - arr).sum() <= 2 * err + 1e-12


def test_round_zero_marginal_target():
    # a zero row in P with nonzero target is repaired by the additive term
    P = CouplingTensor.from_dense(np.array([[0.5, 0.5], [0.0, 0.0]]))
    spec = MarginalSpec.fully_fixed([np.array([0.5, 0.5]), np.array([0.5, 0.5])])
    out = round_to_polytope(P, spec)
    assert is_coupling(out, spec, 1e-9)


def test_inner_product_point_mass_and_zero():
    C = DenseCost(np.array([[1.0, 2.0], [3.0, 4.0]]))
    P = CouplingTensor.point_mass(2, (1, 0))
    assert inner_product(P, C) == 3.0
    Z = DenseCost(np.zeros((2, 2)))
    assert inner_product(P, Z) == 0.0


def test_inner_product_sparse_equals_dense():
    rng = np.random.default_rng(4)
    from motlab.corpus import random_pairwise

    for trial in range(10):
        n, k = 3, 3
        C = random_pairwise(rng, n, k) if trial % 2 else random_dense(rng, n, k)
        P = random_sparse_coupling(rng, n, k, 6)
        sparse_val = inner_product(P, C)
        dense_val = float((P.to_dense() * C.materialize()).sum())
        assert math.isclose(sparse_val, dense_val, rel_tol=1e-12, abs_tol=1e-12)


def test_dense_cap_enforced():
    arr = np.zeros((10,) * 8)  # 1e8 entries would exceed the default cap
    with pytest.raises(CapExceededError):
        CouplingTensor.from_dense(arr)


def test_sparse_entries_sorted_and_distinct():
    P = CouplingTensor.from_entries(2, 2, [((1, 0), 0.5), ((0, 1), 0.5)])
    assert P.entries[0][0] == (0, 1)
    with pytest.raises(ValueError):
        CouplingTensor.from_entries(2, 2, [((0, 0), 0.5), ((0, 0), 0.5)])


def test_marginal_matrix_shape():
    P = CouplingTensor.point_mass(3, (0, 2))
    M = marginal_matrix(P)
    assert M.shape == (2, 3)
    assert np.allclose(M[1], [0, 0, 1])
