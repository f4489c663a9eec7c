"""Seeded random instance generators spanning every cost family.

Used by the verification reports, the test corpus, and the demo scripts.  All
generators take a numpy Generator so corpora are reproducible from one seed.
"""

from __future__ import annotations

import numpy as np

from .costs import (
    DenseCost,
    DeterminantCost,
    IonCost,
    LowRankCost,
    PairwiseCost,
    SetFunctionCost,
    TwoSatCost,
)
from .graphs import CnfFormula, KPartiteGraph, UndirectedGraph


def random_simplex(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


def random_marginals(rng: np.random.Generator, n: int, k: int) -> list[np.ndarray]:
    return [random_simplex(rng, n) for _ in range(k)]


def random_dense(rng, n: int, k: int, integer: bool = False) -> DenseCost:
    if integer:
        arr = rng.integers(-4, 5, size=(n,) * k).astype(float)
    else:
        arr = rng.normal(size=(n,) * k)
    return DenseCost(arr)


def random_low_rank(rng, n: int, k: int, r: int = 2) -> LowRankCost:
    terms = tuple(
        tuple(rng.normal(size=n) for _ in range(k)) for _ in range(r)
    )
    return LowRankCost(n=n, k=k, terms=terms)


def random_pairwise(rng, n: int, k: int) -> PairwiseCost:
    tables = {
        (i, i2): rng.normal(size=(n, n))
        for i in range(k)
        for i2 in range(i + 1, k)
    }
    return PairwiseCost(n=n, k=k, tables=tables)


def random_determinant(rng, n: int, k: int, variant: str = "neg_abs_det") -> DeterminantCost:
    # Small integer coordinates keep determinant spacings resolvable.
    points = rng.integers(-3, 4, size=(n, k)).astype(float)
    return DeterminantCost(points=points, variant=variant)


def random_set_function(rng, k: int) -> SetFunctionCost:
    return SetFunctionCost(k=k, table=rng.normal(size=2**k))


def random_coverage_function(rng, k: int, universe: int = 12) -> SetFunctionCost:
    """Weighted coverage function: submodular (and monotone) by construction."""
    weights = rng.uniform(0.1, 1.0, size=universe)
    member = rng.random((k, universe)) < 0.4
    masks = np.arange(2**k, dtype=np.int64)
    covered = np.zeros((2**k, universe), dtype=bool)
    for i in range(k):
        has_i = ((masks >> i) & 1).astype(bool)
        covered[has_i] |= member[i]
    table = covered @ weights
    return SetFunctionCost(k=k, table=table)


def random_graph(rng, k: int, p: float = 0.5) -> UndirectedGraph:
    edges = [
        (u, v) for u in range(k) for v in range(u + 1, k) if rng.random() < p
    ]
    return UndirectedGraph(num_vertices=k, edges=tuple(edges))


def random_kpartite(rng, n: int, k: int, p: float = 0.4) -> KPartiteGraph:
    edges = []
    for i in range(k):
        for i2 in range(i + 1, k):
            for a in range(n):
                for b in range(n):
                    if rng.random() < p:
                        edges.append(((i, a), (i2, b)))
    return KPartiteGraph(n=n, k=k, edges=tuple(edges))


def random_twosat(rng, k: int, clauses: int) -> TwoSatCost:
    cls = []
    for _ in range(clauses):
        width = 2 if rng.random() < 0.85 else 1
        vars_ = rng.choice(k, size=width, replace=False)
        cls.append(tuple(int(v + 1) * (1 if rng.random() < 0.5 else -1) for v in vars_))
    return TwoSatCost(cnf=CnfFormula(num_vars=k, clauses=tuple(cls)))


def random_ions(rng, n: int, k: int, variant: str = "buckingham") -> IonCost:
    """Ion system in the dominated-penalty regime with pair distances >= 1."""
    cells = rng.choice(5**3, size=n, replace=False)
    grid = np.stack(np.unravel_index(cells, (5, 5, 5)), axis=1).astype(float)
    charges = rng.choice([-1, 1], size=n)
    if variant == "buckingham" and np.abs(charges.sum()) == n:
        charges[0] = -charges[0]
    params = dict(
        a_plus=float(rng.uniform(0.5, 2.0)),
        a_minus=float(rng.uniform(0.5, 2.0)),
        b_plus=float(rng.uniform(0.5, 2.0)),
        b_minus=float(rng.uniform(0.5, 2.0)),
        c_plus=float(rng.uniform(0.5, 2.0)),
        c_minus=float(rng.uniform(0.5, 2.0)),
    )
    m = 2 * k**2 * (2 + params["a_plus"] + params["a_minus"] + params["c_plus"] + params["c_minus"])
    return IonCost(
        positions=grid,
        charges=charges,
        k=k,
        m_penalty=float(m),
        variant=variant,
        **params,
    )


def random_cost(rng, family: str, n: int, k: int):
    """Dispatch a random instance of the named family at the given size."""
    if family == "dense":
        return random_dense(rng, n, k)
    if family == "dense_integer":
        return random_dense(rng, n, k, integer=True)
    if family == "low_rank":
        return random_low_rank(rng, n, k, r=int(rng.integers(1, 4)))
    if family == "pairwise":
        return random_pairwise(rng, n, k)
    if family == "determinant":
        return random_determinant(rng, n, k, variant="neg_abs_det")
    if family == "log_determinant":
        return random_determinant(rng, n, k, variant="capped_neg_log_abs_det")
    if family == "set_function":
        return random_set_function(rng, k)
    if family == "coulomb":
        return random_ions(rng, n, k, variant="coulomb")
    if family == "coulomb_buckingham":
        return random_ions(rng, n, k, variant="buckingham")
    if family == "two_sat":
        return random_twosat(rng, k, clauses=int(rng.integers(1, 2 * k + 1)))
    raise ValueError(f"unknown family {family!r}")
