"""Transport-value backends: exact LP with dual potentials, multimarginal
Sinkhorn scaling for the entropically regularized problem, and the
polynomial chain-coupling solver for submodular set-function costs.

All backends accept partially fixed marginal specs: only the constrained
modes are matched, the rest of the coupling is free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog
from scipy.special import logsumexp

from .costs import CostOracle, SetFunctionCost, is_submodular
from .tensors import (
    CouplingTensor,
    DualPotentials,
    MarginalSpec,
    all_index_tuples,
    check_cap,
)

# LP entries below this are treated as outside the basic support.
_SUPPORT_EPS = 1e-12

_LP_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True)
class MotSolution:
    """Optimal (or best-iterate) transport solution.

    ``value`` is the backend's objective: the linear cost for the LP and
    Lovász backends, the entropically regularized objective for Sinkhorn.
    LP solutions carry dual potentials certifying optimality; ``dual_value``
    restates their objective for the strong-duality check.
    """

    value: float
    coupling: CouplingTensor
    duals: DualPotentials | None
    backend: str
    converged: bool = True
    iterations: int = 0
    marginal_error: float = 0.0
    dual_value: float | None = None


@dataclass(frozen=True)
class SinkhornConfig:
    eta: float
    tol: float = 1e-6
    max_iters: int = 10_000

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


def suggest_eta(n: int, k: int, value_gap: float) -> float:
    """Regularization strength whose entropy bias stays under ``value_gap``."""
    return k * math.log(n) / value_gap


def solve_lp(C: CostOracle, spec: MarginalSpec, cap: int | None = None) -> MotSolution:
    """Exact transport value by LP over all n^k entries (desk-scale backend).

    Column j has cost C_j and a unit coefficient in one equality row per
    constrained mode.  Solved with HiGHS dual simplex, so the returned
    coupling is a basic solution (support at most the constraint-matrix rank)
    and the equality multipliers are optimal dual potentials; unconstrained
    modes get zero potentials.
    """
    if (C.n, C.k) != (spec.n, spec.k):
        raise ValueError("dimension mismatch between cost and marginal spec")
    if not spec.constrained:
        raise ValueError("at least one constrained mode is required")
    n, k = C.n, C.k
    total = check_cap(n, k, cap)

    c = C.materialize(cap).ravel()
    J = all_index_tuples(n, k)
    nrows = n * len(spec.constrained)
    rows = np.concatenate(
        [pos * n + J[:, i] for pos, i in enumerate(spec.constrained)]
    )
    cols = np.tile(np.arange(total, dtype=np.int64), len(spec.constrained))
    A = sp.coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(nrows, total)
    ).tocsr()
    b = np.concatenate(spec.marginals)

    res = linprog(
        c, A_eq=A, b_eq=b, bounds=(0, None), method="highs-ds", options=_LP_OPTIONS
    )
    if res.status == 2:
        raise RuntimeError("transport LP reported infeasible for simplex marginals (internal error)")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: status {res.status} ({res.message})")

    x = res.x
    keep = np.flatnonzero(x > _SUPPORT_EPS)
    idx = np.stack(np.unravel_index(keep, (n,) * k), axis=1)
    coupling = CouplingTensor.from_entries(
        n, k, [(tuple(row), float(x[flat])) for row, flat in zip(idx, keep)]
    )

    y = np.asarray(res.eqlin.marginals)
    p = np.zeros((k, n))
    for pos, i in enumerate(spec.constrained):
        p[i] = y[pos * n : (pos + 1) * n]

    return MotSolution(
        value=float(res.fun),
        coupling=coupling,
        duals=DualPotentials(p),
        backend="lp",
        iterations=int(res.nit),
        dual_value=float(b @ y),
    )


def sinkhorn(
    C: CostOracle, spec: MarginalSpec, cfg: SinkhornConfig, cap: int | None = None
) -> MotSolution:
    """Multimarginal Sinkhorn scaling in the log domain.

    The iterate always has the Gibbs form exp(-eta C) rescaled along each
    constrained mode; one cycle rescales the constrained modes in order so
    their marginals match, and iteration stops once the summed l1 marginal
    error falls under ``cfg.tol``.  The reported value is the entropically
    regularized objective <P, C> - H(P)/eta of the final coupling; callers
    wanting exact feasibility compose with ``round_to_polytope``.
    """
    if (C.n, C.k) != (spec.n, spec.k):
        raise ValueError("dimension mismatch between cost and marginal spec")
    n, k = C.n, C.k
    check_cap(n, k, cap)

    cost = C.materialize(cap)
    base = -cfg.eta * cost - 1.0
    if spec.constrained:
        # constant shifts are absorbed by the first scaling update; keep the
        # initial iterate under 1 so exp never overflows at large eta * c_max
        base = base - base.max()
    lam = {i: np.zeros(n) for i in spec.constrained}

    def log_iterate():
        out = np.array(base)
        for i, lv in lam.items():
            out += lv.reshape((1,) * i + (n,) + (1,) * (k - i - 1))
        return out

    def marginal_gap(P):
        return sum(
            float(np.abs(P.sum(axis=tuple(ax for ax in range(k) if ax != i)) - mu).sum())
            for i, mu in zip(spec.constrained, spec.marginals)
        )

    best_P = np.exp(log_iterate())
    best_err = marginal_gap(best_P)
    converged = best_err <= cfg.tol
    cycles = 0
    with np.errstate(divide="ignore"):
        log_mu = {
            i: np.log(mu) for i, mu in zip(spec.constrained, spec.marginals)
        }
    while not converged and cycles < cfg.max_iters:
        cycles += 1
        for i in spec.constrained:
            axes = tuple(ax for ax in range(k) if ax != i)
            log_m = logsumexp(log_iterate(), axis=axes)
            with np.errstate(invalid="ignore"):
                lam[i] = lam[i] + log_mu[i] - log_m
            lam[i] = np.where(np.isneginf(log_mu[i]), -np.inf, lam[i])
        P = np.exp(log_iterate())
        err = marginal_gap(P)
        if err < best_err:
            best_P, best_err = P, err
        if err <= cfg.tol:
            converged = True

    P = best_P
    lin = float((P * cost).sum())
    pos = P[P > 0]
    ent = float(-(pos * np.log(pos)).sum())
    return MotSolution(
        value=lin - ent / cfg.eta,
        coupling=CouplingTensor.from_dense(P, cap=cap),
        duals=None,
        backend="sinkhorn",
        converged=converged,
        iterations=cycles,
        marginal_error=best_err,
    )


def _descending_order(x: np.ndarray) -> np.ndarray:
    # Stable sort keeps index order among ties, which keeps outputs deterministic.
    return np.argsort(-x, kind="stable")


def lovasz_extension(C: SetFunctionCost, x) -> float:
    """Chain-formula extension of a set function at a point of [0, 1]^k.

    Sorting x descending as x_(1) >= ... >= x_(k) with x_(k+1) = 0, the value
    is (1 - x_(1)) C(empty) + sum_t (x_(t) - x_(t+1)) C(S_t) where S_t holds
    the t largest coordinates: k evaluations of C after an O(k log k) sort.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (C.k,):
        raise ValueError(f"x has shape {x.shape}, want ({C.k},)")
    if x.min() < -1e-12 or x.max() > 1 + 1e-12:
        raise ValueError("x must lie in [0, 1]^k")
    x = np.clip(x, 0.0, 1.0)
    order = _descending_order(x)
    value = (1.0 - x[order[0]]) * C.value_of_set(0)
    mask = 0
    for t in range(C.k):
        mask |= 1 << int(order[t])
        nxt = x[order[t + 1]] if t + 1 < C.k else 0.0
        value += (x[order[t]] - nxt) * C.value_of_set(mask)
    return float(value)


def chain_coupling(k: int, x) -> CouplingTensor:
    """The coupling behind the chain formula: mass on the nested top-t sets.

    Always feasible for Bernoulli marginals with success probabilities x.
    """
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    order = _descending_order(x)
    entries = []
    if 1.0 - x[order[0]] > 0:
        entries.append(((0,) * k, 1.0 - x[order[0]]))
    active = [0] * k
    for t in range(k):
        active[int(order[t])] = 1
        nxt = x[order[t + 1]] if t + 1 < k else 0.0
        mass = x[order[t]] - nxt
        if mass > 0:
            entries.append((tuple(active), float(mass)))
    return CouplingTensor.from_entries(2, k, entries)


def bernoulli_spec(x) -> MarginalSpec:
    """Fully fixed binary marginals (1 - x_i, x_i) from success probabilities x."""
    x = np.asarray(x, dtype=float)
    return MarginalSpec.fully_fixed([np.array([1.0 - xi, xi]) for xi in x])


def solve_submodular(
    C: SetFunctionCost, x, check: bool = True, cap: int = 16
) -> MotSolution:
    """Polynomial transport solver for submodular set-function costs.

    The chain coupling of the extension formula is optimal exactly when the
    cost is submodular, which is verified by enumeration when k is under the
    brute cap (pass check=False to trust larger instances).
    """
    if check and C.k <= cap and not is_submodular(C, cap=cap):
        raise ValueError("cost is not submodular; the chain coupling is not optimal")
    value = lovasz_extension(C, x)
    return MotSolution(
        value=value,
        coupling=chain_coupling(C.k, x),
        duals=None,
        backend="lovasz",
    )


def check_dual_feasibility(
    C: CostOracle, duals: DualPotentials, tol: float = 1e-9, cap: int | None = None
) -> bool:
    """Enumerated feasibility of potentials: every entry slack >= -tol."""
    return dual_slack_minimum(C, duals, cap) >= -tol


def dual_slack_minimum(C: CostOracle, duals: DualPotentials, cap: int | None = None) -> float:
    """min over tuples of C_j - sum_i p[i][j_i] (negative means infeasible)."""
    if (duals.k, duals.n) != (C.k, C.n):
        raise ValueError("dimension mismatch between cost and potentials")
    slack = np.array(C.materialize(cap), dtype=float)
    for i in range(C.k):
        slack -= duals.p[i].reshape((1,) * i + (C.n,) + (1,) * (C.k - i - 1))
    return float(slack.min())
