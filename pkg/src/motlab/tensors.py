"""Coupling tensors, marginal specifications, and transportation-polytope utilities.

A coupling is a nonnegative tensor with k modes of size n each.  Marginal
specifications fix the per-mode marginals for a subset of the modes (the fully
fixed case is the classical transportation polytope).  Everything here is a
plain value: construction validates, and no operation mutates its inputs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

DEFAULT_DENSE_CAP = 10**7

# Tolerance for "exact" marginal membership; chosen for double-precision
# accumulation over at most DEFAULT_DENSE_CAP entries.
MEMBERSHIP_TOL = 1e-9
# Looser tolerance for normalization preconditions (entropy, rounding).
MASS_TOL = 1e-6
# Below this total deficit the rounding correction term is skipped (avoids 0/0).
DEFICIT_EPS = 1e-12


class CapExceededError(ValueError):
    """An operation would require more dense entries than the configured cap."""


def dense_cap(override: int | None = None) -> int:
    """Dense-entry cap: explicit override, else $MOTLAB_DENSE_CAP, else 1e7."""
    if override is not None:
        return int(override)
    env = os.environ.get("MOTLAB_DENSE_CAP")
    return int(env) if env else DEFAULT_DENSE_CAP


def check_cap(n: int, k: int, cap: int | None = None) -> int:
    """Return n**k if it fits under the dense cap, else raise CapExceededError."""
    total = n**k
    limit = dense_cap(cap)
    if total > limit:
        raise CapExceededError(f"n^k = {n}^{k} = {total} exceeds dense cap {limit}")
    return total


def all_index_tuples(n: int, k: int, lo: int = 0, hi: int | None = None) -> np.ndarray:
    """Index tuples lo..hi (exclusive) of the lexicographic enumeration of [n]^k,
    as an (m, k) int array."""
    if hi is None:
        hi = n**k
    flat = np.arange(lo, hi, dtype=np.int64)
    return np.stack(np.unravel_index(flat, (n,) * k), axis=1)


@dataclass(frozen=True)
class CouplingTensor:
    """A nonnegative k-mode tensor over [n]^k, dense or sparse.

    Sparse storage is a lexicographically sorted tuple of (index tuple, value)
    pairs with distinct indices and strictly positive values.  Dense storage is
    only permitted while n^k fits under the dense cap.
    """

    n: int
    k: int
    dense: np.ndarray | None = None
    entries: tuple[tuple[tuple[int, ...], float], ...] | None = None

    @classmethod
    def from_dense(cls, array: np.ndarray, cap: int | None = None) -> "CouplingTensor":
        array = np.asarray(array, dtype=float)
        k = array.ndim
        n = array.shape[0]
        if array.shape != (n,) * k:
            raise ValueError(f"expected cubical shape, got {array.shape}")
        check_cap(n, k, cap)
        if array.size and array.min() < 0:
            raise ValueError(f"negative entry {array.min()} in coupling tensor")
        array = array.copy()
        array.setflags(write=False)
        return cls(n=n, k=k, dense=array)

    @classmethod
    def from_entries(cls, n: int, k: int, entries) -> "CouplingTensor":
        norm = []
        for idx, val in entries:
            idx = tuple(int(j) for j in idx)
            if len(idx) != k or any(j < 0 or j >= n for j in idx):
                raise ValueError(f"index {idx} out of range for n={n}, k={k}")
            val = float(val)
            if val <= 0:
                raise ValueError(f"sparse entry at {idx} must be positive, got {val}")
            norm.append((idx, val))
        norm.sort(key=lambda e: e[0])
        for a, b in zip(norm, norm[1:]):
            if a[0] == b[0]:
                raise ValueError(f"duplicate sparse index {a[0]}")
        return cls(n=n, k=k, entries=tuple(norm))

    @classmethod
    def point_mass(cls, n: int, jvec) -> "CouplingTensor":
        return cls.from_entries(n, len(tuple(jvec)), [(tuple(jvec), 1.0)])

    @property
    def is_sparse(self) -> bool:
        return self.entries is not None

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """(m, k) index array and (m,) value array of the nonzero entries."""
        if self.is_sparse:
            if not self.entries:
                return np.zeros((0, self.k), dtype=np.int64), np.zeros(0)
            idx = np.array([e[0] for e in self.entries], dtype=np.int64)
            vals = np.array([e[1] for e in self.entries])
            return idx, vals
        flat = self.dense.ravel()
        nz = np.flatnonzero(flat)
        idx = np.stack(np.unravel_index(nz, self.dense.shape), axis=1)
        return idx, flat[nz]

    def to_dense(self, cap: int | None = None) -> np.ndarray:
        if not self.is_sparse:
            return self.dense
        check_cap(self.n, self.k, cap)
        out = np.zeros((self.n,) * self.k)
        for idx, val in self.entries:
            out[idx] += val
        return out

    def total_mass(self) -> float:
        if self.is_sparse:
            return float(sum(v for _, v in self.entries))
        return float(self.dense.sum())

    def nnz(self) -> int:
        if self.is_sparse:
            return len(self.entries)
        return int(np.count_nonzero(self.dense))


@dataclass(frozen=True)
class MarginalSpec:
    """Marginals for the constrained modes I of a k-mode coupling.

    ``constrained`` is a sorted tuple of mode indices (0-based); ``marginals``
    is aligned with it, each a length-n vector in the simplex.  ``I = all k
    modes`` is the fully fixed transportation polytope.
    """

    n: int
    k: int
    constrained: tuple[int, ...]
    marginals: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.k <= 0 or self.n <= 0:
            raise ValueError("n and k must be positive")
        if len(set(self.constrained)) != len(self.constrained):
            raise ValueError("duplicate constrained mode")
        if any(i < 0 or i >= self.k for i in self.constrained):
            raise ValueError(f"constrained mode out of range [0, {self.k})")
        if tuple(sorted(self.constrained)) != self.constrained:
            raise ValueError("constrained modes must be sorted")
        if len(self.marginals) != len(self.constrained):
            raise ValueError("one marginal required per constrained mode")
        frozen = []
        for i, mu in zip(self.constrained, self.marginals):
            mu = np.asarray(mu, dtype=float)
            if mu.shape != (self.n,):
                raise ValueError(f"marginal for mode {i} has shape {mu.shape}, want ({self.n},)")
            if mu.min() < -1e-15:
                raise ValueError(f"marginal for mode {i} has negative entry {mu.min()}")
            mu = np.maximum(mu, 0.0)
            if abs(mu.sum() - 1.0) > MEMBERSHIP_TOL:
                raise ValueError(f"marginal for mode {i} sums to {mu.sum()}, not 1 +- {MEMBERSHIP_TOL}")
            mu.setflags(write=False)
            frozen.append(mu)
        object.__setattr__(self, "marginals", tuple(frozen))

    @classmethod
    def fully_fixed(cls, mus) -> "MarginalSpec":
        mus = [np.asarray(mu, dtype=float) for mu in mus]
        k = len(mus)
        n = len(mus[0])
        return cls(n=n, k=k, constrained=tuple(range(k)), marginals=tuple(mus))

    @classmethod
    def partial(cls, n: int, k: int, fixed: dict) -> "MarginalSpec":
        """fixed maps mode index -> marginal vector; other modes are free."""
        modes = tuple(sorted(fixed))
        return cls(n=n, k=k, constrained=modes, marginals=tuple(fixed[i] for i in modes))

    @classmethod
    def point_masses(cls, n: int, jvec) -> "MarginalSpec":
        mus = []
        for j in jvec:
            e = np.zeros(n)
            e[j] = 1.0
            mus.append(e)
        return cls.fully_fixed(mus)

    @property
    def is_fully_fixed(self) -> bool:
        return self.constrained == tuple(range(self.k))

    def marginal_for(self, i: int) -> np.ndarray:
        return self.marginals[self.constrained.index(i)]

    def as_matrix(self) -> np.ndarray:
        """(k, n) array of marginals, filling unconstrained modes with uniform."""
        out = np.full((self.k, self.n), 1.0 / self.n)
        for i, mu in zip(self.constrained, self.marginals):
            out[i] = mu
        return out


@dataclass(frozen=True)
class DualPotentials:
    """Per-mode potential vectors (p_1, ..., p_k), one length-n vector per mode.

    Feasibility for the transport dual (every cost entry at least the sum of
    its potentials) is a checkable property, not an invariant.
    """

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2:
            raise ValueError(f"expected (k, n) potential array, got shape {p.shape}")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def k(self) -> int:
        return self.p.shape[0]

    @property
    def n(self) -> int:
        return self.p.shape[1]


def marginal(P: CouplingTensor, i: int) -> np.ndarray:
    """The i-th marginal: entry j sums P over all tuples whose i-th coordinate is j."""
    if i < 0 or i >= P.k:
        raise ValueError(f"mode index {i} out of range for k={P.k}")
    if P.is_sparse:
        out = np.zeros(P.n)
        idx, vals = P.support()
        if len(vals):
            np.add.at(out, idx[:, i], vals)
        return out
    axes = tuple(ax for ax in range(P.k) if ax != i)
    return P.dense.sum(axis=axes)


def marginal_matrix(P: CouplingTensor) -> np.ndarray:
    """(k, n) array stacking all k marginals."""
    return np.stack([marginal(P, i) for i in range(P.k)])


def is_coupling(P: CouplingTensor, spec: MarginalSpec, tol: float = MEMBERSHIP_TOL) -> bool:
    """True iff every constrained marginal matches within l1 tolerance and
    entries are nonnegative up to -tol."""
    if (P.n, P.k) != (spec.n, spec.k):
        raise ValueError(f"dimension mismatch: tensor ({P.n},{P.k}) vs spec ({spec.n},{spec.k})")
    if P.is_sparse:
        if P.entries and min(v for _, v in P.entries) < -tol:
            return False
    elif P.dense.size and P.dense.min() < -tol:
        return False
    for i, mu in zip(spec.constrained, spec.marginals):
        if np.abs(marginal(P, i) - mu).sum() > tol:
            return False
    return True


def entropy(P: CouplingTensor) -> float:
    """Shannon entropy -sum p log p (natural log, 0 log 0 = 0).

    Requires total mass 1 within the normalization tolerance; the value lies
    in [0, k ln n].
    """
    mass = P.total_mass()
    if abs(mass - 1.0) > MASS_TOL:
        raise ValueError(f"entropy requires a normalized tensor, total mass {mass}")
    _, vals = P.support()
    vals = vals[vals > 0]
    if len(vals) == 0:
        return 0.0
    return float(-np.sum(vals * np.log(vals)))


def inner_product(P: CouplingTensor, C, cap: int | None = None) -> float:
    """<P, C> summed over the support of P against an implicit cost oracle."""
    if (P.n, P.k) != (C.n, C.k):
        raise ValueError(f"dimension mismatch: tensor ({P.n},{P.k}) vs cost ({C.n},{C.k})")
    idx, vals = P.support()
    if len(vals) == 0:
        return 0.0
    return float(np.dot(vals, C.evaluate_batch(idx)))


def round_to_polytope(P: CouplingTensor, spec: MarginalSpec, cap: int | None = None) -> CouplingTensor:
    """Repair an almost-coupling so its marginals match a fully fixed spec exactly.

    Two stages: first each mode-i slice j is scaled by
    min(1, mu_i[j] / m_i(P)[j]), which drives every marginal weakly below its
    target; then the rank-1 outer product of the per-mode deficit vectors,
    normalized by the (k-1)-th power of the shared deficit mass, restores the
    missing mass.  The result satisfies the marginals to membership tolerance
    and moves P by at most 2 * sum_i ||m_i(P) - mu_i||_1 in entrywise l1.
    """
    if not spec.is_fully_fixed:
        raise ValueError("rounding requires a fully fixed marginal spec")
    if (P.n, P.k) != (spec.n, spec.k):
        raise ValueError("dimension mismatch between tensor and spec")
    mass = P.total_mass()
    if abs(mass - 1.0) > MASS_TOL:
        raise ValueError(f"rounding requires total mass 1 +- {MASS_TOL}, got {mass}")

    n, k = P.n, P.k
    arr = np.array(P.to_dense(cap))
    for i in range(k):
        axes = tuple(ax for ax in range(k) if ax != i)
        m = arr.sum(axis=axes)
        mu = spec.marginals[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(m > 0, np.minimum(1.0, mu / m), 1.0)
        arr *= scale.reshape((1,) * i + (n,) + (1,) * (k - i - 1))

    deficits = []
    for i in range(k):
        axes = tuple(ax for ax in range(k) if ax != i)
        deficits.append(np.maximum(spec.marginals[i] - arr.sum(axis=axes), 0.0))
    total = float(np.mean([d.sum() for d in deficits]))
    if total >= DEFICIT_EPS:
        corr = deficits[0]
        for d in deficits[1:]:
            corr = np.multiply.outer(corr, d)
        arr += corr / total ** (k - 1)
    return CouplingTensor.from_dense(arr, cap=cap)
