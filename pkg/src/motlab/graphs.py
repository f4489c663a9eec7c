"""Graph and CNF inputs for the hard-cost builders.

Vertices, modes, and variables are 0-based everywhere in this API; the DIMACS
readers in :mod:`motlab.formats` translate from the 1-based file conventions.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


@dataclass(frozen=True)
class KPartiteGraph:
    """A k-partite graph with vertex classes {0..k-1} of n vertices each.

    Edges are pairs ((i, a), (i2, b)) of (class, index) endpoints with i < i2;
    edges inside a class are rejected.
    """

    n: int
    k: int
    edges: tuple[tuple[tuple[int, int], tuple[int, int]], ...]

    def __post_init__(self):
        norm = set()
        for (i, a), (i2, b) in self.edges:
            if i == i2:
                raise ValueError(f"edge inside class {i}: ({i},{a})-({i2},{b})")
            if not (0 <= i < self.k and 0 <= i2 < self.k):
                raise ValueError(f"class out of range in edge ({i},{a})-({i2},{b})")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"vertex index out of range in edge ({i},{a})-({i2},{b})")
            if i > i2:
                (i, a), (i2, b) = (i2, b), (i, a)
            norm.add(((i, a), (i2, b)))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def induced_edges(self, jvec) -> int:
        """Number of edges among the vertices {(i, jvec[i])}, one per class.

        This is the definitional count; the tensor encodings elsewhere are
        validated against it.
        """
        jvec = tuple(jvec)
        count = 0
        for (i, a), (i2, b) in self.edges:
            if jvec[i] == a and jvec[i2] == b:
                count += 1
        return count

    @classmethod
    def complete(cls, n: int, k: int) -> "KPartiteGraph":
        edges = [
            ((i, a), (i2, b))
            for i in range(k)
            for i2 in range(i + 1, k)
            for a in range(n)
            for b in range(n)
        ]
        return cls(n=n, k=k, edges=tuple(edges))


@dataclass(frozen=True)
class UndirectedGraph:
    """Simple undirected graph on vertices {0..num_vertices-1}."""

    num_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValueError(f"edge ({u},{v}) out of range")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def cut_value(self, members) -> int:
        """Number of edges with exactly one endpoint in the vertex set.

        ``members`` is either an iterable of vertices or a bitmask int.
        """
        if isinstance(members, (int, np.integer)):
            inside = [(members >> v) & 1 for v in range(self.num_vertices)]
        else:
            s = set(members)
            inside = [v in s for v in range(self.num_vertices)]
        return sum(1 for u, v in self.edges if bool(inside[u]) != bool(inside[v]))


@dataclass(frozen=True)
class CnfFormula:
    """CNF formula over variables {0..num_vars-1}.

    Clauses are tuples of nonzero literals in DIMACS convention shifted to
    0-based variables: literal v+1 means "variable v true", -(v+1) means
    "variable v false".
    """

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for cl in self.clauses:
            if len(cl) == 0:
                raise ValueError("empty clause")
            for lit in cl:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range for {self.num_vars} variables")

    @property
    def max_width(self) -> int:
        return max((len(cl) for cl in self.clauses), default=0)

    def evaluate(self, assignment) -> bool:
        """True iff the 0/1 assignment vector satisfies every clause."""
        for cl in self.clauses:
            if not any(
                (assignment[abs(lit) - 1] == 1) == (lit > 0) for lit in cl
            ):
                return False
        return True


def twosat_satisfying_assignment(cnf: CnfFormula) -> tuple[int, ...] | None:
    """A satisfying 0/1 assignment of a width-<=2 CNF, or None if unsatisfiable.

    Implication-graph construction: clause (a | b) contributes edges
    not-a -> b and not-b -> a; a unit clause (a) contributes not-a -> a.  The
    formula is satisfiable iff no variable shares a strongly connected
    component with its negation, and an assignment is read off the topological
    order of the SCC condensation (a literal is true iff its component comes
    after its negation's).
    """
    if cnf.max_width > 2:
        raise ValueError(f"clause width {cnf.max_width} > 2")
    kvars = cnf.num_vars

    def node(lit: int) -> int:
        v = abs(lit) - 1
        return 2 * v + (0 if lit > 0 else 1)

    rows, cols = [], []

    def add_edge(u: int, w: int):
        rows.append(u)
        cols.append(w)

    for cl in cnf.clauses:
        if len(cl) == 1:
            (a,) = cl
            add_edge(node(-a), node(a))
        else:
            a, b = cl
            add_edge(node(-a), node(b))
            add_edge(node(-b), node(a))

    nn = 2 * kvars
    adj = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(nn, nn))
    _, labels = connected_components(adj, directed=True, connection="strong")

    for v in range(kvars):
        if labels[2 * v] == labels[2 * v + 1]:
            return None

    dag = {}
    for u, w in zip(rows, cols):
        cu, cw = labels[u], labels[w]
        if cu != cw:
            dag.setdefault(cw, set()).add(cu)
    ts = graphlib.TopologicalSorter(dag)
    for comp in set(labels):
        ts.add(comp)
    pos = {comp: idx for idx, comp in enumerate(ts.static_order())}

    return tuple(
        1 if pos[labels[2 * v]] > pos[labels[2 * v + 1]] else 0 for v in range(kvars)
    )
