#!/usr/bin/env python3
"""The hard-cost constructions and their empirical verifiers.

Each builder encodes a combinatorial problem (clique finding, max-cut,
determinant maximization, ion-crystal ground states, weighted 2-SAT) as an
implicit cost tensor; each verifier re-derives the encoded optimum with an
independent brute-force oracle and cross-checks the transport reduction.

Run: python3 demos/03_hard_constructions.py
"""

import json

import numpy as np

from motlab import UndirectedGraph
from motlab.corpus import random_ions, random_kpartite, random_twosat
from motlab.hardness import (
    check_gap_inequalities,
    report_passed,
    verify_buckingham,
    verify_clique_encoding,
    verify_determinant_min,
    verify_pairwise_equivalence,
    verify_supermodular_dichotomy,
    verify_twosat_dichotomy,
)

rng = np.random.default_rng(2024)


def show(report):
    status = "PASS" if report_passed(report) else "FAIL"
    print(f"\n== {report['construction']} [{status}] digest {report['instance_digest'][:12]}")
    for c in report["checks"]:
        mark = "ok " if c["pass"] else "XXX"
        print(f"  {mark} {c['name']}: lhs={c['lhs']} rhs={c['rhs']}")


# Clique tensors: a k-partite graph's induced-edge counts in factored form.
G = random_kpartite(rng, n=3, k=3, p=0.55)
show(verify_clique_encoding(G))
show(verify_pairwise_equivalence(G))

# Supermodular vs submodular set functions: max-cut is recovered through the
# transport route, while the (submodular) cut function solves in closed form.
H = UndirectedGraph(6, tuple((u, v) for u in range(6) for v in range(u + 1, 6) if rng.random() < 0.5))
show(verify_supermodular_dichotomy(H, seed=3))

# Determinant repulsion: both the plain and the log-capped variant.
points = rng.integers(-3, 4, size=(3, 3)).astype(float)
show(verify_determinant_min(points, "neg_abs_det"))
show(verify_determinant_min(points, "capped_neg_log_abs_det", seed=1))

# Coulomb-Buckingham ion systems: charge-balanced subsets of minimum energy.
ions = random_ions(rng, n=6, k=3)
show(verify_buckingham(ions))

# Width-2 CNFs: satisfiability is easy, weighted minimization goes through
# the transport oracle.
cnf = random_twosat(rng, k=6, clauses=9).cnf
show(verify_twosat_dichotomy(cnf))

# The parameter-gap inequalities behind the approximation-hardness regime
# (report-only; pass/fail depends on the supplied constants).
params = {"A_plus": 2.0, "A_minus": 1.5, "B_plus": 0.8, "B_minus": 1.2, "C_plus": 0.7, "C_minus": 0.9}
report = check_gap_inequalities(params, n_range=[16, 64], grid=400)
passed = sum(c["pass"] for c in report["checks"])
print(f"\n== {report['construction']}: {passed}/{len(report['checks'])} inequalities hold "
      f"for params {json.dumps(params)}")
