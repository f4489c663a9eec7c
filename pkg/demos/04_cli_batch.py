#!/usr/bin/env python3
"""Drive the command-line front door end to end in a scratch directory:
instance files, DIMACS inputs, single commands, and a batch manifest with a
summary CSV.

Run: python3 demos/04_cli_batch.py
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from motlab import CnfFormula, MarginalSpec, min_bruteforce
from motlab.corpus import random_cost, random_marginals
from motlab.formats import save_instance, write_cnf


def run(*argv):
    cmd = [sys.executable, "-m", "motlab.cli", *argv]
    print(f"\n$ motlab {' '.join(argv)}")
    proc = subprocess.run(cmd, capture_output=True, text=True)
    print(proc.stdout.strip())
    if proc.returncode != 0:
        print(f"(exit code {proc.returncode}) {proc.stderr.strip()}")
    return proc


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    rng = np.random.default_rng(11)

    C = random_cost(rng, "pairwise", 3, 3)
    spec = MarginalSpec.fully_fixed(random_marginals(rng, 3, 3))
    save_instance(tmp / "pairwise.json", C, spec, weights=np.zeros((3, 3)))
    write_cnf(tmp / "formula.cnf", CnfFormula(3, ((1, 2), (-2, 3))))

    run("solve-mot", str(tmp / "pairwise.json"), "--backend", "lp")
    run("solve-mot", str(tmp / "pairwise.json"), "--backend", "sinkhorn", "--eta", "50", "--round")
    run("solve-min", str(tmp / "pairwise.json"), "--via", "mot-exact")
    run("verify", "twosat", str(tmp / "formula.cnf"))

    manifest = {
        "seed": 99,
        "jobs": [
            {"command": "solve-min", "instance": "pairwise.json",
             "flags": {"via": "mot-exact"},
             "reference_value": format(min_bruteforce(C).value, ".17g"), "tol": 1e-8},
            {"command": "solve-min", "instance": "pairwise.json",
             "flags": {"via": "mot-approx", "eps": 0.01, "budget": 250}},
            {"command": "verify", "construction": "twosat", "inputs": ["formula.cnf"]},
        ],
    }
    (tmp / "manifest.json").write_text(json.dumps(manifest, indent=1))
    run("batch", str(tmp / "manifest.json"), "--jobs", "2")
    print("\nsummary CSV:")
    print((tmp / "manifest_summary.csv").read_text())
