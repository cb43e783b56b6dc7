"""Acceptance suite: one test per verification criterion, plus the CLI-level
determinism and mutation-sensitivity guarantees of the verify task."""

import json
import subprocess
import sys

import pytest

import caplab.constellation
from caplab import expressions as ex
from caplab.verification import (
    check_constant_bounds_end_to_end,
    check_determinism,
    check_lower_bound_consistency,
    check_monotonicity,
    check_newtonian_annulus,
    check_normalization_invariance,
    check_ode_residual,
    check_oracle_equivalence,
    check_power_law_threshold,
)

CRITERIA = [
    ("1", check_newtonian_annulus),
    ("2", check_oracle_equivalence),
    ("3", check_ode_residual),
    ("4", check_power_law_threshold),
    ("5", check_constant_bounds_end_to_end),
    ("6", check_lower_bound_consistency),
    ("7", check_normalization_invariance),
    ("8", check_monotonicity),
    ("9", check_determinism),
]


@pytest.mark.parametrize("number,check", CRITERIA, ids=[c[1].__name__ for c in CRITERIA])
def test_criterion(number, check):
    result = check(seed=0)
    status = "PASS" if result.passed else "FAIL"
    print(f"{status} criterion-{number} [{result.cid}]: {result.detail}")
    assert result.passed, f"criterion {number} ({result.cid}): {result.detail}"


def test_verify_cli_runs_twice_byte_identical(tmp_path):
    cfg = tmp_path / "verify.json"
    cfg.write_text(json.dumps({"task": "verify"}), encoding="utf-8")
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "caplab.cli", "verify", str(cfg),
             "--out", str(out), "--seed", "0"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert proc.stdout.count("PASS") == len(CRITERIA)
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_verify_detects_formula_mutation(monkeypatch):
    # corrupt one constant of the balance function: the convexity term gets
    # coefficient p-1 instead of p-2; the verify suite must notice
    def mutated(self, r):
        return (
            (self.m + self.p - 2.0) * self.model.eta(r)
            - self.m * ex.evaluate(self.bounds.h, r)
            - (self.p - 1.0) * ex.evaluate(self.bounds.lam, r)
        )

    monkeypatch.setattr(caplab.constellation.Constellation, "balance", mutated)
    result = check_constant_bounds_end_to_end(seed=0)
    assert not result.passed
