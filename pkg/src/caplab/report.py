"""Task execution and artifact emission for the command-line interface.

All tabular output is CSV with a header row, 17-significant-digit numbers,
'.' decimal separator and '\\n' line endings, so identical configurations
produce byte-identical files.  Human-readable summaries go to stdout;
machine-readable JSON goes to the --out path where the task defines one.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
import sys
from typing import Any, Optional

from . import capacity as cap
from .classify import Verdict, classify
from .config import JobConfig, Numerics
from .constellation import Annulus, Bounds, Constellation, LambdaWeight
from .errors import BalanceViolation, CaplabError, ConfigError
from . import expressions as ex
from .models import ModelSpace, SpaceForm
from .quadrature import TailVerdict

__all__ = ["run", "fmt", "csv_line", "sweep_csv", "table_csv"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFICATION = 3


def fmt(x: float) -> str:
    """Canonical CSV number format: 17 significant digits."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def csv_line(cells) -> str:
    return ",".join(cells) + "\n"


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_artifact(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _verdict_json(v: Verdict) -> dict:
    return {
        "verdict": v.kind,
        "rule": v.rule,
        "reason": v.reason,
        "balance": _jsonable(v.balance) if v.balance is not None else None,
        "tail": _jsonable(v.tail) if v.tail is not None else None,
        "cap_limit": _jsonable(v.cap_limit) if v.cap_limit is not None else None,
    }


def _print_verdict(v: Verdict) -> None:
    print(f"verdict: {v.kind}")
    print(f"rule: {v.rule}")
    if v.reason:
        print(f"reason: {v.reason}")
    if v.balance is not None:
        if v.balance.ok:
            print(f"balance: ok (min M = {v.balance.min_value:.9g} at r = {v.balance.min_at:.9g})")
        else:
            print(f"balance: violated at r = {v.balance.violation_at:.9g} "
                  f"(M = {v.balance.value:.9g})")
    if v.tail is not None:
        t = v.tail
        if t.is_convergent:
            print(f"weight tail: convergent, integral = {t.value:.12g} (error {t.error:.3g})")
        else:
            print(f"weight tail: {t.kind} ({t.reason})")
    if v.cap_limit is not None:
        print(f"capacity limit: {v.cap_limit.value:.12g} [{v.cap_limit.method}]")


def _run_analyze(job: JobConfig, out: Optional[str]) -> int:
    c = job.constellation()
    verdict = classify(c, job.mode, lower_limit=job.lower_limit,
                       doublings=job.numerics.tail_doublings)
    _print_verdict(verdict)
    if out is not None:
        payload = {"task": "analyze", "mode": job.mode, **_verdict_json(verdict)}
        _write_artifact(out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _run_capacity(job: JobConfig, out: Optional[str]) -> int:
    a = job.annulus()
    results: dict[str, Any] = {}
    exact = cap.exact_model_pcapacity(job.m, job.warping, job.p, a,
                                      rel_tol=job.numerics.rel_tol)
    results["exact_model_pcapacity"] = exact
    print(f"exact_model_pcapacity = {exact.value:.6f}")
    if job.p >= 2.0:
        c = job.constellation()
        if a.finite:
            drifted = cap.drifted_capacity(c, a, lower_limit=job.lower_limit,
                                           rel_tol=job.numerics.rel_tol)
        else:
            drifted = cap.drifted_capacity_limit(c, lower_limit=job.lower_limit,
                                                 doublings=job.numerics.tail_doublings)
        results["drifted_capacity"] = drifted
        print(f"drifted_capacity = {drifted.value:.6f}")
        flux = job.boundary_flux
        if flux is None and job.mode == "intrinsic":
            flux = cap.intrinsic_boundary_flux(c)
        if flux is not None and a.finite:
            try:
                bound = cap.pcap_lower_bound(c, a, flux, lower_limit=job.lower_limit,
                                             rel_tol=job.numerics.rel_tol)
                results["pcap_lower_bound"] = bound
                print(f"pcap_lower_bound = {bound.value:.6f}")
            except BalanceViolation as exc:
                print(f"pcap_lower_bound unavailable: {exc}")
                results["pcap_lower_bound_error"] = str(exc)
        elif flux is None:
            print("pcap_lower_bound skipped: supply boundary_flux for extrinsic jobs")
    if out is not None:
        payload = {"task": "capacity", **{k: _jsonable(v) for k, v in results.items()}}
        _write_artifact(out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def table_csv(job: JobConfig, grid_points: Optional[int] = None) -> str:
    """CSV with columns r, w, eta, M, Lambda, psi on a uniform grid."""
    c = job.constellation()
    a = job.annulus()
    n = grid_points if grid_points is not None else job.numerics.grid
    if n < 2:
        raise ConfigError("/numerics/grid", "table needs at least 2 grid points")
    grid = [a.rho + (a.R - a.rho) * i / (n - 1) for i in range(n)]
    grid[-1] = a.R
    table = cap.potential_table(c, a, grid, lower_limit=job.lower_limit)
    lw = LambdaWeight(c, job.lower_limit)
    buf = io.StringIO()
    buf.write(csv_line(["r", "w", "eta", "M", "Lambda", "psi"]))
    for r, psi in zip(table.grid, table.values):
        buf.write(csv_line([
            fmt(r),
            fmt(c.model.warping_value(r)),
            fmt(c.model.eta(r)),
            fmt(c.balance(r)),
            fmt(lw(r)),
            fmt(psi),
        ]))
    return buf.getvalue()


def sweep_csv(job: JobConfig) -> str:
    """One classification row per (m, p, b, h0, lambda0) tuple, input order."""
    axes = job.sweep
    buf = io.StringIO()
    buf.write(csv_line([
        "m", "p", "b", "h0", "lambda0", "balance_ok", "tail", "tail_value",
        "cap_limit", "verdict",
    ]))
    for m in axes["m"]:
        for p in axes["p"]:
            for b in axes["b"]:
                for h0 in axes["h0"]:
                    for lam0 in axes["lambda0"]:
                        c = Constellation(
                            m=int(m), n=int(m) + 1, p=p,
                            model=ModelSpace(int(m), SpaceForm(b)),
                            bounds=Bounds(ex.constant(1.0), ex.constant(h0),
                                          ex.constant(lam0)),
                            rho=job.rho,
                        )
                        v = classify(c, "extrinsic",
                                     doublings=job.numerics.tail_doublings)
                        tail = v.tail if v.tail is not None else TailVerdict.unknown("")
                        balance_ok = v.balance.ok if v.balance is not None else True
                        cl = v.cap_limit.value if v.cap_limit is not None else math.nan
                        buf.write(csv_line([
                            fmt(m), fmt(p), fmt(b), fmt(h0), fmt(lam0),
                            "true" if balance_ok else "false",
                            tail.kind, fmt(tail.value), fmt(cl), v.kind,
                        ]))
    return buf.getvalue()


def _run_verify(job: JobConfig, out: Optional[str], seed: int) -> int:
    from .verification import run_all  # deferred: verification imports this module

    results = run_all(seed=seed)
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.cid}: {r.description} ({r.detail})")
    buf = io.StringIO()
    buf.write(csv_line(["criterion", "description", "status"]))
    for r in results:
        buf.write(csv_line([r.cid, r.description.replace(",", ";"),
                            "pass" if r.passed else "fail"]))
    if out is not None:
        _write_artifact(out, buf.getvalue())
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed", file=sys.stderr)
        return EXIT_VERIFICATION
    return EXIT_OK


def run(job: JobConfig, out: Optional[str] = None, grid: Optional[int] = None,
        seed: int = 0) -> int:
    """Execute one task; returns the process exit code."""
    out = out if out is not None else job.output
    if job.task == "analyze":
        return _run_analyze(job, out)
    if job.task == "capacity":
        return _run_capacity(job, out)
    if job.task == "table":
        _write_artifact(out, table_csv(job, grid))
        return EXIT_OK
    if job.task == "sweep":
        _write_artifact(out, sweep_csv(job))
        return EXIT_OK
    if job.task == "verify":
        return _run_verify(job, out, seed)
    raise ConfigError("/task", f"unknown task {job.task!r}")
