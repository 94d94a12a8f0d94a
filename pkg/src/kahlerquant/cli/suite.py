"""Run a configured set of checks and assemble the report."""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List

from .. import __version__
from ..conventions import conventions_hash
from .checks import CATALOG, run_check
from .config import Config, residual_max_abs, weyl_json

JOBS_ENV = "KAHLERQUANT_JOBS"


def _run_one(cid: str, config_json: Dict[str, Any]) -> Dict[str, Any]:
    config = Config.from_dict(config_json)
    chk = CATALOG[cid]
    start = time.perf_counter()
    record: Dict[str, Any] = {"id": cid, "anchor": chk.anchor, "caps": config.caps.to_json()}
    try:
        out = run_check(cid, config)
    except Exception as e:  # infeasible caps and engine errors stay per-check
        record.update(residual_max_abs=None, **{"pass": False}, error=f"{type(e).__name__}: {e}",
                      values={}, check_caps={})
    else:
        record.update(residual_max_abs=residual_max_abs(out.residuals), **{"pass": out.passed}, error=None,
                      values={k: weyl_json(v) for k, v in sorted(out.values.items())},
                      check_caps=out.caps)
    record["wall_time"] = round(time.perf_counter() - start, 3)
    return record


def resolve_jobs(jobs: int | None) -> int:
    env = os.environ.get(JOBS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, jobs or 1)


def run_suite(config: Config, jobs: int | None = None) -> Dict[str, Any]:
    """Execute the configured checks and return the report document."""
    jobs = resolve_jobs(jobs)
    cfg_json = config.to_json()
    if jobs == 1 or len(config.checks) <= 1:
        records = [_run_one(cid, cfg_json) for cid in config.checks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_one, cid, cfg_json) for cid in config.checks]
            records = [f.result() for f in futures]
    return {
        "engine_version": __version__,
        "conventions_hash": conventions_hash(),
        "seed": config.seed,
        "config": cfg_json,
        "checks": records,
        "all_pass": all(r["pass"] for r in records),
    }


TIMING_FIELDS = ("wall_time",)


def strip_timing(report: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(report)
    out["checks"] = [{k: v for k, v in r.items() if k not in TIMING_FIELDS} for r in report["checks"]]
    return out


def dump_report(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def failed(report: Dict[str, Any]) -> List[str]:
    return [r["id"] for r in report["checks"] if not r["pass"]]
