"""Seeded trial suites: run every configured family and aggregate the reports.

Work is organised in cells, one per (theorem, dimension). All trials of a
cell are solved together as one batch, and cells may run in worker
processes. Each trial draws its data from a generator keyed by
``(master_seed, theorem code, dim, trial index)``, so the output does not
depend on scheduling or on which other cells were run.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import itertools
import json
import logging
import math
import os
from pathlib import Path
import time
from typing import List, Optional

import numpy as np

from ..errors import SpdMeansError
from ..posmaps import stack
from ..symmat import DEFAULT_CONFIG, NumericConfig
from .checks import (CHECKS, MAP_FREE, VECTOR_ONLY, WEIGHTED, Batch, matrices_needed)
from .core import ConvexFn, TheoremId, TrialSpec
from .gen import trial_map, trial_matrices, trial_weights

log = logging.getLogger(__name__)

CSV_HEADER = "theorem,trials,passes,minMargin,meanTightness"
WORKERS_ENV = "SPDMEANS_WORKERS"


@dataclass
class SuiteResult:
    spec: TrialSpec
    records: List[dict]
    summary: List[dict]

    @property
    def passed(self):
        return all(r["pass"] is not False for r in self.records)

    @property
    def failures(self):
        return [r for r in self.records if r["pass"] is False]

    def jsonl(self) -> str:
        return "".join(json.dumps(r, allow_nan=False) + "\n" for r in self.records)

    def csv(self) -> str:
        lines = [CSV_HEADER]
        for row in self.summary:
            lines.append(",".join([row["theorem"], str(row["trials"]), str(row["passes"]),
                                   _fmt(row["minMargin"]), _fmt(row["meanTightness"])]))
        return "\n".join(lines) + "\n"

    def write(self, out_dir, stem: str = "suite"):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        jpath, cpath = out / f"{stem}.jsonl", out / f"{stem}.csv"
        jpath.write_text(self.jsonl())
        cpath.write_text(self.csv())
        return jpath, cpath


def _fmt(x):
    return "" if x is None else f"{x:.17g}"


def _grid(theorem, spec):
    """Grid points of a family as ``(param, params-for-the-record)`` pairs."""
    if theorem == TheoremId.T1:
        return [(float(nu), {"nu": float(nu)}) for nu in spec.nu_grid]
    if theorem == TheoremId.T2:
        return [(f, {"f": f.label}) for f in spec.functions]
    if theorem in (TheoremId.T3, TheoremId.ORDER):
        return [((int(n), float(t)), {"n": int(n), "t": float(t)})
                for n, t in itertools.product(spec.n_grid, spec.t_grid)]
    if theorem in (TheoremId.T4, TheoremId.T5, TheoremId.C2, TheoremId.C3,
                   TheoremId.CONTRACTION):
        return [(int(n), {"n": int(n)}) for n in spec.n_grid]
    return [(None, {})]


def _kinds(theorem, spec):
    if theorem in MAP_FREE:
        return [None]
    if theorem in VECTOR_ONLY:
        return ["vector_state"]
    return list(spec.map_kinds)


def _check_json(c, i, label):
    return c.report(label, i).as_json()


def run_cell(theorem: TheoremId, dim: int, spec: TrialSpec,
             cfg: NumericConfig = DEFAULT_CONFIG) -> List[dict]:
    """All records of one (theorem, dim) cell, trial-major."""
    N, code, label = spec.count, theorem.value, theorem.label
    if N == 0:
        return []
    n_max = max(spec.n_grid)
    m = matrices_needed(theorem, n_max)
    mats = np.stack([trial_matrices(spec.master_seed, code, dim, i, m, spec.cond_cap)
                     for i in range(N)])
    batch = Batch(mats, cfg=cfg)
    if theorem in WEIGHTED:
        for n in spec.n_grid:
            batch.weights[n] = np.stack([trial_weights(spec.master_seed, code, dim, i, n)
                                         for i in range(N)])
    kinds = _kinds(theorem, spec)
    maps = {k: None if k is None else
            stack([trial_map(spec.master_seed, code, dim, i, k) for i in range(N)])
            for k in kinds}
    fn = CHECKS[theorem]
    cells = []  # (params, kind, outcome or error text)
    for param, params in _grid(theorem, spec):
        for k in kinds:
            try:
                cells.append((params, k, fn(batch, maps[k], param)))
            except (SpdMeansError, np.linalg.LinAlgError) as exc:
                log.warning("%s dim=%d %s map=%s: %s", label, dim, params, k, exc)
                cells.append((params, k, f"{type(exc).__name__}: {exc}"))
    records = []
    for i in range(N):
        for params, k, out in cells:
            rec = {"theorem": label, "dim": dim, "trial": i, "params": params, "map": k}
            if isinstance(out, str):
                rec.update(error=out, checks=[], **{"pass": False})
            elif out.failed is not None and out.failed[i]:
                rec.update(error=f"NoConvergence: {out.message}", checks=[], **{"pass": False})
            elif out.skipped is not None and out.skipped[i]:
                rec.update(skipped="map image is not positive definite", checks=[],
                           **{"pass": None})
            else:
                checks = [_check_json(c, i, label) for c in out.checks]
                rec.update(checks=checks, **{"pass": all(c["pass"] for c in checks)})
            records.append(rec)
    return records


def _run_cell_args(args):
    theorem, dim, spec, cfg = args
    t0 = time.perf_counter()
    recs = run_cell(theorem, dim, spec, cfg)
    log.info("%s dim=%d: %d records in %.2fs", theorem.label, dim, len(recs),
             time.perf_counter() - t0)
    return recs


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def summarize(spec: TrialSpec, records: List[dict]) -> List[dict]:
    rows = []
    for theorem in spec.theorem_ids:
        recs = [r for r in records if r["theorem"] == theorem.label]
        trials = {}
        margins, tight = [], []
        for r in recs:
            key = (r["dim"], r["trial"])
            trials[key] = trials.get(key, True) and r["pass"] is not False
            for c in r["checks"]:
                if c["margin"] is not None:
                    margins.append(c["margin"] / c["scale"])
                if c["tightness"] is not None:
                    tight.append(c["tightness"])
        if not trials:
            continue
        rows.append({"theorem": theorem.label, "trials": len(trials),
                     "passes": sum(trials.values()),
                     "minMargin": min(margins) if margins else None,
                     "meanTightness": math.fsum(tight) / len(tight) if tight else None})
    return rows


def run_suite(spec: TrialSpec, workers: Optional[int] = None,
              cfg: NumericConfig = DEFAULT_CONFIG) -> SuiteResult:
    """Run ``spec.count`` trials of every configured family and dimension.

    Records come out in a fixed order (theorem, dim, trial, grid point, map)
    whatever the number of workers. ``minMargin`` in the summary is the
    smallest relative margin ``margin / scale``.
    """
    jobs = [(th, int(d), spec, cfg) for th in spec.theorem_ids for d in spec.dims]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers > 1 and len(jobs) > 1 and spec.count > 0:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            parts = list(pool.map(_run_cell_args, jobs))
    else:
        parts = [_run_cell_args(job) for job in jobs]
    records = [r for part in parts for r in part]
    return SuiteResult(spec, records, summarize(spec, records))
