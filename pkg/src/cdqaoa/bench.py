"""Benchmark harness: instance generation, exact oracles, method sweeps and report pivots.

A sweep is the cross product instances x methods x depths x CVaR levels, with the
topology axis applied to the XY families only.  Every run gets a seed derived from
its run key, so results do not depend on worker count or completion order.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import statistics
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .portfolio import (PortfolioInstance, default_penalty, exact_extrema, load_instance,
                        random_instance, save_instance, to_ising, to_penalty_ising)
from .qaoa import METHODS, AnsatzConfig, run
from .statevector import TOPOLOGIES, _weights

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "instance_id", "method", "topology", "p", "cvar_alpha", "seed", "r", "p_gs",
    "feasible_mass", "best_cvar", "cnot_count", "two_qubit_count", "depth_model",
    "evals_used", "wall_ms", "r_unclamped", "error",
)
METRIC_COLUMNS = ("r", "p_gs", "feasible_mass", "best_cvar", "cnot_count", "two_qubit_count",
                  "depth_model", "evals_used")
CELL_KEYS = ("method", "topology", "p", "cvar_alpha")
SUMMARY_COLUMNS = CELL_KEYS + ("n_runs", "n_errors") + tuple(
    f"{stat}_{m}" for m in METRIC_COLUMNS for stat in ("mean", "std"))
RATIO_COLUMNS = ("method", "topology", "p", "cvar_alpha", "n_runs", "mean_r", "std_r",
                "mean_p_gs", "mean_feasible_mass")
COST_COLUMNS = ("method", "topology", "p", "cnot_count", "two_qubit_count", "depth_model")
XY_METHODS = ("xy", "xy_cd")


class ConfigError(ValueError):
    """Raised for malformed or inconsistent sweep configuration."""


@dataclass
class SweepSpec:
    """Everything that determines a sweep's results (worker count does not)."""

    instances: list[str] = field(default_factory=list)
    count: int = 10
    n: int = 12
    budget: int = 4
    risk_aversion: float = 0.5
    base_seed: int = 100
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    depths: list[int] = field(default_factory=lambda: [1, 2, 3])
    cvar_alphas: list[float] = field(default_factory=lambda: [0.1, 0.25, 1.0])
    topologies: list[str] = field(default_factory=lambda: ["ring"])
    restarts: int = 3
    max_evals: int | None = None
    init_strategy: str = "linear_ramp"
    cd_mode: str | None = None

    def __post_init__(self):
        for name in ("methods", "depths", "cvar_alphas", "topologies"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be nonempty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}")
        bad = [t for t in self.topologies if t not in TOPOLOGIES]
        if bad:
            raise ConfigError(f"unknown topologies {bad}")
        if any(int(p) < 1 for p in self.depths):
            raise ConfigError("depths must be positive")
        if any(not 0.0 < float(a) <= 1.0 for a in self.cvar_alphas):
            raise ConfigError("cvar_alphas must lie in (0, 1]")
        if not self.instances and self.count < 1:
            raise ConfigError("count must be positive when no instance files are given")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "SweepSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        return cls(**dict(data))


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a JSON or TOML (``key = value``) config file into a plain dict."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: neither JSON nor key=value config ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return data


def instance_id(inst: PortfolioInstance) -> str:
    return f"inst_{inst.seed}"


def generated_instances(spec: SweepSpec) -> list[PortfolioInstance]:
    return [random_instance(spec.base_seed + k, spec.n, spec.budget, spec.risk_aversion)
            for k in range(spec.count)]


def cmd_generate(spec: SweepSpec, out_dir: str | Path) -> list[Path]:
    """Write one instance file per seed ``base_seed .. base_seed + count - 1``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for inst in generated_instances(spec):
        path = out / f"{instance_id(inst)}.json"
        save_instance(inst, path)
        paths.append(path)
    return paths


def cmd_oracle(inst: PortfolioInstance) -> dict[str, Any]:
    """Feasible extrema plus the penalty separation margin at the default coefficient.

    ``penalty_gap`` is the lowest infeasible penalised energy minus the highest
    feasible one; a positive gap means every feasible string beats every infeasible one.
    """
    n, b = inst.n_assets, inst.budget
    ext = exact_extrema(to_ising(inst), n, b)
    alpha = default_penalty(inst)
    pen = to_penalty_ising(inst, alpha).energies()
    w = _weights(n)
    gap = float(pen[w != b].min() - pen[w == b].max())
    return {
        "instance_id": instance_id(inst),
        "n_assets": n,
        "budget": b,
        "e_min": ext.e_min,
        "e_max": ext.e_max,
        "argmin": ext.argmin,
        "argmax": ext.argmax,
        "n_scanned": ext.n_scanned,
        "degenerate": ext.degenerate,
        "penalty_alpha": alpha,
        "penalty_gap": gap,
        "penalty_separates": gap > 0,
    }


@dataclass(frozen=True)
class RunKey:
    instance_index: int
    instance_id: str
    method: str
    topology: str
    p: int
    cvar_alpha: float

    def seed(self, base_seed: int) -> int:
        tag = f"{base_seed}|{self.instance_id}|{self.method}|{self.topology}|{self.p}|{self.cvar_alpha!r}"
        return zlib.crc32(tag.encode())


def run_keys(spec: SweepSpec, ids: list[str]) -> list[RunKey]:
    """Run keys in canonical order; the topology axis applies to XY methods only."""
    keys = []
    for i, iid in enumerate(ids):
        for method in spec.methods:
            topos = spec.topologies if method in XY_METHODS else [""]
            for topo in topos:
                for p in spec.depths:
                    for a in spec.cvar_alphas:
                        keys.append(RunKey(i, iid, method, topo, int(p), float(a)))
    return keys


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _execute(job: tuple[RunKey, PortfolioInstance, SweepSpec]) -> dict[str, str]:
    key, inst, spec = job
    seed = key.seed(spec.base_seed)
    row = {"instance_id": key.instance_id, "method": key.method, "topology": key.topology,
           "p": str(key.p), "cvar_alpha": _fmt(key.cvar_alpha), "seed": str(seed)}
    try:
        cfg = AnsatzConfig(
            key.method, depth=key.p, topology=key.topology or None, cvar_alpha=key.cvar_alpha,
            cd_mode=spec.cd_mode if key.method == "xy_cd" else None,
            init_strategy=spec.init_strategy, max_evals=spec.max_evals,
            restarts=spec.restarts, seed=seed)
        res = run(cfg, inst)
    except Exception as exc:  # a failed run becomes an error row; the sweep continues
        log.warning("run %s failed: %s", key, exc)
        row.update({c: "" for c in RESULT_COLUMNS if c not in row})
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    gc = res.gate_cost
    row.update({
        "r": _fmt(res.approximation_ratio), "p_gs": _fmt(res.ground_state_probability),
        "feasible_mass": _fmt(res.feasible_mass), "best_cvar": _fmt(res.best_cvar),
        "cnot_count": str(gc.cnot_count), "two_qubit_count": str(gc.two_qubit_gate_count),
        "depth_model": str(gc.depth), "evals_used": str(res.evals_used),
        "wall_ms": f"{res.wall_ms:.1f}", "r_unclamped": _fmt(res.ratio_unclamped), "error": "",
    })
    return row


def load_instances(spec: SweepSpec) -> list[PortfolioInstance]:
    if spec.instances:
        return [load_instance(p) for p in spec.instances]
    return generated_instances(spec)


def sweep(spec: SweepSpec, jobs: int = 1,
          instances: list[PortfolioInstance] | None = None) -> list[dict[str, str]]:
    """Run every cell of the sweep; rows come back in run-key order."""
    insts = load_instances(spec) if instances is None else instances
    ids = [instance_id(i) for i in insts]
    if len(set(ids)) != len(ids):
        ids = [f"{iid}_{k}" for k, iid in enumerate(ids)]
    work = [(k, insts[k.instance_index], spec) for k in run_keys(spec, ids)]
    if jobs <= 1:
        return [_execute(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_execute, work))


def write_csv(rows: Iterable[Mapping[str, Any]], columns: Iterable[str], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: r.get(c, "") for c in w.fieldnames})


def read_csv(path: str | Path, required: Iterable[str] = RESULT_COLUMNS) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ConfigError(f"{path}: empty file, expected a header row")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise ConfigError(f"{path}: missing columns {missing}")
        return list(reader)


def _cell(row: Mapping[str, str]) -> tuple:
    return (row["method"], row["topology"], int(row["p"]), float(row["cvar_alpha"]))


def _group(rows: Iterable[Mapping[str, str]], key=_cell) -> dict[tuple, list[Mapping[str, str]]]:
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault(key(r), []).append(r)
    return dict(sorted(groups.items(), key=lambda kv: (METHODS.index(kv[0][0]), *kv[0][1:])))


def _stats(values: list[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    return statistics.fmean(values), statistics.stdev(values) if len(values) > 1 else 0.0


def summarize(rows: list[Mapping[str, str]]) -> list[dict[str, Any]]:
    """Per-cell means and sample standard deviations over successful runs."""
    out = []
    for (method, topo, p, alpha), group in _group(rows).items():
        ok = [r for r in group if not r["error"]]
        rec: dict[str, Any] = {"method": method, "topology": topo, "p": p,
                               "cvar_alpha": _fmt(alpha), "n_runs": len(group),
                               "n_errors": len(group) - len(ok)}
        for m in METRIC_COLUMNS:
            mean, std = _stats([float(r[m]) for r in ok])
            rec[f"mean_{m}"], rec[f"std_{m}"] = _fmt(mean), _fmt(std)
        out.append(rec)
    return out


def result_digest(path: str | Path) -> str:
    """SHA-256 of a results CSV with the wall-clock column dropped."""
    h = hashlib.sha256()
    for row in read_csv(path):
        h.update("\x1f".join(row[c] for c in RESULT_COLUMNS if c != "wall_ms").encode())
        h.update(b"\n")
    return h.hexdigest()


def cmd_sweep(spec: SweepSpec, out_dir: str | Path, jobs: int = 1) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = sweep(spec, jobs)
    results, summary = out / "results.csv", out / "summary.csv"
    write_csv(rows, RESULT_COLUMNS, results)
    write_csv(summarize(rows), SUMMARY_COLUMNS, summary)
    (out / "spec.json").write_text(json.dumps(asdict(spec), indent=2) + "\n")
    return results, summary


def _text_table(rows: list[Mapping[str, Any]], columns: Iterable[str]) -> str:
    cols = list(columns)
    cells = [[str(r[c]) for c in cols] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def cmd_report(results_csv: str | Path, out_dir: str | Path) -> list[Path]:
    """Pivot a results CSV into figure-ready series.

    ``ratio_series.csv`` holds mean ratio vs p for every method and CVaR level, with one
    ``ratio_alpha_<a>.csv`` per level; ``gatecost_series.csv`` holds gate counts vs p.
    """
    rows = [r for r in read_csv(results_csv) if not r["error"]]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ratio_rows = []
    for (method, topo, p, alpha), group in _group(rows).items():
        rs = [float(r["r"]) for r in group]
        ratio_rows.append({"method": method, "topology": topo, "p": p, "cvar_alpha": _fmt(alpha),
                           "n_runs": len(group),
                           "mean_r": _fmt(_stats(rs)[0]), "std_r": _fmt(_stats(rs)[1]),
                           "mean_p_gs": _fmt(_stats([float(r["p_gs"]) for r in group])[0]),
                           "mean_feasible_mass": _fmt(
                               _stats([float(r["feasible_mass"]) for r in group])[0])})
    cost_rows = []
    for (method, topo, p), group in _group(rows, key=lambda r: _cell(r)[:3]).items():
        rec = {"method": method, "topology": topo, "p": p}
        for c in ("cnot_count", "two_qubit_count", "depth_model"):
            vals = {r[c] for r in group}
            rec[c] = vals.pop() if len(vals) == 1 else _fmt(_stats([float(v) for v in vals])[0])
        cost_rows.append(rec)
    written = [out / "ratio_series.csv", out / "gatecost_series.csv", out / "report.txt"]
    write_csv(ratio_rows, RATIO_COLUMNS, written[0])
    write_csv(cost_rows, COST_COLUMNS, written[1])
    for alpha in sorted({r["cvar_alpha"] for r in ratio_rows}, key=float):
        path = out / f"ratio_alpha_{alpha}.csv"
        write_csv([r for r in ratio_rows if r["cvar_alpha"] == alpha], RATIO_COLUMNS, path)
        written.append(path)
    written[2].write_text("Approximation ratio vs depth\n" + _text_table(ratio_rows, RATIO_COLUMNS)
                          + "\nGate cost vs depth\n" + _text_table(cost_rows, COST_COLUMNS))
    return written
