"""Seeded scenario campaigns over the initial-condition box.

Scenario starts are drawn uniformly from the box, one PCG64 generator per
scenario seeded from (master seed, scenario index), so the draws never
depend on batch grouping or parallel execution.  The four box corners and
the origin can be forced in on top of the random draws.  Campaign results
are ordered by scenario index and serialize to canonical JSON so a rerun
with the same configuration is byte-identical.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConstructionError
from .plant import PlantModel, benchmark_plant
from .regulator import Regulator
from .sim import BatchResult, SimConfig, _settle_scan, integrate_batch
from .smc import SurfaceParams
from .stability import settling_bound, verify_trajectory

__all__ = [
    "CampaignConfig",
    "ScenarioResult",
    "CampaignReport",
    "sample_scenarios",
    "run_campaign",
    "summarize",
    "report_to_json",
]

# |s| floor below which the decay audit is vacuous (chattering band).
COND3_SIGNAL_FLOOR = 1e-6


@dataclass(frozen=True)
class CampaignConfig:
    """Everything a campaign needs, including the regulators and plant."""

    surface: SurfaceParams
    reg_slide: Regulator
    reg_reach: Regulator
    sim: SimConfig = field(default_factory=SimConfig)
    plant: PlantModel = field(default_factory=benchmark_plant)
    n_scenarios: int = 100
    seed: int = 42
    x1_range: tuple[float, float] = (-1200.0, 1200.0)
    x2_range: tuple[float, float] = (-100.0, 100.0)
    corner_cases: bool = True
    time_tolerance: float = 1e-2
    plant_name: str = "benchmark"

    def __post_init__(self) -> None:
        if int(self.n_scenarios) < 1:
            raise ConstructionError(f"n_scenarios must be >= 1, got {self.n_scenarios!r}")
        for name in ("x1_range", "x2_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConstructionError(f"{name} must be an ordered finite pair, got ({lo!r}, {hi!r})")
        if int(self.seed) < 0:
            raise ConstructionError(f"seed must be a nonnegative integer, got {self.seed!r}")

    @property
    def settle_threshold_x1(self) -> float:
        if self.sim.settle_threshold_x1 is not None:
            return self.sim.settle_threshold_x1
        return math.sqrt(2.0 * self.surface.eta0)

    def config_dict(self) -> dict:
        """Deterministic summary of the configuration for reports."""
        reg = self.reg_slide
        reg_r = self.reg_reach
        return {
            "n_scenarios": int(self.n_scenarios),
            "seed": int(self.seed),
            "x1_range": list(self.x1_range),
            "x2_range": list(self.x2_range),
            "corner_cases": bool(self.corner_cases),
            "time_tolerance": float(self.time_tolerance),
            "plant": self.plant_name,
            "surface": {
                "p1": self.surface.p1,
                "q": self.surface.q,
                "eta0": self.surface.eta0,
                "t1": self.surface.t1,
                "t2": self.surface.t2,
                "kappa": self.surface.kappa,
                "sign_epsilon": self.surface.sign_epsilon,
            },
            "sim": {
                "dt": self.sim.dt,
                "horizon": self.sim.horizon,
                "settle_threshold_x1": self.settle_threshold_x1,
                "settle_threshold_s": self.sim.settle_threshold_s,
                "record_stride": int(self.sim.record_stride),
            },
            "reg_slide": {"kind": reg.kind.name, "p": reg.p, **_kind_params(reg)},
            "reg_reach": {"kind": reg_r.kind.name, "p": reg_r.p, **_kind_params(reg_r)},
        }


def _kind_params(reg: Regulator) -> dict:
    fields = getattr(type(reg.kind), "__dataclass_fields__", {})
    return {name: getattr(reg.kind, name) for name in fields}


def sample_scenarios(cfg: CampaignConfig) -> np.ndarray:
    """Scenario start states, shaped (n, 2); corners appended when enabled."""
    rows = []
    for i in range(int(cfg.n_scenarios)):
        rng = np.random.default_rng([int(cfg.seed), i])
        rows.append(
            (
                rng.uniform(cfg.x1_range[0], cfg.x1_range[1]),
                rng.uniform(cfg.x2_range[0], cfg.x2_range[1]),
            )
        )
    if cfg.corner_cases:
        x1_lo, x1_hi = cfg.x1_range
        x2_lo, x2_hi = cfg.x2_range
        rows += [(x1_lo, x2_lo), (x1_lo, x2_hi), (x1_hi, x2_lo), (x1_hi, x2_hi), (0.0, 0.0)]
    return np.array(rows, dtype=float)


@dataclass(frozen=True)
class ScenarioResult:
    index: int
    x0: tuple[float, float]
    settle_time_x1: Optional[float]
    settle_time_s: Optional[float]
    violated: bool
    early_term_reason: Optional[str]
    cond3_violations: int
    reach_bound: float

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "x0": list(self.x0),
            "settle_time_x1": self.settle_time_x1,
            "settle_time_s": self.settle_time_s,
            "violated": self.violated,
            "early_term_reason": self.early_term_reason,
            "cond3_violations": self.cond3_violations,
            "reach_bound": self.reach_bound,
        }


@dataclass
class CampaignReport:
    """Per-scenario outcomes plus aggregates; ``traces`` holds the raw
    batch record for plotting and is not part of the serialized report."""

    config: dict
    scenarios: list[ScenarioResult]
    aggregates: dict
    traces: Optional[BatchResult] = None

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "aggregates": self.aggregates,
            "scenarios": [s.to_dict() for s in self.scenarios],
        }


def _integrate_chunk(args) -> BatchResult:
    plant, params, reg_slide, reg_reach, x0, sim_cfg = args
    return integrate_batch(plant, params, reg_slide, reg_reach, x0, sim_cfg)


def _stack_results(parts: list[BatchResult]) -> BatchResult:
    first = parts[0]
    return BatchResult(
        dt_record=first.dt_record,
        t=first.t,
        x1=np.vstack([p.x1 for p in parts]),
        x2=np.vstack([p.x2 for p in parts]),
        s=np.vstack([p.s for p in parts]),
        u=np.vstack([p.u for p in parts]),
        v1=np.vstack([p.v1 for p in parts]),
        v2=np.vstack([p.v2 for p in parts]),
        death_step=np.concatenate([p.death_step for p in parts]),
        dt_step=first.dt_step,
    )


def run_campaign(cfg: CampaignConfig, workers: int = 1) -> CampaignReport:
    """Integrate every scenario, measure settle times, audit decay, aggregate.

    Per-scenario failures (non-finite states) are recorded, never raised.
    With ``workers > 1`` scenarios are split into contiguous chunks across
    processes; every per-scenario result is identical to the sequential
    run because the integration is elementwise per scenario.
    """
    x0s = sample_scenarios(cfg)
    n = x0s.shape[0]

    if workers > 1 and n > 1:
        chunks = np.array_split(np.arange(n), min(workers, n))
        jobs = [
            (cfg.plant, cfg.surface, cfg.reg_slide, cfg.reg_reach, x0s[idx], cfg.sim)
            for idx in chunks
            if idx.size
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_integrate_chunk, jobs))
        batch = _stack_results(parts)
    else:
        batch = integrate_batch(cfg.plant, cfg.surface, cfg.reg_slide, cfg.reg_reach, x0s, cfg.sim)

    thr_x1 = cfg.settle_threshold_x1
    thr_s = cfg.sim.settle_threshold_s
    deadline = cfg.surface.t1 + cfg.surface.t2 + cfg.time_tolerance

    scenarios: list[ScenarioResult] = []
    for i in range(n):
        settle_x1 = _settle_scan(batch.t, batch.x1[i], thr_x1)
        settle_s = _settle_scan(batch.t, batch.s[i], thr_s)
        traj = batch.scenario(i)
        if len(traj) >= 3:
            cond3 = len(
                verify_trajectory(
                    traj,
                    cfg.reg_reach,
                    cfg.surface.t2,
                    which_v="s",
                    signal_floor=COND3_SIGNAL_FLOOR,
                    branch_v1=cfg.surface.eta0,
                )
            )
        else:
            cond3 = 0
        s0 = float(batch.s[i, 0])
        reach_bound = settling_bound(cfg.reg_reach, 0.5 * s0 * s0, cfg.surface.t2).bound
        violated = settle_x1 is None or settle_x1 > deadline
        scenarios.append(
            ScenarioResult(
                index=i,
                x0=(float(x0s[i, 0]), float(x0s[i, 1])),
                settle_time_x1=settle_x1,
                settle_time_s=settle_s,
                violated=violated,
                early_term_reason=batch.termination_reason(i),
                cond3_violations=cond3,
                reach_bound=reach_bound,
            )
        )

    aggregates = _aggregate(scenarios, deadline)
    return CampaignReport(
        config=cfg.config_dict(),
        scenarios=scenarios,
        aggregates=aggregates,
        traces=batch,
    )


def _stats(values: list[float]) -> dict:
    if not values:
        return {"min": None, "mean": None, "max": None, "p50": None, "p90": None}
    arr = np.asarray(values, dtype=float)
    return {
        "min": float(arr.min()),
        "mean": float(arr.mean()),
        "max": float(arr.max()),
        "p50": float(np.percentile(arr, 50)),
        "p90": float(np.percentile(arr, 90)),
    }


def _aggregate(scenarios: list[ScenarioResult], deadline: float) -> dict:
    settle_x1 = [s.settle_time_x1 for s in scenarios if s.settle_time_x1 is not None]
    settle_s = [s.settle_time_s for s in scenarios if s.settle_time_s is not None]
    return {
        "n_scenarios": len(scenarios),
        "deadline": deadline,
        "violation_count": sum(1 for s in scenarios if s.violated),
        "cond3_violation_count": sum(s.cond3_violations for s in scenarios),
        "unsettled_x1": sum(1 for s in scenarios if s.settle_time_x1 is None),
        "unsettled_s": sum(1 for s in scenarios if s.settle_time_s is None),
        "early_terminations": sum(1 for s in scenarios if s.early_term_reason is not None),
        "settle_x1": _stats(settle_x1),
        "settle_s": _stats(settle_s),
    }


def summarize(report: CampaignReport) -> dict:
    """Aggregate view plus the per-scenario reach-bound comparison."""
    if not report.scenarios:
        raise ConstructionError("cannot summarize an empty report")
    sim = report.config["sim"]
    bound_tol = 2.0 * sim["dt"] * sim["record_stride"]
    per_scenario = [
        {
            "index": s.index,
            "x0": list(s.x0),
            "settle_time_x1": s.settle_time_x1,
            "settle_time_s": s.settle_time_s,
            "reach_bound": s.reach_bound,
            "within_reach_bound": (
                s.settle_time_s is not None and s.settle_time_s <= s.reach_bound + bound_tol
            ),
            "violated": s.violated,
        }
        for s in report.scenarios
    ]
    return {
        "aggregates": report.aggregates,
        "violations": [s.index for s in report.scenarios if s.violated],
        "per_scenario": per_scenario,
    }


def report_to_json(report: CampaignReport) -> str:
    """Canonical JSON encoding: sorted keys, fixed separators, newline end."""
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
