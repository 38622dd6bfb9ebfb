"""Tolerance/budget sweep harness: runs robot cleaners over a grid and
emits per-run CSV rows, per-cell aggregate JSON, and trend figures.

Cells are paired: run index r uses the same sampled cleaner model in every
cell, so the medians isolate the effect of t and B from cleaner variance.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .accountant import AccountantMode, PrivacyParams, WIDE_LAMBDA_GRID
from .cleaners import StrategyRun, run_strategy, sample_cleaner, strategy_task
from .data import Dataset, PairTable, build_pair_table, load_dataset, load_labels
from .engine import SessionData, TranslatorChoice, open_session
from .mechanisms import BETA_DEFAULT
from .synth import SynthConfig, generate_pair_table

RESULT_COLUMNS = (
    "task", "strategy", "t", "B", "run", "seed", "alpha", "metric",
    "recall", "precision", "f1", "cost", "queries_asked", "queries_answered",
    "queries_denied", "spent", "truncated", "output_size",
)


def _paper_literal_mode() -> AccountantMode:
    return AccountantMode(mode="moments", lambda_grid=WIDE_LAMBDA_GRID, tail_rule="paperLiteral")


@dataclass
class SweepConfig:
    strategy: str = "BS1"
    t_grid: tuple[float, ...] = (0.01, 0.02, 0.04, 0.08, 0.16, 0.32, 0.64)
    b_grid: tuple[float, ...] = (math.inf,)
    runs_per_cell: int = 20
    base_seed: int = 2024
    beta: float = BETA_DEFAULT
    delta: float = BETA_DEFAULT
    cost_cutoff: float = 55.0
    accountant: AccountantMode = field(default_factory=_paper_literal_mode)
    translator: TranslatorChoice = field(default_factory=TranslatorChoice)
    synthetic: Optional[SynthConfig] = field(default_factory=SynthConfig)
    dataset_paths: Optional[dict] = None  # {d1, d2, labels} overrides synthetic
    out_dir: Optional[str] = None

    @property
    def task(self) -> str:
        return strategy_task(self.strategy)

    @classmethod
    def from_dict(cls, obj: dict) -> "SweepConfig":
        kwargs: dict = {}
        for key in ("strategy", "runs_per_cell", "base_seed", "beta", "delta",
                    "cost_cutoff", "out_dir"):
            if key in obj:
                kwargs[key] = obj[key]
        if "t_grid" in obj:
            kwargs["t_grid"] = tuple(float(t) for t in obj["t_grid"])
        if "b_grid" in obj:
            kwargs["b_grid"] = tuple(
                math.inf if b in ("inf", None) else float(b) for b in obj["b_grid"]
            )
        if "accountant" in obj:
            kwargs["accountant"] = AccountantMode.from_dict(obj["accountant"])
        if "translator" in obj:
            kwargs["translator"] = TranslatorChoice.from_dict(obj["translator"])
        if "synthetic" in obj:
            kwargs["synthetic"] = SynthConfig(**obj["synthetic"])
        if "dataset_paths" in obj:
            kwargs["dataset_paths"] = dict(obj["dataset_paths"])
        return cls(**kwargs)


def load_sweep_data(cfg: SweepConfig) -> tuple[Dataset, Dataset, PairTable]:
    if cfg.dataset_paths:
        d1 = load_dataset(cfg.dataset_paths["d1"])
        d2 = load_dataset(cfg.dataset_paths["d2"])
        labels = load_labels(cfg.dataset_paths["labels"])
        return d1, d2, build_pair_table(d1, d2, labels, m=int(cfg.dataset_paths.get("m", 1)))
    return generate_pair_table(cfg.synthetic or SynthConfig())


def run_cell(
    cfg: SweepConfig,
    pair_table: PairTable,
    datasets: dict[str, Dataset],
    t: float,
    budget: float,
) -> list[StrategyRun]:
    alpha = t * pair_table.size
    runs = []
    for r in range(cfg.runs_per_cell):
        model_rng = np.random.default_rng(np.random.SeedSequence((cfg.base_seed, r)))
        model = sample_cleaner(cfg.strategy, model_rng)
        seed_seq = np.random.SeedSequence(
            (cfg.base_seed, r, int(round(t * 10000)), hash_budget(budget))
        )
        session = open_session(
            SessionData(pair_table=pair_table, datasets=datasets),
            PrivacyParams(B=budget, delta=cfg.delta),
            mode=cfg.accountant,
            seed=int(seed_seq.generate_state(1)[0]),
            default_beta=cfg.beta,
        )
        runs.append(run_strategy(
            model, session, cfg.strategy, alpha,
            cost_cutoff=cfg.cost_cutoff, translator=cfg.translator,
        ))
    return runs


def hash_budget(budget: float) -> int:
    return 999_999 if math.isinf(budget) else int(round(budget * 1_000_000))


def primary_metric(run: StrategyRun) -> float:
    if run.quality is None:
        return 0.0
    return run.quality.recall if run.task == "blocking" else run.quality.f1


def run_sweep(cfg: SweepConfig) -> dict:
    """Execute the full grid; returns {rows, cells} and writes artifacts
    when cfg.out_dir is set."""
    d1, d2, pair_table = load_sweep_data(cfg)
    datasets = {"d1": d1, "d2": d2}
    rows = []
    cells = []
    for t in cfg.t_grid:
        for budget in cfg.b_grid:
            cell_runs = run_cell(cfg, pair_table, datasets, t, budget)
            metrics = [primary_metric(r) for r in cell_runs]
            q1, med, q3 = (float(q) for q in np.percentile(metrics, (25, 50, 75)))
            cells.append({
                "t": t,
                "B": "inf" if math.isinf(budget) else budget,
                "median": med, "q1": q1, "q3": q3,
                "mean_queries": float(np.mean([r.queries_asked for r in cell_runs])),
                "mean_answered": float(np.mean([r.queries_answered for r in cell_runs])),
                "mean_spent": float(np.mean([
                    r.spent for r in cell_runs if not math.isinf(r.spent)
                ] or [0.0])),
            })
            for r_idx, run in enumerate(cell_runs):
                q = run.quality
                rows.append({
                    "task": cfg.task,
                    "strategy": cfg.strategy,
                    "t": t,
                    "B": "inf" if math.isinf(budget) else budget,
                    "run": r_idx,
                    "seed": cfg.base_seed,
                    "alpha": t * pair_table.size,
                    "metric": primary_metric(run),
                    "recall": q.recall if q else 0.0,
                    "precision": q.precision if q else 0.0,
                    "f1": q.f1 if q else 0.0,
                    "cost": q.cost if q else 0.0,
                    "queries_asked": run.queries_asked,
                    "queries_answered": run.queries_answered,
                    "queries_denied": run.queries_denied,
                    "spent": "inf" if math.isinf(run.spent) else run.spent,
                    "truncated": int(run.truncated),
                    "output_size": len(run.accepted),
                })
    result = {"config": _config_dict(cfg), "rows": rows, "cells": cells}
    if cfg.out_dir:
        write_artifacts(result, cfg)
    return result


def _config_dict(cfg: SweepConfig) -> dict:
    return {
        "task": cfg.task,
        "strategy": cfg.strategy,
        "t_grid": list(cfg.t_grid),
        "b_grid": ["inf" if math.isinf(b) else b for b in cfg.b_grid],
        "runs_per_cell": cfg.runs_per_cell,
        "base_seed": cfg.base_seed,
        "beta": cfg.beta,
        "delta": cfg.delta,
        "cost_cutoff": cfg.cost_cutoff,
        "accountant": cfg.accountant.to_dict(),
        "translator": cfg.translator.name,
    }


def write_artifacts(result: dict, cfg: SweepConfig) -> dict[str, str]:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS)
        writer.writeheader()
        for row in result["rows"]:
            writer.writerow(row)
    json_path = out / "summary.json"
    json_path.write_text(json.dumps(result["cells"], indent=2, sort_keys=True))
    fig_paths = render_figures(result, out)
    paths = {"csv": str(csv_path), "json": str(json_path), **fig_paths}
    return paths


def render_figures(result: dict, out: Path) -> dict[str, str]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cells = result["cells"]
    cfg = result["config"]
    metric_name = "recall" if cfg["task"] == "blocking" else "f1"
    paths = {}
    t_values = sorted({c["t"] for c in cells})
    b_values = sorted({c["B"] for c in cells}, key=lambda b: math.inf if b == "inf" else b)

    def _plot(series_values, x_key, series_key, xlabel, name):
        fig, ax = plt.subplots(figsize=(5, 3.4))
        for s in series_values:
            pts = [c for c in cells if c[series_key] == s]
            pts.sort(key=lambda c: c[x_key])
            xs = [c[x_key] for c in pts]
            med = [c["median"] for c in pts]
            lo = [c["q1"] for c in pts]
            hi = [c["q3"] for c in pts]
            label = f"{series_key}={s}"
            ax.plot(xs, med, marker="o", label=label)
            ax.fill_between(xs, lo, hi, alpha=0.2)
        ax.set_xscale("log", base=2)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(f"median {metric_name}")
        ax.set_ylim(-0.02, 1.02)
        ax.set_title(f"{cfg['strategy']} {cfg['task']}")
        if len(series_values) > 1:
            ax.legend(fontsize=7)
        fig.tight_layout()
        path = out / name
        fig.savefig(path, dpi=150)
        plt.close(fig)
        return str(path)

    if len(t_values) > 1:
        paths["fig_vs_t"] = _plot(
            b_values, "t", "B", "tolerance t (alpha = t*|Dt|)", "quality_vs_tolerance.png"
        )
    if len(b_values) > 1:
        cells_numeric = [c for c in cells if c["B"] != "inf"]
        if cells_numeric:
            fig, ax = plt.subplots(figsize=(5, 3.4))
            for t in t_values:
                pts = [c for c in cells_numeric if c["t"] == t]
                pts.sort(key=lambda c: c["B"])
                if not pts:
                    continue
                ax.plot([c["B"] for c in pts], [c["median"] for c in pts], marker="o",
                        label=f"t={t}")
                ax.fill_between([c["B"] for c in pts], [c["q1"] for c in pts],
                                [c["q3"] for c in pts], alpha=0.2)
            ax.set_xscale("log")
            ax.set_xlabel("privacy budget B")
            ax.set_ylabel(f"median {metric_name}")
            ax.set_ylim(-0.02, 1.02)
            ax.set_title(f"{cfg['strategy']} {cfg['task']}")
            if len(t_values) > 1:
                ax.legend(fontsize=7)
            fig.tight_layout()
            path = out / "quality_vs_budget.png"
            fig.savefig(path, dpi=150)
            plt.close(fig)
            paths["fig_vs_budget"] = str(path)
    return paths
