"""Randomized hyperparameter search over the predefined parameter grid.

Settings are drawn uniformly (without replacement) from the cross
product of the lists relevant to the graph flavor: alpha alone for BIP;
eta_s and alpha for LSG; delta, beta, eta_s and alpha for STG. The
top-N length is fixed per run, not searched. Every sampled setting is
scored with the full windowed protocol and all three time-averaged
metrics are kept, so the best row can be read off for any metric.
"""

from __future__ import annotations

import csv
import io
import logging
import random
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from itertools import product

from .evaluation import EvaluationReport, run_protocol
from .linkstream import LinkStream

__all__ = [
    "ParamSetting",
    "ParamGrid",
    "SearchEntry",
    "SearchResult",
    "sample_settings",
    "search",
    "leaderboard_csv",
    "OBJECTIVES",
]

log = logging.getLogger(__name__)

DAY = 86400.0

# Predefined candidate values (durations in seconds).
GRID_DELTA = tuple(d * DAY for d in (7, 30, 60, 90, 180, 365, 540, 730))
GRID_BETA = (0.1, 0.3, 0.5, 0.7, 0.9)
GRID_ETA_S = (0.0, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0)
GRID_ALPHA = (0.05, 0.1, 0.15, 0.3, 0.5, 0.7, 0.9)

OBJECTIVES = ("f1", "hr", "map")

# Grid dimensions that matter per flavor, in cross-product order.
RELEVANT_FIELDS = {
    "bip": ("alpha",),
    "stg": ("delta", "beta", "eta_s", "alpha"),
    "lsg": ("eta_s", "alpha"),
}


@dataclass(frozen=True)
class ParamSetting:
    """One point of the hyperparameter space.

    Fields irrelevant to a flavor stay None (delta/beta for LSG,
    everything but alpha for BIP). ``n`` is the recommendation list
    length.
    """

    alpha: float
    n: int = 10
    delta: float | None = None
    beta: float | None = None
    eta_s: float | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.delta is not None and self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.beta is not None and not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.eta_s is not None and self.eta_s < 0:
            raise ValueError("eta_s must be non-negative")


@dataclass(frozen=True)
class ParamGrid:
    """Ordered candidate lists per parameter; defaults are the predefined grid."""

    delta: tuple[float, ...] = GRID_DELTA
    beta: tuple[float, ...] = GRID_BETA
    eta_s: tuple[float, ...] = GRID_ETA_S
    alpha: tuple[float, ...] = GRID_ALPHA

    def __post_init__(self):
        for name in ("delta", "beta", "eta_s", "alpha"):
            if not getattr(self, name):
                raise ValueError(f"grid list {name!r} is empty")
        if any(d <= 0 for d in self.delta):
            raise ValueError("delta candidates must be positive")
        if any(not 0.0 <= b <= 1.0 for b in self.beta):
            raise ValueError("beta candidates must lie in [0, 1]")
        if any(e < 0 for e in self.eta_s):
            raise ValueError("eta_s candidates must be non-negative")
        if any(not 0.0 < a < 1.0 for a in self.alpha):
            raise ValueError("alpha candidates must lie in (0, 1)")

    def size(self, flavor: str) -> int:
        out = 1
        for name in RELEVANT_FIELDS[flavor]:
            out *= len(getattr(self, name))
        return out


def sample_settings(
    grid: ParamGrid, flavor: str, count: int, seed: int, n: int = 10
) -> list[ParamSetting]:
    """Draw ``count`` distinct settings uniformly from the flavor's grid.

    Deterministic for a given seed. When the cross product is smaller
    than ``count`` the whole product is returned (with a log notice).
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    fields = RELEVANT_FIELDS.get(flavor)
    if fields is None:
        raise ValueError(f"unknown graph flavor {flavor!r}")
    combos = list(product(*(getattr(grid, name) for name in fields)))
    if count >= len(combos):
        if count > len(combos):
            log.warning(
                "grid for %s has only %d combinations (requested %d); using all",
                flavor,
                len(combos),
                count,
            )
        chosen = combos
    else:
        chosen = random.Random(seed).sample(combos, count)
    return [
        ParamSetting(n=n, **dict(zip(fields, combo)))
        for combo in chosen
    ]


@dataclass(frozen=True)
class SearchEntry:
    """Outcome of scoring one sampled setting."""

    sample_index: int
    setting: ParamSetting
    ta_f1: float | None
    ta_hr: float | None
    ta_map: float | None
    status: str  # "ok" | "failed"
    error: str | None = None

    def objective_value(self, objective: str) -> float:
        value = {"f1": self.ta_f1, "hr": self.ta_hr, "map": self.ta_map}[objective]
        assert value is not None
        return value


@dataclass
class SearchResult:
    """Ranked leaderboard plus the settings that failed to evaluate."""

    flavor: str
    objective: str
    entries: list[SearchEntry]  # ok rows, ranked by the chosen objective
    failed: list[SearchEntry]
    n_sampled: int

    @property
    def best(self) -> SearchEntry:
        if not self.entries:
            raise ValueError("nothing evaluated")
        return self.entries[0]

    def ranked_by(self, objective: str) -> list[SearchEntry]:
        if objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {objective!r}")
        return sorted(
            self.entries,
            key=lambda e: (-e.objective_value(objective), e.sample_index),
        )

    def best_for(self, objective: str) -> SearchEntry:
        ranked = self.ranked_by(objective)
        if not ranked:
            raise ValueError("nothing evaluated")
        return ranked[0]


def _entry_from_report(
    index: int, setting: ParamSetting, report: EvaluationReport
) -> SearchEntry:
    if report.nothing_evaluated:
        return SearchEntry(
            sample_index=index,
            setting=setting,
            ta_f1=None,
            ta_hr=None,
            ta_map=None,
            status="failed",
            error="nothing evaluated",
        )
    return SearchEntry(
        sample_index=index,
        setting=setting,
        ta_f1=report.ta_f1,
        ta_hr=report.ta_hr,
        ta_map=report.ta_map,
        status="ok",
    )


def search(
    stream: LinkStream,
    flavor: str,
    grid: ParamGrid | None = None,
    count: int = 50,
    seed: int = 0,
    objective: str = "f1",
    n: int = 10,
    n_windows: int = 8,
    workers: int = 1,
) -> SearchResult:
    """Score sampled settings with the windowed protocol and rank them.

    A setting whose evaluation raises (or evaluates nobody) is recorded
    as failed and left out of the ranking; the campaign continues.
    Results are keyed by sample index, so worker parallelism cannot
    change the output.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    if grid is None:
        grid = ParamGrid()
    settings = sample_settings(grid, flavor, count, seed, n=n)

    outcomes: dict[int, SearchEntry] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(run_protocol, stream, flavor, setting, n_windows): (
                    index,
                    setting,
                )
                for index, setting in enumerate(settings)
            }
            for future in as_completed(futures):
                index, setting = futures[future]
                try:
                    report = future.result()
                except Exception as exc:
                    outcomes[index] = SearchEntry(
                        index, setting, None, None, None, "failed", str(exc)
                    )
                else:
                    outcomes[index] = _entry_from_report(index, setting, report)
    else:
        for index, setting in enumerate(settings):
            try:
                report = run_protocol(stream, flavor, setting, n_windows)
            except Exception as exc:
                outcomes[index] = SearchEntry(
                    index, setting, None, None, None, "failed", str(exc)
                )
            else:
                outcomes[index] = _entry_from_report(index, setting, report)

    ordered = [outcomes[i] for i in range(len(settings))]
    ok = [e for e in ordered if e.status == "ok"]
    failed = [e for e in ordered if e.status != "ok"]
    ok.sort(key=lambda e: (-e.objective_value(objective), e.sample_index))
    return SearchResult(
        flavor=flavor,
        objective=objective,
        entries=ok,
        failed=failed,
        n_sampled=len(settings),
    )


def leaderboard_csv(result: SearchResult) -> str:
    """Ranked rows first, then failed rows in sample order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "sample_index",
            "flavor",
            "delta",
            "beta",
            "eta_s",
            "alpha",
            "n",
            "TA_F1",
            "TA_HR",
            "TA_MAP",
            "status",
        ]
    )

    def fmt(value) -> str:
        return "" if value is None else repr(value)

    for entry in list(result.entries) + list(result.failed):
        s = entry.setting
        writer.writerow(
            [
                entry.sample_index,
                result.flavor,
                fmt(s.delta),
                fmt(s.beta),
                fmt(s.eta_s),
                repr(s.alpha),
                s.n,
                fmt(entry.ta_f1),
                fmt(entry.ta_hr),
                fmt(entry.ta_map),
                entry.status,
            ]
        )
    return buf.getvalue()
