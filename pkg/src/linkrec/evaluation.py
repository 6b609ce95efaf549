"""Time-windowed evaluation: F1@N, Hit Ratio@N and MAP@N with
numerator/denominator decomposition, the sliding 8-window protocol and
time averaging.

The stream is split into n equal windows; fold k trains on windows
1..k and tests on window k+1. A user is evaluated in fold k when they
appear in the training data and selected at least one *new* item (one
they never picked during training) in the test window. Per-fold metric
components are summed across folds and divided once at the end, giving
the time-averaged value of each metric.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from itertools import accumulate
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

from .graphs import SESSION, TUSER, USER, RecGraph, build_graph
from .linkstream import Event, LinkStream, Window, split_windows
from .ranker import (
    item_matrix,
    pagerank_batch,
    personalization_matrix,
    transition_matrix,
)

if TYPE_CHECKING:
    from .tuning import ParamSetting

__all__ = [
    "Fold",
    "MetricComponents",
    "EvaluationReport",
    "hits_at_n",
    "f1_components",
    "hit_ratio_components",
    "map_components",
    "iter_folds",
    "run_protocol",
    "time_average",
    "report_to_dict",
    "report_json",
    "report_csv",
    "write_report_files",
    "REPORT_SCHEMA",
]

EVALUATED_USERS_RULE = "present in training with at least one new item in the test window"

# Users are scored in column blocks so one sparse matmul serves many
# walks; 128 columns keeps the iterate inside the cache on large graphs.
_BATCH_COLUMNS = 128


@dataclass(frozen=True)
class Fold:
    """Training/test split for one evaluation step.

    ``truth`` maps each evaluated user to their new test-window items
    (never empty sets); ``rec_time`` is the right edge of the training
    span, the timestamp recommendations are issued at.
    """

    k: int
    train: LinkStream
    test_window: Window
    test: LinkStream
    rec_time: float
    train_items: dict[str, set[str]]
    truth: dict[str, set[str]]


@dataclass(frozen=True)
class MetricComponents:
    """Per-window numerator/denominator pairs for F1, HR and MAP."""

    window: int
    users: int
    f1: tuple[float, float]
    hr: tuple[float, float]
    map: tuple[float, float]
    skipped: bool = False


@dataclass
class EvaluationReport:
    flavor: str
    params: "ParamSetting"
    n_windows: int
    windows: list[MetricComponents]
    ta_f1: float | None
    ta_hr: float | None
    ta_map: float | None
    all_converged: bool = True

    @property
    def nothing_evaluated(self) -> bool:
        return all(c.skipped for c in self.windows)


def hits_at_n(
    recommended: Sequence[tuple[str, float]], relevant: set[str]
) -> tuple[list[int], list[int]]:
    """Per-rank hit flags h(1..N) and their prefix sums hit_k."""
    h = [1 if item in relevant else 0 for item, _ in recommended]
    return h, list(accumulate(h))


def f1_components(
    hit_counts: Sequence[int], new_counts: Sequence[int], n: int
) -> tuple[float, float]:
    """F1@N components: (sum of 2*hit_N(u), sum of |I_new(u)| + N)."""
    if len(hit_counts) != len(new_counts):
        raise ValueError("one hit count and one I_new size per user")
    if any(c < 1 for c in new_counts):
        raise ValueError("every evaluated user needs at least one relevant item")
    if not hit_counts:
        return (0.0, 0.0)
    return (2.0 * sum(hit_counts), float(sum(c + n for c in new_counts)))


def hit_ratio_components(hit_counts: Sequence[int]) -> tuple[float, float]:
    """HR@N components: (#users with a hit, #users evaluated)."""
    return (float(sum(1 for c in hit_counts if c > 0)), float(len(hit_counts)))


def average_precision(h: Sequence[int], n: int) -> float:
    """AP@N from per-rank hit flags; 0 when nothing was hit."""
    hit_k = list(accumulate(h))
    hit_n = hit_k[-1] if hit_k else 0
    if hit_n == 0:
        return 0.0
    return sum(hk * hj / k for k, (hk, hj) in enumerate(zip(hit_k, h), start=1)) / hit_n


def map_components(
    flags_per_user: Sequence[Sequence[int]], n: int
) -> tuple[float, float]:
    """MAP@N components: (sum of AP_N(u), #users evaluated)."""
    return (
        float(sum(average_precision(h, n) for h in flags_per_user)),
        float(len(flags_per_user)),
    )


def time_average(components: Iterable[MetricComponents]) -> tuple[float, float, float]:
    """TA value per metric: summed numerators over summed denominators."""
    comps = list(components)
    sums = {
        name: (
            sum(getattr(c, name)[0] for c in comps),
            sum(getattr(c, name)[1] for c in comps),
        )
        for name in ("f1", "hr", "map")
    }
    if all(den == 0 for _, den in sums.values()):
        raise ValueError("nothing evaluated")
    return tuple(num / den for num, den in sums.values())  # type: ignore[return-value]


def iter_folds(stream: LinkStream, n_windows: int = 8) -> list[Fold]:
    """Materialize the sliding train/test folds of the protocol."""
    windows = split_windows(stream, n_windows)
    alpha = stream.alpha
    folds = []
    train_events: list[Event] = []
    for k in range(1, n_windows):
        w_train, sub = windows[k - 1]
        train_events.extend(sub.events)
        w_test, test_sub = windows[k]
        train = LinkStream.from_events(train_events, time_span=(alpha, w_train.end))
        train_items = train.items_by_user()
        truth = {}
        for user, items in test_sub.items_by_user().items():
            if user not in train_items:
                continue
            new = items - train_items[user]
            if new:
                truth[user] = new
        folds.append(
            Fold(
                k=k,
                train=train,
                test_window=w_test,
                test=test_sub,
                rec_time=w_train.end,
                train_items=train_items,
                truth=truth,
            )
        )
    return folds


def _restart_vectors(
    graph: RecGraph, users: Sequence[str], t: float, beta: float | None
) -> list[dict]:
    """Restart vectors for many users in one pass over the node set.

    Same semantics as :func:`linkrec.ranker.personalization`, which
    scans the graph per call; here the per-user latest session/time is
    collected once.
    """
    wanted = set(users)
    if graph.flavor == "bip":
        return [{(USER, u): 1.0} for u in users]
    if graph.flavor == "stg":
        if beta is None or not 0.0 <= beta <= 1.0:
            raise ValueError("stg personalization requires beta in [0, 1]")
        last_session: dict[str, int] = {}
        for node in graph.nodes:
            if node[0] == SESSION and node[1] in wanted:
                last_session[node[1]] = max(last_session.get(node[1], 0), node[2])
        out = []
        for u in users:
            d = {}
            if beta > 0.0:
                d[(USER, u)] = beta
            if beta < 1.0:
                d[(SESSION, u, last_session[u])] = 1.0 - beta
            out.append(d)
        return out
    if graph.flavor == "lsg":
        last_time: dict[str, int] = {}
        for node in graph.nodes:
            if node[0] == TUSER and node[2] in wanted and node[1] <= t:
                if node[2] not in last_time or node[1] > last_time[node[2]]:
                    last_time[node[2]] = node[1]
        return [{(TUSER, last_time[u], u): 1.0} for u in users]
    raise ValueError(f"unknown graph flavor {graph.flavor!r}")


def _evaluate_fold(
    fold: Fold, graph: RecGraph, params: "ParamSetting"
) -> tuple[MetricComponents, bool]:
    tm = transition_matrix(graph)
    items, A = item_matrix(graph, tm)
    item_row = {item: r for r, item in enumerate(items)}
    users = sorted(fold.truth)
    restarts = _restart_vectors(graph, users, fold.rec_time, params.beta)

    hit_counts: list[int] = []
    new_counts: list[int] = []
    flags: list[list[int]] = []
    all_converged = True
    order_rank = np.arange(len(items))
    for start in range(0, len(users), _BATCH_COLUMNS):
        block = users[start : start + _BATCH_COLUMNS]
        D = personalization_matrix(tm, restarts[start : start + _BATCH_COLUMNS])
        X, converged, _ = pagerank_batch(tm, D, params.alpha)
        all_converged = all_converged and converged
        scores = A @ X
        for j, user in enumerate(block):
            col = scores[:, j].copy()
            for seen in fold.train_items[user]:
                col[item_row[seen]] = -np.inf
            ranked = np.lexsort((order_rank, -col))
            h = []
            for idx in ranked[: params.n]:
                if col[idx] == -np.inf:
                    break
                h.append(1 if items[idx] in fold.truth[user] else 0)
            flags.append(h)
            hit_counts.append(sum(h))
            new_counts.append(len(fold.truth[user]))

    components = MetricComponents(
        window=fold.k,
        users=len(users),
        f1=f1_components(hit_counts, new_counts, params.n),
        hr=hit_ratio_components(hit_counts),
        map=map_components(flags, params.n),
    )
    return components, all_converged


def run_protocol(
    stream: LinkStream,
    flavor: str,
    params: "ParamSetting",
    n_windows: int = 8,
) -> EvaluationReport:
    """Evaluate one parameter setting over all folds of the protocol.

    Folds without evaluable users contribute (0, 0) components and are
    marked skipped; a report where every fold was skipped has None for
    the time-averaged metrics and ``nothing_evaluated`` set.
    """
    components: list[MetricComponents] = []
    all_converged = True
    for fold in iter_folds(stream, n_windows):
        if not fold.truth:
            components.append(
                MetricComponents(
                    window=fold.k,
                    users=0,
                    f1=(0.0, 0.0),
                    hr=(0.0, 0.0),
                    map=(0.0, 0.0),
                    skipped=True,
                )
            )
            continue
        graph = build_graph(flavor, fold.train, delta=params.delta, eta_s=params.eta_s)
        comp, converged = _evaluate_fold(fold, graph, params)
        all_converged = all_converged and converged
        components.append(comp)

    if all(c.skipped for c in components):
        ta = (None, None, None)
    else:
        ta = time_average(components)
    return EvaluationReport(
        flavor=flavor,
        params=params,
        n_windows=n_windows,
        windows=components,
        ta_f1=ta[0],
        ta_hr=ta[1],
        ta_map=ta[2],
        all_converged=all_converged,
    )


# --- serialization ---------------------------------------------------------

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["flavor", "n_windows", "params", "windows", "time_averaged"],
    "properties": {
        "flavor": {"enum": ["bip", "stg", "lsg"]},
        "n_windows": {"type": "integer", "minimum": 2},
        "params": {
            "type": "object",
            "required": ["delta", "beta", "eta_s", "alpha", "n"],
            "properties": {
                "delta": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "beta": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                "eta_s": {"type": ["number", "null"], "minimum": 0},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "n": {"type": "integer", "minimum": 1},
            },
        },
        "windows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["window", "users", "skipped", "f1", "hr", "map"],
                "properties": {
                    "window": {"type": "integer", "minimum": 1},
                    "users": {"type": "integer", "minimum": 0},
                    "skipped": {"type": "boolean"},
                    "f1": {"$ref": "#/$defs/components"},
                    "hr": {"$ref": "#/$defs/components"},
                    "map": {"$ref": "#/$defs/components"},
                },
            },
        },
        "time_averaged": {
            "type": "object",
            "required": ["f1", "hr", "map"],
            "properties": {
                name: {"type": ["number", "null"], "minimum": 0, "maximum": 1}
                for name in ("f1", "hr", "map")
            },
        },
        "all_converged": {"type": "boolean"},
        "notes": {"type": "object"},
        "config": {"type": "object"},
    },
    "$defs": {
        "components": {
            "type": "object",
            "required": ["numerator", "denominator"],
            "properties": {
                "numerator": {"type": "number", "minimum": 0},
                "denominator": {"type": "number", "minimum": 0},
            },
        },
    },
}


def report_to_dict(report: EvaluationReport, config: Mapping | None = None) -> dict:
    """JSON-ready structure; ``config`` embeds the run's effective settings."""
    params = report.params
    out: dict = {
        "flavor": report.flavor,
        "n_windows": report.n_windows,
        "params": {
            "delta": params.delta,
            "beta": params.beta,
            "eta_s": params.eta_s,
            "alpha": params.alpha,
            "n": params.n,
        },
        "windows": [
            {
                "window": c.window,
                "users": c.users,
                "skipped": c.skipped,
                "f1": {"numerator": c.f1[0], "denominator": c.f1[1]},
                "hr": {"numerator": c.hr[0], "denominator": c.hr[1]},
                "map": {"numerator": c.map[0], "denominator": c.map[1]},
            }
            for c in report.windows
        ],
        "time_averaged": {"f1": report.ta_f1, "hr": report.ta_hr, "map": report.ta_map},
        "all_converged": report.all_converged,
        "notes": {"evaluated_users": EVALUATED_USERS_RULE},
    }
    if config is not None:
        out["config"] = dict(config)
    return out


def report_json(report: EvaluationReport, config: Mapping | None = None) -> str:
    return json.dumps(report_to_dict(report, config), indent=2) + "\n"


def report_csv(report: EvaluationReport) -> str:
    """One flat row per (window, metric): numerator, denominator, value."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["window", "users", "metric", "numerator", "denominator", "value"])
    for c in report.windows:
        for name in ("f1", "hr", "map"):
            num, den = getattr(c, name)
            value = repr(num / den) if den else ""
            writer.writerow([c.window, c.users, name, repr(num), repr(den), value])
    return buf.getvalue()


def write_report_files(
    report: EvaluationReport, out_dir, config: Mapping | None = None
) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    csv_path = out / "report.csv"
    json_path.write_text(report_json(report, config), encoding="utf-8")
    csv_path.write_text(report_csv(report), encoding="utf-8")
    return json_path, csv_path
