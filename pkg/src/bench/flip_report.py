"""
Performance Flip Reports
Classify (dataset, method) cells by the AUCs of their two down-sampled variants
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.dataset_registry import dataset_kind
from core.errors import ReportError
from bench.benchmark_runner import BenchmarkResult

logger = logging.getLogger(__name__)

GAP_THRESHOLDS = (0.2, 0.3, 0.4)
FLIP_TABLE_COLUMNS = ["dataset", "method", "auc0", "auc1", "gap", "sum", "classification"]
CONFIG_COLUMNS = ("L", "rate", "mode", "seeds")


class FlipClass(Enum):
    BOTH_WORSE = "both_worse_than_random"
    BOTH_BETTER = "both_better_than_random"
    FLIP = "performance_flip"
    INDETERMINATE = "indeterminate"
    INCOMPLETE = "incomplete"
    CONFLICTING = "conflicting"


UNCLASSIFIED = (FlipClass.INCOMPLETE.value, FlipClass.CONFLICTING.value)


def classify(auc0: float, auc1: float) -> FlipClass:
    """
    Flip iff min < 0.5 < max; both better/worse iff both strictly above/below;
    any mean AUC of exactly 0.5 is indeterminate
    """
    low, high = min(auc0, auc1), max(auc0, auc1)
    if low == 0.5 or high == 0.5:
        return FlipClass.INDETERMINATE
    if low < 0.5 < high:
        return FlipClass.FLIP
    if low > 0.5:
        return FlipClass.BOTH_BETTER
    return FlipClass.BOTH_WORSE


@dataclass(frozen=True)
class FlipReport:
    """Both variants' AUC statistics of one (dataset, method) cell"""
    dataset: str
    method: str
    auc0: float
    std0: float
    auc1: float
    std1: float

    @property
    def gap(self) -> float:
        return abs(self.auc0 - self.auc1)

    @property
    def auc_sum(self) -> float:
        return self.auc0 + self.auc1

    @property
    def classification(self) -> FlipClass:
        return classify(self.auc0, self.auc1)

    def row(self) -> Dict:
        return {
            "dataset": self.dataset,
            "method": self.method,
            "auc0": self.auc0,
            "auc1": self.auc1,
            "gap": self.gap,
            "sum": self.auc_sum,
            "classification": self.classification.value,
        }


def _comparable_config(result: BenchmarkResult) -> Dict:
    config = result.config
    config.pop("dc", None)
    return config


def flip_report(results: Sequence[BenchmarkResult]) -> FlipReport:
    """
    Combine the dc=0 and dc=1 results of one (dataset, method) cell

    Raises:
        ReportError: not exactly one result per class, or configs that differ beyond dc
    """
    by_class = {}
    for result in results:
        if result.dc in by_class:
            raise ReportError(f"two results for dc={result.dc} of {result.dataset}")
        by_class[result.dc] = result
    if set(by_class) != {0, 1}:
        raise ReportError(f"need results for dc=0 and dc=1, got {sorted(by_class)}")

    first, second = by_class[0], by_class[1]
    if _comparable_config(first) != _comparable_config(second) or first.seeds != second.seeds:
        raise ReportError(
            f"variants of {first.dataset} {first.method.name} were run with different configs"
        )
    return FlipReport(dataset=first.dataset, method=first.method.name,
                      auc0=first.mean_auc, std0=first.std,
                      auc1=second.mean_auc, std1=second.std)


def _gap_fractions(frame: pd.DataFrame) -> Dict[str, float]:
    gaps = frame["gap"].to_numpy(dtype=float)
    out = {"cases": int(len(gaps))}
    for threshold in GAP_THRESHOLDS:
        key = f"gap_ge_{threshold:g}".replace(".", "_")
        # 1e-12 keeps a gap printed as 0.200 on the threshold
        out[key] = float(np.mean(gaps >= threshold - 1e-12)) if len(gaps) else float("nan")
    out["flips"] = int((frame["classification"] == FlipClass.FLIP.value).sum())
    return out


def flip_table(summary: pd.DataFrame,
               kinds: Optional[Dict[str, str]] = None) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    One row per (dataset, method, run config) from summary rows (dataset, method, dc, mean_auc, ...)

    Rows are paired only when their L, rate, mode and seed count agree, for
    whichever of those columns the summary carries. Cells missing a variant
    are kept and marked incomplete; cells with disagreeing rows for one
    variant are marked conflicting. Aggregates give the fraction of
    classified cells with gap >= 0.2 / 0.3 / 0.4, overall and per dataset kind.

    Returns:
        (flip table, aggregates)
    """
    missing = {"dataset", "method", "dc", "mean_auc"} - set(summary.columns)
    if missing:
        raise ReportError(f"summary rows lack columns {sorted(missing)}")

    config_columns = [c for c in CONFIG_COLUMNS if c in summary.columns]
    keys = ["dataset", "method"] + config_columns
    rows = []
    for cell, group in summary.groupby(keys, sort=True, dropna=False):
        base = dict(zip(keys, cell))
        means, conflicting = {}, False
        for dc, sub in group.groupby("dc"):
            values = sub["mean_auc"].astype(float).unique()
            conflicting |= len(values) > 1
            means[int(dc)] = float(values[0])
        if conflicting or set(means) != {0, 1}:
            status = FlipClass.CONFLICTING if conflicting else FlipClass.INCOMPLETE
            rows.append({**base, "auc0": np.nan if conflicting else means.get(0, np.nan),
                         "auc1": np.nan if conflicting else means.get(1, np.nan),
                         "gap": np.nan, "sum": np.nan, "classification": status.value})
            continue
        report = FlipReport(base["dataset"], base["method"], means[0], float("nan"),
                            means[1], float("nan"))
        rows.append({**base, **report.row()})
    columns = FLIP_TABLE_COLUMNS[:2] + config_columns + FLIP_TABLE_COLUMNS[2:]
    table = pd.DataFrame(rows, columns=columns)

    unclassified = table["classification"].isin(UNCLASSIFIED)
    complete = table[~unclassified].copy()
    kind_of = kinds or {}
    complete["kind"] = [kind_of.get(name) or _kind_value(name) for name in complete["dataset"]]

    aggregates = [dict(scope="all", **_gap_fractions(complete))]
    for kind, group in complete.groupby("kind", sort=True):
        aggregates.append(dict(scope=kind, **_gap_fractions(group)))
    for status in UNCLASSIFIED:
        count = int((table["classification"] == status).sum())
        if count:
            logger.warning("%d flip table cell(s) are %s", count, status)
    return table, pd.DataFrame(aggregates)


def _kind_value(name: str) -> str:
    kind = dataset_kind(name)
    return kind.value if kind is not None else "unknown"


def reports_from_results(results: Iterable[BenchmarkResult]) -> pd.DataFrame:
    """Summary frame of benchmark results, ready for flip_table"""
    return pd.DataFrame([result.summary_row() for result in results])
