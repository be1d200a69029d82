"""Linear-vs-SRSW comparison reports and their text/JSON/CSV renderings.

Every rendering is derived from the same report objects; nothing here
recomputes a metric.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from statistics import fmean
from typing import Iterable, Sequence

from .metrics import DEFAULT_DELTAS, MetricsReport, full_report
from .model import ValidatorSnapshot, WeightScheme, apply_weights


def analyze(snapshot: ValidatorSnapshot, scheme=WeightScheme.LINEAR, deltas: Iterable[int] = DEFAULT_DELTAS) -> MetricsReport:
    return full_report(apply_weights(snapshot, scheme), list(deltas))


def pct_change(before: float, after: float) -> float:
    """Percentage change from ``before`` to ``after``; zero when ``before`` is zero."""
    if before == 0:
        return 0.0
    return (after - before) / before * 100


@dataclass(frozen=True)
class ComparisonRow:
    chain: str
    m: int
    linear: MetricsReport
    srsw: MetricsReport

    @property
    def gini_pct_decrease(self) -> float:
        return -pct_change(self.linear.gini, self.srsw.gini)

    @property
    def nl_pct_increase(self) -> float:
        return pct_change(self.linear.nakamoto_liveness, self.srsw.nakamoto_liveness)

    @property
    def ns_pct_increase(self) -> float:
        return pct_change(self.linear.nakamoto_safety, self.srsw.nakamoto_safety)

    def as_dict(self) -> dict:
        return {
            "chain": self.chain,
            "m": self.m,
            "linear": self.linear.as_dict(),
            "srsw": self.srsw.as_dict(),
            "gini_pct_decrease": self.gini_pct_decrease,
            "nl_pct_increase": self.nl_pct_increase,
            "ns_pct_increase": self.ns_pct_increase,
        }


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...]
    errors: tuple[tuple[str, str], ...] = ()

    @property
    def mean_gini_pct_decrease(self) -> float:
        return fmean(r.gini_pct_decrease for r in self.rows)

    @property
    def mean_nl_pct_increase(self) -> float:
        return fmean(r.nl_pct_increase for r in self.rows)

    @property
    def mean_ns_pct_increase(self) -> float:
        return fmean(r.ns_pct_increase for r in self.rows)

    def as_dict(self) -> dict:
        return {
            "rows": [r.as_dict() for r in self.rows],
            "mean": {
                "gini_pct_decrease": self.mean_gini_pct_decrease,
                "nl_pct_increase": self.mean_nl_pct_increase,
                "ns_pct_increase": self.mean_ns_pct_increase,
            },
            "errors": [{"source": s, "error": e} for s, e in self.errors],
        }


def compare_row(snapshot: ValidatorSnapshot, deltas: Iterable[int] = DEFAULT_DELTAS) -> ComparisonRow:
    deltas = list(deltas)
    lin = analyze(snapshot, WeightScheme.LINEAR, deltas)
    sq = analyze(snapshot, WeightScheme.SRSW, deltas)
    return ComparisonRow(snapshot.chain, lin.m, lin, sq)


def compare(snapshots: Sequence[ValidatorSnapshot], deltas: Iterable[int] = DEFAULT_DELTAS) -> ComparisonReport:
    deltas = list(deltas)
    return ComparisonReport(tuple(compare_row(s, deltas) for s in snapshots))


# -- rendering ----------------------------------------------------------------

def fmt_pair(rho: float, n: int) -> str:
    return f"{rho:.2f} ({n})"


def fmt_eps(eps: float) -> str:
    return f"{eps:.6e}"


def metrics_cells(r: MetricsReport) -> list[str]:
    cells = [str(r.m), f"{r.gini:.2f}", fmt_pair(r.rho_liveness, r.nakamoto_liveness), fmt_pair(r.rho_safety, r.nakamoto_safety)]
    cells += [fmt_eps(r.epsilon_by_delta[d]) for d in sorted(r.epsilon_by_delta)]
    return cells


def metrics_header(r: MetricsReport) -> list[str]:
    return ["m", "G", "rho_L (N_L)", "rho_S (N_S)"] + [f"eps(d={d})" for d in sorted(r.epsilon_by_delta)]


def render_metrics_table(reports: Sequence[MetricsReport]) -> str:
    """One block per report: a label line, a header and the metrics row."""
    out = []
    for r in reports:
        out.append(f"# {r.chain} [{r.scheme}]")
        out.append("  ".join(metrics_header(r)))
        out.append("  ".join(metrics_cells(r)))
    return "\n".join(out) + "\n"


def render_metrics_csv(reports: Sequence[MetricsReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    deltas = sorted(reports[0].epsilon_by_delta) if reports else []
    w.writerow(["chain", "scheme", "m", "gini", "nakamoto_liveness", "rho_liveness",
                "nakamoto_safety", "rho_safety"] + [f"epsilon_{d}" for d in deltas])
    for r in reports:
        w.writerow([r.chain, r.scheme, r.m, repr(r.gini), r.nakamoto_liveness, repr(r.rho_liveness),
                    r.nakamoto_safety, repr(r.rho_safety)] + [repr(r.epsilon_by_delta[d]) for d in deltas])
    return buf.getvalue()


def render_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


COMPARISON_HEADER = ["chain", "m", "G", "G*", "G %dec", "N_L", "N_L*", "N_L %inc", "N_S", "N_S*", "N_S %inc"]


def render_comparison_table(rep: ComparisonReport) -> str:
    rows = [COMPARISON_HEADER]
    for r in rep.rows:
        rows.append([
            r.chain, str(r.m),
            f"{r.linear.gini:.4f}", f"{r.srsw.gini:.4f}", f"{r.gini_pct_decrease:.2f}",
            str(r.linear.nakamoto_liveness), str(r.srsw.nakamoto_liveness), f"{r.nl_pct_increase:.2f}",
            str(r.linear.nakamoto_safety), str(r.srsw.nakamoto_safety), f"{r.ns_pct_increase:.2f}",
        ])
    if rep.rows:
        rows.append(["mean", "", "", "", f"{rep.mean_gini_pct_decrease:.2f}", "", "",
                     f"{rep.mean_nl_pct_increase:.2f}", "", "", f"{rep.mean_ns_pct_increase:.2f}"])
    text = _align(rows)
    for src, err in rep.errors:
        text += f"skipped {src}: {err}\n"
    return text


def render_comparison_csv(rep: ComparisonReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["chain", "m", "gini", "gini_srsw", "gini_pct_decrease", "nakamoto_liveness",
                "nakamoto_liveness_srsw", "nl_pct_increase", "nakamoto_safety", "nakamoto_safety_srsw",
                "ns_pct_increase"])
    for r in rep.rows:
        w.writerow([r.chain, r.m, repr(r.linear.gini), repr(r.srsw.gini), repr(r.gini_pct_decrease),
                    r.linear.nakamoto_liveness, r.srsw.nakamoto_liveness, repr(r.nl_pct_increase),
                    r.linear.nakamoto_safety, r.srsw.nakamoto_safety, repr(r.ns_pct_increase)])
    if rep.rows:
        w.writerow(["mean", "", "", "", repr(rep.mean_gini_pct_decrease), "", "",
                    repr(rep.mean_nl_pct_increase), "", "", repr(rep.mean_ns_pct_increase)])
    return buf.getvalue()
