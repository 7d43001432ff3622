"""Change-request datasets and the retrieval evaluation protocol.

Query Effectiveness (QE) is the 1-based rank of the first goldset document
in a result list. Each technique is compared with the baseline query per
change request (improved, worsened or preserved) and summarised with the
mean and quartiles of the ranks in each class, plus MRR@K and Top-K
accuracy.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DatasetError, EmptyQueryError, ModelError, ReportError
from .graph import RankParams
from .index import Index, search
from .learner import Ensemble, TrainingRow, combine, label_rows, model_for
from .pipeline import (ReformulatedQuery, ReformulationRequest, baseline_reformulation,
                       preprocess_query, reformulate)

log = logging.getLogger(__name__)

STACK_TRACE = re.compile(
    r"\bat\s+[\w$]+(?:\.[\w$<>]+)+\s*\(\s*(?:[\w$]+\.java:\d+|Native Method|Unknown Source)\s*\)"
)
DEFAULT_DEPTH = 5000
DEFAULT_TOP_KS = (10, 20, 50, 100)
OUTCOMES = ("improved", "worsened", "preserved")


@dataclass(frozen=True)
class ChangeRequest:
    id: str
    title: str
    description: str
    goldset: frozenset[str]
    system: str = ""


@dataclass
class QueryRun:
    query_id: str
    technique: str
    ranked: list[str]
    qe: int | None
    system: str = ""

    @property
    def reciprocal_rank(self) -> float:
        return 0.0 if self.qe is None else 1.0 / self.qe


def has_stack_trace(text: str) -> bool:
    return STACK_TRACE.search(text) is not None


def ingest_dataset(path: str | Path, corpus_ids: Iterable[str],
                   dropped: list[tuple[str, str]] | None = None) -> list[ChangeRequest]:
    """Read a JSON-lines change request file and keep the usable records.

    Goldset paths missing from the corpus are removed; a record whose
    goldset becomes empty is dropped, as is any record whose description
    contains a stack trace. Reasons are appended to ``dropped``.
    """
    known = set(corpus_ids)
    dropped = dropped if dropped is not None else []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc}") from exc

    out: list[ChangeRequest] = []
    seen = set()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            rid = str(rec["id"])
            title = rec["title"]
            goldset = rec["goldset"]
            description = rec.get("description") or ""
            if not isinstance(title, str) or not isinstance(goldset, list) or not isinstance(description, str):
                raise TypeError("title/description must be strings and goldset a list")
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("%s:%d: skipping malformed record: %s", path, lineno, exc)
            dropped.append((f"line {lineno}", f"malformed: {exc}"))
            continue
        if rid in seen:
            log.warning("%s:%d: duplicate id %s skipped", path, lineno, rid)
            dropped.append((rid, "duplicate id"))
            continue
        seen.add(rid)
        if has_stack_trace(description):
            dropped.append((rid, "stack trace in description"))
            continue
        present = frozenset(g for g in goldset if g in known)
        if len(present) < len(goldset):
            log.warning("request %s: %d goldset file(s) not in corpus", rid, len(goldset) - len(present))
        if not present:
            dropped.append((rid, "no goldset file in corpus"))
            continue
        out.append(ChangeRequest(rid, title, description, present, str(rec.get("system", ""))))
    if not out:
        raise DatasetError(f"{path}: no valid change requests")
    return out


def query_effectiveness(ranked: Sequence[str], goldset: Iterable[str]) -> int | None:
    gold = set(goldset)
    for i, doc in enumerate(ranked, 1):
        if doc in gold:
            return i
    return None


def retrieval_metrics(runs: Sequence[QueryRun] | Sequence[int | None], k: int) -> tuple[float, float]:
    """(MRR@k, Top-k accuracy) over runs; a QE beyond k counts as a miss."""
    if not runs:
        raise ValueError("no runs to evaluate")
    qes = [r.qe if isinstance(r, QueryRun) else r for r in runs]
    rr = [1.0 / q if q is not None and q <= k else 0.0 for q in qes]
    hits = sum(1 for q in qes if q is not None and q <= k)
    return math.fsum(rr) / len(qes), hits / len(qes)


def classify_outcome(baseline_qe: int | None, reformulated_qe: int | None) -> str | None:
    """'improved', 'worsened' or 'preserved'; None when neither query found a hit."""
    if baseline_qe is None and reformulated_qe is None:
        return None
    if baseline_qe is None:
        return "improved"
    if reformulated_qe is None:
        return "worsened"
    if reformulated_qe < baseline_qe:
        return "improved"
    if reformulated_qe > baseline_qe:
        return "worsened"
    return "preserved"


def rank_summary(ranks: Sequence[int]) -> dict[str, float | None]:
    """Mean, quartiles (linear interpolation), min and max of ranks."""
    if not ranks:
        return {"mean": None, "q1": None, "q2": None, "q3": None, "min": None, "max": None}
    arr = np.asarray(sorted(ranks), dtype=float)
    q1, q2, q3 = np.percentile(arr, [25, 50, 75], method="linear")
    return {"mean": float(arr.mean()), "q1": float(q1), "q2": float(q2), "q3": float(q3),
            "min": float(arr[0]), "max": float(arr[-1])}


@dataclass
class OutcomeReport:
    technique: str
    system: str
    total: int
    counts: dict[str, int]
    unresolved: int
    ranks: dict[str, dict[str, float | None]]
    mrd: dict[str, float | None]

    def percent(self, outcome: str) -> float:
        return 100.0 * self.counts[outcome] / self.total if self.total else 0.0


def outcome_report(baseline: Sequence[QueryRun], technique: Sequence[QueryRun],
                   name: str = "", system: str = "ALL") -> OutcomeReport:
    base = {r.query_id: r for r in baseline}
    tech = {r.query_id: r for r in technique}
    if set(base) != set(tech):
        raise ReportError(f"technique {name!r} was evaluated on a different query set than the baseline")
    counts = {o: 0 for o in OUTCOMES}
    ranks: dict[str, list[int]] = {o: [] for o in OUTCOMES}
    diffs: dict[str, list[int]] = {o: [] for o in OUTCOMES}
    unresolved = 0
    for qid in sorted(base):
        b, t = base[qid].qe, tech[qid].qe
        outcome = classify_outcome(b, t)
        if outcome is None:
            unresolved += 1
            continue
        counts[outcome] += 1
        if t is not None:
            ranks[outcome].append(t)
        if b is not None and t is not None:
            diffs[outcome].append(t - b)
    return OutcomeReport(
        technique=name,
        system=system,
        total=len(base),
        counts=counts,
        unresolved=unresolved,
        ranks={o: rank_summary(ranks[o]) for o in OUTCOMES},
        mrd={o: (float(np.mean(diffs[o])) if diffs[o] else None) for o in OUTCOMES},
    )


@dataclass
class Report:
    outcomes: list[OutcomeReport] = field(default_factory=list)
    retrieval: list[dict] = field(default_factory=list)
    header: dict[str, str] = field(default_factory=dict)


def build_report(runs: Mapping[str, Sequence[QueryRun]], baseline: str = "baseline",
                 top_ks: Sequence[int] = DEFAULT_TOP_KS, header: Mapping[str, str] | None = None) -> Report:
    """Outcome tables (each technique vs the baseline) and retrieval tables,
    per system and over all systems."""
    if baseline not in runs:
        raise ReportError(f"baseline runs {baseline!r} missing")
    if not runs[baseline]:
        raise ReportError("no queries to report on")
    ids = {r.query_id for r in runs[baseline]}
    for name, rs in runs.items():
        if {r.query_id for r in rs} != ids:
            raise ReportError(f"technique {name!r} was evaluated on a different query set than the baseline")

    systems = sorted({r.system for r in runs[baseline]})
    groups = [("ALL", None)] + ([(s, s) for s in systems] if len(systems) > 1 else [])
    report = Report(header=dict(header or {}))
    for name in runs:
        for label, sys in groups:
            sel = [r for r in runs[name] if sys is None or r.system == sys]
            base = [r for r in runs[baseline] if sys is None or r.system == sys]
            if name != baseline:
                report.outcomes.append(outcome_report(base, sel, name, label))
            row = {"technique": name, "system": label, "queries": len(sel)}
            for k in top_ks:
                mrr, acc = retrieval_metrics(sel, k)
                row[f"top{k}_accuracy"] = acc
                row[f"mrr@{k}"] = mrr
            report.retrieval.append(row)
    return report


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


OUTCOME_COLUMNS = (
    "set", "technique", "system", "queries",
    "improved", "improved_pct", "improved_mean", "improved_q1", "improved_q2", "improved_q3",
    "improved_min", "improved_max", "improved_mrd",
    "worsened", "worsened_pct", "worsened_mean", "worsened_q1", "worsened_q2", "worsened_q3",
    "worsened_min", "worsened_max", "worsened_mrd",
    "preserved", "preserved_pct", "unresolved",
)


def outcome_rows(report: Report, set_name: str) -> list[list[str]]:
    rows = []
    for o in report.outcomes:
        row = [set_name, o.technique, o.system, str(o.total)]
        for cls in ("improved", "worsened"):
            r = o.ranks[cls]
            row += [str(o.counts[cls]), _fmt(o.percent(cls)), _fmt(r["mean"]), _fmt(r["q1"]),
                    _fmt(r["q2"]), _fmt(r["q3"]), _fmt(r["min"]), _fmt(r["max"]), _fmt(o.mrd[cls])]
        row += [str(o.counts["preserved"]), _fmt(o.percent("preserved")), str(o.unresolved)]
        rows.append(row)
    return rows


def retrieval_rows(report: Report, set_name: str, top_ks: Sequence[int] = DEFAULT_TOP_KS) -> tuple[list[str], list[list[str]]]:
    cols = ["set", "technique", "system", "queries"]
    for k in top_ks:
        cols += [f"top{k}_accuracy", f"mrr@{k}"]
    rows = [[set_name] + [_fmt(r[c]) for c in cols[1:]] for r in report.retrieval]
    return cols, rows


def render_text(report: Report, set_name: str, top_ks: Sequence[int] = DEFAULT_TOP_KS) -> str:
    """Human-readable tables in the layout of the usual effectiveness tables."""
    lines = [f"== {set_name} =="]
    lines.append(f"{'technique':<14}{'system':<10}{'#q':>4}  {'improved':>16}  {'worsened':>16}  "
                 f"{'preserved':>16}  {'unres':>5}  {'MRD+':>9}  {'MRD-':>9}")
    for o in report.outcomes:
        cells = [f"{o.counts[c]} ({o.percent(c):.2f}%)" for c in OUTCOMES]
        lines.append(f"{o.technique:<14}{o.system:<10}{o.total:>4}  {cells[0]:>16}  {cells[1]:>16}  "
                     f"{cells[2]:>16}  {o.unresolved:>5}  {_fmt(o.mrd['improved']):>9}  "
                     f"{_fmt(o.mrd['worsened']):>9}")
    lines.append("")
    lines.append(f"{'technique':<14}{'system':<10}{'class':<10}" +
                 "".join(f"{c:>9}" for c in ("mean", "Q1", "Q2", "Q3", "min", "max")))
    for o in report.outcomes:
        for cls in ("improved", "worsened"):
            r = o.ranks[cls]
            cells = "".join(f"{_fmt(r[c]):>9}" for c in ("mean", "q1", "q2", "q3", "min", "max"))
            lines.append(f"{o.technique:<14}{o.system:<10}{cls:<10}{cells}")
    lines.append("")
    head = f"{'technique':<14}{'system':<10}" + "".join(f"{'Top-' + str(k):>10}{'MRR@' + str(k):>10}" for k in top_ks)
    lines.append(head)
    for r in report.retrieval:
        cells = "".join(f"{100 * r[f'top{k}_accuracy']:>9.2f}%{r[f'mrr@{k}']:>10.4f}" for k in top_ks)
        lines.append(f"{r['technique']:<14}{r['system']:<10}{cells}")
    return "\n".join(lines) + "\n"


def _rounded(value, places: int = 6):
    # fixed precision keeps the JSON emission stable across numpy versions
    if isinstance(value, float):
        return round(value, places)
    if isinstance(value, dict):
        return {k: _rounded(v, places) for k, v in value.items()}
    if isinstance(value, list):
        return [_rounded(v, places) for v in value]
    return value


def report_summary(report: Report) -> dict:
    return _rounded({
        "outcomes": [
            {"technique": o.technique, "system": o.system, "queries": o.total,
             "counts": o.counts, "unresolved": o.unresolved, "ranks": o.ranks, "mrd": o.mrd}
            for o in report.outcomes
        ],
        "retrieval": report.retrieval,
    })


# ------------------------------------------------------------ orchestration

TECHNIQUES = (
    "baseline", "acer", "acer_msig", "acer_fsig", "acer_comb",
    "tf", "tf_msig", "tf_fsig", "tf_comb",
    "tfidf", "tfidf_msig", "tfidf_fsig", "tfidf_comb",
    "rocchio", "rsv",
)
DEFAULT_TECHNIQUES = ("acer", "tf", "tfidf", "rocchio", "rsv")
EASY_CUTOFF = 10


@dataclass(frozen=True)
class EvalSettings:
    feedback_size: int = 10
    reformulation_size: int = 10
    depth: int = DEFAULT_DEPTH
    easy_cutoff: int = EASY_CUTOFF
    top_ks: tuple[int, ...] = DEFAULT_TOP_KS
    rank: RankParams = field(default_factory=RankParams)

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")


def parse_techniques(value: str | Sequence[str]) -> list[str]:
    """Validate technique names; the baseline is always evaluated first."""
    names = [n.strip() for n in value.split(",")] if isinstance(value, str) else list(value)
    names = [n for n in names if n]
    unknown = [n for n in names if n not in TECHNIQUES]
    if unknown:
        raise ValueError(f"unknown technique(s) {', '.join(unknown)}; valid: {', '.join(TECHNIQUES)}")
    out = ["baseline"]
    for n in names:
        if n not in out:
            out.append(n)
    return out


def _run(index: Index, terms: Sequence[str], settings: EvalSettings) -> list[str]:
    return [d for d, _ in search(index, terms, settings.depth)]


def measure_candidates(request: ChangeRequest, index: Index, settings: EvalSettings
                       ) -> tuple[ReformulatedQuery, dict[str, int | None]]:
    """Reformulate without a model and measure the QE of every candidate query.

    A candidate that contributed no terms gets QE None so it can never be
    labelled best (it is not eligible at selection time either).
    """
    rq = reformulate(ReformulationRequest(request.title, settings.feedback_size,
                                          settings.reformulation_size, query_id=request.id),
                     index, None, settings.rank)
    qes = {}
    for cand in rq.candidates:
        if cand.kind != "baseline" and not cand.terms:
            qes[cand.kind] = None
            continue
        qes[cand.kind] = query_effectiveness(_run(index, cand.query, settings), request.goldset)
    return rq, qes


def training_rows(requests: Sequence[ChangeRequest], index: Index,
                  settings: EvalSettings | None = None) -> list[TrainingRow]:
    settings = settings or EvalSettings()
    per_query, systems = {}, {}
    for req in requests:
        try:
            rq, qes = measure_candidates(req, index, settings)
        except EmptyQueryError:
            log.warning("request %s: empty query, skipped", req.id)
            continue
        per_query[req.id] = {c.kind: (c.quality, qes[c.kind]) for c in rq.candidates}
        systems[req.id] = req.system
    return label_rows(per_query, systems)


@dataclass
class Evaluation:
    runs: dict[str, list[QueryRun]]
    queries: dict[tuple[str, str], list[str]]
    audit: list[dict]
    skipped: list[tuple[str, str]]
    easy: set[str]


def evaluate(requests: Sequence[ChangeRequest], index: Index, techniques: Sequence[str],
             models: Mapping[str, Ensemble] | None = None,
             settings: EvalSettings | None = None) -> Evaluation:
    """Run every technique on every request, in request order.

    ``acer`` needs ``models`` (see ``model_for``); the ``acer_<kind>``
    techniques use one candidate kind unconditionally.
    """
    settings = settings or EvalSettings()
    techniques = parse_techniques(techniques)
    if "acer" in techniques and not models:
        raise ModelError("technique 'acer' needs a trained model")
    runs: dict[str, list[QueryRun]] = {t: [] for t in techniques}
    queries: dict[tuple[str, str], list[str]] = {}
    audit: list[dict] = []
    skipped: list[tuple[str, str]] = []
    easy: set[str] = set()
    opts, lexicon = index.options, index.lexicon

    for req in requests:
        q_pp = preprocess_query(req.title, opts, lexicon)
        if not q_pp:
            skipped.append((req.id, "title empty after preprocessing"))
            continue
        feedback = [index.documents[d] for d, _ in search(index, q_pp, settings.feedback_size)]
        per_tech: dict[str, list[str]] = {"baseline": q_pp}
        if any(t.startswith("acer") for t in techniques):
            ensemble = model_for(models, req.system) if "acer" in techniques else None
            rq = reformulate(ReformulationRequest(req.title, settings.feedback_size,
                                                  settings.reformulation_size, query_id=req.id),
                             index, ensemble, settings.rank)
            if "acer" in techniques:
                per_tech["acer"] = rq.final_terms
                rec = rq.to_record()
                rec["system"] = req.system
                audit.append(rec)
            for cand in rq.candidates:
                per_tech[f"acer_{cand.kind}"] = cand.query
        for tech in techniques:
            if tech in per_tech:
                continue
            method, _, scope = tech.partition("_")
            extra = baseline_reformulation(req.title, index, method, settings.feedback_size,
                                           settings.reformulation_size, scope or "all", feedback)
            per_tech[tech] = combine(q_pp, extra)
        for tech in techniques:
            terms = per_tech[tech]
            ranked = _run(index, terms, settings)
            runs[tech].append(QueryRun(req.id, tech, ranked, query_effectiveness(ranked, req.goldset), req.system))
            queries[(tech, req.id)] = list(terms)
        base_qe = runs["baseline"][-1].qe
        if base_qe is not None and base_qe <= settings.easy_cutoff:
            easy.add(req.id)
    if not runs["baseline"]:
        raise DatasetError("no request produced a usable query")
    return Evaluation(runs, queries, audit, skipped, easy)


def config_hash(config: Mapping) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _tsv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_reports(result: Evaluation, outdir: str | Path, settings: EvalSettings | None = None,
                  header: Mapping[str, str] | None = None, dropped: Sequence[tuple[str, str]] = ()) -> Path:
    """Emit report.txt, outcomes.tsv, retrieval.tsv, runs.tsv, summary.json
    and audit.jsonl. Output depends only on the inputs: no timestamps and no
    absolute paths.
    """
    settings = settings or EvalSettings()
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    header = dict(header or {})
    header.setdefault("result_depth", str(settings.depth))
    header.setdefault("easy_cutoff", str(settings.easy_cutoff))

    sets = [("extended", result.runs)]
    hard = {t: [r for r in rs if r.query_id not in result.easy] for t, rs in result.runs.items()}
    if hard["baseline"]:
        sets.insert(0, ("baseline", hard))

    text = ["# query reformulation evaluation"]
    text += [f"# {k}: {header[k]}" for k in sorted(header)]
    text.append(f"# queries: {len(result.runs['baseline'])} evaluated, {len(result.easy)} with baseline "
                f"QE <= {settings.easy_cutoff} (extended set only)")
    text.append(f"# hits ranked below {settings.depth} count as no result")
    for rid, reason in list(dropped) + result.skipped:
        text.append(f"# dropped {rid}: {reason}")
    if len(sets) == 1:
        text.append("# baseline set is empty: every query is already answered in the top "
                    f"{settings.easy_cutoff}")
    text.append("")

    outcome_table, retrieval_table, summary_sets = [], [], {}
    retrieval_header: list[str] = []
    for name, runs in sets:
        report = build_report(runs, top_ks=settings.top_ks)
        outcome_table += outcome_rows(report, name)
        retrieval_header, rows = retrieval_rows(report, name, settings.top_ks)
        retrieval_table += rows
        summary_sets[name] = report_summary(report)
        text.append(render_text(report, name, settings.top_ks))

    _tsv(out / "outcomes.tsv", OUTCOME_COLUMNS, outcome_table)
    _tsv(out / "retrieval.tsv", retrieval_header, retrieval_table)
    run_rows = []
    for tech, rs in result.runs.items():
        for r in rs:
            run_rows.append([r.query_id, r.system, tech, "" if r.qe is None else str(r.qe),
                             f"{r.reciprocal_rank:.6f}", "easy" if r.query_id in result.easy else "hard",
                             " ".join(result.queries[(tech, r.query_id)])])
    _tsv(out / "runs.tsv", ("query_id", "system", "technique", "qe", "rr", "set", "query"), run_rows)
    summary = {"header": header, "sets": summary_sets,
               "dropped": [list(d) for d in list(dropped) + result.skipped]}
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    with open(out / "audit.jsonl", "w", encoding="utf-8") as fh:
        for rec in result.audit:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    (out / "report.txt").write_text("\n".join(text), encoding="utf-8")
    return out / "report.txt"


def read_audit(path: str | Path) -> list[tuple[str, ReformulatedQuery]]:
    """(system, record) pairs from an audit.jsonl file."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rec = json.loads(line)
            out.append((rec.get("system", ""), ReformulatedQuery.from_record(rec)))
    return out
