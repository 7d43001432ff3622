"""Best-candidate selection with a bootstrap ensemble of CART trees.

Each query yields four candidate rows (msig, fsig, comb, baseline). The
row whose query ranks a goldset document highest is labelled positive.
Trees are grown on bootstrap resamples of the rows and their leaf
probabilities are averaged at prediction time.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ModelError
from .quality import METRIC_NAMES, QualityVector

log = logging.getLogger(__name__)

KIND_PRIORITY: tuple[str, ...] = ("msig", "fsig", "comb", "baseline")
FEATURE_NAMES: tuple[str, ...] = METRIC_NAMES + tuple(f"is_{k}" for k in KIND_PRIORITY)
MODEL_MAGIC = "ACER-MODEL"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 8
    min_leaf: int = 2


@dataclass(frozen=True)
class EnsembleConfig:
    resample_count: int = 50
    tree: TreeConfig = field(default_factory=TreeConfig)

    def __post_init__(self):
        if self.resample_count < 1:
            raise ValueError("resample_count must be >= 1")


@dataclass
class TrainingRow:
    query_id: str
    kind: str
    features: QualityVector
    label: bool
    qe: int | None = None
    flagged: bool = False
    system: str = ""


@dataclass
class Node:
    prob: float
    n: int
    feature: int = -1
    threshold: float = 0.0
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"prob": self.prob, "n": self.n}
        return {"prob": self.prob, "n": self.n, "feature": self.feature,
                "threshold": self.threshold, "left": self.left.to_dict(),
                "right": self.right.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Node":
        if "feature" not in d:
            return cls(prob=d["prob"], n=d["n"])
        return cls(prob=d["prob"], n=d["n"], feature=d["feature"], threshold=d["threshold"],
                   left=cls.from_dict(d["left"]), right=cls.from_dict(d["right"]))


def feature_vector(kind: str, quality: QualityVector) -> np.ndarray:
    onehot = [1.0 if kind == k else 0.0 for k in KIND_PRIORITY]
    return np.concatenate([quality.as_array(), np.asarray(onehot)])


def rows_to_arrays(rows: Sequence[TrainingRow]) -> tuple[np.ndarray, np.ndarray]:
    X = np.vstack([feature_vector(r.kind, r.features) for r in rows])
    y = np.asarray([1.0 if r.label else 0.0 for r in rows])
    return X, y


def gini(pos: float, n: float) -> float:
    if n == 0:
        return 0.0
    p = pos / n
    return 2.0 * p * (1.0 - p)


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int) -> tuple[int, float, float] | None:
    n = len(y)
    left_n = np.arange(1, n, dtype=float)
    right_n = n - left_n
    best = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cum_pos = np.cumsum(y[order])
        left_pos = cum_pos[:-1]
        right_pos = cum_pos[-1] - left_pos
        pl, pr = left_pos / left_n, right_pos / right_n
        impurity = (left_n * 2 * pl * (1 - pl) + right_n * 2 * pr * (1 - pr)) / n
        valid = (xs[:-1] != xs[1:]) & (left_n >= min_leaf) & (right_n >= min_leaf)
        if not valid.any():
            continue
        masked = np.where(valid, impurity, np.inf)
        lowest = masked.min()
        if best is not None and lowest >= best[2] - 1e-12:
            continue
        i = int(np.flatnonzero(masked <= lowest + 1e-12)[0])
        thr = (xs[i] + xs[i + 1]) / 2.0
        if not xs[i] <= thr < xs[i + 1]:
            thr = xs[i]
        best = (f, float(thr), float(impurity[i]))
    return best


def _grow(X: np.ndarray, y: np.ndarray, depth: int, cfg: TreeConfig) -> Node:
    n = len(y)
    pos = float(y.sum())
    node = Node(prob=pos / n, n=n)
    parent = gini(pos, n)
    if depth >= cfg.max_depth or n < 2 * cfg.min_leaf or parent == 0.0:
        return node
    split = _best_split(X, y, cfg.min_leaf)
    if split is None or split[2] >= parent - 1e-12:
        return node
    f, thr, _ = split
    mask = X[:, f] <= thr
    node.feature, node.threshold = f, thr
    node.left = _grow(X[mask], y[mask], depth + 1, cfg)
    node.right = _grow(X[~mask], y[~mask], depth + 1, cfg)
    return node


def fit_tree(X: np.ndarray | Sequence[TrainingRow], y: np.ndarray | None = None,
             config: TreeConfig | None = None) -> Node:
    """Grow a CART classification tree by greedy minimal weighted Gini splits.

    Samples with ``x[feature] <= threshold`` go left. Leaves hold the
    fraction of positive samples that reached them.
    """
    if y is None:
        X, y = rows_to_arrays(X)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
        raise ValueError("fit_tree needs a non-empty 2-D feature matrix matching the labels")
    return _grow(X, y, 0, config or TreeConfig())


def tree_predict(node: Node, x: np.ndarray) -> float:
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node.prob


def tree_depth(node: Node) -> int:
    if node.is_leaf:
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


@dataclass
class Ensemble:
    trees: list[Node]
    config: EnsembleConfig
    seed: int
    feature_names: tuple[str, ...] = FEATURE_NAMES

    @property
    def resample_count(self) -> int:
        return len(self.trees)


def train(rows: Sequence[TrainingRow] | tuple[np.ndarray, np.ndarray],
          config: EnsembleConfig | None = None, seed: int = 0) -> Ensemble:
    """One tree per bootstrap resample (same size as the data, with replacement)."""
    config = config or EnsembleConfig()
    if isinstance(rows, tuple):
        X, y = (np.asarray(a, dtype=float) for a in rows)
    else:
        if not rows:
            raise ValueError("cannot train on an empty row set")
        X, y = rows_to_arrays(rows)
    n = len(y)
    streams = np.random.SeedSequence(seed).spawn(config.resample_count)
    trees = []
    for ss in streams:
        idx = np.random.default_rng(ss).integers(0, n, size=n)
        trees.append(fit_tree(X[idx], y[idx], config.tree))
    names = FEATURE_NAMES if X.shape[1] == len(FEATURE_NAMES) else tuple(f"x{i}" for i in range(X.shape[1]))
    return Ensemble(trees, config, seed, names)


def predict(ensemble: Ensemble, features: np.ndarray | QualityVector, kind: str | None = None) -> float:
    """Mean leaf probability over all trees."""
    if isinstance(features, QualityVector):
        features = feature_vector(kind if kind is not None else features.kind, features)
    x = np.asarray(features, dtype=float)
    return math.fsum(tree_predict(t, x) for t in ensemble.trees) / len(ensemble.trees)


def _qe_key(qe: int | None) -> float:
    return math.inf if qe is None else qe


def label_rows(per_query: Mapping[str, Mapping[str, tuple[QualityVector, int | None]]],
               systems: Mapping[str, str] | None = None) -> list[TrainingRow]:
    """Mark the candidate with the lowest QE as positive for every query.

    ``per_query`` maps query id -> kind -> (quality vector, QE or None).
    Ties follow msig > fsig > comb > baseline. A query where no candidate
    found a goldset document gets no positive row and is flagged.
    """
    rows = []
    for qid in sorted(per_query):
        cands = per_query[qid]
        kinds = [k for k in KIND_PRIORITY if k in cands]
        kinds += sorted(k for k in cands if k not in KIND_PRIORITY)
        all_none = all(cands[k][1] is None for k in kinds)
        best = None if all_none else min(kinds, key=lambda k: (_qe_key(cands[k][1]), kinds.index(k)))
        if all_none:
            log.warning("query %s: no candidate retrieved a goldset document", qid)
        for k in kinds:
            quality, qe = cands[k]
            rows.append(TrainingRow(qid, k, quality, k == best, qe, all_none,
                                    (systems or {}).get(qid, "")))
    return rows


@dataclass
class Selection:
    kind: str
    terms: list[str]
    probabilities: dict[str, float]


def choose_kind(probabilities: Mapping[str, float]) -> str:
    """Argmax over candidate kinds with the fixed priority as tie-break."""
    kinds = [k for k in KIND_PRIORITY if k in probabilities]
    return max(kinds, key=lambda k: (probabilities[k], -kinds.index(k)))


def repeat_terms(terms: Sequence[str]) -> list[str]:
    return list(terms) + list(terms)


def select_best(candidates: Iterable, ensemble: Ensemble, initial_terms: Sequence[str]) -> Selection:
    """Pick the candidate with the highest predicted probability of being best.

    ``candidates`` carry ``kind``, ``terms`` (the appended terms) and
    ``quality``. Non-baseline candidates without terms are not eligible.
    When the baseline wins, the initial terms are returned repeated twice.
    """
    probs = {}
    by_kind = {}
    for c in candidates:
        by_kind[c.kind] = c
        if c.kind != "baseline" and not c.terms:
            continue
        probs[c.kind] = predict(ensemble, c.quality, c.kind)
    if "baseline" not in probs:
        probs["baseline"] = -1.0
    kind = choose_kind(probs)
    if kind == "baseline":
        terms = repeat_terms(initial_terms)
    else:
        terms = combine(initial_terms, by_kind[kind].terms)
    return Selection(kind, terms, {k: v for k, v in probs.items() if v >= 0})


def combine(initial: Sequence[str], extra: Iterable[str]) -> list[str]:
    """Initial terms followed by the extra terms not already present."""
    seen = set(initial)
    out = list(initial)
    for t in extra:
        if t not in seen:
            out.append(t)
            seen.add(t)
    return out


def cross_validate(rows: Sequence[TrainingRow], config: EnsembleConfig | None = None,
                   seed: int = 0, folds: int = 10) -> dict:
    """Grouped k-fold estimate: the fraction of held-out queries where the
    predicted candidate is the labelled best one. Queries never straddle folds."""
    qids = sorted({r.query_id for r in rows if not r.flagged})
    if len(qids) < 2:
        raise ValueError("cross-validation needs at least two labelled queries")
    folds = min(folds, len(qids))
    order = np.random.default_rng(seed).permutation(len(qids))
    fold_of = {qids[i]: j % folds for j, i in enumerate(order)}
    hits = 0
    for f in range(folds):
        train_rows = [r for r in rows if not r.flagged and fold_of[r.query_id] != f]
        test_q = [q for q in qids if fold_of[q] == f]
        model = train(train_rows, config, seed)
        for q in test_q:
            qrows = [r for r in rows if r.query_id == q]
            probs = {r.kind: predict(model, r.features, r.kind) for r in qrows}
            chosen = choose_kind(probs)
            hits += any(r.kind == chosen and r.label for r in qrows)
    return {"folds": folds, "queries": len(qids), "accuracy": hits / len(qids)}


def save_model(models: Ensemble | Mapping[str, Ensemble], path: str | Path) -> None:
    """Write one global ensemble (key ``*``) or a per-system set as JSON."""
    if isinstance(models, Ensemble):
        models = {"*": models}
    payload = {
        "magic": MODEL_MAGIC,
        "version": MODEL_VERSION,
        "models": {
            key: {
                "seed": m.seed,
                "config": {"resample_count": m.config.resample_count, "tree": asdict(m.config.tree)},
                "feature_names": list(m.feature_names),
                "trees": [t.to_dict() for t in m.trees],
            }
            for key, m in sorted(models.items())
        },
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> dict[str, Ensemble]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ModelError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("magic") != MODEL_MAGIC:
        raise ModelError(f"{path} is not a model file")
    if payload.get("version") != MODEL_VERSION:
        raise ModelError(f"unsupported model version {payload.get('version')}")
    out = {}
    for key, m in payload["models"].items():
        cfg = EnsembleConfig(m["config"]["resample_count"], TreeConfig(**m["config"]["tree"]))
        if tuple(m["feature_names"]) != FEATURE_NAMES:
            raise ModelError(f"model {key!r} was trained on a different feature schema")
        out[key] = Ensemble([Node.from_dict(t) for t in m["trees"]], cfg, m["seed"], FEATURE_NAMES)
    return out


def model_for(models: Mapping[str, Ensemble], system: str = "") -> Ensemble:
    if system in models:
        return models[system]
    if "*" in models:
        return models["*"]
    raise ModelError(f"no model for system {system!r} and no global model")


TRAINING_COLUMNS = ("query_id", "system", "kind", *METRIC_NAMES, "qe", "label")


def write_training_rows(rows: Iterable[TrainingRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(TRAINING_COLUMNS)
        for r in rows:
            w.writerow([r.query_id, r.system, r.kind, *(repr(v) for v in r.features.values),
                        "" if r.qe is None else r.qe, int(r.label)])


def read_training_rows(path: str | Path) -> list[TrainingRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        if tuple(reader.fieldnames or ()) != TRAINING_COLUMNS:
            raise ModelError(f"{path}: unexpected training data columns")
        rows = []
        for rec in reader:
            qv = QualityVector(tuple(float(rec[m]) for m in METRIC_NAMES), rec["kind"])
            qe = int(rec["qe"]) if rec["qe"] else None
            rows.append(TrainingRow(rec["query_id"], rec["kind"], qv, rec["label"] == "1", qe,
                                    system=rec["system"]))
    flagged = {r.query_id for r in rows} - {r.query_id for r in rows if r.label}
    for r in rows:
        r.flagged = r.query_id in flagged
    return rows
