"""Command-line entry point: ``acer index|reformulate|train|evaluate``.

Settings come from built-in defaults, then an optional INI config file
(section ``[acer]``, keys named like the long flags with dashes replaced
by underscores), then command-line flags. Errors print a single line
``error: <CODE>: <message>`` and exit 2 (usage), 3 (data) or 4 (internal).
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

from . import evaluation as ev
from .corpus import PreprocessOptions, build_lexicon, load_corpus
from .errors import AcerError, DatasetError
from .graph import RankParams
from .index import build_index, load_index, save_index
from .learner import (EnsembleConfig, TreeConfig, cross_validate, load_model, model_for, save_model,
                      train, write_training_rows)
from .pipeline import ReformulationRequest, reformulate

log = logging.getLogger("acer")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4
CONFIG_SECTION = "acer"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _add_rank_args(p):
    g = p.add_argument_group("reformulation")
    g.add_argument("-K", "--feedback-size", type=int, default=10, help="pseudo-relevance feedback documents")
    g.add_argument("-k", "--reformulation-size", type=int, default=10, help="expansion terms per candidate")
    g.add_argument("--damping", type=float, default=0.85, help="CodeRank damping factor")
    g.add_argument("--epsilon", type=float, default=1e-4, help="CodeRank convergence threshold")
    g.add_argument("--max-iterations", type=int, default=100, help="CodeRank iteration cap")


def _add_eval_args(p):
    g = p.add_argument_group("evaluation")
    g.add_argument("--depth", type=int, default=ev.DEFAULT_DEPTH, help="result list depth; deeper hits count as none")
    g.add_argument("--easy-cutoff", type=int, default=ev.EASY_CUTOFF,
                   help="queries whose baseline QE is at most this go to the extended set only")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI file with an [acer] section of defaults")
    common.add_argument("--log-level", default="WARNING", help="logging level")

    parser = _Parser(prog="acer", description="Query reformulation for concept location.",
                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("index", parents=[common], formatter_class=fmt, help="build and save a corpus index")
    p.add_argument("corpus_root", help="directory of source files")
    p.add_argument("-o", "--output", required=True, help="index file to write")
    p.add_argument("--extensions", default=".java", help="comma-separated file extensions")
    p.add_argument("--stopwords", default=None, help="stopword list (default: bundled English list)")
    p.add_argument("--keywords", default=None, help="language keyword list (default: bundled Java list)")
    p.add_argument("--stemming", type=_bool, default=False, help="apply Snowball stemming")
    p.add_argument("--min-term-length", type=int, default=3, help="shortest kept term")
    p.add_argument("--lexicon", type=_bool, default=False,
                   help="split same-case tokens with a lexicon mined from the corpus")

    p = sub.add_parser("reformulate", parents=[common], formatter_class=fmt, help="reformulate one query")
    p.add_argument("-q", "--query", required=True, help="initial query text")
    p.add_argument("-i", "--index", required=True, help="index file")
    p.add_argument("-m", "--model", default=None, help="model file (required unless --candidates-only)")
    p.add_argument("--system", default="", help="system name, selects a per-system model if present")
    p.add_argument("--candidates-only", action="store_true", help="emit all candidates without selecting one")
    _add_rank_args(p)

    p = sub.add_parser("train", parents=[common], formatter_class=fmt,
                       help="measure candidate QEs, label them and train the selector")
    p.add_argument("-d", "--dataset", required=True, help="change request JSON-lines file")
    p.add_argument("-i", "--index", required=True, help="index file")
    p.add_argument("-o", "--output", required=True, help="model file to write")
    p.add_argument("--seed", type=int, default=0, help="bootstrap RNG seed")
    p.add_argument("--resample-count", type=int, default=50, help="bootstrap resamples (trees)")
    p.add_argument("--max-depth", type=int, default=8, help="tree depth cap")
    p.add_argument("--min-leaf", type=int, default=2, help="minimum rows per leaf")
    p.add_argument("--per-system", type=_bool, default=False, help="train one model per system")
    p.add_argument("--rows", default=None, help="also write the labelled training rows here (TSV)")
    p.add_argument("--cv-folds", type=int, default=0, help="report grouped k-fold accuracy (0 = off)")
    _add_rank_args(p)
    _add_eval_args(p)

    p = sub.add_parser("evaluate", parents=[common], formatter_class=fmt, help="run the evaluation protocol")
    p.add_argument("-d", "--dataset", required=True, help="change request JSON-lines file")
    p.add_argument("-i", "--index", required=True, help="index file")
    p.add_argument("-m", "--model", default=None, help="model file (needed for 'acer')")
    p.add_argument("-o", "--output", default="report", help="output directory")
    p.add_argument("--techniques", default=",".join(ev.DEFAULT_TECHNIQUES),
                   help=f"comma-separated subset of: {', '.join(ev.TECHNIQUES)}")
    _add_rank_args(p)
    _add_eval_args(p)
    return parser


def _config_defaults(path: str, parser: argparse.ArgumentParser, known: set[str]) -> dict:
    """Typed defaults for ``parser`` from the config file.

    Keys that belong to other commands are ignored so one file can serve
    every command; keys no command knows are an error.
    """
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not cp.has_section(CONFIG_SECTION):
        return {}
    actions = {a.dest: a for a in parser._actions}
    out = {}
    for key, raw in cp.items(CONFIG_SECTION):
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if dest not in known or dest in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if action is None:
            continue
        conv = action.type or (lambda s: s)
        if isinstance(action, argparse._StoreTrueAction):
            conv = _bool
        try:
            out[dest] = conv(raw)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"bad value for config key {key!r}: {raw!r}") from exc
    return out


def parse_args(argv: list[str] | None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        choices = parser._subparsers._group_actions[0].choices
        known = {a.dest for p in choices.values() for a in p._actions}
        sub = choices[args.command]
        sub.set_defaults(**_config_defaults(args.config, sub, known))
        args = parser.parse_args(argv)
    return args


def _rank_params(args) -> RankParams:
    return RankParams(damping=args.damping, epsilon=args.epsilon, max_iterations=args.max_iterations)


def _settings(args) -> ev.EvalSettings:
    return ev.EvalSettings(args.feedback_size, args.reformulation_size, args.depth, args.easy_cutoff,
                           rank=_rank_params(args))


def _settings_record(args) -> dict:
    """Every non-path setting that influences results, for the config hash."""
    skip = {"command", "config", "log_level", "dataset", "index", "model", "output", "rows", "corpus_root"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def cmd_index(args) -> int:
    opts = PreprocessOptions(stemming=args.stemming, min_term_length=args.min_term_length,
                             stopwords_path=args.stopwords, keywords_path=args.keywords)
    exts = tuple(e.strip() if e.strip().startswith(".") else "." + e.strip()
                 for e in args.extensions.split(",") if e.strip())
    lexicon = None
    if args.lexicon:
        raw = load_corpus(args.corpus_root, opts, exts)
        lexicon = build_lexicon(d.raw for d in raw)
    corpus = load_corpus(args.corpus_root, opts, exts, lexicon)
    for doc_id, reason in corpus.skipped:
        log.warning("skipped %s: %s", doc_id, reason)
    index = build_index(corpus, lexicon)
    save_index(index, args.output)
    print(f"indexed {index.doc_count} documents, {len(index.postings)} terms")
    return EXIT_OK


def cmd_reformulate(args) -> int:
    index = load_index(args.index)
    ensemble = None
    if not args.candidates_only:
        if not args.model:
            raise UsageError("--model is required unless --candidates-only is given")
        ensemble = model_for(load_model(args.model), args.system)
    req = ReformulationRequest(args.query, args.feedback_size, args.reformulation_size)
    result = reformulate(req, index, ensemble, _rank_params(args))
    print(json.dumps(result.to_record(), sort_keys=True, indent=2))
    return EXIT_OK


def cmd_train(args) -> int:
    index = load_index(args.index)
    dropped: list[tuple[str, str]] = []
    requests = ev.ingest_dataset(args.dataset, index.doc_ids(), dropped)
    for rid, reason in dropped:
        log.warning("dropped %s: %s", rid, reason)
    rows = ev.training_rows(requests, index, _settings(args))
    if not rows:
        raise DatasetError("no training rows could be measured")
    if args.rows:
        write_training_rows(rows, args.rows)
    config = EnsembleConfig(args.resample_count, TreeConfig(args.max_depth, args.min_leaf))
    usable = [r for r in rows if not r.flagged]
    if not usable:
        raise DatasetError("every query is flagged: no candidate retrieved a goldset document")
    models = {"*": train(usable, config, args.seed)}
    if args.per_system:
        for system in sorted({r.system for r in usable}):
            models[system] = train([r for r in usable if r.system == system], config, args.seed)
    save_model(models, args.output)
    summary = {
        "queries": len({r.query_id for r in rows}),
        "flagged": len({r.query_id for r in rows if r.flagged}),
        "rows": len(rows),
        "models": sorted(models),
        "config_hash": ev.config_hash(_settings_record(args)),
    }
    if args.cv_folds:
        summary["cross_validation"] = cross_validate(rows, config, args.seed, args.cv_folds)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    try:
        techniques = ev.parse_techniques(args.techniques)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    index = load_index(args.index)
    models = None
    if "acer" in techniques:
        if not args.model:
            raise UsageError("technique 'acer' needs --model")
        models = load_model(args.model)
    dropped: list[tuple[str, str]] = []
    requests = ev.ingest_dataset(args.dataset, index.doc_ids(), dropped)
    settings = _settings(args)
    result = ev.evaluate(requests, index, techniques, models, settings)
    header = {
        "config_hash": ev.config_hash(_settings_record(args)),
        "dataset": Path(args.dataset).name,
        "techniques": ",".join(techniques),
        "feedback_size": str(args.feedback_size),
        "reformulation_size": str(args.reformulation_size),
    }
    report = ev.write_reports(result, args.output, settings, header, dropped)
    print(f"wrote {report}")
    return EXIT_OK


COMMANDS = {"index": cmd_index, "reformulate": cmd_reformulate, "train": cmd_train, "evaluate": cmd_evaluate}


def _fail(code: str, message: str, status: int) -> int:
    print(f"error: {code}: {' '.join(str(message).split())}", file=sys.stderr)
    return status


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        return _fail("USAGE", exc, EXIT_USAGE)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("USAGE", exc, EXIT_USAGE)
    except AcerError as exc:
        return _fail(exc.code, exc, EXIT_DATA)
    except ValueError as exc:
        # invalid parameter values (damping outside [0, 1], depth < 1, ...)
        return _fail("USAGE", exc, EXIT_USAGE)
    except OSError as exc:
        return _fail("IO_ERROR", exc, EXIT_DATA)
    except Exception as exc:  # noqa: BLE001 - last-resort guard for the exit code contract
        log.debug("internal error", exc_info=True)
        return _fail("INTERNAL", f"{type(exc).__name__}: {exc}", EXIT_INTERNAL)


if __name__ == "__main__":
    sys.exit(main())
