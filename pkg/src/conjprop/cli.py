"""Command-line surface binding the toolkit into reproducible pipelines.

One executable, subcommand style.  Every option can come from three places,
in order of precedence: the command line, a key-value config file (--config,
or the CONJPROP_CONFIG environment variable for a default path), and the
built-in default.  The fully resolved configuration is logged to stderr as
"# key = value" lines, so a run can be reproduced from its log.  Paths given
as "-" read stdin or write stdout.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import autodiff as ad
from .config import ConfigError, parse_value, read_config_file
from .conllu import ROOT, ParseError, Sentence, parse_corpus, write_corpus
from .converter import convert_mode
from .edgepred import (
    EdgeParser, EdgePredError, ParserTrainConfig, build_label_inventory,
    decode, new_parser, train_epoch,
)
from .embeddings import EmbeddingError, EmbeddingProvider, hash_provider, \
    read_sidecar
from .evaluate import (
    AlignmentError, agreement_matrix, diff_stats, format_agreement,
    format_diff_records, format_diff_table, format_score_records,
    format_score_table, score,
)
from .instances import default_feature_config
from .labels import delexicalize_corpus
from .modelfile import ModelFileError
from .propmodel import (
    ApplyConfig, ApplyError, PropModel, PropTrainOptions, apply_model,
    train_prop,
)
from .svm import TrainingError


class CliError(Exception):
    pass


# ------------------------------------------------------------------ options

@dataclass(frozen=True)
class Opt:
    name: str
    kind: str = "str"  # str, int, float, bool
    default: object = None
    help: str = ""
    choices: tuple[str, ...] | None = None
    required: bool = False

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_IN = Opt("in", default="-", help="input CoNLL-U file ('-' for stdin)")
_OUT = Opt("out", default="-", help="output file ('-' for stdout)")
_JOBS = Opt("jobs", "int", 1, "process sentences with N worker processes; "
                              "output order is always input order")
_SEED = Opt("seed", "int", 0, "random seed")

OPTIONS: dict[str, list[Opt]] = {
    "convert": [
        _IN, _OUT, _JOBS,
        Opt("mode", default="rbc", choices=("rbc", "rbc2", "rbc2+fix",
                                            "always"),
            help="propagation rule set"),
    ],
    "always": [_IN, _OUT, _JOBS],
    "train-prop": [
        Opt("train", required=True, help="training corpus with gold deps"),
        Opt("model", required=True, help="model file to write"),
        Opt("kind", default="kernel", choices=("kernel", "mlp"),
            help="classifier family"),
        Opt("features", default="instance,token,tree",
            help="comma-separated feature groups; the instance group "
                 "(candidate label and direction) is always kept"),
        Opt("embeddings", help="single-layer embedding sidecar file"),
        Opt("hash-dim", "int", 0,
            help="use built-in hash embeddings of this dimension instead "
                 "of a sidecar (0 = off)"),
        Opt("c", "float", 1.0, "kernel soft-margin constant"),
        Opt("tol", "float", 1e-3, "kernel optimizer tolerance"),
        Opt("class-weights", "bool", False,
            "weight classes by inverse frequency"),
        Opt("epochs", "int", 50, "mlp epoch budget"),
        Opt("lr", "float", 5e-5, "mlp learning rate"),
        Opt("patience", "int", 5, "mlp early-stopping patience"),
        Opt("holdout", "float", 0.1, "mlp early-stopping holdout fraction"),
        Opt("hidden", default="1500,500", help="mlp hidden layer widths"),
        _SEED,
    ],
    "apply-prop": [
        _IN, _OUT, _JOBS,
        Opt("model", required=True, help="trained propagation model"),
        Opt("embeddings", help="single-layer embedding sidecar file"),
        Opt("hash-dim", "int", 0,
            help="use built-in hash embeddings of this dimension (0 = off)"),
        Opt("fixpoint", "bool", False,
            "reapply the model until the graph stops changing"),
        Opt("fix", "bool", False,
            "apply passive/imperative subject-label adjustments"),
    ],
    "train-parser": [
        Opt("train", required=True, help="training corpus with gold deps"),
        Opt("model", required=True, help="model file to write"),
        Opt("embeddings", help="multi-layer embedding sidecar file"),
        Opt("hash-dim", "int", 0,
            help="use built-in hash embeddings of this dimension (0 = off)"),
        Opt("hash-layers", "int", 1, "layer count for hash embeddings"),
        Opt("dev", help="development corpus for early stopping"),
        Opt("patience", "int", 5, "early-stopping patience (with --dev)"),
        Opt("delexicalize", "bool", False,
            "rewrite recoverable label subtypes to placeholders before "
            "building the label inventory"),
        Opt("hidden", "int", 1024, "projection width"),
        Opt("batch", "int", 5, "batch size"),
        Opt("lr", "float", 5e-6, "learning rate"),
        Opt("epochs", "int", 10, "epoch budget"),
        _SEED,
    ],
    "predict": [
        _IN, _OUT, _JOBS,
        Opt("model", required=True, help="trained edge-parser model"),
        Opt("embeddings", help="multi-layer embedding sidecar file"),
        Opt("hash-dim", "int", 0,
            help="use built-in hash embeddings of this dimension (0 = off)"),
        Opt("hash-layers", "int", 1, "layer count for hash embeddings"),
    ],
    "evaluate": [
        Opt("system", required=True, help="system output CoNLL-U file"),
        Opt("gold", required=True, help="gold CoNLL-U file"),
        _OUT, _JOBS,
        Opt("view", default="full", choices=("full", "coarse"),
            help="per-label table granularity"),
        Opt("keep-subtypes", default="",
            help="comma-separated full labels kept apart in the coarse view"),
        Opt("records", "bool", False,
            "emit tab-separated records instead of an aligned table"),
    ],
    "agree": [
        Opt("files", required=True,
            help="comma-separated annotator CoNLL-U files (at least two)"),
        Opt("names", help="comma-separated corpus names, one per file"),
        _OUT, _JOBS,
    ],
    "stats": [
        Opt("original", required=True, help="corpus before editing"),
        Opt("edited", required=True, help="corpus after editing"),
        _OUT, _JOBS,
        Opt("scope", default="conjunct",
            choices=("conjunct", "conjunct-incident", "all"),
            help="edge sets compared: links incident to conjuncts, or all"),
        Opt("records", "bool", False,
            "emit tab-separated records instead of an aligned table"),
    ],
}

COMMAND_HELP = {
    "convert": "propagate dependencies across coordinations by rule",
    "always": "baseline that copies every incident edge of the head",
    "train-prop": "train a binary propagation classifier",
    "apply-prop": "apply a trained propagation classifier",
    "train-parser": "train the biaffine edge predictor",
    "predict": "predict enhanced graphs with a trained edge parser",
    "evaluate": "score propagated links of a system against gold",
    "agree": "pairwise agreement between annotated corpora",
    "stats": "added/removed edge statistics between corpus versions",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conjprop",
        description="Produce, learn, and score enhanced dependencies of "
                    "coordinate constructions.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for command, opts in OPTIONS.items():
        p = sub.add_parser(command, help=COMMAND_HELP[command])
        p.add_argument("--config", metavar="FILE",
                       help="key-value config file (default: "
                            "$CONJPROP_CONFIG)")
        for opt in opts:
            flag = f"--{opt.name}"
            if opt.kind == "bool":
                p.add_argument(flag, dest=opt.dest, action="store_const",
                               const=True, default=None, help=opt.help)
                p.add_argument(f"--no-{opt.name}", dest=opt.dest,
                               action="store_const", const=False,
                               default=None, help=argparse.SUPPRESS)
            else:
                p.add_argument(flag, dest=opt.dest, default=None,
                               choices=opt.choices, help=opt.help,
                               metavar=opt.name.upper())
    return parser


def resolve_options(args: argparse.Namespace) -> dict[str, object]:
    """Merge command line, config file, and defaults; log the result."""
    config_path = args.config or os.environ.get("CONJPROP_CONFIG")
    file_config = read_config_file(config_path) if config_path else {}
    resolved: dict[str, object] = {}
    for opt in OPTIONS[args.command]:
        value = getattr(args, opt.dest)
        if value is not None and opt.kind in ("int", "float"):
            value = parse_value(opt.name, value, opt.kind, "command line")
        if value is None and opt.name in file_config:
            value = parse_value(opt.name, file_config[opt.name], opt.kind,
                                config_path)
            if opt.choices and value not in opt.choices:
                raise ConfigError(
                    f"{config_path}: {opt.name} must be one of "
                    f"{', '.join(opt.choices)}, got {value!r}")
        if value is None:
            value = opt.default
        if value is None and opt.required:
            raise CliError(f"{args.command}: missing required option "
                           f"--{opt.name}")
        resolved[opt.name] = value
    print(f"# conjprop {args.command}", file=sys.stderr)
    for name in sorted(resolved):
        value = resolved[name]
        if isinstance(value, bool):
            value = "true" if value else "false"
        print(f"# {name} = {'' if value is None else value}", file=sys.stderr)
    return resolved


# ------------------------------------------------------------------ file io

def _read_corpus(path: str) -> list[Sentence]:
    name = "<stdin>" if path == "-" else path
    try:
        text = sys.stdin.read() if path == "-" else open(
            path, encoding="utf-8").read()
    except OSError as err:
        raise CliError(f"{name}: {err.strerror}") from None
    try:
        return parse_corpus(text)
    except ParseError as err:
        raise CliError(f"{name}: {err}") from None


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as err:
        raise CliError(f"{path}: {err.strerror}") from None


def _model_path(path: str) -> str:
    if path == "-":
        raise CliError("model files are binary; a real path is required")
    return path


def _comma_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _single_layer_provider(cfg, corpus) -> EmbeddingProvider | None:
    if cfg["embeddings"] and cfg["hash-dim"]:
        raise CliError("--embeddings and --hash-dim exclude each other")
    if cfg["embeddings"]:
        provider = read_sidecar(cfg["embeddings"])
        if provider.layers != 1:
            raise CliError(f"{cfg['embeddings']}: expected a single-layer "
                           f"sidecar, found layers={provider.layers}")
        return provider
    if cfg["hash-dim"]:
        return hash_provider(corpus, dim=cfg["hash-dim"])
    return None


def _multi_layer_provider(cfg, corpus) -> EmbeddingProvider:
    if cfg["embeddings"] and cfg["hash-dim"]:
        raise CliError("--embeddings and --hash-dim exclude each other")
    if cfg["embeddings"]:
        return read_sidecar(cfg["embeddings"])
    if cfg["hash-dim"]:
        return hash_provider(corpus, dim=cfg["hash-dim"],
                             layers=cfg["hash-layers"])
    raise CliError("the edge parser needs embeddings: give --embeddings "
                   "or --hash-dim")


# ------------------------------------------------------- parallel transforms

_WORKER_STATE: dict = {}


def _init_apply(model, provider, config):
    _WORKER_STATE["apply"] = (model, provider, config)


def _apply_one(item):
    index, sent = item
    model, provider, config = _WORKER_STATE["apply"]
    return apply_model(model, sent, provider, config, index)


def _init_predict(parser, provider):
    _WORKER_STATE["predict"] = (parser, provider)


def _predict_one(item):
    index, sent = item
    parser, provider = _WORKER_STATE["predict"]
    return decode(parser, sent, provider, index)


def _map_indexed(fn, corpus, jobs, initializer, initargs):
    items = list(enumerate(corpus))
    if jobs > 1 and len(items) > 1:
        from multiprocessing import Pool
        with Pool(jobs, initializer=initializer, initargs=initargs) as pool:
            return pool.map(fn, items)
    initializer(*initargs)
    return [fn(item) for item in items]


# ---------------------------------------------------------------- commands

def cmd_convert(cfg) -> None:
    corpus = _read_corpus(cfg["in"])
    mode = cfg.get("mode", "always")
    if cfg["jobs"] > 1 and len(corpus) > 1:
        from functools import partial
        from multiprocessing import Pool
        with Pool(cfg["jobs"]) as pool:
            out = pool.map(partial(convert_mode, mode=mode), corpus)
    else:
        out = [convert_mode(sent, mode) for sent in corpus]
    _write_text(cfg["out"], write_corpus(out))


def cmd_always(cfg) -> None:
    cmd_convert(cfg)


def _feature_setup(kind: str, features_text: str, with_dense: bool):
    groups = set(_comma_list(features_text))
    unknown = groups - {"instance", "token", "tree"}
    if unknown:
        raise CliError(f"unknown feature groups: {', '.join(sorted(unknown))}")
    fc = default_feature_config(kind)
    fc = replace(fc, token_features="token" in groups,
                 tree_features="tree" in groups)
    if with_dense:
        fc = replace(fc, dense_tokens=True)
    return fc


def cmd_train_prop(cfg) -> None:
    corpus = _read_corpus(cfg["train"])
    provider = _single_layer_provider(cfg, corpus)
    fc = _feature_setup(cfg["kind"], cfg["features"], provider is not None)
    widths = [parse_value("hidden", w, "int", "command line")
              for w in _comma_list(cfg["hidden"])]
    if len(widths) != 2:
        raise CliError("--hidden expects two comma-separated widths")
    options = PropTrainOptions(
        c=cfg["c"], tol=cfg["tol"], class_weights=cfg["class-weights"],
        epochs=cfg["epochs"],
        lr=cfg["lr"], patience=cfg["patience"], holdout=cfg["holdout"],
        hidden_sizes=(widths[0], widths[1]), seed=cfg["seed"])
    model = train_prop(corpus, cfg["kind"], options, provider, fc)
    model.save(_model_path(cfg["model"]))
    print(f"# trained {cfg['kind']} model on {len(corpus)} sentences",
          file=sys.stderr)


def cmd_apply_prop(cfg) -> None:
    corpus = _read_corpus(cfg["in"])
    model = PropModel.load(_model_path(cfg["model"]))
    provider = _single_layer_provider(cfg, corpus)
    apply_cfg = ApplyConfig(passive_imperative_fix=cfg["fix"],
                            iterate_to_fixpoint=cfg["fixpoint"])
    out = _map_indexed(_apply_one, corpus, cfg["jobs"], _init_apply,
                       (model, provider, apply_cfg))
    _write_text(cfg["out"], write_corpus(out))


def _edge_key_set(sent: Sentence, index: int) -> set:
    regular = {t.id for t in sent.words()} | {ROOT}
    return {(index, head, t.id, label)
            for t in sent.words() for head, label in t.deps
            if head in regular}


def _dev_f1(parser: EdgeParser, corpus: list[Sentence],
            provider: EmbeddingProvider) -> float:
    tp = n_sys = n_gold = 0
    for i, sent in enumerate(corpus):
        gold = _edge_key_set(sent, i)
        pred = _edge_key_set(decode(parser, sent, provider, i), i)
        tp += len(gold & pred)
        n_sys += len(pred)
        n_gold += len(gold)
    return 2.0 * tp / (n_sys + n_gold) if n_sys + n_gold else 0.0


def cmd_train_parser(cfg) -> None:
    corpus = _read_corpus(cfg["train"])
    if cfg["delexicalize"]:
        corpus, inventory = delexicalize_corpus(corpus)
        print(f"# delexicalized label inventory: {len(inventory)} labels",
              file=sys.stderr)
    provider = _multi_layer_provider(cfg, corpus)
    labels = build_label_inventory(corpus)
    parser = new_parser(labels, layers=provider.layers, dim=provider.dim,
                        hidden=cfg["hidden"], seed=cfg["seed"])
    train_cfg = ParserTrainConfig(batch_size=cfg["batch"], lr=cfg["lr"],
                                  epochs=cfg["epochs"], seed=cfg["seed"])
    optimizer = ad.AdamW(parser.parameters(), lr=train_cfg.lr,
                         betas=train_cfg.betas,
                         weight_decay=train_cfg.weight_decay)
    rng = np.random.default_rng(train_cfg.seed)

    dev = _read_corpus(cfg["dev"]) if cfg["dev"] else None
    if dev is not None and cfg["delexicalize"]:
        dev, _ = delexicalize_corpus(dev)
    dev_provider = None
    if dev is not None:
        dev_provider = provider if cfg["embeddings"] else hash_provider(
            dev, dim=cfg["hash-dim"], layers=cfg["hash-layers"])
    best = {name: t.data.copy() for name, t in parser.params.items()}
    best_f1 = -1.0
    patience_left = cfg["patience"]

    for epoch in range(1, cfg["epochs"] + 1):
        loss = train_epoch(parser, corpus, provider, train_cfg, optimizer,
                           rng)
        line = f"# epoch {epoch} loss {loss:.6f}"
        if dev is not None:
            f1 = _dev_f1(parser, dev, dev_provider)
            line += f" dev-f1 {100 * f1:.2f}"
            if f1 > best_f1:
                best_f1 = f1
                best = {name: t.data.copy()
                        for name, t in parser.params.items()}
                patience_left = cfg["patience"]
            else:
                patience_left -= 1
        print(line, file=sys.stderr)
        if dev is not None and patience_left <= 0:
            print(f"# stopping early at epoch {epoch}", file=sys.stderr)
            break
    if dev is not None:
        for name, tensor in parser.params.items():
            tensor.data = best[name]
    parser.save(_model_path(cfg["model"]))


def cmd_predict(cfg) -> None:
    corpus = _read_corpus(cfg["in"])
    parser = EdgeParser.load(_model_path(cfg["model"]))
    if cfg["embeddings"] and cfg["hash-dim"]:
        raise CliError("--embeddings and --hash-dim exclude each other")
    if cfg["embeddings"]:
        provider = read_sidecar(cfg["embeddings"])
    elif cfg["hash-dim"]:
        provider = hash_provider(corpus, dim=cfg["hash-dim"],
                                 layers=cfg["hash-layers"])
    else:
        raise CliError("prediction needs embeddings: give --embeddings "
                       "or --hash-dim")
    out = _map_indexed(_predict_one, corpus, cfg["jobs"], _init_predict,
                       (parser, provider))
    _write_text(cfg["out"], write_corpus(out))


def cmd_evaluate(cfg) -> None:
    system = _read_corpus(cfg["system"])
    gold = _read_corpus(cfg["gold"])
    report = score(system, gold,
                   keep_subtypes=frozenset(_comma_list(cfg["keep-subtypes"])),
                   jobs=cfg["jobs"])
    sc = report.overall
    summary = (f"links {sc.n_sys}/{sc.n_gold} overlap {sc.tp} "
               f"P {100 * sc.precision:.1f} R {100 * sc.recall:.1f} "
               f"F1 {100 * sc.f1:.1f}")
    body = format_score_records(report) if cfg["records"] \
        else format_score_table(report, cfg["view"])
    _write_text(cfg["out"], summary + "\n" + body + "\n")


def cmd_agree(cfg) -> None:
    files = _comma_list(cfg["files"])
    if len(files) < 2:
        raise CliError("agree needs at least two --files")
    names = _comma_list(cfg["names"]) if cfg["names"] else \
        [os.path.splitext(os.path.basename(f))[0] for f in files]
    if len(names) != len(files):
        raise CliError("--names must list one name per file")
    corpora = [_read_corpus(f) for f in files]
    report = agreement_matrix(corpora, names, jobs=cfg["jobs"])
    _write_text(cfg["out"], format_agreement(report) + "\n")


def cmd_stats(cfg) -> None:
    original = _read_corpus(cfg["original"])
    edited = _read_corpus(cfg["edited"])
    scope = "conjunct" if cfg["scope"] == "conjunct-incident" else cfg["scope"]
    report = diff_stats(original, edited, scope=scope, jobs=cfg["jobs"])
    body = format_diff_records(report) if cfg["records"] \
        else format_diff_table(report)
    _write_text(cfg["out"], body + "\n")


HANDLERS = {
    "convert": cmd_convert,
    "always": cmd_always,
    "train-prop": cmd_train_prop,
    "apply-prop": cmd_apply_prop,
    "train-parser": cmd_train_parser,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "agree": cmd_agree,
    "stats": cmd_stats,
}

_ERRORS = (CliError, ConfigError, ParseError, EmbeddingError, AlignmentError,
           TrainingError, ApplyError, EdgePredError, ModelFileError)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return 2
    try:
        cfg = resolve_options(args)
        HANDLERS[args.command](cfg)
    except _ERRORS as err:
        print(f"conjprop: error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"conjprop: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
