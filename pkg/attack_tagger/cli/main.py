from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from attack_tagger import config
from attack_tagger.cli.printer import Printer
from attack_tagger.corpus import (
    BASELINE_DISTRIBUTION_PATH,
    ORPHAN_POLICIES,
    Corpus,
    corpus_fingerprint,
    label_problems,
    load_corpus_file,
    load_distribution_file,
    resolve_orphans,
    stratified_split,
    synth_corpus,
    write_corpus_file,
)
from attack_tagger.errors import AttackTaggerError, ParseError, UsageError
from attack_tagger.hierarchy import (
    MODE_NAMES,
    TECHNIQUE_SPLITS,
    TaskMode,
    TrainOptions,
    predict_task,
    train_hierarchical,
)
from attack_tagger.linear import Hyperparams
from attack_tagger.llm import HttpChatClient, OpenAIChatClient, RetryPolicy, evaluate_llm
from attack_tagger.metrics import COMPATIBLE, METRICS, EvalReport, comparison_json, evaluate_run, render_table
from attack_tagger.storage import AuditLog, load_model_file, save_model_file
from attack_tagger.taxonomy import AttackTaxonomy, load_default_taxonomy, load_taxonomy_file
from attack_tagger.vectorize import VectorizerConfig
from attack_tagger.vectorize.vectorizer import MAX_HASH_BITS, MIN_HASH_BITS

logger = logging.getLogger("attack_tagger.cli")

LLM_CLIENTS = ("http", "openai")

# --hash-bits given without a value: take ATTACK_TAGGER_HASH_BITS.
_DEFAULT_BITS = -1


@dataclass(frozen=True)
class Command:
    verb: str
    options: Dict[str, Any]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="attack-tagger", description="Hierarchical ATT&CK tactic/technique tagger.")
    sub = parser.add_subparsers(dest="verb", metavar="VERB", parser_class=_Parser)
    sub.required = True

    def taxonomy_arg(p: argparse.ArgumentParser) -> None:
        p.add_argument("--taxonomy", help="taxonomy JSON (default: bundled enterprise-v14)")

    def orphan_arg(p: argparse.ArgumentParser) -> None:
        p.add_argument("--orphan-techniques", choices=ORPHAN_POLICIES, default="drop")

    def mode_args(p: argparse.ArgumentParser, default_mode: str) -> None:
        p.add_argument("--mode", choices=sorted(MODE_NAMES), default=default_mode)
        p.add_argument("-n", type=int, default=3, help="tactics / labels per prediction")
        p.add_argument("-m", type=int, default=3, help="techniques per predicted tactic (mode pairs)")

    p = sub.add_parser("split", help="stratified train/test split of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.add_argument("--fraction", type=float)
    p.add_argument("--seed", type=int)
    taxonomy_arg(p)
    orphan_arg(p)

    p = sub.add_parser("train", help="train a hierarchical model container")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    taxonomy_arg(p)
    p.add_argument("--hash-bits", type=int, nargs="?", const=_DEFAULT_BITS, help="use the hashed vectorizer")
    p.add_argument("--hash-seed", type=int)
    p.add_argument("--eta0", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--train-flat-technique", action="store_true")
    p.add_argument("--from", dest="from_model", help="warm start from an existing container")
    p.add_argument("--technique-split", choices=TECHNIQUE_SPLITS, default="global")
    p.add_argument("--technique-fraction", type=float)
    p.add_argument("--workers", type=int, default=1)
    orphan_arg(p)

    p = sub.add_parser("predict", help="tag text lines (file or stdin) and print JSONL")
    p.add_argument("--model", required=True)
    p.add_argument("--input", default="-", help="text file, one sentence per line ('-' = stdin)")
    mode_args(p, "pairs")

    p = sub.add_parser("evaluate", help="score one or more models on a test corpus")
    p.add_argument("--model", action="append", required=True, help="repeat to compare models")
    p.add_argument("--test", required=True)
    p.add_argument("--metric", choices=METRICS)
    p.add_argument("--out", help="also write the JSON report here; stdout keeps the table unless --json")
    p.add_argument("--json", action="store_true", help="print the JSON report to stdout instead of the table")
    mode_args(p, "tactic")
    orphan_arg(p)

    p = sub.add_parser("synth", help="synthesize a fixture corpus from a distribution spec")
    p.add_argument("--spec", help="distribution JSON (default: bundled baseline distribution)")
    p.add_argument("--out", required=True)
    taxonomy_arg(p)

    p = sub.add_parser("llm-eval", help="run the chat-model baseline on a test corpus")
    p.add_argument("--test", required=True)
    p.add_argument("--audit", required=True, help="JSONL audit file (appended, resumable)")
    p.add_argument("--client", choices=LLM_CLIENTS, default="http")
    p.add_argument("--concurrency", type=int)
    p.add_argument("--model-name")
    p.add_argument("--temperature", type=float)
    p.add_argument("--out", help="also write the JSON report here; stdout keeps the table unless --json")
    p.add_argument("--json", action="store_true", help="print the JSON report to stdout instead of the table")
    taxonomy_arg(p)
    return parser


def _resolve_train(opts: Dict[str, Any]) -> None:
    if opts["from_model"] and opts["hash_bits"] is not None:
        raise UsageError("--from reuses the prior model's vectorizer; --hash-bits cannot be combined with it")
    if opts["hash_bits"] == _DEFAULT_BITS:
        opts["hash_bits"] = config.default_hash_bits()
    if opts["hash_bits"] is not None and not (MIN_HASH_BITS <= opts["hash_bits"] <= MAX_HASH_BITS):
        raise UsageError(f"--hash-bits must be in [{MIN_HASH_BITS}, {MAX_HASH_BITS}]")
    for key, default in (
        ("hash_seed", config.default_hash_seed),
        ("eta0", config.default_eta0),
        ("alpha", config.default_alpha),
        ("epochs", config.default_epochs),
        ("seed", config.default_seed),
        ("technique_fraction", config.default_train_fraction),
    ):
        if opts[key] is None:
            opts[key] = default()
    if opts["eta0"] <= 0 or opts["alpha"] < 0 or opts["epochs"] < 1 or opts["seed"] < 0:
        raise UsageError("need --eta0 > 0, --alpha >= 0, --epochs >= 1, --seed >= 0")
    if not (0.0 < opts["technique_fraction"] < 1.0):
        raise UsageError("--technique-fraction must be in (0, 1)")
    if opts["workers"] < 1:
        raise UsageError("--workers must be >= 1")


def parse_args(argv: Sequence[str]) -> Command:
    ns = _build_parser().parse_args(list(argv))
    opts = {k: v for k, v in vars(ns).items() if k != "verb"}
    verb = ns.verb

    if verb == "split":
        if opts["fraction"] is None:
            opts["fraction"] = config.default_train_fraction()
        if opts["seed"] is None:
            opts["seed"] = config.default_seed()
        if not (0.0 < opts["fraction"] < 1.0):
            raise UsageError("--fraction must be in (0, 1)")
    elif verb == "train":
        _resolve_train(opts)
    elif verb in ("predict", "evaluate"):
        if opts["n"] < 1 or opts["m"] < 1:
            raise UsageError("-n and -m must be >= 1")
        mode = TaskMode.from_name(opts["mode"], opts["n"], opts["m"])
        if verb == "evaluate":
            allowed = COMPATIBLE[mode.kind]
            if opts["metric"] is None:
                opts["metric"] = allowed[0]
            elif opts["metric"] not in allowed:
                raise UsageError(f"--metric {opts['metric']} does not apply to --mode {opts['mode']}; use one of {list(allowed)}")
    elif verb == "llm-eval":
        if opts["concurrency"] is None:
            opts["concurrency"] = config.llm_concurrency()
        if opts["concurrency"] < 1:
            raise UsageError("--concurrency must be >= 1")
    return Command(verb=verb, options=opts)


def _require_files(*paths: Optional[str]) -> None:
    for p in paths:
        if p and p != "-" and not Path(p).is_file():
            raise FileNotFoundError(f"input file not found: {p}")


def _taxonomy(path: Optional[str]) -> AttackTaxonomy:
    return load_taxonomy_file(path) if path else load_default_taxonomy()


def _prepared_corpus(path: str, taxonomy: AttackTaxonomy, policy: str) -> Corpus:
    try:
        raw = load_corpus_file(path, taxonomy_version=taxonomy.version)
    except ParseError as e:
        raise ParseError(f"{path}: {e}") from e
    corpus = resolve_orphans(raw, taxonomy, policy)
    problems = label_problems(corpus, taxonomy)
    for problem in problems[:20]:
        logger.warning("%s: %s", path, problem)
    if len(problems) > 20:
        logger.warning("%s: %s more label problems", path, len(problems) - 20)
    return corpus


def _cmd_split(o: Dict[str, Any], printer: Printer) -> int:
    _require_files(o["corpus"], o["taxonomy"])
    taxonomy = _taxonomy(o["taxonomy"])
    corpus = _prepared_corpus(o["corpus"], taxonomy, o["orphan_techniques"])
    labeled = corpus.labeled()
    if len(labeled) < len(corpus):
        logger.warning("%s sentences without tactic labels left out of the split", len(corpus) - len(labeled))
    train, test = stratified_split(labeled, o["fraction"], o["seed"])
    write_corpus_file(train, o["train_out"])
    write_corpus_file(test, o["test_out"])
    printer.text(f"train: {len(train)} sentences -> {o['train_out']}\ntest: {len(test)} sentences -> {o['test_out']}")
    return 0


def _cmd_train(o: Dict[str, Any], printer: Printer) -> int:
    _require_files(o["corpus"], o["taxonomy"], o["from_model"])
    taxonomy = _taxonomy(o["taxonomy"])
    corpus = _prepared_corpus(o["corpus"], taxonomy, o["orphan_techniques"])
    logger.info("training on %s (%s sentences, corpus %s)", o["corpus"], len(corpus), corpus_fingerprint(corpus)[:16])
    init = load_model_file(o["from_model"]) if o["from_model"] else None
    hp = Hyperparams(eta0=o["eta0"], alpha=o["alpha"], epochs=o["epochs"], seed=o["seed"])
    vec_config = VectorizerConfig(hash_bits=o["hash_bits"], hash_seed=o["hash_seed"])
    options = TrainOptions(
        train_flat_technique=o["train_flat_technique"],
        technique_split=o["technique_split"],
        technique_fraction=o["technique_fraction"],
        max_workers=o["workers"],
        init=init,
    )
    model = train_hierarchical(corpus, taxonomy, vec_config, hp, options)
    save_model_file(model, o["out"])
    printer.text(
        f"model -> {o['out']} ({model.vectorizer.kind} vectorizer, dimension {model.vectorizer.dimension}, "
        f"{len(model.technique_models)} technique models)"
    )
    return 0


def _read_lines(path: str) -> List[str]:
    raw = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    return [line.strip() for line in raw.splitlines() if line.strip()]


def _cmd_predict(o: Dict[str, Any], printer: Printer) -> int:
    _require_files(o["model"], o["input"])
    model = load_model_file(o["model"])
    mode = TaskMode.from_name(o["mode"], o["n"], o["m"])
    for line in _read_lines(o["input"]):
        doc = predict_task(model, line, mode).to_dict()
        doc["text"] = line
        printer.jsonl(doc)
    return 0


def _report_names(paths: Sequence[str]) -> List[str]:
    stems = [Path(p).stem for p in paths]
    return stems if len(set(stems)) == len(stems) else list(paths)


def _emit_reports(
    reports: Sequence[EvalReport],
    names: Sequence[str],
    taxonomy: AttackTaxonomy,
    o: Dict[str, Any],
    printer: Printer,
) -> None:
    payload = reports[0].to_json() if len(reports) == 1 else comparison_json(reports, names)
    if o.get("out"):
        Path(o["out"]).write_text(payload + "\n", encoding="utf-8")
    printer.text(payload if o.get("json") else render_table(reports, names, taxonomy))


def _cmd_evaluate(o: Dict[str, Any], printer: Printer) -> int:
    _require_files(o["test"], *o["model"])
    mode = TaskMode.from_name(o["mode"], o["n"], o["m"])
    models = [load_model_file(p) for p in o["model"]]
    reports: List[EvalReport] = []
    for path, model in zip(o["model"], models):
        test = _prepared_corpus(o["test"], model.taxonomy, o["orphan_techniques"])
        logger.info("evaluating %s", path)
        reports.append(evaluate_run(model, test, mode, o["metric"]))
    _emit_reports(reports, _report_names(o["model"]), models[0].taxonomy, o, printer)
    return 0


def _cmd_synth(o: Dict[str, Any], printer: Printer) -> int:
    _require_files(o["spec"], o["taxonomy"])
    spec = load_distribution_file(o["spec"] or BASELINE_DISTRIBUTION_PATH)
    taxonomy = _taxonomy(o["taxonomy"])
    corpus = synth_corpus(spec, taxonomy)
    write_corpus_file(corpus, o["out"])
    printer.text(f"synthesized {len(corpus)} sentences -> {o['out']}")
    return 0


async def _llm_eval(o: Dict[str, Any], test: Corpus, taxonomy: AttackTaxonomy) -> EvalReport:
    client = OpenAIChatClient() if o["client"] == "openai" else HttpChatClient()
    try:
        return await evaluate_llm(
            test,
            client,
            taxonomy,
            audit=AuditLog(o["audit"]),
            concurrency=o["concurrency"],
            policy=RetryPolicy.from_config(),
            model_name=o["model_name"],
            temperature=o["temperature"],
        )
    finally:
        await client.close()


def _cmd_llm_eval(o: Dict[str, Any], printer: Printer) -> int:
    _require_files(o["test"], o["taxonomy"])
    taxonomy = _taxonomy(o["taxonomy"])
    test = _prepared_corpus(o["test"], taxonomy, "drop")
    report = asyncio.run(_llm_eval(o, test, taxonomy))
    _emit_reports([report], [o["model_name"] or config.llm_model_name()], taxonomy, o, printer)
    return 0


_HANDLERS = {
    "split": _cmd_split,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "synth": _cmd_synth,
    "llm-eval": _cmd_llm_eval,
}


def run(cmd: Command, printer: Optional[Printer] = None) -> int:
    printer = printer or Printer()
    try:
        return _HANDLERS[cmd.verb](dict(cmd.options), printer)
    except (AttackTaggerError, OSError) as e:
        logger.error("%s failed: %s", cmd.verb, e)
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    logging.basicConfig(
        level=config.log_level(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cmd = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        Printer().error(str(e))
        return 2
    return run(cmd)
