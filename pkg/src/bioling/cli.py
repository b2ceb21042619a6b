"""Command line entrypoint: the `bioling` tool.

All subcommands stream JSON Lines documents in input order, so they
compose via pipes. Exit codes: 0 success, 1 usage error, 2 data error.
Environment: BIOLING_RULES and BIOLING_SEG_CONFIG supply default paths
for --rules / --seg-config.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .abbrev import expansion_map, find_abbreviations
from .bench import STAGES, run_bench
from .doc import Document, from_json_obj, to_json_obj
from .evals import (
    GoldMention, make_citation_corpus, recall_at_k, segmentation_accuracy,
)
from .index import (
    BACKEND_EXACT, BACKEND_LSH, IndexFormatError, LshParams, build_index,
    load_index, save_index,
)
from .kb import KBFormatError, kb_stats, load_kb
from .linker import generate_candidates
from .segmenter import (
    SegmenterConfig, citation_split_rate, default_segmenter_config,
    load_segmenter_config, segment,
)
from .tokenizer import (
    RulesFileError, default_biomedical_rules, load_rules, tokenize,
)
from .vectorizer import NgramVectorizer

_CHUNK = 256  # documents per worker batch; bounds memory under --workers


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        raise UsageError(message)


@contextlib.contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin
    else:
        if not os.path.exists(path):
            raise DataError(f"input file not found: {path}")
        with open(path, encoding="utf-8") as fp:
            yield fp


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fp:
            yield fp


def _get_rules(args):
    path = getattr(args, "rules", None) or os.environ.get("BIOLING_RULES")
    if path:
        try:
            return load_rules(path)
        except FileNotFoundError:
            raise DataError(f"rules file not found: {path}")
        except RulesFileError as exc:
            raise DataError(f"{path}: {exc}")
    return default_biomedical_rules()


def _get_seg_config(args):
    path = getattr(args, "seg_config", None) or os.environ.get("BIOLING_SEG_CONFIG")
    if path:
        try:
            return load_segmenter_config(path)
        except FileNotFoundError:
            raise DataError(f"segmenter config not found: {path}")
        except RulesFileError as exc:
            raise DataError(f"{path}: {exc}")
    return default_segmenter_config()


def _load_index(path: str):
    if not os.path.exists(path):
        raise DataError(f"index file not found: {path}")
    try:
        return load_index(path)
    except IndexFormatError as exc:
        raise DataError(str(exc))


def _iter_doc_lines(fp):
    """Yield (doc_or_none, raw_obj_or_text) per nonempty input line.

    Lines holding a JSON object with a "text" field are core_text
    documents; any other line is raw text for tokenization.
    """
    for lineno, line in enumerate(fp, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        if line.lstrip().startswith("{"):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"line {lineno}: invalid JSON: {exc}")
            if not isinstance(obj, dict) or "text" not in obj:
                raise DataError(f"line {lineno}: document object needs a 'text' field")
            try:
                yield from_json_obj(obj), obj
            except (KeyError, TypeError) as exc:
                raise DataError(f"line {lineno}: malformed document: {exc}")
        else:
            yield None, line


def _ensure_doc(parsed, rules) -> tuple[Document, dict]:
    doc, obj = parsed
    if doc is None:
        return tokenize(obj, rules), {}
    if not doc.tokens and doc.text.strip():
        return tokenize(doc.text, rules), obj if isinstance(obj, dict) else {}
    return doc, obj if isinstance(obj, dict) else {}


def _map_ordered(fn, items, workers: int):
    """Apply fn preserving order, batching to bound memory."""
    if workers <= 1:
        for item in items:
            yield fn(item)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        batch = []
        for item in items:
            batch.append(item)
            if len(batch) >= _CHUNK * workers:
                yield from pool.map(fn, batch)
                batch = []
        if batch:
            yield from pool.map(fn, batch)


# -- subcommands --------------------------------------------------------

def _cmd_tokenize(args) -> int:
    rules = _get_rules(args)
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        for parsed in _iter_doc_lines(fin):
            doc, _ = _ensure_doc(parsed, rules)
            fout.write(json.dumps(to_json_obj(doc), ensure_ascii=False) + "\n")
    return 0


def _cmd_segment(args) -> int:
    rules = _get_rules(args)
    cfg = _get_seg_config(args)
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        for parsed in _iter_doc_lines(fin):
            doc, _ = _ensure_doc(parsed, rules)
            doc = segment(doc, cfg)
            fout.write(json.dumps(to_json_obj(doc), ensure_ascii=False) + "\n")
    return 0


def _cmd_abbrev(args) -> int:
    rules = _get_rules(args)
    cfg = _get_seg_config(args)
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        for parsed in _iter_doc_lines(fin):
            doc, _ = _ensure_doc(parsed, rules)
            if not doc.sentences:
                doc = segment(doc, cfg)
            for pair in find_abbreviations(doc):
                fout.write(json.dumps({
                    "short": {"start": pair.short_form.start,
                              "end": pair.short_form.end},
                    "long": {"start": pair.long_form.start,
                             "end": pair.long_form.end},
                }, ensure_ascii=False) + "\n")
    return 0


def _cmd_kb(args) -> int:
    try:
        kb = load_kb(args.input)
    except FileNotFoundError:
        raise DataError(f"KB file not found: {args.input}")
    except KBFormatError as exc:
        raise DataError(f"{args.input}: {exc}")
    if args.kb_cmd == "validate":
        print(f"OK: {len(kb.concepts)} concepts, {len(kb.alias_table)} aliases")
        return 0
    stats = kb_stats(kb)
    print(json.dumps({
        "n_concepts": stats.n_concepts,
        "n_aliases": stats.n_aliases,
        "n_shared_aliases": stats.n_shared_aliases,
        "bytes_on_disk": stats.bytes_on_disk,
    }))
    return 0


def _cmd_index_build(args) -> int:
    try:
        kb = load_kb(args.kb)
    except FileNotFoundError:
        raise DataError(f"KB file not found: {args.kb}")
    except KBFormatError as exc:
        raise DataError(f"{args.kb}: {exc}")
    aliases = kb.alias_surfaces()
    if not aliases:
        raise DataError("KB has no aliases to index")
    try:
        vectorizer = NgramVectorizer.fit(aliases, min_df=args.min_df)
    except ValueError as exc:
        raise DataError(str(exc))
    params = LshParams(args.lsh_bits, args.lsh_rescore, args.seed)
    index = build_index(kb, vectorizer, args.backend, params)
    save_index(index, args.output)
    print(f"indexed {len(index)} aliases ({args.backend}) -> {args.output}",
          file=sys.stderr)
    return 0


def _mention_spans(doc: Document, obj: dict, lineno_hint: str = ""):
    spans = []
    for m in obj.get("mentions", []):
        try:
            start, end = int(m["start"]), int(m["end"])
        except (KeyError, TypeError, ValueError):
            raise DataError(f"malformed mention {m!r}{lineno_hint}")
        if not (0 <= start < end <= len(doc.text)):
            raise DataError(f"mention span out of range {m!r}{lineno_hint}")
        spans.append((start, end))
    return spans


def _cmd_link(args) -> int:
    index = _load_index(args.index)
    rules = _get_rules(args)
    cfg = _get_seg_config(args)

    def process(parsed):
        doc, obj = _ensure_doc(parsed, rules)
        lines = []
        expansion = None
        if not args.no_abbrev:
            if not doc.sentences:
                doc = segment(doc, cfg)
            expansion = expansion_map(find_abbreviations(doc))
        for start, end in _mention_spans(doc, obj):
            mention = doc.text[start:end]
            cs = generate_candidates(index, index.alias_table, mention,
                                     args.k, expansion, start, end)
            lines.append(json.dumps({
                "mention": mention,
                "start": start,
                "end": end,
                "query_text": cs.query_text,
                "candidates": [
                    {"concept_id": c.concept_id, "alias": c.alias,
                     "score": c.similarity}
                    for c in cs.candidates
                ],
            }, ensure_ascii=False))
        return lines

    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        for lines in _map_ordered(process, _iter_doc_lines(fin), args.workers):
            for line in lines:
                fout.write(line + "\n")
    return 0


def _cmd_eval_recall(args) -> int:
    index = _load_index(args.index)
    try:
        ks = [int(k) for k in args.k_list.split(",") if k]
    except ValueError:
        raise UsageError(f"bad --k-list: {args.k_list!r}")
    gold = []
    with _open_in(args.gold) as fp:
        for lineno, line in enumerate(fp, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                gold.append(GoldMention(obj["mention"], obj["concept_id"]))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DataError(f"{args.gold}:{lineno}: {exc}")
    if not gold:
        raise DataError("empty gold mention set")
    try:
        curve = recall_at_k(index, index.alias_table, gold, ks)
    except ValueError as exc:
        raise UsageError(str(exc))
    with _open_out(args.output) as fout:
        fout.write("k,recall,mean_candidates,max_candidates\n")
        for p in curve.points:
            fout.write(f"{p.k},{p.recall:.6f},{p.mean_candidates:.2f},"
                       f"{p.max_candidates}\n")
    return 0


def _read_docs_jsonl(path: str):
    docs = []
    with _open_in(path) as fp:
        for parsed in _iter_doc_lines(fp):
            doc, _ = parsed
            if doc is None:
                raise DataError(f"{path}: expected core_text JSONL documents")
            docs.append(doc)
    return docs


def _cmd_eval_segmentation(args) -> int:
    pred = _read_docs_jsonl(args.pred)
    gold = _read_docs_jsonl(args.gold)
    try:
        acc = segmentation_accuracy(pred, gold)
    except ValueError as exc:
        raise DataError(str(exc))
    print(json.dumps({"sentence_acc": acc.sentence_acc,
                      "abstract_acc": acc.abstract_acc}))
    return 0


def _cmd_eval_citations(args) -> int:
    with _open_in(args.base) as fp:
        base = [line.strip() for line in fp if line.strip()]
    if not base:
        raise DataError("empty base sentence file")
    cfg = _get_seg_config(args)
    try:
        corpus = make_citation_corpus(base, args.seed, args.n)
        rate = citation_split_rate(corpus, cfg)
    except ValueError as exc:
        raise DataError(str(exc))
    print(json.dumps({"n": args.n, "seed": args.seed, "intact_rate": rate}))
    return 0


def _cmd_bench(args) -> int:
    stages = [s for s in args.stages.split(",") if s]
    index = _load_index(args.index) if args.index else None
    with _open_in(args.input) as fp:
        corpus = [line.strip() for line in fp if line.strip()]
    try:
        report = run_bench(corpus, stages, reps=args.reps, warmup=args.warmup,
                           index=index, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.json:
        print(json.dumps(report.as_dict()))
    else:
        d = report.as_dict()
        width = max(len(k) for k in d)
        for key, value in d.items():
            if key == "per_rep_total_s":
                value = ", ".join(f"{v:.4f}" for v in report.per_rep_total_s)
            elif isinstance(value, float):
                value = f"{value:.4f}"
            print(f"{key:<{width}}  {value}")
    return 0


# -- argument wiring ----------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="bioling", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, default_in="-", default_out="-"):
        p.add_argument("--input", default=default_in, metavar="FILE|-")
        p.add_argument("--output", default=default_out, metavar="FILE|-")

    p = sub.add_parser("tokenize", help="tokenize raw text or documents")
    p.add_argument("--rules", metavar="FILE")
    add_io(p)
    p.set_defaults(func=_cmd_tokenize)

    p = sub.add_parser("segment", help="add sentence spans")
    p.add_argument("--rules", metavar="FILE")
    p.add_argument("--seg-config", dest="seg_config", metavar="FILE")
    add_io(p)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("abbrev", help="detect abbreviation definitions")
    p.add_argument("--rules", metavar="FILE")
    p.add_argument("--seg-config", dest="seg_config", metavar="FILE")
    add_io(p)
    p.set_defaults(func=_cmd_abbrev)

    p = sub.add_parser("kb", help="knowledge-base utilities")
    kb_sub = p.add_subparsers(dest="kb_cmd", required=True)
    for name in ("validate", "stats"):
        kp = kb_sub.add_parser(name)
        kp.add_argument("--input", required=True, metavar="FILE")
        kp.set_defaults(func=_cmd_kb)

    p = sub.add_parser("index", help="build a searchable alias index")
    idx_sub = p.add_subparsers(dest="index_cmd", required=True)
    bp = idx_sub.add_parser("build")
    bp.add_argument("--kb", required=True, metavar="FILE")
    bp.add_argument("--min-df", dest="min_df", type=int, default=10)
    bp.add_argument("--backend", choices=(BACKEND_EXACT, BACKEND_LSH),
                    default=BACKEND_EXACT)
    bp.add_argument("--output", required=True, metavar="FILE")
    bp.add_argument("--lsh-bits", dest="lsh_bits", type=int, default=256)
    bp.add_argument("--lsh-rescore", dest="lsh_rescore", type=int, default=1000)
    bp.add_argument("--seed", type=int, default=LshParams().seed)
    bp.set_defaults(func=_cmd_index_build)

    p = sub.add_parser("link", help="generate linking candidates for mentions")
    p.add_argument("--index", required=True, metavar="FILE")
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--no-abbrev", dest="no_abbrev", action="store_true")
    p.add_argument("--rules", metavar="FILE")
    p.add_argument("--seg-config", dest="seg_config", metavar="FILE")
    p.add_argument("--workers", type=int, default=1)
    add_io(p)
    p.set_defaults(func=_cmd_link)

    p = sub.add_parser("eval", help="evaluation utilities")
    ev_sub = p.add_subparsers(dest="eval_cmd", required=True)

    rp = ev_sub.add_parser("recall")
    rp.add_argument("--index", required=True, metavar="FILE")
    rp.add_argument("--gold", required=True, metavar="FILE")
    rp.add_argument("--k-list", dest="k_list", default="1,5,10,25,50,100")
    rp.add_argument("--output", default="-", metavar="FILE|-")
    rp.set_defaults(func=_cmd_eval_recall)

    sp = ev_sub.add_parser("segmentation")
    sp.add_argument("--pred", required=True, metavar="FILE")
    sp.add_argument("--gold", required=True, metavar="FILE")
    sp.set_defaults(func=_cmd_eval_segmentation)

    cp = ev_sub.add_parser("citations")
    cp.add_argument("--n", type=int, default=500)
    cp.add_argument("--seed", type=int, default=13)
    cp.add_argument("--base", required=True, metavar="FILE")
    cp.add_argument("--seg-config", dest="seg_config", metavar="FILE")
    cp.set_defaults(func=_cmd_eval_citations)

    p = sub.add_parser("bench", help="throughput benchmark")
    p.add_argument("--input", required=True, metavar="FILE")
    p.add_argument("--stages", default=",".join(STAGES))
    p.add_argument("--index", metavar="FILE")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage().rstrip(), file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
