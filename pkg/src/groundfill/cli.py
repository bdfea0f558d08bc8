"""Command-line entry points: crawl, ingest, index, fill, eval, synth, serve.

Exit codes: 0 success, 1 domain failure, 2 usage error (argparse default).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import evalharness, resources, synthgen
from .answer import FillConfig, FormQuestion, fill_form
from .chunker import ChunkConfig, SourceType, chunk_text
from .corpus import CrawlConfig, HttpFetcher, crawl_many, write_manifest
from .index import DuplicateId, IndexLoadError, LexicalIndex
from .model import DeterministicExtractor
from .schema import load_schema


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _load_schema_arg(path: str | None):
    if path:
        return load_schema(Path(path).read_bytes())
    return resources.reference_schema()


def _load_index(path: str) -> LexicalIndex:
    try:
        return LexicalIndex.load(path)
    except IndexLoadError as exc:
        _log(f"index load failed: {exc}")
        raise SystemExit(1)


def cmd_crawl(args) -> int:
    seeds_path = Path(args.seeds)
    if not seeds_path.exists():
        raise SystemExit(2)
    with open(seeds_path, newline="", encoding="utf-8") as fh:
        seeds = [(row["institution"], row["url"]) for row in csv.DictReader(fh)]
    if not seeds:
        _log("no seeds in file")
        return 1

    cfg = CrawlConfig(
        max_pages=args.max_pages,
        delay_range_s=(args.delay_min, args.delay_max),
        max_retries=args.retries,
        max_concurrent_institutions=args.concurrency,
        crawl_version=args.version,
    )
    succeeded = 0
    try:
        results = crawl_many(seeds, cfg, HttpFetcher, args.out)
    except Exception as exc:
        _log(f"crawl failed: {exc}")
        return 1
    for institution, result in results.items():
        ok_pages = [r for r in result.records if r.status == "Ok"]
        if ok_pages:
            succeeded += 1
        write_manifest(result.records, cfg, result.out_dir)
        _log(f"{institution}: {result.pages_visited} pages ({len(ok_pages)} ok)")
    return 0 if succeeded else 1


def cmd_ingest(args) -> int:
    docs_dir = Path(args.docs)
    files = sorted(docs_dir.glob("**/*.txt")) if docs_dir.exists() else []
    if not files:
        _log(f"no .txt documents under {docs_dir}")
        return 1
    idx = _load_index(args.index)
    cfg = ChunkConfig()
    total = 0
    try:
        for path in files:
            chunks = chunk_text(
                path.read_text(encoding="utf-8"),
                cfg,
                institution=args.user,
                page_id=path.stem,
                source_url=f"upload://{path.name}",
                page_title=path.stem,
                source_type=SourceType.PERSONAL,
                user_id=args.user,
            )
            idx.index_chunks(chunks)
            total += len(chunks)
    except DuplicateId as exc:
        _log(f"duplicate chunk id: {exc}")
        return 1
    idx.save(args.index)
    print(f"ingested {len(files)} documents, {total} chunks")
    return 0


def cmd_index(args) -> int:
    corpus_dir = Path(args.corpus)
    manifests = sorted(corpus_dir.glob("*/index.json"))
    if not manifests:
        _log(f"no institution manifests under {corpus_dir}")
        return 1
    idx = _load_index(args.index)
    cfg = ChunkConfig()
    total = 0
    try:
        for manifest_path in manifests:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            institution = manifest_path.parent.name
            for page in manifest["pages"]:
                if page["status"] != "Ok" or not page.get("text_path"):
                    continue
                text = Path(page["text_path"]).read_text(encoding="utf-8")
                chunks = chunk_text(
                    text,
                    cfg,
                    institution=institution,
                    page_id=Path(page["text_path"]).stem,
                    source_url=page["url"],
                    page_title=page.get("title", ""),
                    source_type=SourceType.OFFICIAL,
                    crawl_timestamp=page.get("fetched_at"),
                )
                idx.index_chunks(chunks)
                total += len(chunks)
    except DuplicateId as exc:
        _log(f"duplicate chunk id: {exc}")
        return 1
    idx.save(args.index)
    print(f"indexed {total} chunks from {len(manifests)} institutions")
    return 0


def load_form_file(path: str | Path) -> tuple[str, list[FormQuestion]]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    questions = [
        FormQuestion(
            descriptor=resources.descriptor_from_dict(entry["descriptor"]),
            question=entry["question"],
        )
        for entry in doc["questions"]
    ]
    return doc.get("name", Path(path).stem), questions


def cmd_fill(args) -> int:
    try:
        form_name, questions = load_form_file(args.form)
    except Exception as exc:
        _log(f"form file rejected: {exc}")
        return 1
    try:
        schema = _load_schema_arg(args.schema)
    except Exception as exc:
        _log(f"schema rejected: {exc}")
        return 1
    idx = _load_index(args.index)
    cfg = FillConfig(model=DeterministicExtractor(), user_id=args.user)
    report = fill_form(questions, idx, schema, cfg)
    payload = evalharness.fill_report_to_dict(report, form_name)
    Path(args.out).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    rate = "n/a" if payload["fill_rate"] is None else f"{payload['fill_rate']:.2f}"
    print(f"{form_name}: filled {payload['filled']}/{payload['visible']} (rate {rate})")
    return 0


def cmd_eval(args) -> int:
    report_path = Path(args.report)
    if not report_path.exists():
        _log(f"report not found: {report_path}")
        return 1
    report = json.loads(report_path.read_text(encoding="utf-8"))
    idx = _load_index(args.index)
    metrics = evalharness.compute_metrics(report, idx)
    floors = {}
    if args.min_fill is not None:
        floors["fill_rate"] = args.min_fill
    if args.min_citation_present is not None:
        floors["citation_present_rate"] = args.min_citation_present
    if args.min_citation_valid is not None:
        floors["citation_valid_rate"] = args.min_citation_valid
    violated = evalharness.floors_violated(metrics, floors)
    print(json.dumps(metrics, indent=2, sort_keys=True))
    if violated:
        _log("floors violated: " + "; ".join(violated))
        return 1
    return 0


def cmd_synth(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.n == 0:
        print("generated 0 packages")
        return 0
    rows = synthgen.default_seed_rows(
        args.n, args.seed, resources.seed_name_pool(), resources.school_pool()
    )
    result = synthgen.generate_batch(rows, base_seed=args.seed, out_dir=out_dir)
    print(f"generated {len(result.packages)} packages in {out_dir}")
    if result.shortfall:
        _log(f"shortfall: {result.shortfall} packages failed after retries")
        return 1
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    schema = _load_schema_arg(args.schema)
    idx = _load_index(args.index) if args.index else LexicalIndex()
    users = (
        json.loads(Path(args.users).read_text(encoding="utf-8"))
        if args.users
        else {"student": "open-sesame"}
    )
    app = create_app(ServiceConfig(schema=schema, index=idx, users=users))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groundfill",
        description="Grounded form completion: corpus building, mapping, filling, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("crawl", help="crawl institution sites from a seeds CSV")
    p.add_argument("--seeds", required=True, help="CSV with columns institution,url")
    p.add_argument("--out", required=True)
    p.add_argument("--max-pages", type=int, default=50)
    p.add_argument("--version", default="v1")
    p.add_argument("--delay-min", type=float, default=8.0)
    p.add_argument("--delay-max", type=float, default=15.0)
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--concurrency", type=int, default=3)
    p.set_defaults(func=cmd_crawl)

    p = sub.add_parser("ingest", help="chunk and index personal documents")
    p.add_argument("--docs", required=True)
    p.add_argument("--user", required=True)
    p.add_argument("--index", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="chunk and index a crawled corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--index", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("fill", help="fill a form file against an index")
    p.add_argument("--form", required=True)
    p.add_argument("--user", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--schema")
    p.set_defaults(func=cmd_fill)

    p = sub.add_parser("eval", help="compute metrics over a fill report")
    p.add_argument("--report", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--min-fill", type=float)
    p.add_argument("--min-citation-present", type=float)
    p.add_argument("--min-citation-valid", type=float)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate synthetic student packages")
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the suggestion service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--index")
    p.add_argument("--schema")
    p.add_argument("--users", help="JSON file mapping user_id to secret")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
