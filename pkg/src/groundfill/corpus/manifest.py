"""Versioned per-institution crawl manifest (index.json) with change flags."""

from __future__ import annotations

import json
from pathlib import Path

from .crawl import CrawlConfig, PageRecord

MANIFEST_NAME = "index.json"


def read_manifest(institution_dir: str | Path) -> dict | None:
    path = Path(institution_dir) / MANIFEST_NAME
    if not path.exists():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def write_manifest(
    records: list[PageRecord],
    cfg: CrawlConfig,
    institution_dir: str | Path,
) -> Path:
    """Write index.json; each page flagged changed vs the prior version's hash."""
    institution_dir = Path(institution_dir)
    institution_dir.mkdir(parents=True, exist_ok=True)
    previous = read_manifest(institution_dir)
    previous_hashes = {
        page["url"]: page["content_hash"] for page in (previous or {}).get("pages", [])
    }

    pages = []
    for record in sorted(records, key=lambda r: r.url):
        entry = record.to_dict()
        entry["changed"] = previous_hashes.get(record.url) != record.content_hash
        pages.append(entry)

    manifest = {"version": cfg.crawl_version, "pages": pages}
    path = institution_dir / MANIFEST_NAME
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    tmp.replace(path)
    return path
