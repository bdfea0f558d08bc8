"""Keyword-prioritized BFS crawler with politeness, retries, and checkpoints.

Two FIFO queues (High before Low) drive the visit order; the clock and rng
are injectable so politeness gaps and queue behavior are testable without
wall-clock time, and the checkpoint stores full queue state so a resumed
crawl replays exactly the interrupted one.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import time
from dataclasses import dataclass
from enum import Enum
from html.parser import HTMLParser
from pathlib import Path
from typing import Optional, Protocol
from urllib.parse import urljoin, urlsplit, urlunsplit

from .extract import extract_page_text

logger = logging.getLogger(__name__)

DEFAULT_PRIORITY_KEYWORDS = (
    "application requirements",
    "deadlines",
    "testing policies",
    "financial aid",
    "international applicants",
    "transcript request",
    "letters of recommendation",
)
RESOURCE_EXTENSIONS = (".pdf", ".jpg", ".png", ".mp4")
BACKOFF_BASE_S = 1.0
BACKOFF_FACTOR = 2.0


class SeedUnreachable(Exception):
    pass


class CrawlInterrupted(Exception):
    """Raised by a fetcher (or handler) to abort mid-crawl; checkpoint persists."""


class LinkPriority(str, Enum):
    HIGH = "High"
    LOW = "Low"
    EXCLUDED = "Excluded"


@dataclass(frozen=True)
class CrawlConfig:
    max_pages: int = 50
    delay_range_s: tuple[float, float] = (8.0, 15.0)
    max_retries: int = 3
    priority_keywords: tuple[str, ...] = DEFAULT_PRIORITY_KEYWORDS
    max_concurrent_institutions: int = 3
    crawl_version: str = "v1"

    def __post_init__(self):
        if self.delay_range_s[0] > self.delay_range_s[1]:
            raise ValueError("delay range min must be <= max")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_pages < 1:
            raise ValueError("max_pages must be >= 1")


@dataclass
class PageRecord:
    url: str
    title: str
    html_path: Optional[str]
    text_path: Optional[str]
    pdf_path: Optional[str]
    fetched_at: str
    status: str  # Ok | Failed
    content_hash: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class FetchResult:
    status_code: int
    body_html: str
    final_url: str


class Fetcher(Protocol):
    def fetch(self, url: str) -> FetchResult: ...


class HttpFetcher:
    """Live fetcher over requests; used by the CLI, never by unit tests."""

    def __init__(self, timeout_s: float = 20.0, user_agent: str = "groundfill/0.1"):
        import requests

        self._session = requests.Session()
        self._session.headers["User-Agent"] = user_agent
        self._timeout = timeout_s

    def fetch(self, url: str) -> FetchResult:
        response = self._session.get(url, timeout=self._timeout)
        return FetchResult(
            status_code=response.status_code,
            body_html=response.text,
            final_url=str(response.url),
        )


class StaticSiteFetcher:
    """Deterministic in-memory site for tests and fixtures.

    fail_counts maps url -> number of initial attempts that return 500;
    interrupt_after aborts the crawl once that many successful fetches happened.
    """

    def __init__(
        self,
        pages: dict[str, str],
        fail_counts: Optional[dict[str, int]] = None,
        interrupt_after: Optional[int] = None,
    ):
        self.pages = dict(pages)
        self.fail_counts = dict(fail_counts or {})
        self.interrupt_after = interrupt_after
        self.calls: list[str] = []

    def fetch(self, url: str) -> FetchResult:
        if self.interrupt_after is not None and len(self.calls) >= self.interrupt_after:
            raise CrawlInterrupted(url)
        self.calls.append(url)
        if self.fail_counts.get(url, 0) > 0:
            self.fail_counts[url] -= 1
            return FetchResult(status_code=500, body_html="", final_url=url)
        body = self.pages.get(url)
        if body is None:
            return FetchResult(status_code=404, body_html="", final_url=url)
        return FetchResult(status_code=200, body_html=body, final_url=url)


class SystemClock:
    def now(self) -> float:
        return time.time()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class VirtualClock:
    """Clock whose sleeps advance virtual time instantly."""

    def __init__(self, start: float = 0.0):
        self.time = start
        self.sleeps: list[float] = []

    def now(self) -> float:
        return self.time

    def sleep(self, seconds: float) -> None:
        self.sleeps.append(seconds)
        self.time += seconds


def normalize_url(base: str, href: str) -> str:
    """Absolute URL with lowercase host, no fragment, query preserved."""
    absolute = urljoin(base, href.strip())
    parts = urlsplit(absolute)
    return urlunsplit(
        (parts.scheme.lower(), parts.netloc.lower(), parts.path or "/", parts.query, "")
    )


def sanitize_for_path(value: str) -> str:
    cleaned = "".join(c if c.isalnum() or c in "._-" else "_" for c in value)
    return cleaned.strip("_") or "page"


def classify_link(
    url: str,
    anchor_text: str,
    keywords: tuple[str, ...],
    base_domain: str,
) -> LinkPriority:
    """High for keyword-bearing admissions links, Excluded off-domain/resources."""
    parts = urlsplit(url)
    if parts.netloc.lower() != base_domain.lower():
        return LinkPriority.EXCLUDED
    path = parts.path.lower()
    if any(path.endswith(ext) for ext in RESOURCE_EXTENSIONS):
        return LinkPriority.EXCLUDED
    haystack = " ".join(
        (
            " ".join(t for t in _token_split(parts.path + " " + parts.query)),
            " ".join(t for t in _token_split(anchor_text)),
        )
    )
    for keyword in keywords:
        normalized = " ".join(_token_split(keyword))
        if normalized and normalized in haystack:
            return LinkPriority.HIGH
    return LinkPriority.LOW


def _token_split(text: str) -> list[str]:
    return [t for t in "".join(c if c.isalnum() else " " for c in text.lower()).split() if t]


class _LinkParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.links: list[tuple[str, str]] = []
        self._href: Optional[str] = None
        self._text: list[str] = []
        self.title = ""
        self._in_title = False

    def handle_starttag(self, tag, attrs):
        if tag == "a":
            self._href = dict(attrs).get("href")
            self._text = []
        elif tag == "title":
            self._in_title = True

    def handle_endtag(self, tag):
        if tag == "a" and self._href:
            self.links.append((self._href, " ".join(" ".join(self._text).split())))
            self._href = None
        elif tag == "title":
            self._in_title = False

    def handle_data(self, data):
        if self._href is not None:
            self._text.append(data)
        if self._in_title:
            self.title += data


def extract_links(html: str, base_url: str) -> tuple[str, list[tuple[str, str]]]:
    """(page title, [(normalized absolute url, anchor text), ...])."""
    parser = _LinkParser()
    parser.feed(html)
    parser.close()
    links = [(normalize_url(base_url, href), text) for href, text in parser.links]
    return parser.title.strip(), links


@dataclass
class VisitLogEntry:
    url: str
    queue: str  # High | Low
    enqueued_step: int
    visited_step: int
    fetched_at: float


@dataclass
class CrawlResult:
    seed_url: str
    records: list[PageRecord]
    visit_log: list[VisitLogEntry]
    pages_visited: int
    excluded_urls: list[str]
    out_dir: str


class _Checkpoint:
    def __init__(self, path: Path):
        self.path = path
        self.visited: list[str] = []
        self.high: list[tuple[str, int]] = []
        self.low: list[tuple[str, int]] = []
        self.enqueued: set[str] = set()
        self.records: list[dict] = []
        self.next_step: int = 0
        if path.exists():
            data = json.loads(path.read_text(encoding="utf-8"))
            self.visited = data["visited"]
            self.high = [tuple(x) for x in data["high"]]
            self.low = [tuple(x) for x in data["low"]]
            self.enqueued = set(data["enqueued"])
            self.records = data["records"]
            self.next_step = data["next_step"]

    def save(self) -> None:
        payload = {
            "visited": self.visited,
            "high": self.high,
            "low": self.low,
            "enqueued": sorted(self.enqueued),
            "records": self.records,
            "next_step": self.next_step,
        }
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload), encoding="utf-8")
        os.replace(tmp, self.path)


def crawl_institution(
    seed_url: str,
    cfg: CrawlConfig,
    fetcher: Fetcher,
    checkpoint_path: str | Path,
    out_dir: str | Path,
    clock=None,
    rng: Optional[random.Random] = None,
) -> CrawlResult:
    """Crawl one institution, strictly sequentially, resumable mid-flight."""
    clock = clock or SystemClock()
    rng = rng or random.Random()
    seed_url = normalize_url(seed_url, "")
    base_domain = urlsplit(seed_url).netloc

    out_path = Path(out_dir) / sanitize_for_path(base_domain)
    pages_dir = out_path / "pages"
    pages_dir.mkdir(parents=True, exist_ok=True)
    errors_log = out_path / "errors.log"

    ckpt = _Checkpoint(Path(checkpoint_path))
    if not ckpt.enqueued:
        ckpt.high.append((seed_url, ckpt.next_step))
        ckpt.enqueued.add(seed_url)
        ckpt.next_step += 1
        ckpt.save()

    visit_log: list[VisitLogEntry] = []
    excluded: list[str] = []
    fetched_any = bool(ckpt.visited)

    def log_error(url: str, message: str) -> None:
        with open(errors_log, "a", encoding="utf-8") as fh:
            fh.write(f"{clock.now():.3f}\t{url}\t{message}\n")

    def fetch_with_retries(url: str) -> Optional[FetchResult]:
        attempts = cfg.max_retries + 1
        for attempt in range(attempts):
            if attempt > 0:
                clock.sleep(BACKOFF_BASE_S * (BACKOFF_FACTOR ** (attempt - 1)))
            try:
                result = fetcher.fetch(url)
            except CrawlInterrupted:
                raise
            except Exception as exc:  # transient failure: retry, never halt
                log_error(url, f"fetch error: {exc}")
                continue
            if result.status_code < 400:
                return result
            log_error(url, f"status {result.status_code}")
        return None

    while len(ckpt.visited) < cfg.max_pages and (ckpt.high or ckpt.low):
        queue_name = "High" if ckpt.high else "Low"
        url, enqueued_step = (ckpt.high or ckpt.low).pop(0)
        if url in ckpt.visited:
            continue

        if fetched_any:
            clock.sleep(rng.uniform(*cfg.delay_range_s))
        fetched_at = clock.now()
        result = fetch_with_retries(url)
        fetched_any = True

        stem = sanitize_for_path(url)
        if result is None:
            if url == seed_url and not ckpt.visited:
                raise SeedUnreachable(seed_url)
            record = PageRecord(
                url=url,
                title="",
                html_path=None,
                text_path=None,
                pdf_path=None,
                fetched_at=f"{fetched_at:.3f}",
                status="Failed",
                content_hash="",
            )
        else:
            title, links = extract_links(result.body_html, url)
            for link_url, anchor in links:
                priority = classify_link(link_url, anchor, cfg.priority_keywords, base_domain)
                if priority is LinkPriority.EXCLUDED:
                    excluded.append(link_url)
                    log_error(link_url, "excluded: off-domain or resource")
                    continue
                if link_url in ckpt.enqueued:
                    continue
                ckpt.enqueued.add(link_url)
                target = ckpt.high if priority is LinkPriority.HIGH else ckpt.low
                target.append((link_url, ckpt.next_step))
                ckpt.next_step += 1

            html_path = pages_dir / f"{stem}.html"
            text_path = pages_dir / f"{stem}.txt"
            html_path.write_text(result.body_html, encoding="utf-8")
            text_path.write_text(
                extract_page_text(result.body_html).as_text(), encoding="utf-8"
            )
            record = PageRecord(
                url=url,
                title=title,
                html_path=str(html_path),
                text_path=str(text_path),
                pdf_path=None,
                fetched_at=f"{fetched_at:.3f}",
                status="Ok",
                content_hash=hashlib.sha256(result.body_html.encode("utf-8")).hexdigest(),
            )

        ckpt.visited.append(url)
        ckpt.records.append(record.to_dict())
        ckpt.save()
        visit_log.append(
            VisitLogEntry(
                url=url,
                queue=queue_name,
                enqueued_step=enqueued_step,
                visited_step=len(ckpt.visited) - 1,
                fetched_at=fetched_at,
            )
        )

    records = [PageRecord(**r) for r in ckpt.records]
    return CrawlResult(
        seed_url=seed_url,
        records=records,
        visit_log=visit_log,
        pages_visited=len(ckpt.visited),
        excluded_urls=excluded,
        out_dir=str(out_path),
    )


def crawl_many(
    seeds: list[tuple[str, str]],
    cfg: CrawlConfig,
    fetcher_factory,
    out_dir: str | Path,
    clock_factory=None,
    rng_seed: Optional[int] = None,
) -> dict[str, CrawlResult]:
    """Crawl several institutions concurrently (politeness stays per-domain)."""
    from concurrent.futures import ThreadPoolExecutor

    out_path = Path(out_dir)
    results: dict[str, CrawlResult] = {}

    def run(entry: tuple[str, str]) -> tuple[str, CrawlResult]:
        institution, seed_url = entry
        domain = urlsplit(normalize_url(seed_url, "")).netloc
        checkpoint = out_path / sanitize_for_path(domain) / "checkpoint.json"
        checkpoint.parent.mkdir(parents=True, exist_ok=True)
        result = crawl_institution(
            seed_url,
            cfg,
            fetcher_factory(),
            checkpoint,
            out_path,
            clock=clock_factory() if clock_factory else None,
            rng=random.Random(rng_seed) if rng_seed is not None else None,
        )
        return institution, result

    workers = max(1, cfg.max_concurrent_institutions)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for institution, result in pool.map(run, seeds):
            results[institution] = result
    return results
