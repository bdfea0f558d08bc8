"""Institutional corpus construction: polite crawling, extraction, manifests."""

from .crawl import (
    CrawlConfig,
    CrawlInterrupted,
    CrawlResult,
    FetchResult,
    Fetcher,
    HttpFetcher,
    LinkPriority,
    PageRecord,
    SeedUnreachable,
    StaticSiteFetcher,
    SystemClock,
    VirtualClock,
    classify_link,
    crawl_institution,
    crawl_many,
    extract_links,
    normalize_url,
    sanitize_for_path,
)
from .extract import StructuredText, TextBlock, extract_page_text, remove_boilerplate
from .manifest import read_manifest, write_manifest

__all__ = [
    "CrawlConfig",
    "CrawlInterrupted",
    "CrawlResult",
    "FetchResult",
    "Fetcher",
    "HttpFetcher",
    "LinkPriority",
    "PageRecord",
    "SeedUnreachable",
    "StaticSiteFetcher",
    "StructuredText",
    "SystemClock",
    "TextBlock",
    "VirtualClock",
    "classify_link",
    "crawl_institution",
    "crawl_many",
    "extract_links",
    "extract_page_text",
    "normalize_url",
    "read_manifest",
    "remove_boilerplate",
    "sanitize_for_path",
    "write_manifest",
]
