"""Crawl-record parsing and URL path normalization.

A path is represented as a plain tuple of directory names (``PathSeq``).
Its length is the path depth: ``/news/2023`` has depth 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Tuple

PathSeq = Tuple[str, ...]

ROOT: PathSeq = ()


class MalformedRecord(ValueError):
    """A crawl line could not be turned into a CrawlRecord."""


class RejectedPath(ValueError):
    """A raw path contains traversal artifacts and is discarded."""


@dataclass(frozen=True)
class CrawlRecord:
    domain: str
    raw_path: str
    status: int

    def __post_init__(self):
        if not self.domain or "/" in self.domain:
            raise MalformedRecord(f"invalid domain: {self.domain!r}")
        if not 100 <= self.status <= 599:
            raise MalformedRecord(f"status out of range: {self.status}")

    def to_json(self) -> str:
        return json.dumps({"domain": self.domain, "path": self.raw_path, "status": self.status})


def parse_crawl_line(line: str) -> CrawlRecord:
    """Parse one NDJSON crawl line with keys ``domain``, ``path``, ``status``."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"not JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedRecord("record is not an object")
    missing = [k for k in ("domain", "path", "status") if k not in obj]
    if missing:
        raise MalformedRecord(f"missing field(s): {', '.join(missing)}")
    domain, path, status = obj["domain"], obj["path"], obj["status"]
    if not isinstance(domain, str) or not isinstance(path, str):
        raise MalformedRecord("domain and path must be strings")
    # bool is an int subclass; reject it explicitly
    if isinstance(status, bool) or not isinstance(status, int):
        raise MalformedRecord(f"non-integer status: {status!r}")
    return CrawlRecord(domain, path, status)


def normalize_path(raw_path: str) -> PathSeq:
    """Turn a crawled path into a sequence of directory names.

    Query strings and fragments are cut, empty segments dropped, and a final
    segment containing a ``.`` is treated as a file and removed. Case is kept
    and nothing is percent-decoded.

    Raises RejectedPath when a directory segment is ``.`` or ``..``.
    """
    for sep in ("?", "#"):
        cut = raw_path.find(sep)
        if cut != -1:
            raw_path = raw_path[:cut]
    segments = [s for s in raw_path.split("/") if s]
    if segments and "." in segments[-1]:
        last = segments.pop()
        if last in (".", ".."):
            raise RejectedPath(f"traversal segment in {raw_path!r}")
    for seg in segments:
        if seg in (".", ".."):
            raise RejectedPath(f"traversal segment in {raw_path!r}")
    return tuple(segments)


def depth(path: PathSeq) -> int:
    return len(path)


def render(path: PathSeq) -> str:
    """``("news", "2024")`` -> ``"/news/2024"``; the root renders as ``"/"``."""
    return "/" + "/".join(path)
