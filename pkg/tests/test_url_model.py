import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirlm.url_model import (CrawlRecord, MalformedRecord, RejectedPath, depth, normalize_path, parse_crawl_line,
                             render)


def test_parse_extracts_fields_verbatim():
    rec = parse_crawl_line('{"domain":"example.edu","path":"/news/2024","status":200}')
    assert rec == CrawlRecord("example.edu", "/news/2024", 200)


@pytest.mark.parametrize("line", [
    '{"domain":"","path":"/a","status":200}',
    '{"domain":"x.gov","path":"/a","status":"ok"}',
    '{"domain":"x.gov","path":"/a"}',
    '{"domain":"x.gov","path":"/a","status":true}',
    '{"domain":"x.gov","path":"/a","status":700}',
    '{"domain":"x.gov/a","path":"/a","status":200}',
    '[1, 2]',
    'not json',
])
def test_parse_rejects_malformed(line):
    with pytest.raises(MalformedRecord):
        parse_crawl_line(line)


def test_record_json_roundtrip():
    rec = CrawlRecord("a.org", "/x/y?z=1", 404)
    assert parse_crawl_line(rec.to_json()) == rec


@pytest.mark.parametrize("raw, expected", [
    ("/news/2024/index.html?q=1", ("news", "2024")),
    ("/", ()),
    ("", ()),
    ("/news//today/", ("news", "today")),
    ("/About/Team", ("About", "Team")),
    ("/a/b#frag/c", ("a", "b")),
    ("/v1.2/docs", ("v1.2", "docs")),
    ("/file.txt", ()),
])
def test_normalize_path(raw, expected):
    assert normalize_path(raw) == expected


@pytest.mark.parametrize("raw", ["/a/../b", "/./a", "/a/..", "/a/."])
def test_normalize_rejects_traversal(raw):
    with pytest.raises(RejectedPath):
        normalize_path(raw)


@pytest.mark.parametrize("path, d", [(("news", "2023"), 2), ((), 0), (("a", "b", "c", "d"), 4)])
def test_depth(path, d):
    assert depth(path) == d


def test_render():
    assert render(()) == "/"
    assert render(("news", "2024")) == "/news/2024"


raw_paths = st.text(alphabet=st.sampled_from(list("ab./?#-_")), max_size=30)


@given(raw_paths)
def test_normalize_properties(raw):
    try:
        p = normalize_path(raw)
    except RejectedPath:
        return
    for seg in p:
        assert seg and not set(seg) & set("/?#")
        assert seg not in (".", "..")
    assert depth(p) <= raw.count("/") + 1
    # idempotent on its own rendering, unless the last kept segment looks like a file
    if not p or "." not in p[-1]:
        assert normalize_path(render(p)) == p
