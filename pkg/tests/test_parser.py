"""Poster HTML parsing, cascade behavior, and lint findings."""
from __future__ import annotations

import pytest

from posterml.errors import (
    MalformedMarkup,
    MissingCanvasSize,
    NoPosterContainer,
)
from posterml.poster import lint_poster, parse_design, poster_container_report

MINIMAL = (
    '<div class="poster" style="width:400px;height:400px">'
    '<div style="position:absolute;left:10px;top:20px;width:100px;height:50px"></div>'
    "</div>"
)


def test_minimal_poster_canvas_and_child():
    doc = parse_design(MINIMAL)
    assert (doc.canvas.width, doc.canvas.height) == (400.0, 400.0)
    assert len(doc.poster.children) == 1
    child = doc.poster.children[0]
    assert child.resolved_style["left"] == "10px"
    assert child.resolved_style["width"] == "100px"


def test_missing_poster_class_raises():
    with pytest.raises(NoPosterContainer):
        parse_design('<div style="width:400px;height:400px"></div>')


def test_two_poster_containers_rejected():
    html = (
        '<div class="poster" style="width:10px;height:10px"></div>'
        '<div class="poster" style="width:10px;height:10px"></div>'
    )
    with pytest.raises(MalformedMarkup):
        parse_design(html)


def test_missing_canvas_size():
    with pytest.raises(MissingCanvasSize):
        parse_design('<div class="poster"></div>')
    with pytest.raises(MissingCanvasSize):
        parse_design('<div class="poster" style="width:50%;height:100px"></div>')


def test_interleaved_misnesting_rejected():
    html = '<div class="poster" style="width:10px;height:10px"><b><i></b></i></div>'
    with pytest.raises(MalformedMarkup):
        parse_design(html)


def test_unclosed_elements_at_eof_recover():
    html = '<div class="poster" style="width:10px;height:10px"><div><span>hi'
    doc = parse_design(html)
    assert doc.poster.children[0].children[0].own_text() == "hi"


def test_void_tags_do_not_nest():
    html = (
        '<div class="poster" style="width:10px;height:10px">'
        '<img src="a.png"><div>after</div></div>'
    )
    doc = parse_design(html)
    tags = [c.tag for c in doc.poster.children]
    assert tags == ["img", "div"]


def test_stray_end_tag_ignored():
    html = '<div class="poster" style="width:10px;height:10px"></span></div>'
    doc = parse_design(html)
    assert doc.poster.children == []


def test_stylesheet_cascade_and_specificity():
    html = """
    <html><head><style>
    div { width: 50px; height: 50px; }
    .wide { width: 200px; }
    .wide { width: 220px; }
    </style></head><body>
    <div class="poster" style="width:400px;height:400px">
      <div class="wide"></div>
      <div class="wide" style="width:300px"></div>
    </div>
    </body></html>
    """
    doc = parse_design(html)
    first, second = doc.poster.children
    # later class rule wins over earlier; inline beats both
    assert first.resolved_style["width"] == "220px"
    assert first.resolved_style["height"] == "50px"
    assert second.resolved_style["width"] == "300px"


def test_unknown_property_preserved_and_linted():
    html = (
        '<div class="poster" style="width:400px;height:400px">'
        '<div style="backdrop-filter: blur(4px); width: 10px; height: 10px"></div></div>'
    )
    doc = parse_design(html)
    child = doc.poster.children[0]
    assert "backdrop-filter" not in child.resolved_style
    assert child.raw_unsupported["backdrop-filter"] == "blur(4px)"
    report = lint_poster(doc)
    assert any(f.code == "unsupported-property" for f in report.findings)


def test_unsupported_selector_warn():
    html = """
    <style>.poster .bg { width: 10px; }</style>
    <div class="poster" style="width:400px;height:400px"></div>
    """
    report = lint_poster(parse_design(html))
    assert any(f.code == "unsupported-selector" for f in report.findings)


def test_lint_clean_document():
    report = lint_poster(parse_design(MINIMAL))
    assert report.findings == ()


def test_lint_content_outside_poster():
    html = (
        "<body>"
        '<div class="poster" style="width:400px;height:400px"></div>'
        "<p>outside text</p>"
        "</body>"
    )
    report = lint_poster(parse_design(html))
    outside = [f for f in report.findings if f.code == "content-outside-poster"]
    assert len(outside) == 1
    assert outside[0].severity == "error"


def test_lint_ancestors_of_poster_exempt():
    html = (
        "<html><body>"
        '<div class="poster" style="width:400px;height:400px"><p>inside</p></div>'
        "</body></html>"
    )
    report = lint_poster(parse_design(html))
    assert not any(f.code == "content-outside-poster" for f in report.findings)


def test_lint_off_canvas_warn():
    html = (
        '<div class="poster" style="width:400px;height:400px">'
        '<div style="position:absolute;left:-500px;top:0;width:100px;height:100px;background:red"></div>'
        "</div>"
    )
    report = lint_poster(parse_design(html))
    assert any(f.code == "off-canvas" for f in report.findings)


def test_parse_deterministic_digest():
    a = parse_design(MINIMAL)
    b = parse_design(MINIMAL)
    assert a.source_digest == b.source_digest
    c = parse_design(MINIMAL + " ")
    assert c.source_digest != a.source_digest


def test_declaration_order_last_wins():
    html = (
        '<div class="poster" style="width:400px;height:400px">'
        '<div style="width:10px;width:20px;height:5px"></div></div>'
    )
    doc = parse_design(html)
    assert doc.poster.children[0].resolved_style["width"] == "20px"


def test_container_report_tolerates_browser_only_sizes():
    html = (
        '<div class="poster" style="width:min(92vw, 1080px);height:min(92vw, 1080px)">'
        "<p>content</p></div>"
    )
    report = poster_container_report(html)
    assert not report.findings
    with pytest.raises(MissingCanvasSize):
        parse_design(html)
