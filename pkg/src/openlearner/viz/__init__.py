"""Static SVG (and self-contained HTML) renderings of a learner's state."""

from __future__ import annotations

import re
from dataclasses import dataclass
from html import escape
from typing import Sequence, Union

from ..models import LearnerHistory, SnapshotEntry
from . import charts
from .svg import SvgDocument

KINDS = ("bar", "dot", "line", "pie", "rose", "bubble", "treemap", "radar", "wordcloud")

VizInput = Union[Sequence[SnapshotEntry], LearnerHistory]


class VizError(ValueError):
    pass


@dataclass(frozen=True)
class VizSpec:
    kind: str = "bar"
    top_k: int = 15
    width: int = 640
    height: int = 480
    title: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise VizError(f"unknown chart kind {self.kind!r}; choose from {list(KINDS)}")
        if self.top_k < 1:
            raise VizError("top_k must be >= 1")
        if self.width < 100 or self.height < 100:
            raise VizError("width and height must be at least 100 pixels")


def render(data: VizInput, spec: VizSpec) -> str:
    """Render a snapshot (or, for ``line``, a history) as an SVG document."""
    title = spec.title or f"Learner state ({spec.kind})"
    if spec.kind == "line":
        if not isinstance(data, LearnerHistory):
            raise VizError("a line chart needs the learner's history, not a snapshot")
        entries = data.final_snapshot(spec.top_k)
    elif isinstance(data, LearnerHistory):
        entries = data.final_snapshot(spec.top_k)
    else:
        entries = list(data)[: spec.top_k]
    if not entries:
        raise VizError("nothing to visualise")
    doc = SvgDocument(spec.width, spec.height, spec.kind, title, charts._meta(spec.kind, entries))
    if spec.kind == "line":
        charts.render_line(doc, data, entries)
    else:
        charts.SNAPSHOT_RENDERERS[spec.kind](doc, entries)
    return doc.render()


_XML_DECL = re.compile(r"^<\?xml[^>]*\?>\s*")


def export_html(svg: str, spec: VizSpec) -> str:
    """Wrap an SVG in a standalone HTML page; marks keep their native tooltips."""
    title = spec.title or f"Learner state ({spec.kind})"
    body = _XML_DECL.sub("", svg).strip()
    return (
        "<!DOCTYPE html>\n"
        '<html lang="en">\n<head>\n<meta charset="utf-8">\n'
        f"<title>{escape(title)}</title>\n"
        "<style>body{margin:0;padding:16px;font-family:Helvetica,Arial,sans-serif}"
        " g.mark:hover{opacity:.8}</style>\n"
        "</head>\n<body>\n"
        f"{body}\n"
        "</body>\n</html>\n"
    )


def output_name(learner_id: str, kind: str, ext: str) -> str:
    safe = re.sub(r"[^A-Za-z0-9_.-]", "_", learner_id)
    return f"{safe}.{kind}.{ext}"


__all__ = ["KINDS", "VizError", "VizSpec", "export_html", "output_name", "render"]
