"""Minimal deterministic SVG writer."""

from __future__ import annotations

import json
import math
from typing import Any
from xml.sax.saxutils import escape, quoteattr

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
BASE_FILL = "#08306b"
FONT = "Helvetica, Arial, sans-serif"


def fmt(x: float) -> str:
    """Coordinates: 12 significant digits, enough to check formulas exactly."""
    if x == 0:
        return "0"
    return format(x, ".12g")


def exact(x: float) -> str:
    """Data values: shortest repr that round-trips."""
    return repr(float(x))


def attrs(**kwargs: Any) -> str:
    parts = []
    for key, value in kwargs.items():
        if value is None:
            continue
        name = key.rstrip("_").replace("_", "-")
        if isinstance(value, float):
            value = fmt(value)
        parts.append(f"{name}={quoteattr(str(value))}")
    return " ".join(parts)


def el(tag: str, **kwargs: Any) -> str:
    return f"<{tag} {attrs(**kwargs)}/>"


def text(x: float, y: float, content: str, **kwargs: Any) -> str:
    return f"<text {attrs(x=float(x), y=float(y), **kwargs)}>{escape(content)}</text>"


def short(label: str, limit: int = 18) -> str:
    return label if len(label) <= limit else label[: limit - 1] + "…"


class SvgDocument:
    def __init__(self, width: int, height: int, kind: str, title: str, meta: dict[str, Any]) -> None:
        self.width = width
        self.height = height
        self.kind = kind
        self.title = title
        self.meta = meta
        self.root_data: dict[str, str] = {}
        self.body: list[str] = []

    def add(self, fragment: str) -> None:
        self.body.append(fragment)

    def mark(self, entry, shapes: list[str], extra: dict[str, Any] | None = None) -> None:
        """One data mark: tooltip title plus machine-readable annotations."""
        data = {
            "data_kc_id": entry.kc_id,
            "data_title": entry.title,
            "data_mean": exact(entry.mean),
            "data_variance": exact(entry.variance),
        }
        for key, value in (extra or {}).items():
            data["data_" + key] = exact(value) if isinstance(value, float) else value
        tooltip = f"{entry.title}: mean {entry.mean:.4f}, variance {entry.variance:.4f}"
        inner = "".join([f"<title>{escape(tooltip)}</title>", *shapes])
        self.body.append(f"<g {attrs(class_='mark', **data)}>{inner}</g>")

    def render(self) -> str:
        head = [
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
            "<svg "
            + attrs(
                xmlns="http://www.w3.org/2000/svg",
                version="1.1",
                width=self.width,
                height=self.height,
                viewBox=f"0 0 {self.width} {self.height}",
                data_kind=self.kind,
                **{f"data_{k}": v for k, v in self.root_data.items()},
            )
            + ">",
            f"<title>{escape(self.title)}</title>",
            f"<metadata>{escape(json.dumps(self.meta, sort_keys=True))}</metadata>",
            el("rect", x=0, y=0, width=self.width, height=self.height, fill="#ffffff"),
            text(self.width / 2, 24.0, self.title, text_anchor="middle", font_family=FONT,
                 font_size=16, font_weight="bold"),
        ]
        return "\n".join(head + self.body + ["</svg>"]) + "\n"


def polar(cx: float, cy: float, r: float, angle: float) -> tuple[float, float]:
    return cx + r * math.cos(angle), cy + r * math.sin(angle)


def wedge_path(cx: float, cy: float, r: float, start: float, end: float) -> str:
    """Closed circular sector from ``start`` to ``end`` (radians, clockwise on screen)."""
    x0, y0 = polar(cx, cy, r, start)
    x1, y1 = polar(cx, cy, r, end)
    large = 1 if end - start > math.pi else 0
    return (
        f"M {fmt(cx)} {fmt(cy)} L {fmt(x0)} {fmt(y0)} "
        f"A {fmt(r)} {fmt(r)} 0 {large} 1 {fmt(x1)} {fmt(y1)} Z"
    )
