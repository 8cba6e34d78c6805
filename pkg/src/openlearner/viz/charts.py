"""The nine learner-state charts.

Encodings (all linear, all checked by the test-suite from the data
annotations on each mark):

* bar, dot: y is the mean, whiskers span mean +/- 2 standard deviations
* line: x is the event index, one polyline per KC, band mean +/- 2 sd
* pie, treemap: area proportional to the mean
* rose, bubble: radius proportional to the mean
* radar: radius proportional to value, means in red and variances in blue
* wordcloud: font size proportional to the mean

Fill opacity (rose, bubble, treemap, wordcloud) is
``clamp(1 - variance / max_variance, 0.15, 1)`` so confident beliefs are dark.
Negative means are drawn as zero wherever the encoding is an area or length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from ..models import HistoryRow, LearnerHistory, SnapshotEntry
from .svg import BASE_FILL, FONT, PALETTE, SvgDocument, el, fmt, polar, short, text, wedge_path

OPACITY_MIN = 0.15
OPACITY_MAX = 1.0
MEAN_COLOUR = "#d62728"
VARIANCE_COLOUR = "#1f77b4"
CLIP_NOTE = "negative means drawn as 0"


@dataclass(frozen=True)
class Frame:
    left: float
    top: float
    width: float
    height: float

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def bottom(self) -> float:
        return self.top + self.height

    @property
    def cx(self) -> float:
        return self.left + self.width / 2

    @property
    def cy(self) -> float:
        return self.top + self.height / 2


def frame_for(width: int, height: int, axes: bool) -> Frame:
    if axes:
        return Frame(60.0, 44.0, width - 80.0, height - 44.0 - 90.0)
    return Frame(20.0, 44.0, width - 40.0, height - 44.0 - 30.0)


def opacity(variance: float, variance_max: float) -> float:
    return min(max(1.0 - variance / variance_max, OPACITY_MIN), OPACITY_MAX)


def clipped(mean: float) -> float:
    return max(mean, 0.0)


def _proportional(mean: float, top: float, size_max: float) -> float:
    # divide first: size_max / top overflows when top is subnormal
    return clipped(mean) / top * size_max if top > 0 else 0.0


def _legend(doc: SvgDocument, message: str) -> None:
    doc.add(text(doc.width - 10, doc.height - 8, message, text_anchor="end",
                 font_family=FONT, font_size=10, fill="#555555"))


def _meta(kind: str, entries: Sequence[SnapshotEntry], **extra) -> dict:
    meta = {
        "kind": kind,
        "marks": len(entries),
        "opacity_clamp": [OPACITY_MIN, OPACITY_MAX],
        "opacity_rule": "clamp(1 - variance / variance_max)",
    }
    if entries:
        meta["variance_max"] = max(e.variance for e in entries)
    meta.update(extra)
    return meta


# -- value-on-y charts -----------------------------------------------------


def _y_scale(entries: Sequence[SnapshotEntry], frame: Frame) -> tuple[float, float, Callable[[float], float]]:
    tops = [e.mean + 2 * math.sqrt(e.variance) for e in entries]
    bottoms = [e.mean - 2 * math.sqrt(e.variance) for e in entries]
    hi = max(max(tops), 0.0)
    lo = min(min(bottoms), 0.0)
    if hi == lo:
        hi = lo + 1.0
    scale = frame.height / (hi - lo)

    def y(v: float) -> float:
        return frame.top + (hi - v) * scale

    return scale, y(0.0), y


def _axes(doc: SvgDocument, frame: Frame, zero_y: float, entries, slot: float) -> None:
    doc.add(el("line", x1=frame.left, y1=frame.top, x2=frame.left, y2=frame.bottom,
               stroke="#333333", stroke_width=1))
    doc.add(el("line", x1=frame.left, y1=zero_y, x2=frame.right, y2=zero_y,
               stroke="#333333", stroke_width=1))
    for i, e in enumerate(entries):
        x = frame.left + slot * (i + 0.5)
        y = frame.bottom + 12
        doc.add(text(x, y, short(e.title), font_family=FONT, font_size=10, text_anchor="end",
                     transform=f"rotate(-45 {fmt(x)} {fmt(y)})"))
    doc.add(text(14, frame.cy, "mean", font_family=FONT, font_size=11, text_anchor="middle",
                 transform=f"rotate(-90 14 {fmt(frame.cy)})"))


def _whisker(x: float, y: Callable[[float], float], e: SnapshotEntry, colour: str) -> str:
    sd = math.sqrt(e.variance)
    return el("line", class_="whisker", x1=x, y1=y(e.mean + 2 * sd), x2=x, y2=y(e.mean - 2 * sd),
              stroke=colour, stroke_width=1.5)


def render_bar(doc: SvgDocument, entries: Sequence[SnapshotEntry]) -> None:
    frame = frame_for(doc.width, doc.height, axes=True)
    scale, zero_y, y = _y_scale(entries, frame)
    doc.root_data.update(scale=fmt(scale), zero_y=fmt(zero_y))
    slot = frame.width / len(entries)
    _axes(doc, frame, zero_y, entries, slot)
    for i, e in enumerate(entries):
        x = frame.left + slot * i + slot * 0.15
        top = min(y(e.mean), zero_y)
        height = abs(e.mean) * scale
        shapes = [
            el("rect", class_="bar", x=x, y=top, width=slot * 0.7, height=height, fill=BASE_FILL),
            _whisker(x + slot * 0.35, y, e, "#000000"),
        ]
        doc.mark(e, shapes)
    _legend(doc, "bar height = mean; whiskers = mean ± 2 sd")


def render_dot(doc: SvgDocument, entries: Sequence[SnapshotEntry]) -> None:
    frame = frame_for(doc.width, doc.height, axes=True)
    scale, zero_y, y = _y_scale(entries, frame)
    doc.root_data.update(scale=fmt(scale), zero_y=fmt(zero_y))
    slot = frame.width / len(entries)
    _axes(doc, frame, zero_y, entries, slot)
    for i, e in enumerate(entries):
        x = frame.left + slot * (i + 0.5)
        shapes = [
            _whisker(x, y, e, "#555555"),
            el("circle", class_="dot", cx=x, cy=y(e.mean), r=5, fill=BASE_FILL),
        ]
        doc.mark(e, shapes)
    _legend(doc, "dot = mean; whiskers = mean ± 2 sd")


def render_line(doc: SvgDocument, history: LearnerHistory, entries: Sequence[SnapshotEntry]) -> None:
    frame = frame_for(doc.width, doc.height, axes=True)
    series = history.series()
    chosen = [series[e.kc_id] for e in entries]
    xs = [r.event_index for rows in chosen for r in rows]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    tops = [r.mean + 2 * math.sqrt(r.variance) for rows in chosen for r in rows]
    bottoms = [r.mean - 2 * math.sqrt(r.variance) for rows in chosen for r in rows]
    y_hi, y_lo = max(tops), min(bottoms)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    sx = frame.width / (x_hi - x_lo)
    sy = frame.height / (y_hi - y_lo)
    doc.root_data.update(x_origin=fmt(frame.left), x_min=fmt(x_lo), x_scale=fmt(sx),
                         y_origin=fmt(frame.top), y_max=fmt(y_hi), y_scale=fmt(sy))

    def px(row: HistoryRow, offset: float = 0.0) -> str:
        return f"{fmt(frame.left + (row.event_index - x_lo) * sx)},{fmt(frame.top + (y_hi - row.mean - offset) * sy)}"

    doc.add(el("line", x1=frame.left, y1=frame.bottom, x2=frame.right, y2=frame.bottom, stroke="#333333"))
    doc.add(el("line", x1=frame.left, y1=frame.top, x2=frame.left, y2=frame.bottom, stroke="#333333"))
    doc.add(text(frame.cx, frame.bottom + 30, "event index", font_family=FONT, font_size=11,
                 text_anchor="middle"))
    for i, (e, rows) in enumerate(zip(entries, chosen)):
        colour = PALETTE[i % len(PALETTE)]
        upper = [px(r, 2 * math.sqrt(r.variance)) for r in rows]
        lower = [px(r, -2 * math.sqrt(r.variance)) for r in reversed(rows)]
        shapes = [
            el("polygon", class_="band", points=" ".join(upper + lower), fill=colour, fill_opacity=0.15),
            el("polyline", class_="trace", points=" ".join(px(r) for r in rows), fill="none",
               stroke=colour, stroke_width=2),
        ]
        doc.mark(e, shapes, {"colour": colour})
        last = rows[-1]
        lx, ly = px(last).split(",")
        doc.add(text(float(lx) + 4, float(ly), short(e.title, 14), font_family=FONT, font_size=9, fill=colour))
    _legend(doc, "line = mean over events; band = mean ± 2 sd")


# -- circular charts -------------------------------------------------------


def render_pie(doc: SvgDocument, entries: Sequence[SnapshotEntry]) -> None:
    frame = frame_for(doc.width, doc.height, axes=False)
    radius = min(frame.width, frame.height) / 2 * 0.9
    total = sum(clipped(e.mean) for e in entries)
    doc.root_data.update(radius=fmt(radius), cx=fmt(frame.cx), cy=fmt(frame.cy))
    start = -math.pi / 2
    for i, e in enumerate(entries):
        share = clipped(e.mean) / total if total > 0 else 0.0
        sweep = 2 * math.pi * share
        colour = PALETTE[i % len(PALETTE)]
        if share >= 1.0:
            shape = el("circle", class_="wedge", cx=frame.cx, cy=frame.cy, r=radius, fill=colour)
        else:
            shape = el("path", class_="wedge", d=wedge_path(frame.cx, frame.cy, radius, start, start + sweep),
                       fill=colour, stroke="#ffffff", stroke_width=1)
        label = []
        if share > 0.04:
            lx, ly = polar(frame.cx, frame.cy, radius * 0.65, start + sweep / 2)
            label = [text(lx, ly, short(e.title, 12), font_family=FONT, font_size=9, text_anchor="middle")]
        doc.mark(e, [shape, *label], {"angle": sweep, "start": start})
        start += sweep
    _legend(doc, f"wedge area ∝ mean; {CLIP_NOTE}")


def render_rose(doc: SvgDocument, entries: Sequence[SnapshotEntry]) -> None:
    frame = frame_for(doc.width, doc.height, axes=False)
    r_max = min(frame.width, frame.height) / 2 * 0.9
    top = max(clipped(e.mean) for e in entries)
    scale = r_max / top if top > 0 else 0.0
    var_max = max(e.variance for e in entries)
    doc.root_data.update(scale=fmt(scale), cx=fmt(frame.cx), cy=fmt(frame.cy))
    step = 2 * math.pi / len(entries)
    for i, e in enumerate(entries):
        start = -math.pi / 2 + i * step
        r = _proportional(e.mean, top, r_max)
        alpha = opacity(e.variance, var_max)
        if len(entries) == 1:
            shape = el("circle", class_="petal", cx=frame.cx, cy=frame.cy, r=r, fill=BASE_FILL, fill_opacity=alpha)
        else:
            shape = el("path", class_="petal", d=wedge_path(frame.cx, frame.cy, r, start, start + step),
                       fill=BASE_FILL, fill_opacity=alpha, stroke="#ffffff", stroke_width=1)
        lx, ly = polar(frame.cx, frame.cy, r_max + 4, start + step / 2)
        label = text(lx, ly, short(e.title, 12), font_family=FONT, font_size=9, text_anchor="middle")
        doc.mark(e, [shape, label], {"radius": r, "opacity": alpha})
    _legend(doc, f"petal radius ∝ mean; darker = lower variance; {CLIP_NOTE}")


def _spiral(step: float = 2.0, turn: float = 0.35):
    """Archimedean spiral offsets, starting at the origin."""
    k = 0
    while True:
        angle = k * turn
        radius = step * angle / (2 * math.pi) * 2
        yield radius * math.cos(angle), radius * math.sin(angle)
        k += 1


def render_bubble(doc: SvgDocument, entries: Sequence[SnapshotEntry]) -> None:
    frame = frame_for(doc.width, doc.height, axes=False)
    top = max(clipped(e.mean) for e in entries)
    r_max = min(frame.width, frame.height) / (2.0 * math.sqrt(len(entries)) + 1.0)
    scale = r_max / top if top > 0 else 0.0
    var_max = max(e.variance for e in entries)
    doc.root_data.update(scale=fmt(scale))
    placed: list[tuple[float, float, float]] = []
    for e in entries:
        r = _proportional(e.mean, top, r_max)
        cx, cy = frame.cx, frame.cy
        for n, (dx, dy) in enumerate(_spiral()):
            cx, cy = frame.cx + dx, frame.cy + dy
            fits = all(math.hypot(cx - x, cy - y) >= r + pr + 2 for x, y, pr in placed)
            if fits or n > 20000:
                break
        placed.append((cx, cy, r))
        alpha = opacity(e.variance, var_max)
        shapes = [el("circle", class_="bubble", cx=cx, cy=cy, r=r, fill=BASE_FILL, fill_opacity=alpha)]
        if r > 18:
            colour = "#ffffff" if alpha > 0.5 else "#000000"
            shapes.append(text(cx, cy, short(e.title, max(3, int(r / 4))), font_family=FONT,
                               font_size=9, text_anchor="middle", dominant_baseline="central", fill=colour))
        doc.mark(e, shapes, {"radius": r, "opacity": alpha})
    _legend(doc, f"radius ∝ mean; darker = lower variance; {CLIP_NOTE}")


def render_radar(doc: SvgDocument, entries: Sequence[SnapshotEntry]) -> None:
    frame = frame_for(doc.width, doc.height, axes=False)
    r_max = min(frame.width, frame.height) / 2 * 0.8
    top = max(max(clipped(e.mean), e.variance) for e in entries)
    scale = r_max / top if top > 0 else 0.0
    doc.root_data.update(scale=fmt(scale), cx=fmt(frame.cx), cy=fmt(frame.cy))
    n = len(entries)
    angles = [-math.pi / 2 + 2 * math.pi * i / n for i in range(n)]
    for ring in (0.25, 0.5, 0.75, 1.0):
        doc.add(el("circle", class_="grid", cx=frame.cx, cy=frame.cy, r=r_max * ring, fill="none",
                   stroke="#dddddd"))
    for e, a in zip(entries, angles):
        x, y = polar(frame.cx, frame.cy, r_max, a)
        doc.add(el("line", class_="axis", x1=frame.cx, y1=frame.cy, x2=x, y2=y, stroke="#bbbbbb"))
        lx, ly = polar(frame.cx, frame.cy, r_max + 12, a)
        doc.add(text(lx, ly, short(e.title, 14), font_family=FONT, font_size=9, text_anchor="middle"))
    mean_r = [_proportional(e.mean, top, r_max) for e in entries]
    var_r = [_proportional(e.variance, top, r_max) for e in entries]
    mean_pts = [polar(frame.cx, frame.cy, r, a) for r, a in zip(mean_r, angles)]
    var_pts = [polar(frame.cx, frame.cy, r, a) for r, a in zip(var_r, angles)]
    for cls, pts, colour in (("variance", var_pts, VARIANCE_COLOUR), ("mean", mean_pts, MEAN_COLOUR)):
        doc.add(el("polygon", class_=f"{cls}-area", points=" ".join(f"{fmt(x)},{fmt(y)}" for x, y in pts),
                   fill=colour, fill_opacity=0.2, stroke=colour, stroke_width=2))
    for e, (mx, my), (vx, vy), mr, vr in zip(entries, mean_pts, var_pts, mean_r, var_r):
        shapes = [
            el("circle", class_="mean-vertex", cx=mx, cy=my, r=3, fill=MEAN_COLOUR),
            el("circle", class_="variance-vertex", cx=vx, cy=vy, r=3, fill=VARIANCE_COLOUR),
        ]
        doc.mark(e, shapes, {"mean_radius": mr, "variance_radius": vr})
    _legend(doc, f"red = mean, blue = variance; {CLIP_NOTE}")


# -- area-tiling charts ----------------------------------------------------


def _worst(row: list[float], side: float) -> float:
    total = sum(row)
    if total <= 0 or side <= 0:
        return math.inf
    lo, hi = min(row), max(row)
    if lo <= 0:
        return math.inf
    return max(side * side * hi / (total * total), total * total / (side * side * lo))


def squarify(values: Sequence[float], x: float, y: float, w: float, h: float) -> list[tuple[float, float, float, float]]:
    """Squarified treemap layout; ``values`` must already be scaled to sum to ``w * h``.

    Rectangles come back in input order (sort descending for the usual look).
    """
    rects: list[tuple[float, float, float, float]] = []
    items = list(values)
    i = 0
    while i < len(items):
        side = min(w, h)
        row = [items[i]]
        j = i + 1
        while j < len(items) and _worst(row + [items[j]], side) <= _worst(row, side):
            row.append(items[j])
            j += 1
        total = sum(row)
        if w >= h:
            # column on the left
            col_w = total / h if h > 0 else 0.0
            yy = y
            for v in row:
                rh = v / col_w if col_w > 0 else 0.0
                rects.append((x, yy, col_w, rh))
                yy += rh
            x, w = x + col_w, w - col_w
        else:
            row_h = total / w if w > 0 else 0.0
            xx = x
            for v in row:
                rw = v / row_h if row_h > 0 else 0.0
                rects.append((xx, y, rw, row_h))
                xx += rw
            y, h = y + row_h, h - row_h
        i = j
    return rects


def render_treemap(doc: SvgDocument, entries: Sequence[SnapshotEntry]) -> None:
    frame = frame_for(doc.width, doc.height, axes=False)
    total = sum(clipped(e.mean) for e in entries)
    area = frame.width * frame.height
    var_max = max(e.variance for e in entries)
    doc.root_data.update(area_per_unit=fmt(area / total if total > 0 else 0.0))
    values = [clipped(e.mean) / total * area if total > 0 else 0.0 for e in entries]
    # lay out largest first, but keep output order equal to input order
    order = sorted(range(len(entries)), key=lambda k: (-values[k], k))
    laid = squarify([values[k] for k in order], frame.left, frame.top, frame.width, frame.height)
    rects = [None] * len(entries)
    for k, rect in zip(order, laid):
        rects[k] = rect
    for e, (x, y, w, h) in zip(entries, rects):
        alpha = opacity(e.variance, var_max)
        shapes = [el("rect", class_="tile", x=x, y=y, width=w, height=h, fill=BASE_FILL,
                     fill_opacity=alpha, stroke="#ffffff", stroke_width=1)]
        if w > 40 and h > 14:
            colour = "#ffffff" if alpha > 0.5 else "#000000"
            shapes.append(text(x + 4, y + 12, short(e.title, max(3, int(w / 6))), font_family=FONT,
                               font_size=10, fill=colour))
        doc.mark(e, shapes, {"opacity": alpha})
    _legend(doc, f"tile area ∝ mean; darker = lower variance; {CLIP_NOTE}")


def render_wordcloud(doc: SvgDocument, entries: Sequence[SnapshotEntry]) -> None:
    frame = frame_for(doc.width, doc.height, axes=False)
    top = max(clipped(e.mean) for e in entries)
    font_max = min(48.0, frame.height / 4)
    scale = font_max / top if top > 0 else 0.0
    var_max = max(e.variance for e in entries)
    doc.root_data.update(scale=fmt(scale))
    boxes: list[tuple[float, float, float, float]] = []
    for e in entries:
        size = _proportional(e.mean, top, font_max)
        bw, bh = 0.6 * size * len(e.title), size
        cx, cy = frame.cx, frame.cy
        for n, (dx, dy) in enumerate(_spiral(step=3.0)):
            cx, cy = frame.cx + dx, frame.cy + dy
            box = (cx - bw / 2, cy - bh / 2, cx + bw / 2, cy + bh / 2)
            clear = all(
                box[2] <= b[0] or box[0] >= b[2] or box[3] <= b[1] or box[1] >= b[3] for b in boxes
            )
            if clear or n > 20000:
                break
        boxes.append((cx - bw / 2, cy - bh / 2, cx + bw / 2, cy + bh / 2))
        alpha = opacity(e.variance, var_max)
        word = text(cx, cy, e.title, class_="word", font_family=FONT, font_size=size, text_anchor="middle",
                    dominant_baseline="central", fill=BASE_FILL, fill_opacity=alpha)
        doc.mark(e, [word], {"font_size": size, "opacity": alpha})
    _legend(doc, f"font size ∝ mean; darker = lower variance; {CLIP_NOTE}")


SNAPSHOT_RENDERERS: dict[str, Callable[[SvgDocument, Sequence[SnapshotEntry]], None]] = {
    "bar": render_bar,
    "dot": render_dot,
    "pie": render_pie,
    "rose": render_rose,
    "bubble": render_bubble,
    "treemap": render_treemap,
    "radar": render_radar,
    "wordcloud": render_wordcloud,
}
