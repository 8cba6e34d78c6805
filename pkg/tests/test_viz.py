import math
import re
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import assert_golden
from openlearner.models import LearnerHistory, SnapshotEntry, snapshot
from openlearner.viz import KINDS, VizError, VizSpec, export_html, output_name, render

NS = {"s": "http://www.w3.org/2000/svg"}
REL = 1e-9  # coordinates are written with 12 significant digits


def parse(svg):
    root = ET.fromstring(svg.encode("utf-8"))
    return root, root.findall("s:g[@class='mark']", NS)


def num(el, name):
    return float(el.get(name))


def data(mark, key):
    return float(mark.get(f"data-{key}"))


def shape(mark, cls):
    found = [c for c in mark if c.get("class") == cls]
    assert len(found) == 1, cls
    return found[0]


def close(a, b):
    return math.isclose(a, b, rel_tol=REL, abs_tol=1e-9)


def opacity(variance, vmax):
    return min(max(1 - variance / vmax, 0.15), 1.0)


def entries_of(marks):
    return [(m.get("data-title"), data(m, "mean"), data(m, "variance"), int(m.get("data-kc-id"))) for m in marks]


# -- per-kind encoding checks --------------------------------------------------


def check_bar(root, marks, entries):
    scale, zero = num(root, "data-scale"), num(root, "data-zero-y")
    for m, e in zip(marks, entries):
        rect = shape(m, "bar")
        assert close(num(rect, "height"), abs(e.mean) * scale)
        assert close(num(rect, "y"), zero - max(e.mean, 0.0) * scale)
        check_whisker(shape(m, "whisker"), e, scale, zero)


def check_dot(root, marks, entries):
    scale, zero = num(root, "data-scale"), num(root, "data-zero-y")
    for m, e in zip(marks, entries):
        assert close(num(shape(m, "dot"), "cy"), zero - e.mean * scale)
        check_whisker(shape(m, "whisker"), e, scale, zero)


def check_whisker(line, e, scale, zero):
    sd = math.sqrt(e.variance)
    assert close(num(line, "y1"), zero - (e.mean + 2 * sd) * scale)
    assert close(num(line, "y2"), zero - (e.mean - 2 * sd) * scale)


def check_pie(root, marks, entries):
    total = sum(max(e.mean, 0.0) for e in entries)
    r = num(root, "data-radius")
    for m, e in zip(marks, entries):
        share = max(e.mean, 0.0) / total
        assert close(data(m, "angle"), 2 * math.pi * share)
        # sector area relative to the disc equals the mean's share
        assert close(0.5 * data(m, "angle") * r * r / (math.pi * r * r), share)
    assert close(sum(data(m, "angle") for m in marks), 2 * math.pi)


def check_rose(root, marks, entries):
    scale = num(root, "data-scale")
    vmax = max(e.variance for e in entries)
    for m, e in zip(marks, entries):
        petal = shape(m, "petal")
        assert close(data(m, "radius"), max(e.mean, 0.0) * scale)
        if petal.tag.endswith("path"):
            arc_r = float(re.search(r"A (\S+) ", petal.get("d")).group(1))
            assert close(arc_r, data(m, "radius"))
        assert close(num(petal, "fill-opacity"), opacity(e.variance, vmax))


def check_bubble(root, marks, entries):
    scale = num(root, "data-scale")
    vmax = max(e.variance for e in entries)
    for m, e in zip(marks, entries):
        circle = shape(m, "bubble")
        assert close(num(circle, "r"), max(e.mean, 0.0) * scale)
        assert close(num(circle, "fill-opacity"), opacity(e.variance, vmax))
    radii = [num(shape(m, "bubble"), "r") for m in marks]
    assert radii == sorted(radii, reverse=True)


def check_radar(root, marks, entries):
    scale, cx, cy = num(root, "data-scale"), num(root, "data-cx"), num(root, "data-cy")
    for m, e in zip(marks, entries):
        mv, vv = shape(m, "mean-vertex"), shape(m, "variance-vertex")
        assert mv.get("fill") != vv.get("fill")
        assert close(math.hypot(num(mv, "cx") - cx, num(mv, "cy") - cy), max(e.mean, 0.0) * scale)
        assert close(math.hypot(num(vv, "cx") - cx, num(vv, "cy") - cy), e.variance * scale)
    assert root.find("s:polygon[@class='mean-area']", NS).get("stroke") == "#d62728"
    assert root.find("s:polygon[@class='variance-area']", NS).get("stroke") == "#1f77b4"


def check_treemap(root, marks, entries):
    per_unit = num(root, "data-area-per-unit")
    vmax = max(e.variance for e in entries)
    for m, e in zip(marks, entries):
        tile = shape(m, "tile")
        assert math.isclose(num(tile, "width") * num(tile, "height"), max(e.mean, 0.0) * per_unit,
                            rel_tol=1e-8, abs_tol=1e-6)
        assert close(num(tile, "fill-opacity"), opacity(e.variance, vmax))


def check_wordcloud(root, marks, entries):
    scale = num(root, "data-scale")
    vmax = max(e.variance for e in entries)
    for m, e in zip(marks, entries):
        word = shape(m, "word")
        assert word.text == e.title
        assert close(num(word, "font-size"), max(e.mean, 0.0) * scale)
        assert close(num(word, "fill-opacity"), opacity(e.variance, vmax))


def check_line(root, marks, history, entries):
    x0, xmin, sx = num(root, "data-x-origin"), num(root, "data-x-min"), num(root, "data-x-scale")
    y0, ymax, sy = num(root, "data-y-origin"), num(root, "data-y-max"), num(root, "data-y-scale")
    series = history.series()
    for m, e in zip(marks, entries):
        rows = series[e.kc_id]
        pts = [tuple(map(float, p.split(","))) for p in shape(m, "trace").get("points").split()]
        assert len(pts) == len(rows)
        for (x, y), r in zip(pts, rows):
            assert close(x, x0 + (r.event_index - xmin) * sx)
            assert close(y, y0 + (ymax - r.mean) * sy)
        band = [tuple(map(float, p.split(","))) for p in shape(m, "band").get("points").split()]
        upper = band[: len(rows)]
        for (x, y), r in zip(upper, rows):
            assert close(y, y0 + (ymax - r.mean - 2 * math.sqrt(r.variance)) * sy)


CHECKS = {
    "bar": check_bar, "dot": check_dot, "pie": check_pie, "rose": check_rose,
    "bubble": check_bubble, "radar": check_radar, "treemap": check_treemap,
    "wordcloud": check_wordcloud,
}


@pytest.mark.parametrize("kind", KINDS)
def test_encodings_for_fixture_learners(fixture_learners, kind):
    assert len(fixture_learners) == 3
    for lid, (learner, history) in fixture_learners.items():
        entries = snapshot(learner, "knowledge", 15)
        data_in = history if kind == "line" else entries
        svg = render(data_in, VizSpec(kind, title=lid))
        root, marks = parse(svg)
        assert root.get("data-kind") == kind
        assert entries_of(marks) == [tuple(e) for e in entries]
        if kind == "line":
            check_line(root, marks, history, entries)
        else:
            CHECKS[kind](root, marks, entries)


@pytest.mark.parametrize("kind", KINDS)
def test_golden_files(fixture_learners, kind):
    lid = sorted(fixture_learners)[0]
    learner, history = fixture_learners[lid]
    data_in = history if kind == "line" else snapshot(learner, "knowledge", 15)
    spec = VizSpec(kind, title=f"{lid} knowledge")
    svg = render(data_in, spec)
    assert svg == render(data_in, spec)
    assert_golden(output_name(lid, kind, "svg"), svg)
    if kind == "bubble":
        assert_golden(output_name(lid, kind, "html"), export_html(svg, spec))


def test_bubble_top_15_radii_nonincreasing(fixture_learners):
    for learner, _ in fixture_learners.values():
        entries = snapshot(learner, "knowledge", 15)
        assert len(entries) == 15
        _, marks = parse(render(entries, VizSpec("bubble")))
        radii = [num(shape(m, "bubble"), "r") for m in marks]
        assert len(radii) == 15 and radii == sorted(radii, reverse=True)


def test_bar_heights_are_linear():
    entries = [SnapshotEntry("A", 2.0, 0.1, 1), SnapshotEntry("B", 1.0, 0.1, 2)]
    _, marks = parse(render(entries, VizSpec("bar")))
    h1, h2 = (num(shape(m, "bar"), "height") for m in marks)
    assert close(h1, 2 * h2)


def test_equal_variances_give_equal_opacity():
    entries = [SnapshotEntry(f"k{k}", 1.0 - k / 10, 0.3, k) for k in range(6)]
    for kind, cls in (("bubble", "bubble"), ("rose", "petal"), ("treemap", "tile"), ("wordcloud", "word")):
        _, marks = parse(render(entries, VizSpec(kind)))
        assert len({shape(m, cls).get("fill-opacity") for m in marks}) == 1


def test_negative_means_clip_to_zero():
    entries = [SnapshotEntry("up", 0.8, 0.2, 1), SnapshotEntry("down", -0.4, 0.5, 2)]
    for kind in ("pie", "rose", "bubble", "treemap", "wordcloud", "radar", "bar", "dot"):
        root, marks = parse(render(entries, VizSpec(kind)))
        CHECKS[kind](root, marks, entries)
        assert "negative means" in render(entries, VizSpec(kind)) or kind in ("bar", "dot")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-2, 3).map(lambda x: round(x, 6)), st.floats(1e-4, 2)), min_size=1, max_size=15),
       st.sampled_from(
    [k for k in KINDS if k != "line"]))
def test_random_snapshots_render_valid_encodings(rows, kind):
    entries = [SnapshotEntry(f"topic {k}", m, v, k) for k, (m, v) in enumerate(rows)]
    entries.sort(key=lambda e: (-e.mean, e.kc_id))
    if kind in ("pie", "treemap") and sum(max(e.mean, 0) for e in entries) == 0:
        return
    root, marks = parse(render(entries, VizSpec(kind)))
    assert len(marks) == len(entries)
    if kind in ("bubble", "rose", "wordcloud") and max(e.mean for e in entries) <= 0:
        return
    CHECKS[kind](root, marks, entries)


@pytest.mark.parametrize("kind", [k for k in KINDS if k != "line"])
def test_subnormal_means_stay_finite(kind):
    entries = [SnapshotEntry("a", 1e-310, 1e-4, 1), SnapshotEntry("b", 0.0, 1.0, 2)]
    root, _ = parse(render(entries, VizSpec(kind)))
    # geometry must stay finite; only the root scale annotation may overflow
    for el in root.iter():
        for name, value in el.attrib.items():
            if not name.startswith("data-"):
                assert not re.search(r"(^|[\s,])-?(nan|inf)\b", value), (el.tag, name, value)


def test_html_export_is_self_contained(fixture_learners):
    learner, _ = next(iter(fixture_learners.values()))
    entries = snapshot(learner, "knowledge", 15)
    spec = VizSpec("treemap", title="demo")
    html = export_html(render(entries, spec), spec)
    assert html.count("<svg") == 1
    assert html.count('class="mark"') == len(entries)
    assert html.count("<title>") == len(entries) + 2  # page, chart, one per mark
    assert not re.search(r"(src|href)=\"https?:", html) and "<script" not in html
    assert "http://www.w3.org/2000/svg" in html  # the namespace is the only URL


def test_tooltips_carry_title_mean_and_variance():
    entries = [SnapshotEntry("Algebra", 0.5, 0.25, 1)]
    _, marks = parse(render(entries, VizSpec("dot")))
    assert marks[0].find("s:title", NS).text == "Algebra: mean 0.5000, variance 0.2500"


def test_errors():
    with pytest.raises(VizError, match="nothing to visualise"):
        render([], VizSpec("bar"))
    with pytest.raises(VizError):
        render([SnapshotEntry("A", 1.0, 0.1, 1)], VizSpec("line"))
    with pytest.raises(VizError, match="nothing to visualise"):
        render(LearnerHistory("x", "knowledge"), VizSpec("line"))
    with pytest.raises(VizError):
        VizSpec("scatter")
    with pytest.raises(VizError):
        VizSpec("bar", width=50)


def test_output_name():
    assert output_name("a/b c", "bubble", "svg") == "a_b_c.bubble.svg"
