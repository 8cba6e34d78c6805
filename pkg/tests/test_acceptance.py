"""Acceptance criteria, each run at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line (also repeated in the
terminal summary) and then asserts, so a failure is visible both ways.
"""

import json
import math
import os
import random
import time

import numpy as np
import pytest

import conftest
from conftest import SAMPLE, assert_golden
from oracles import confusion_scores, normal_cdf, truncated_moments, weighted_mean
from openlearner import datasets
from openlearner.bayes import Gaussian, cdf, divide, multiply, truncate_above
from openlearner.harness import ExperimentConfig, evaluate, run_learners, sweep
from openlearner.learning import ClassifierParams, ParameterError, make_classifier
from openlearner.metrics import METRIC_NAMES, ConfusionMatrix, LearnerMetrics, compute, weighted_aggregate
from openlearner.models import EngagementLabel, LearnerModel, make_event, snapshot
from openlearner.viz import KINDS, VizSpec, output_name, render

pytestmark = pytest.mark.acceptance

E, N = EngagementLabel.ENGAGED, EngagementLabel.NOT_ENGAGED


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    conftest.ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


# -- 1 -------------------------------------------------------------------------


def test_criterion_1_math_kernel_oracles():
    start = time.perf_counter()
    worst_trunc = 0.0
    for t in np.arange(-6.0, 6.0 + 1e-9, 0.5):
        prior = Gaussian(float(t), 1.0)
        for eps in (0.0, 0.1, 1.0):
            cases = [("greater", eps, math.inf)]
            if eps > 0:
                cases.append(("within", -eps, eps))
            for mode, lo, hi in cases:
                got = truncate_above(prior, 0.0, eps, mode)
                m, v = truncated_moments(float(t), 1.0, lo, hi, n=100_001)
                worst_trunc = max(worst_trunc, abs(got.mean - m), abs(got.variance - v))

    rng = random.Random(1)
    worst_round = 0.0
    for _ in range(2000):
        a = Gaussian(rng.uniform(-10, 10), rng.uniform(0.05, 20))
        b = Gaussian(rng.uniform(-10, 10), rng.uniform(0.05, 20))
        back = divide(multiply(a, b), b)
        worst_round = max(worst_round, abs(back.mean - a.mean), abs(back.variance - a.variance))

    worst_cdf = 0.0
    for _ in range(500):
        g = Gaussian(rng.uniform(-3, 3), rng.uniform(0.1, 4))
        x = rng.uniform(-12, 12)
        worst_cdf = max(worst_cdf, abs(cdf(x, g) - normal_cdf(x, g.mean, g.std)))
    elapsed = time.perf_counter() - start

    ok = worst_trunc <= 1e-6 and worst_round <= 1e-9 and worst_cdf <= 1e-7 and elapsed < 5.0
    assert report(1, ok, f"truncation {worst_trunc:.1e} <= 1e-6, round trip {worst_round:.1e} <= 1e-9, "
                         f"cdf {worst_cdf:.1e} <= 1e-7, {elapsed:.2f}s < 5s")


# -- 2 -------------------------------------------------------------------------


def test_criterion_2_metric_oracles():
    start = time.perf_counter()
    rng = random.Random(2)
    worst = 0.0
    for _ in range(1000):
        cells = [rng.randint(0, 60) for _ in range(4)]
        cells[rng.randrange(4)] += 1
        got = compute(ConfusionMatrix(*cells))
        worst = max(worst, *(abs(a - b) for a, b in zip(got, confusion_scores(*cells))))
    for _ in range(1000):
        rows = []
        for k in range(rng.randint(1, 30)):
            cells = [rng.randint(0, 30) for _ in range(4)]
            cells[0] += 1
            rows.append(LearnerMetrics.from_confusion(f"l{k}", ConfusionMatrix(*cells)))
        agg = weighted_aggregate(rows)
        for name in METRIC_NAMES:
            expected = weighted_mean([getattr(r, name) for r in rows], [r.event_count for r in rows])
            worst = max(worst, abs(getattr(agg, name) - expected))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 5.0
    assert report(2, ok, f"max deviation {worst:.1e} <= 1e-12, {elapsed:.2f}s < 5s")


# -- 3 -------------------------------------------------------------------------


def test_criterion_3_protocol_determinism(tmp_path):
    from openlearner import cli

    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(conftest.sample_manifest(tmp_path).to_dict()))
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"model": "ink", "grid": {"beta": [0.3, 0.5], "threshold": [0.4, 0.5]}}))
    start = time.perf_counter()
    outputs = []
    for run in range(2):
        out = tmp_path / f"report{run}.json"
        code = cli.main(["evaluate", "--model", "ink", "--config", str(config), "--out", str(out),
                         "--manifest", str(manifest), "--cache", str(tmp_path / "cache"), "--no-timing",
                         "--jobs", str(1 + 2 * run)])
        assert code == 0
        outputs.append(out.read_bytes())
    elapsed = time.perf_counter() - start
    learners = len(json.loads(outputs[0])["per_learner"])
    ok = outputs[0] == outputs[1] and learners == 50 and elapsed < 60
    assert report(3, ok, f"{learners} learners, reports identical: {outputs[0] == outputs[1]}, "
                         f"{elapsed:.1f}s < 60s")


# -- 4 -------------------------------------------------------------------------


def test_criterion_4_no_leakage(sample_data):
    train, _ = sample_data
    rng = random.Random(4)
    ids = sorted(train)
    targets = rng.sample(ids, 10)
    leaks = []
    for target in targets:
        others = [lid for lid in ids if lid != target]
        permuted = {target: train[target]}
        for lid, donor in zip(others, rng.sample(others, len(others))):
            permuted[lid] = [(ev, N if lab is E else E) for ev, lab in train[donor]]
        for model in ("interest", "novelty", "knowledge", "ink"):
            a = {r.learner_id: r for r in run_learners(make_classifier(model), train)}
            b = {r.learner_id: r for r in run_learners(make_classifier(model), permuted)}
            if a[target].confusion != b[target].confusion or a[target].learner.to_json() != b[target].learner.to_json():
                leaks.append((target, model))
    assert report(4, not leaks, f"10 learners x 4 models, leaks: {leaks or 'none'}")


# -- 5 -------------------------------------------------------------------------


def _random_belief(rng):
    return Gaussian(rng.uniform(-2, 2), rng.uniform(0.02, 2))


def test_criterion_5_classifier_properties():
    rng = random.Random(5)
    failures = []

    for _ in range(300):
        clf = make_classifier("knowledge", {"beta": rng.uniform(0.05, 2)})
        ev = make_event("v", 0.0, [(1, rng.random()), (2, rng.random())])
        base, other = _random_belief(rng), _random_belief(rng)
        lo = LearnerModel("l", knowledge={1: base, 2: other})
        hi = LearnerModel("l", knowledge={1: Gaussian(base.mean + rng.uniform(0, 2), base.variance), 2: other})
        if clf.predict_proba(lo, ev) > clf.predict_proba(hi, ev):
            failures.append("monotonicity")

    for name in ("knowledge", "interest"):
        for _ in range(300):
            clf = make_classifier(name, {"beta": rng.uniform(0.1, 1)})
            lm = LearnerModel("l")
            lm.state(clf.state_kind)[1] = _random_belief(rng)
            ev = make_event("v", 0.0, [(1, rng.random())])
            label = rng.choice([E, N])
            before = clf.predict_proba(lm, ev)
            clf.fit(lm, ev, label)
            after = clf.predict_proba(lm, ev)
            if (after < before) if label is E else (after > before):
                failures.append(f"fit-toward-label {name}")

    for name in ("knowledge", "novelty", "interest", "ink"):
        for _ in range(200):
            clf = make_classifier(name, {"tau": 0.0, "decay_rate": 0.0, "draw_margin": rng.uniform(0.05, 1)})
            n = rng.randint(1, 5)
            lm = LearnerModel("l")
            for k in range(n):
                lm.knowledge[k] = lm.interest[k] = _random_belief(rng)
            before = dict(lm.state(clf.state_kind))
            clf.fit(lm, make_event("v", 0.0, [(k, rng.random()) for k in range(n)]), rng.choice([E, N]))
            if any(not 0 < lm.state(clf.state_kind)[k].variance < before[k].variance for k in range(n)):
                failures.append(f"shrinkage {name}")

    for _ in range(20):
        clf = make_classifier("ink", {"ink_learning_rate": rng.uniform(0, 5)})
        lm = LearnerModel("l")
        for t in range(40):
            clf.fit(lm, make_event("v", float(t), [(rng.randrange(4), rng.random())]), rng.choice([E, N]))
            w = lm.ink_weights.values()
            if min(w) < 0 or abs(math.fsum(w) - 1) > 1e-12:
                failures.append("simplex")

    for bad in ({"init_variance": 0.0}, {"init_variance": -1.0}, {"beta": 0.0}, {"beta": -2.0},
                {"threshold": -0.1}, {"threshold": 1.5}):
        try:
            ClassifierParams(**bad)
            failures.append(f"validation {bad}")
        except ParameterError:
            pass

    assert report(5, not failures, f"monotonicity, fit-toward-label, shrinkage, simplex, validation; "
                                   f"violations: {sorted(set(failures)) or 'none'}")


# -- 6 -------------------------------------------------------------------------

REFERENCE_F1 = {"interest": 63.00, "novelty": 65.53, "ink": 64.00}
GRIDS = {
    "interest": {"beta": [0.1, 0.3, 0.5], "init_variance": [0.1, 0.5], "threshold": [0.3, 0.4, 0.5]},
    "novelty": {"beta": [0.1, 0.3, 0.5], "draw_probability": [0.3, 0.5, 0.7], "threshold": [0.3, 0.4, 0.5]},
    "ink": {"beta": [0.1, 0.3, 0.5], "draw_probability": [0.3, 0.5, 0.7], "threshold": [0.4, 0.5]},
}


def _load_peek():
    manifest = datasets.peek_manifest()
    try:
        datasets.fetch(manifest)
    except datasets.DatasetError as exc:
        return None, f"PEEK unavailable under {manifest.directory}: {exc}"
    return datasets.load(manifest), None


def test_criterion_6_directional_reproduction():
    loaded, problem = _load_peek()
    if loaded is None:
        report(6, False, problem)
        pytest.fail(problem)
    jobs = os.cpu_count() or 1
    results = {}
    for model, grid in GRIDS.items():
        config = ExperimentConfig(model, grid=grid)
        best = sweep(config, loaded.train, jobs=jobs).best_params
        results[model] = evaluate(config, best, loaded.test, jobs=jobs).aggregate
    acc = {m: 100 * r.accuracy for m, r in results.items()}
    f1 = {m: 100 * r.f1 for m, r in results.items()}
    order_a = f1["novelty"] > f1["interest"]
    order_b = acc["ink"] > acc["novelty"] > acc["interest"]
    within_c = {m: abs(f1[m] - REFERENCE_F1[m]) <= 8.0 for m in REFERENCE_F1}
    detail = (f"(a) novelty F1 {f1['novelty']:.2f} > interest F1 {f1['interest']:.2f}: {order_a}; "
              f"(b) accuracy ink {acc['ink']:.2f} > novelty {acc['novelty']:.2f} > interest {acc['interest']:.2f}: "
              f"{order_b}; (c) F1 within 8 points: {within_c}")
    assert report(6, order_a and order_b, detail)


# -- 7 -------------------------------------------------------------------------


def test_criterion_7_visual_encodings(fixture_learners):
    import test_viz

    checked = 0
    for lid, (learner, history) in fixture_learners.items():
        entries = snapshot(learner, "knowledge", 15)
        for kind in KINDS:
            svg = render(history if kind == "line" else entries, VizSpec(kind, title=lid))
            root, marks = test_viz.parse(svg)
            assert test_viz.entries_of(marks) == [tuple(e) for e in entries]
            if kind == "line":
                test_viz.check_line(root, marks, history, entries)
            else:
                test_viz.CHECKS[kind](root, marks, entries)
            checked += 1
    lid = sorted(fixture_learners)[0]
    learner, history = fixture_learners[lid]
    for kind in KINDS:
        data = history if kind == "line" else snapshot(learner, "knowledge", 15)
        assert_golden(output_name(lid, kind, "svg"), render(data, VizSpec(kind, title=f"{lid} knowledge")))
    assert report(7, checked == 27, f"{checked} renders checked (3 learners x 9 kinds), 9 golden files stable")


# -- 8 -------------------------------------------------------------------------


def test_criterion_8_end_to_end_cli(tmp_path):
    import test_cli

    outputs = test_cli.run_pipeline(tmp_path, jobs="2")
    for name, text in outputs.items():
        assert_golden(f"cli/{name}", text)
    assert report(8, True, f"fetch, sweep, evaluate, visualize exit 0; {len(outputs)} outputs match golden files")
