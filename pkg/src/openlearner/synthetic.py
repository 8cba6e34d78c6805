"""Simulated engagement logs in the PEEK CSV layout.

Handy for demos, smoke tests and offline pipelines when the real dataset is
not at hand. Learners carry hidden per-topic skill and interest; a fragment is
engaging when its topics interest the learner and its depth sits near the
learner's skill. Engaged viewing slowly raises skill on the fragment's topics.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from pathlib import Path

from .datasets import ColumnMapping

TOPIC_TITLES = (
    "Machine learning", "Linear algebra", "Probability theory", "Statistics",
    "Bayesian inference", "Neural network", "Calculus", "Graph theory",
    "Algorithm", "Data structure", "Quantum mechanics", "Thermodynamics",
    "Classical mechanics", "Electromagnetism", "Organic chemistry", "Genetics",
    "Evolution", "Cell biology", "Neuroscience", "Psychology",
    "Economics", "Game theory", "Philosophy of science", "Ethics",
    "World history", "Climate change", "Renewable energy", "Epidemiology",
    "Public health", "Linguistics", "Information theory", "Cryptography",
    "Computer network", "Operating system", "Database", "Software engineering",
    "Signal processing", "Control theory", "Optimization", "Number theory",
)
FIRST_KC_ID = 9000
TIME_ORIGIN = 1_500_000_000.0


@dataclass(frozen=True)
class SyntheticConfig:
    n_learners: int = 60
    n_videos: int = 30
    n_topics: int = 40
    min_events: int = 8
    max_events: int = 40
    test_fraction: float = 0.2
    seed: int = 0


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def generate(config: SyntheticConfig = SyntheticConfig()) -> tuple[list[dict], list[dict], dict[int, str]]:
    """Return ``(train_rows, test_rows, titles)`` with rows keyed by the default PEEK columns."""
    rng = random.Random(config.seed)
    mapping = ColumnMapping()
    n_topics = min(config.n_topics, len(TOPIC_TITLES))
    kc_ids = [FIRST_KC_ID + k for k in range(n_topics)]
    titles = {kc: TOPIC_TITLES[k] for k, kc in enumerate(kc_ids)}

    videos = []
    for v in range(config.n_videos):
        cluster = rng.sample(kc_ids, k=min(6, n_topics))
        level = rng.uniform(0.1, 0.9)
        parts = []
        for _ in range(rng.randint(2, 6)):
            chosen = rng.sample(cluster, k=rng.randint(1, 5))
            parts.append([(kc, round(min(max(rng.gauss(level, 0.15), 0.01), 1.0), 4)) for kc in chosen])
        videos.append((f"v{v:03d}", parts))

    rows_by_learner = []
    for idx in range(config.n_learners):
        learner = f"{idx + 1:04d}"
        skill = {kc: rng.gauss(0.45, 0.25) for kc in kc_ids}
        interest = {kc: rng.gauss(0.0, 1.0) for kc in kc_ids}
        bias = rng.gauss(0.6, 0.6)
        budget = rng.randint(config.min_events, config.max_events)
        clock = TIME_ORIGIN + rng.uniform(0, 3e7)
        rows = []
        while len(rows) < budget:
            weights = [
                math.exp(sum(interest[kc] for part in parts for kc, _ in part) / sum(len(p) for p in parts))
                for _, parts in videos
            ]
            vid, parts = rng.choices(videos, weights=weights)[0]
            for part_no, part in enumerate(parts, start=1):
                if len(rows) >= budget:
                    break
                avg_interest = sum(interest[kc] for kc, _ in part) / len(part)
                gap = abs(sum(skill[kc] for kc, _ in part) / len(part) - sum(d for _, d in part) / len(part))
                p = _sigmoid(bias + 1.2 * avg_interest + 2.0 * (0.25 - gap) * 4)
                engaged = rng.random() < p
                row = {
                    mapping.learner_id: learner,
                    mapping.video_id: vid,
                    mapping.part: part_no,
                    mapping.timestamp: round(clock, 1),
                    mapping.label: int(engaged),
                }
                for k, (id_col, cov_col) in enumerate(mapping.topics):
                    if k < len(part):
                        row[id_col], row[cov_col] = part[k]
                    else:
                        row[id_col], row[cov_col] = "", ""
                rows.append(row)
                clock += rng.uniform(300, 1200)
                if engaged:
                    for kc, depth in part:
                        skill[kc] += 0.05 * depth
                elif rng.random() < 0.5:
                    break
            clock += rng.expovariate(1 / 86400)
        rows_by_learner.append(rows)

    n_test = max(1, round(config.n_learners * config.test_fraction))
    order = list(range(config.n_learners))
    rng.shuffle(order)
    test_ids = set(order[:n_test])
    train_rows = [r for i, rows in enumerate(rows_by_learner) if i not in test_ids for r in rows]
    test_rows = [r for i, rows in enumerate(rows_by_learner) if i in test_ids for r in rows]
    return train_rows, test_rows, titles


def write(directory: str | Path, config: SyntheticConfig = SyntheticConfig()) -> dict[str, Path]:
    """Write ``train.csv``, ``test.csv`` and ``titles.csv`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    train, test, titles = generate(config)
    columns = ColumnMapping().columns
    paths = {}
    for name, rows in (("train.csv", train), ("test.csv", test)):
        path = directory / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        paths[name] = path
    path = directory / "titles.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "title"])
        writer.writerows(sorted(titles.items()))
    paths["titles.csv"] = path
    return paths
