"""Download, verify and parse learner-engagement datasets (PEEK layout by default).

The loader is schema-configurable: a :class:`ColumnMapping` names the CSV
columns for every field, and the shipped default matches the PEEK CSVs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import time
import urllib.error
import urllib.request
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Literal, Mapping, Sequence

from .models import EngagementLabel, EventModel, EventTopic, KnowledgeComponent

log = logging.getLogger(__name__)

Stream = list[tuple[EventModel, EngagementLabel]]
Streams = dict[str, Stream]
Fold = Literal["train", "test"]

DEFAULT_CACHE_ENV = "OPENLEARNER_CACHE"
SUMS_FILE = "SHA256SUMS"
HASH_FOLDS = 5
DOWNLOAD_TIMEOUT = 60.0


class DatasetError(Exception):
    """Base class for data problems (exit code 3 on the command line)."""


class DigestMismatchError(DatasetError):
    def __init__(self, file_name: str, expected: str, actual: str) -> None:
        super().__init__(f"{file_name}: expected sha256 {expected}, got {actual}")
        self.file_name = file_name
        self.expected = expected
        self.actual = actual


class FetchError(DatasetError):
    """Network failure that survived every retry; safe to try again later."""

    retriable = True


class ColumnMappingError(DatasetError):
    pass


class TooManyRejectsError(DatasetError):
    def __init__(self, message: str, rejects: list["Reject"]) -> None:
        super().__init__(message)
        self.rejects = rejects


# -- manifest & fetch ------------------------------------------------------


@dataclass(frozen=True)
class DatasetFile:
    name: str
    url: str
    sha256: str | None = None
    role: str = "data"


@dataclass
class DatasetManifest:
    name: str
    files: list[DatasetFile]
    cache_dir: Path = field(default_factory=lambda: default_cache_dir())

    @property
    def directory(self) -> Path:
        return Path(self.cache_dir) / self.name

    @classmethod
    def from_dict(cls, doc: Mapping, cache_dir: str | os.PathLike | None = None) -> "DatasetManifest":
        files = [DatasetFile(**f) for f in doc["files"]]
        cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
        return cls(doc["name"], files, cache)

    @classmethod
    def load(cls, path: str | os.PathLike, cache_dir: str | os.PathLike | None = None) -> "DatasetManifest":
        return cls.from_dict(json.loads(Path(path).read_text()), cache_dir)

    def to_dict(self) -> dict:
        return {"name": self.name, "files": [asdict(f) for f in self.files]}


def default_cache_dir() -> Path:
    env = os.environ.get(DEFAULT_CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "openlearner"


def peek_manifest(cache_dir: str | os.PathLike | None = None) -> DatasetManifest:
    """The published PEEK v1 files. Digests are pinned on first download."""
    doc = json.loads(resources.files("openlearner").joinpath("data/peek_manifest.json").read_text())
    return DatasetManifest.from_dict(doc, cache_dir)


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _read_pins(directory: Path) -> dict[str, str]:
    path = directory / SUMS_FILE
    if not path.exists():
        return {}
    pins = {}
    for line in path.read_text().splitlines():
        if line.strip():
            digest, name = line.split(maxsplit=1)
            pins[name.strip()] = digest
    return pins


def _write_pins(directory: Path, pins: Mapping[str, str]) -> None:
    lines = [f"{digest}  {name}\n" for name, digest in sorted(pins.items())]
    (directory / SUMS_FILE).write_text("".join(lines))


def _urlopen(url: str):
    return urllib.request.urlopen(url, timeout=DOWNLOAD_TIMEOUT)


def _download(
    url: str,
    opener: Callable,
    sleep: Callable[[float], None],
    attempts: int = 3,
    backoff: float = 1.0,
) -> bytes:
    delay = backoff
    for attempt in range(1, attempts + 1):
        try:
            with opener(url) as response:
                return response.read()
        except (urllib.error.URLError, OSError) as exc:
            if attempt == attempts:
                raise FetchError(f"failed to download {url} after {attempts} attempts: {exc}") from exc
            log.warning("download of %s failed (%s); retrying in %.0fs", url, exc, delay)
            sleep(delay)
            delay *= 2
    raise AssertionError("unreachable")


def fetch(
    manifest: DatasetManifest,
    *,
    opener: Callable = _urlopen,
    sleep: Callable[[float], None] = time.sleep,
) -> dict[str, Path]:
    """Make every manifest file present and verified in the cache.

    Files are staged next to their final location and only moved into place
    once every file in the manifest has verified, so a failure never leaves a
    half-updated dataset behind.
    """
    directory = manifest.directory
    directory.mkdir(parents=True, exist_ok=True)
    pins = _read_pins(directory)
    staged: dict[str, Path] = {}
    new_pins: dict[str, str] = {}
    try:
        for entry in manifest.files:
            target = directory / entry.name
            expected = entry.sha256 or pins.get(entry.name)
            if target.exists():
                actual = sha256_file(target)
                if expected is None or actual == expected:
                    new_pins[entry.name] = actual
                    continue
                log.warning("cached %s fails verification; downloading again", entry.name)
            data = _download(entry.url, opener, sleep)
            actual = hashlib.sha256(data).hexdigest()
            if expected is not None and actual != expected:
                raise DigestMismatchError(entry.name, expected, actual)
            part = directory / f".{entry.name}.partial"
            part.write_bytes(data)
            staged[entry.name] = part
            new_pins[entry.name] = actual
    except BaseException:
        for part in staged.values():
            part.unlink(missing_ok=True)
        raise
    for name, part in staged.items():
        os.replace(part, directory / name)
    pins.update(new_pins)
    _write_pins(directory, pins)
    return {entry.name: directory / entry.name for entry in manifest.files}


# -- parsing ---------------------------------------------------------------


@dataclass(frozen=True)
class ColumnMapping:
    learner_id: str = "learner_id"
    video_id: str = "vid_id"
    part: str = "part"
    timestamp: str = "time"
    label: str = "label"
    topics: tuple[tuple[str, str], ...] = tuple(
        (f"topic_{k}", f"topic_{k}_pageRank") for k in range(1, 6)
    )
    part_offset: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "topics", tuple(tuple(pair) for pair in self.topics))
        if not self.topics:
            raise ColumnMappingError("mapping must name at least one topic column pair")

    @property
    def columns(self) -> list[str]:
        cols = [self.learner_id, self.video_id, self.part, self.timestamp]
        for id_col, cov_col in self.topics:
            cols += [id_col, cov_col]
        return cols + [self.label]

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ColumnMapping":
        doc = dict(doc)
        if "topics" in doc:
            doc["topics"] = tuple(tuple(p) for p in doc["topics"])
        return cls(**doc)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ColumnMapping":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["topics"] = [list(p) for p in self.topics]
        return doc


@dataclass(frozen=True)
class Reject:
    line_no: int
    reason: str
    raw: str

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass
class ParsedDataset:
    streams: Streams
    rejects: list[Reject]
    total_rows: int

    @property
    def event_count(self) -> int:
        return sum(len(s) for s in self.streams.values())


def read_titles(path: str | os.PathLike) -> dict[int, str]:
    """Read a ``id,title`` CSV of knowledge-component titles."""
    titles: dict[int, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            titles[int(float(row["id"]))] = row["title"]
    return titles


def _parse_float(raw: str, what: str) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ValueError(f"{what} is not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"{what} is not finite: {raw!r}")
    return value


def _parse_int(raw: str, what: str) -> int:
    value = _parse_float(raw, what)
    if value != int(value):
        raise ValueError(f"{what} is not an integer: {raw!r}")
    return int(value)


def _parse_row(
    row: Mapping[str, str], mapping: ColumnMapping, titles: Mapping[int, str]
) -> tuple[str, EventModel, EngagementLabel]:
    learner = (row[mapping.learner_id] or "").strip()
    if not learner:
        raise ValueError("empty learner id")
    video = (row[mapping.video_id] or "").strip()
    if not video:
        raise ValueError("empty video id")
    part = _parse_int(row[mapping.part], "part") + mapping.part_offset
    timestamp = _parse_float(row[mapping.timestamp], "timestamp")
    label = EngagementLabel.from_binary(_parse_int(row[mapping.label], "label"))
    topics = []
    for id_col, cov_col in mapping.topics:
        raw_id = (row[id_col] or "").strip()
        raw_cov = (row[cov_col] or "").strip()
        if not raw_id and not raw_cov:
            continue
        if not raw_id or raw_id.lower() == "nan":
            if raw_cov and _parse_float(raw_cov, cov_col) != 0.0:
                raise ValueError(f"coverage without topic id in {cov_col}")
            continue
        coverage = _parse_float(raw_cov, cov_col)
        if coverage < 0:
            raise ValueError(f"negative coverage in {cov_col}: {coverage}")
        if coverage == 0.0:
            continue
        kc_id = _parse_int(raw_id, id_col)
        kc = KnowledgeComponent(kc_id, titles.get(kc_id, str(kc_id)))
        topics.append(EventTopic(kc, presence=1.0, depth=coverage))
    if not topics:
        raise ValueError("no topic with positive coverage")
    return learner, EventModel(video, part, timestamp, tuple(topics)), label


def _event_order(item: tuple[EventModel, EngagementLabel]) -> tuple:
    event = item[0]
    return (event.timestamp, event.resource_id, event.part)


def parse(
    files: Sequence[str | os.PathLike] | str | os.PathLike,
    mapping: ColumnMapping | None = None,
    *,
    titles: Mapping[int, str] | None = None,
    max_reject_fraction: float = 0.01,
) -> ParsedDataset:
    """Parse engagement CSVs into per-learner, time-ordered streams.

    Rows that fail to parse are collected as rejects; the parse only fails
    outright when a mapped column is missing or the reject share exceeds
    ``max_reject_fraction``.
    """
    mapping = mapping or ColumnMapping()
    titles = titles or {}
    if isinstance(files, (str, os.PathLike)):
        files = [files]
    streams: Streams = {}
    rejects: list[Reject] = []
    total = 0
    for path in files:
        with open(path, newline="", encoding="utf-8") as fh:
            text = fh.read()
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file, expected a header row") from None
        missing = [c for c in mapping.columns if c not in header]
        if missing:
            raise ColumnMappingError(
                f"{path}: mapped column(s) {missing} not found; available headers: {header}"
            )
        for values in reader:
            if not values:
                continue
            total += 1
            line_no = reader.line_num
            try:
                if len(values) != len(header):
                    raise ValueError(f"expected {len(header)} fields, got {len(values)}")
                learner, event, label = _parse_row(dict(zip(header, values)), mapping, titles)
            except ValueError as exc:
                buf = io.StringIO()
                csv.writer(buf, lineterminator="").writerow(values)
                rejects.append(Reject(line_no, str(exc), buf.getvalue()))
                continue
            streams.setdefault(learner, []).append((event, label))
    for stream in streams.values():
        stream.sort(key=_event_order)
    if total and len(rejects) / total > max_reject_fraction:
        raise TooManyRejectsError(
            f"{len(rejects)} of {total} rows rejected (limit {max_reject_fraction:.1%}); "
            f"first: line {rejects[0].line_no}: {rejects[0].reason}",
            rejects,
        )
    return ParsedDataset(dict(sorted(streams.items())), rejects, total)


def write_rejects(path: str | os.PathLike, rejects: Iterable[Reject]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in rejects:
            fh.write(r.to_json() + "\n")


def serialize(streams: Streams, mapping: ColumnMapping | None = None) -> str:
    """Write streams back out as CSV in ``mapping``'s layout."""
    mapping = mapping or ColumnMapping()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(mapping.columns)
    for learner, stream in sorted(streams.items()):
        for event, label in stream:
            row = [learner, event.resource_id, str(event.part - mapping.part_offset), repr(event.timestamp)]
            for k in range(len(mapping.topics)):
                if k < len(event.topics):
                    t = event.topics[k]
                    row += [str(t.kc.id), repr(t.depth)]
                else:
                    row += ["", ""]
            writer.writerow(row + [str(EngagementLabel(label).binary)])
    return buf.getvalue()


# -- splitting -------------------------------------------------------------


def hash_bucket(learner_id: str, folds: int = HASH_FOLDS) -> int:
    digest = hashlib.sha256(learner_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % folds


def split(
    streams: Streams, fold: Fold, assignment: Mapping[str, Fold] | None = None
) -> Streams:
    """Learner-level hold-out split.

    Uses ``assignment`` (the dataset's published split) when given, otherwise
    ``sha256(learner_id) mod 5`` with bucket 0 as the test fold.
    """
    if fold not in ("train", "test"):
        raise ValueError(f"fold must be 'train' or 'test', got {fold!r}")

    def fold_of(learner: str) -> str:
        if assignment is not None:
            try:
                return assignment[learner]
            except KeyError:
                raise DatasetError(f"learner {learner!r} missing from split assignment") from None
        return "test" if hash_bucket(learner) == 0 else "train"

    return {lid: s for lid, s in sorted(streams.items()) if fold_of(lid) == fold}


def filter_min_events(streams: Streams, min_events: int | None) -> Streams:
    if not min_events:
        return streams
    return {lid: s for lid, s in streams.items() if len(s) >= min_events}


# -- convenience -----------------------------------------------------------


@dataclass
class LoadedDataset:
    train: Streams
    test: Streams
    rejects: list[Reject]


def load(
    manifest: DatasetManifest,
    mapping: ColumnMapping | None = None,
    *,
    max_reject_fraction: float = 0.01,
) -> LoadedDataset:
    """Parse a fetched dataset into train and test streams.

    Files with role ``train``/``test`` give the published split; files with
    role ``data`` are pooled and split by learner hash; a ``titles`` file
    supplies KC titles.
    """
    directory = manifest.directory
    roles: dict[str, list[Path]] = {}
    for entry in manifest.files:
        path = directory / entry.name
        if not path.exists():
            raise DatasetError(f"{path} missing; run fetch first")
        roles.setdefault(entry.role, []).append(path)
    titles: dict[int, str] = {}
    for path in roles.get("titles", []):
        titles.update(read_titles(path))

    def _parse(paths: list[Path]) -> ParsedDataset:
        return parse(paths, mapping, titles=titles, max_reject_fraction=max_reject_fraction)

    if "train" in roles or "test" in roles:
        train = _parse(roles.get("train", [])) if roles.get("train") else ParsedDataset({}, [], 0)
        test = _parse(roles.get("test", [])) if roles.get("test") else ParsedDataset({}, [], 0)
        return LoadedDataset(train.streams, test.streams, train.rejects + test.rejects)
    pooled = _parse(roles.get("data", []))
    return LoadedDataset(split(pooled.streams, "train"), split(pooled.streams, "test"), pooled.rejects)

