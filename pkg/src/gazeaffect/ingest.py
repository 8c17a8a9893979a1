"""Readers and writers for the on-disk CSV schemas.

Gaze/fixation log columns::

    observer_id,image_id,t_ms,x_px,y_px[,duration_ms][,valid]

``duration_ms`` is required for fixation logs and optional for raw gaze;
``valid`` defaults to 1 when absent. Rows for one (observer, image)
presentation must be contiguous and time-ordered. A later, separate block
for the same pair is a repeated presentation and is dropped with a warning.

Lines starting with ``#`` are comments (used for provenance headers).
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .core import Fixation, GazeSample, ImageRecord

logger = logging.getLogger(__name__)

GAZE_COLUMNS = ("observer_id", "image_id", "t_ms", "x_px", "y_px", "valid")
FIXATION_COLUMNS = ("observer_id", "image_id", "t_ms", "x_px", "y_px", "duration_ms", "valid")
METADATA_COLUMNS = ("image_id", "sam_all", "sam_male", "sam_female", "width_px", "height_px")


class ParseError(ValueError):
    def __init__(self, path, line, msg):
        self.path, self.line = str(path), line
        super().__init__(f"{path}:{line}: {msg}")


class ValidationError(ValueError):
    pass


def _rows(path):
    """Yield (line_number, dict) for each data row, skipping comments."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [(i, ln) for i, ln in enumerate(fh, start=1) if not ln.startswith("#") and ln.strip()]
    if not lines:
        raise ParseError(path, 1, "missing header row")
    reader = csv.reader(ln for _, ln in lines)
    header = [h.strip() for h in next(reader)]
    for (lineno, _), row in zip(lines[1:], reader):
        if len(row) != len(header):
            raise ParseError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
        yield lineno, header, dict(zip(header, (c.strip() for c in row)))


def _header(path):
    for _, header, _ in _rows(path):
        return header
    with open(path, encoding="utf-8") as fh:
        for ln in fh:
            if not ln.startswith("#") and ln.strip():
                return [h.strip() for h in ln.split(",")]
    return []


def _num(path, lineno, row, key, required=True, default=None):
    raw = row.get(key)
    if raw is None or raw == "":
        if required:
            raise ParseError(path, lineno, f"missing value for {key}")
        return default
    try:
        v = float(raw)
    except ValueError:
        raise ParseError(path, lineno, f"malformed {key}: {raw!r}") from None
    if not math.isfinite(v):
        raise ParseError(path, lineno, f"non-finite {key}: {raw!r}")
    return v


def _valid(path, lineno, row):
    raw = row.get("valid", "")
    if raw in ("", "1"):
        return True
    if raw == "0":
        return False
    raise ParseError(path, lineno, f"valid must be 0 or 1, got {raw!r}")


def _blocks(path, required):
    """Group rows into presentations, keeping the first one per (observer, image)."""
    blocks: dict[tuple, list] = {}
    seen_dupes = set()
    current = None
    for lineno, header, row in _rows(path):
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(path, 1, f"missing columns {missing}")
        key = (row["observer_id"], row["image_id"])
        if not key[0] or not key[1]:
            raise ParseError(path, lineno, "empty observer_id or image_id")
        if key != current:
            current = key
            if key in blocks:
                seen_dupes.add(key)
                current_rows = None
            else:
                current_rows = blocks[key] = []
        if current_rows is None:
            continue
        t = _num(path, lineno, row, "t_ms")
        if t < 0:
            raise ParseError(path, lineno, f"negative t_ms {t}")
        if current_rows and t < current_rows[-1][1]:
            raise ValidationError(
                f"{path}:{lineno}: timestamps decrease within presentation {key}"
            )
        current_rows.append((lineno, t, row))
    if seen_dupes:
        logger.warning("%s: dropped repeated presentations for %d (observer, image) pairs",
                       path, len(seen_dupes))
    return blocks


def parse_gaze_log(path) -> list[GazeSample]:
    """Parse raw gaze samples, grouped by (observer, image) and time-sorted."""
    out = []
    for key in sorted(blocks := _blocks(path, GAZE_COLUMNS[:5])):
        for lineno, t, row in blocks[key]:
            out.append(GazeSample(key[0], key[1], t,
                                  _num(path, lineno, row, "x_px"), _num(path, lineno, row, "y_px"),
                                  _valid(path, lineno, row)))
    return out


def parse_fixation_log(path) -> list[Fixation]:
    """Parse fixation events; rows flagged invalid are dropped."""
    out = []
    n_invalid = 0
    for key in sorted(blocks := _blocks(path, FIXATION_COLUMNS[:6])):
        for lineno, t, row in blocks[key]:
            x, y = _num(path, lineno, row, "x_px"), _num(path, lineno, row, "y_px")
            dur = _num(path, lineno, row, "duration_ms")
            if dur <= 0:
                raise ParseError(path, lineno, f"non-positive duration_ms {dur}")
            if not _valid(path, lineno, row):
                n_invalid += 1
                continue
            out.append(Fixation(key[0], key[1], x, y, t, dur))
    if n_invalid:
        logger.info("%s: skipped %d invalid fixation rows", path, n_invalid)
    return out


def _fmt(v: float) -> str:
    return repr(float(v))


def write_gaze_log(path, samples: Iterable[GazeSample], header_comment: str | None = None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GAZE_COLUMNS)
        for s in samples:
            w.writerow([s.observer_id, s.image_id, _fmt(s.t), _fmt(s.x), _fmt(s.y), int(s.valid)])


def write_fixation_log(path, fixations: Iterable[Fixation], header_comment: str | None = None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIXATION_COLUMNS)
        for f in fixations:
            w.writerow([f.observer_id, f.image_id, _fmt(f.onset), _fmt(f.x), _fmt(f.y),
                        _fmt(f.duration), 1])


def parse_metadata(path, scenario_lists: Mapping[str, Iterable[str]] | None = None) -> list[ImageRecord]:
    """Parse image metadata; optional scenario lists attach membership flags."""
    membership: dict[str, set] = {}
    for name, ids in (scenario_lists or {}).items():
        for i in ids:
            membership.setdefault(i, set()).add(name)
    out, seen = [], set()
    for lineno, header, row in _rows(path):
        missing = [c for c in ("image_id", "sam_all") if c not in header]
        if missing:
            raise ParseError(path, 1, f"missing columns {missing}")
        iid = row["image_id"]
        if iid in seen:
            raise ParseError(path, lineno, f"duplicate image_id {iid!r}")
        seen.add(iid)
        try:
            rec = ImageRecord(
                iid,
                _num(path, lineno, row, "sam_all"),
                _num(path, lineno, row, "sam_male", required=False),
                _num(path, lineno, row, "sam_female", required=False),
                int(_num(path, lineno, row, "width_px", required=False, default=1024)),
                int(_num(path, lineno, row, "height_px", required=False, default=768)),
                frozenset(membership.get(iid, ())),
            )
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(path, lineno, str(e)) from None
        out.append(rec)
    return out


def write_metadata(path, images: Iterable[ImageRecord]):
    def opt(v):
        return "" if v is None else _fmt(v)

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METADATA_COLUMNS)
        for r in images:
            w.writerow([r.image_id, _fmt(r.sam_mean_all), opt(r.sam_mean_male),
                        opt(r.sam_mean_female), r.width, r.height])


def parse_scenario_list(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        ids = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"{path}: duplicate image ids in scenario list")
    return ids


def write_scenario_list(path, image_ids: Iterable[str]):
    Path(path).write_text("".join(f"{i}\n" for i in image_ids), encoding="utf-8")


def parse_observer_genders(path) -> dict[str, str]:
    out = {}
    for lineno, header, row in _rows(path):
        if "observer_id" not in header or "gender" not in header:
            raise ParseError(path, 1, "expected columns observer_id,gender")
        g = row["gender"].lower()
        if g not in ("male", "female"):
            raise ParseError(path, lineno, f"gender must be male or female, got {g!r}")
        out[row["observer_id"]] = g
    return out


def write_observer_genders(path, genders: Mapping[str, str]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["observer_id", "gender"])
        for o in sorted(genders):
            w.writerow([o, genders[o]])


@dataclass(frozen=True)
class FeatureChannelFile:
    channel_name: str
    dimension: int
    rows: Mapping[str, np.ndarray]

    def __post_init__(self):
        if self.dimension <= 0:
            raise ValidationError("dimension must be positive")
        for iid, v in self.rows.items():
            if v.shape != (self.dimension,):
                raise ValidationError(f"{iid}: row has shape {v.shape}, expected ({self.dimension},)")

    @property
    def image_ids(self) -> list[str]:
        return list(self.rows)

    def matrix(self, image_ids=None) -> np.ndarray:
        ids = self.image_ids if image_ids is None else image_ids
        return np.vstack([self.rows[i] for i in ids]) if ids else np.empty((0, self.dimension))


def load_feature_channel(path, expected_dim: int | None = None, channel_name: str | None = None) -> FeatureChannelFile:
    """Load an ``image_id,f0..f{D-1}`` CSV. No normalization is applied."""
    path = Path(path)
    header = _header(path)
    if not header or header[0] != "image_id":
        raise ParseError(path, 1, "first column must be image_id")
    dim = len(header) - 1
    if dim <= 0:
        raise ParseError(path, 1, "no feature columns")
    if expected_dim is not None and dim != expected_dim:
        raise ValidationError(f"{path}: header declares {dim} features, expected {expected_dim}")
    rows: dict[str, np.ndarray] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        body = [(i, ln) for i, ln in enumerate(fh, start=1) if not ln.startswith("#") and ln.strip()]
    for lineno, ln in body[1:]:
        parts = ln.rstrip("\n").split(",")
        if len(parts) - 1 != dim:
            raise ValidationError(f"{path}:{lineno}: row has {len(parts) - 1} features, expected {dim}")
        iid = parts[0].strip()
        if iid in rows:
            raise ValidationError(f"{path}:{lineno}: duplicate image_id {iid!r}")
        try:
            rows[iid] = np.array(parts[1:], dtype=float)
        except ValueError:
            raise ParseError(path, lineno, "malformed feature value") from None
    return FeatureChannelFile(channel_name or path.stem, dim, rows)


def write_feature_channel(path, channel: FeatureChannelFile, header_comment: str | None = None):
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    buf.write(",".join(["image_id"] + [f"f{k}" for k in range(channel.dimension)]) + "\n")
    for iid, v in channel.rows.items():
        buf.write(iid + "," + ",".join(_fmt(x) for x in v) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


@dataclass(frozen=True)
class DatasetLayout:
    """File locations inside a data directory.

    ``metadata.csv`` is required, as is one of ``fixations.csv`` (detected
    events) or ``gaze.csv`` (raw samples, run through fixation detection).
    ``observers.csv`` and ``scenarios/<name>.txt`` are optional.
    """

    root: Path

    @property
    def metadata(self) -> Path:
        return self.root / "metadata.csv"

    @property
    def fixations(self) -> Path:
        return self.root / "fixations.csv"

    @property
    def gaze(self) -> Path:
        return self.root / "gaze.csv"

    @property
    def observers(self) -> Path:
        return self.root / "observers.csv"

    @property
    def scenario_dir(self) -> Path:
        return self.root / "scenarios"

    def missing_inputs(self) -> list[str]:
        out = []
        if not self.metadata.is_file():
            out.append(str(self.metadata))
        if not (self.fixations.is_file() or self.gaze.is_file()):
            out.append(f"{self.fixations} (or {self.gaze.name})")
        return out


def load_trialset(data_dir, detection=None):
    """Read a data directory into a :class:`~gazeaffect.core.TrialSet`."""
    from .core import TrialSet
    from .events import detect_fixations

    layout = DatasetLayout(Path(data_dir))
    missing = layout.missing_inputs()
    if missing:
        raise ValidationError("missing inputs: " + ", ".join(missing))
    scenarios = {}
    if layout.scenario_dir.is_dir():
        for p in sorted(layout.scenario_dir.glob("*.txt")):
            scenarios[p.stem] = parse_scenario_list(p)
    images = parse_metadata(layout.metadata, scenarios)
    if layout.fixations.is_file():
        fixations = parse_fixation_log(layout.fixations)
    else:
        fixations = detect_fixations(parse_gaze_log(layout.gaze), detection)
    genders = parse_observer_genders(layout.observers) if layout.observers.is_file() else {}
    return TrialSet.build(images, fixations, observers=genders.keys(), observer_gender=genders)
