"""Loading STEW-shaped recordings and ratings, plus feature-matrix persistence.

Manifest format (JSON)::

    {
      "root": "data/stew",                 # optional, relative to the manifest file
      "sampling_rate_hz": 128,
      "channel_names": ["AF3", "F7", ...],
      "n_samples": 19200,                  # optional expected row count
      "ratings": "ratings.txt",
      "recordings": [
        {"path": "sub01_lo.txt", "subject_id": 1, "condition": "Rest"},
        ...
      ]
    }

Ratings file: one line per subject, ``subject_id rest_score simkap_score``
separated by commas and/or whitespace.  A blank, ``nan`` or ``-`` score marks
a missing rating; that instance is dropped downstream.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .records import Condition, EegRecording, FeatureMatrix, Rating, WorkloadClass

log = logging.getLogger(__name__)

STEW_CHANNELS = ("AF3", "F7", "F3", "FC5", "T7", "P7", "O1", "O2", "P8", "T8", "FC6", "F4", "F8", "AF4")
STEW_SAMPLING_RATE = 128.0
STEW_N_SAMPLES = 19200

KEY_COLUMNS = ("subject_id", "condition", "index_id", "label", "synthetic")

_SPLIT = re.compile(r"[,\s]+")


class DataFormatError(ValueError):
    """A data file does not match its declared layout."""


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    subject_id: int
    condition: Condition


@dataclass
class DatasetManifest:
    root: Path
    entries: list[ManifestEntry]
    ratings_path: Path | None
    sampling_rate_hz: float
    channel_names: tuple[str, ...]
    n_samples: int | None = None

    def validate(self) -> None:
        seen = set()
        for e in self.entries:
            if not self.resolve(e.path).is_file():
                raise FileNotFoundError(f"recording file not found: {self.resolve(e.path)}")
            key = (e.subject_id, e.condition)
            if key in seen:
                raise ValueError(f"duplicate manifest entry for subject {e.subject_id}, {e.condition.value}")
            seen.add(key)
        if self.ratings_path is not None and not self.resolve(self.ratings_path).is_file():
            raise FileNotFoundError(f"ratings file not found: {self.resolve(self.ratings_path)}")
        if len(set(self.channel_names)) != len(self.channel_names):
            raise ValueError("manifest channel names must be unique")

    def resolve(self, p: Path) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.root / p

    def to_dict(self) -> dict:
        return {
            "root": str(self.root),
            "sampling_rate_hz": self.sampling_rate_hz,
            "channel_names": list(self.channel_names),
            "n_samples": self.n_samples,
            "ratings": None if self.ratings_path is None else str(self.ratings_path),
            "recordings": [{"path": str(e.path), "subject_id": e.subject_id, "condition": e.condition.value}
                           for e in self.entries],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "DatasetManifest":
        base = Path(".") if base is None else Path(base)
        root = Path(d.get("root", "."))
        if not root.is_absolute():
            root = base / root
        entries = [ManifestEntry(Path(e["path"]), int(e["subject_id"]), Condition.parse(e["condition"]))
                   for e in d.get("recordings", [])]
        ratings = d.get("ratings")
        return cls(root=root, entries=entries, ratings_path=None if ratings is None else Path(ratings),
                   sampling_rate_hz=float(d.get("sampling_rate_hz", STEW_SAMPLING_RATE)),
                   channel_names=tuple(d.get("channel_names", STEW_CHANNELS)),
                   n_samples=d.get("n_samples"))

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), base=path.parent)


def build_stew_manifest(root, sampling_rate_hz: float = STEW_SAMPLING_RATE,
                        channel_names: Sequence[str] = STEW_CHANNELS,
                        n_samples: int | None = STEW_N_SAMPLES) -> DatasetManifest:
    """Scan a directory laid out as ``sub{NN}_{lo|hi}.txt`` + ``ratings.txt``."""
    root = Path(root)
    pattern = re.compile(r"^sub(\d+)_(lo|hi)\.txt$", re.IGNORECASE)
    entries = []
    for p in sorted(root.iterdir()):
        m = pattern.match(p.name)
        if m:
            entries.append(ManifestEntry(Path(p.name), int(m.group(1)), Condition.parse(m.group(2).lower())))
    entries.sort(key=lambda e: (e.subject_id, e.condition != Condition.REST))
    ratings = root / "ratings.txt"
    return DatasetManifest(root=root, entries=entries,
                           ratings_path=Path("ratings.txt") if ratings.is_file() else None,
                           sampling_rate_hz=sampling_rate_hz, channel_names=tuple(channel_names),
                           n_samples=n_samples)


def read_matrix(path, n_columns: int | None = None, n_rows: int | None = None) -> np.ndarray:
    """Read a whitespace- or comma-separated numeric matrix, reporting the offending row on error."""
    path = Path(path)
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            cells = [c for c in _SPLIT.split(text) if c]
            try:
                values = [float(c) for c in cells]
            except ValueError:
                bad = next(c for c in cells if not _is_float(c))
                raise DataFormatError(f"{path}: row {lineno}: non-numeric cell {bad!r}") from None
            if n_columns is None:
                n_columns = len(values)
            if len(values) != n_columns:
                raise DataFormatError(f"{path}: row {lineno}: expected {n_columns} columns, found {len(values)}")
            rows.append(values)
    a = np.array(rows, dtype=float).reshape(len(rows), n_columns or 0)
    if not np.all(np.isfinite(a)):
        r = int(np.argwhere(~np.isfinite(a))[0, 0])
        raise DataFormatError(f"{path}: data row {r + 1}: non-finite value")
    if n_rows is not None and a.shape[0] != n_rows:
        raise DataFormatError(f"{path}: expected {n_rows} rows, found {a.shape[0]} "
                              f"(row {min(a.shape[0], n_rows) + 1} is the first mismatch)")
    return a


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_ratings(path) -> list[Rating]:
    ratings = []
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            cells = [c for c in _SPLIT.split(line.strip()) if c]
            if not cells:
                continue
            if len(cells) > 3:
                raise DataFormatError(f"{path}: row {lineno}: expected 'subject rest simkap'")
            try:
                subject = int(float(cells[0]))
            except ValueError:
                if lineno == 1:
                    continue  # header line
                raise DataFormatError(f"{path}: row {lineno}: bad subject id {cells[0]!r}") from None
            for cond, cell in zip((Condition.REST, Condition.SIMKAP), cells[1:]):
                if cell.lower() in ("nan", "-", "na"):
                    continue
                try:
                    score = float(cell)
                except ValueError:
                    raise DataFormatError(f"{path}: row {lineno}: non-numeric score {cell!r}") from None
                ratings.append(Rating(subject, cond, score))
    return ratings


def write_ratings(ratings: Iterable[Rating], path) -> None:
    by_subject: dict[int, dict[Condition, int]] = {}
    for r in ratings:
        by_subject.setdefault(r.subject_id, {})[r.condition] = r.score
    with Path(path).open("w") as fh:
        for sid in sorted(by_subject):
            s = by_subject[sid]
            cells = [str(s.get(c, "nan")) for c in (Condition.REST, Condition.SIMKAP)]
            fh.write(f"{sid}, {cells[0]}, {cells[1]}\n")


def load_recording(path, subject_id: int, condition, sampling_rate_hz: float,
                   channel_names: Sequence[str], n_samples: int | None = None) -> EegRecording:
    samples = read_matrix(path, n_columns=len(channel_names), n_rows=n_samples)
    return EegRecording(subject_id, Condition.parse(condition), samples, sampling_rate_hz, tuple(channel_names))


def write_recording(rec: EegRecording, path) -> None:
    np.savetxt(path, rec.samples, fmt="%.17g", delimiter=" ")


def load_dataset(manifest: DatasetManifest) -> tuple[list[EegRecording], list[Rating]]:
    """Load every recording listed in the manifest and the ratings that match them.

    Ratings are returned only for (subject, condition) pairs that have a
    recording; recordings without a rating are kept but logged, since the
    instance is dropped later at feature-matrix assembly.
    """
    manifest.validate()
    recordings = [load_recording(manifest.resolve(e.path), e.subject_id, e.condition,
                                 manifest.sampling_rate_hz, manifest.channel_names, manifest.n_samples)
                  for e in manifest.entries]
    ratings: list[Rating] = []
    if manifest.ratings_path is not None:
        present = {(r.subject_id, r.condition) for r in recordings}
        ratings = [r for r in read_ratings(manifest.resolve(manifest.ratings_path))
                   if (r.subject_id, r.condition) in present]
    rated = {(r.subject_id, r.condition) for r in ratings}
    for rec in recordings:
        if (rec.subject_id, rec.condition) not in rated:
            log.warning("no rating for subject %d (%s); instance will be dropped",
                        rec.subject_id, rec.condition.value)
    return recordings, ratings


def map_rating_to_class(score: int) -> WorkloadClass | None:
    """Scores 1-4 map to Suboptimal, 6-9 to SuperOptimal, and 5 is discarded (None)."""
    if int(score) != score or not 1 <= score <= 9:
        raise ValueError(f"rating score must be an integer in [1, 9], got {score!r}")
    if score < 5:
        return WorkloadClass.SUBOPTIMAL
    if score > 5:
        return WorkloadClass.SUPEROPTIMAL
    return None


def save_recording_npz(rec: EegRecording, path) -> None:
    """Write an ``.npz`` archive with fixed member timestamps, so identical recordings give identical bytes."""
    arrays = {"samples": rec.samples, "sampling_rate_hz": np.float64(rec.sampling_rate_hz),
              "channel_names": np.array(rec.channel_names), "subject_id": np.int64(rec.subject_id),
              "condition": np.array(rec.condition.value)}
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name, arr in arrays.items():
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.asarray(arr), allow_pickle=False)
            zf.writestr(zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0)), buf.getvalue())


def load_recording_npz(path) -> EegRecording:
    with np.load(path, allow_pickle=False) as d:
        return EegRecording(int(d["subject_id"]), str(d["condition"]), d["samples"],
                            float(d["sampling_rate_hz"]), tuple(str(c) for c in d["channel_names"]))


def save_feature_matrix(fm: FeatureMatrix, path) -> None:
    """Write a feature matrix as CSV; floats use the shortest round-trip repr."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(KEY_COLUMNS) + list(fm.feature_names))
        for i in range(fm.n_rows):
            w.writerow([int(fm.subject_ids[i]), fm.conditions[i], fm.index_ids[i],
                        WorkloadClass(int(fm.labels[i])).label, int(fm.synthetic[i])]
                       + [repr(float(v)) for v in fm.values[i]])


def load_feature_matrix(path) -> FeatureMatrix:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file, no header") from None
        if tuple(header[:len(KEY_COLUMNS)]) != KEY_COLUMNS:
            raise DataFormatError(f"{path}: header must start with {','.join(KEY_COLUMNS)}")
        names = header[len(KEY_COLUMNS):]
        sid, cond, idx, lab, syn, vals = [], [], [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataFormatError(f"{path}: row {lineno}: expected {len(header)} cells, found {len(row)}")
            sid.append(int(row[0]))
            cond.append(row[1])
            idx.append(row[2])
            lab.append(int(WorkloadClass.parse(row[3])))
            syn.append(bool(int(row[4])))
            try:
                vals.append([float(v) for v in row[len(KEY_COLUMNS):]])
            except ValueError:
                raise DataFormatError(f"{path}: row {lineno}: non-numeric feature value") from None
    return FeatureMatrix(np.array(sid, dtype=np.int64), np.array(cond, dtype=object), np.array(idx, dtype=object),
                         tuple(names), np.array(vals, dtype=float).reshape(len(vals), len(names)),
                         np.array(lab, dtype=np.int64), np.array(syn, dtype=bool))
