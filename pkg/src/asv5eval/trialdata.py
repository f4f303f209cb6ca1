"""Score and key files: parsing, validation, serialization and joining.

File formats (whitespace separated, UTF-8, lines starting with ``#`` ignored)::

    Track 1 scores   <trial> <score>
    Track 2 scores   <enroll> <trial> <sasv> [<cm> <asv>]
    Track 1 keys     <trial> <label> <attack> <codec> <quality>
    Track 2 keys     <enroll> <trial> <label> <attack> <codec> <quality>

``-`` marks an absent attack or quality, ``none`` an absent codec.  Track 2
trials are identified by the ``(enroll, trial)`` pair.
"""

from __future__ import annotations

import hashlib
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateTrial,
    InputError,
    LabelAttackMismatch,
    MalformedKey,
    MalformedScore,
    MissingClass,
    MissingScore,
    MixedTriplet,
    QualityOutOfRange,
    TrackMismatch,
    UnknownLabel,
    UnmatchedScore,
)

log = logging.getLogger(__name__)

NO_ATTACK = "-"
NO_CODEC = "none"
NO_QUALITY = "-"

TRACK1_LABELS = ("bonafide", "spoof")
TRACK2_LABELS = ("target", "nontarget", "spoof")


def labels_for(track: int) -> tuple[str, ...]:
    if track == 1:
        return TRACK1_LABELS
    if track == 2:
        return TRACK2_LABELS
    raise ValueError(f"track must be 1 or 2, got {track!r}")


@dataclass(frozen=True)
class TrialKey:
    """Ground truth for one trial.  ``enroll`` is None for Track 1."""

    trial: str
    label: str
    attack: str = NO_ATTACK
    codec: str = NO_CODEC
    quality: int | None = None
    enroll: str | None = None

    @property
    def uid(self) -> tuple[str, str] | str:
        return self.trial if self.enroll is None else (self.enroll, self.trial)

    @property
    def is_spoof(self) -> bool:
        return self.label == "spoof"


@dataclass(frozen=True)
class ScoreRecord:
    trial: str
    score: float
    cm: float | None = None
    asv: float | None = None
    enroll: str | None = None

    @property
    def uid(self) -> tuple[str, str] | str:
        return self.trial if self.enroll is None else (self.enroll, self.trial)

    @property
    def has_triplet(self) -> bool:
        return self.cm is not None


@dataclass(frozen=True)
class ScoreSet:
    track: int
    records: tuple[ScoreRecord, ...]
    path: str | None = None

    def __len__(self) -> int:
        return len(self.records)

    @property
    def has_triplets(self) -> bool:
        return bool(self.records) and self.records[0].has_triplet


def _tokens(path: Path) -> Iterable[tuple[int, list[str]]]:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None
    except UnicodeDecodeError:
        raise InputError(f"{path}: not valid UTF-8") from None
    for row, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield row, stripped.split()


def _real(token: str, row: int, path: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise MalformedScore(row, f"not a number: {token!r}", path) from None
    if not math.isfinite(value):
        raise MalformedScore(row, f"non-finite score {token!r}", path)
    return value


def parse_scores(path, track: int) -> ScoreSet:
    """Read a score file.  Duplicate trials and non-finite scores are errors."""
    labels_for(track)
    path = Path(path)
    where = str(path)
    records: list[ScoreRecord] = []
    seen: dict = {}
    triplet: bool | None = None
    for row, tok in _tokens(path):
        if track == 1:
            if len(tok) != 2:
                raise MalformedScore(row, f"expected 2 columns, got {len(tok)}", where)
            rec = ScoreRecord(tok[0], _real(tok[1], row, where))
        else:
            if len(tok) not in (3, 5):
                raise MalformedScore(row, f"expected 3 or 5 columns, got {len(tok)}", where)
            has = len(tok) == 5
            if triplet is None:
                triplet = has
            elif triplet != has:
                raise MixedTriplet(row, "rows mix SASV-only and triplet scores", where)
            cm = _real(tok[3], row, where) if has else None
            asv = _real(tok[4], row, where) if has else None
            rec = ScoreRecord(tok[1], _real(tok[2], row, where), cm, asv, enroll=tok[0])
        if rec.uid in seen:
            raise DuplicateTrial(str(rec.uid), row, where)
        seen[rec.uid] = row
        records.append(rec)
    log.debug("parsed %d score rows from %s", len(records), path)
    return ScoreSet(track, tuple(records), where)


def _key_from_tokens(tok: Sequence[str], track: int, row: int, where: str) -> TrialKey:
    ncol = 5 if track == 1 else 6
    if len(tok) != ncol:
        raise MalformedKey(row, f"expected {ncol} columns, got {len(tok)}", where)
    enroll = None
    if track == 2:
        enroll, tok = tok[0], tok[1:]
    trial, label, attack, codec, quality = tok
    if label not in labels_for(track):
        raise UnknownLabel(row, f"unknown label {label!r}", where)
    if track == 1:
        if (label == "bonafide") != (attack == NO_ATTACK):
            raise LabelAttackMismatch(row, f"label {label!r} with attack {attack!r}", where)
    elif label != "spoof" and attack != NO_ATTACK:
        raise LabelAttackMismatch(row, f"label {label!r} with attack {attack!r}", where)
    if quality == NO_QUALITY:
        q = None
    else:
        try:
            q = int(quality)
        except ValueError:
            raise QualityOutOfRange(row, f"quality {quality!r} is not an integer", where) from None
        if not 1 <= q <= 5:
            raise QualityOutOfRange(row, f"quality {q} outside 1..5", where)
    if (q is None) != (codec == NO_CODEC):
        raise MalformedKey(row, f"codec {codec!r} with quality {quality!r}", where)
    return TrialKey(trial, label, attack, codec, q, enroll)


def parse_keys(path, track: int) -> tuple[TrialKey, ...]:
    labels_for(track)
    path = Path(path)
    where = str(path)
    keys: list[TrialKey] = []
    seen: set = set()
    for row, tok in _tokens(path):
        key = _key_from_tokens(tok, track, row, where)
        if key.uid in seen:
            raise DuplicateTrial(str(key.uid), row, where)
        seen.add(key.uid)
        keys.append(key)
    return tuple(keys)


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_scores(scores: ScoreSet) -> str:
    """Canonical text: single spaces, ``\\n`` endings, floats as ``repr``."""
    lines = []
    for r in scores.records:
        cols = [r.trial, _fmt(r.score)] if scores.track == 1 else [r.enroll, r.trial, _fmt(r.score)]
        if r.has_triplet:
            cols += [_fmt(r.cm), _fmt(r.asv)]
        lines.append(" ".join(cols))
    return "".join(line + "\n" for line in lines)


def serialize_keys(keys: Sequence[TrialKey]) -> str:
    lines = []
    for k in keys:
        q = NO_QUALITY if k.quality is None else str(k.quality)
        cols = [k.trial, k.label, k.attack, k.codec, q]
        if k.enroll is not None:
            cols.insert(0, k.enroll)
        lines.append(" ".join(cols))
    return "".join(line + "\n" for line in lines)


@dataclass(frozen=True)
class JoinedTrialSet:
    """Matched (key, score) pairs in canonical trial-id order.

    Column views (``scores``, ``labels``, ...) are numpy arrays aligned with
    ``pairs``.
    """

    track: int
    pairs: tuple[tuple[TrialKey, ScoreRecord], ...]
    warnings: tuple[str, ...] = ()
    _cols: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def counts(self) -> dict[str, int]:
        c = Counter(k.label for k, _ in self.pairs)
        return {lab: c.get(lab, 0) for lab in labels_for(self.track)}

    @property
    def has_triplets(self) -> bool:
        return bool(self.pairs) and self.pairs[0][1].has_triplet

    def _col(self, name: str) -> np.ndarray:
        if name not in self._cols:
            if name in ("score", "cm", "asv"):
                arr = np.array([getattr(s, name) for _, s in self.pairs], dtype=np.float64)
            else:
                arr = np.array([getattr(k, name) if getattr(k, name) is not None else ""
                                for k, _ in self.pairs], dtype=object)
            self._cols[name] = arr
        return self._cols[name]

    @property
    def scores(self) -> np.ndarray:
        return self._col("score")

    @property
    def cm_scores(self) -> np.ndarray:
        if not self.has_triplets:
            raise MissingClass("cm/asv triplet", "submission has SASV scores only")
        return self._col("cm")

    @property
    def asv_scores(self) -> np.ndarray:
        if not self.has_triplets:
            raise MissingClass("cm/asv triplet", "submission has SASV scores only")
        return self._col("asv")

    @property
    def labels(self) -> np.ndarray:
        return self._col("label")

    @property
    def attacks(self) -> np.ndarray:
        return self._col("attack")

    @property
    def codecs(self) -> np.ndarray:
        return self._col("codec")

    @property
    def qualities(self) -> np.ndarray:
        return np.array([-1 if k.quality is None else k.quality for k, _ in self.pairs])

    def mask(self, label: str) -> np.ndarray:
        return self.labels == label

    def class_scores(self, label: str, column: str = "score") -> np.ndarray:
        return self._col(column)[self.mask(label)]

    def subset(self, keep: np.ndarray) -> "JoinedTrialSet":
        keep = np.asarray(keep, dtype=bool)
        pairs = tuple(p for p, k in zip(self.pairs, keep) if k)
        return JoinedTrialSet(self.track, pairs, self.warnings)

    def require(self, labels: Iterable[str], context: str = "") -> None:
        counts = self.counts
        for lab in labels:
            if counts.get(lab, 0) == 0:
                raise MissingClass(lab, context)

    def checksum(self) -> str:
        """sha256 over the canonical trial-id list; equal iff same trial set."""
        h = hashlib.sha256()
        for k, _ in self.pairs:
            h.update(("\t".join(filter(None, (k.enroll, k.trial))) + "\n").encode())
        return h.hexdigest()


def _sort_key(uid):
    return uid if isinstance(uid, tuple) else ("", uid)


def join(scores: ScoreSet, keys: Sequence[TrialKey], strict: bool = True) -> JoinedTrialSet:
    """Match every score to its key.

    In strict mode an unscored key raises ``MissingScore``; with
    ``strict=False`` it is skipped and reported in ``warnings``.  A score
    without a key is always an error.
    """
    key_track = 2 if keys and keys[0].enroll is not None else 1
    if keys and key_track != scores.track:
        raise TrackMismatch(f"score file is Track {scores.track} but keys are Track {key_track}")
    by_uid = {k.uid: k for k in keys}
    scored = {}
    for rec in scores.records:
        key = by_uid.get(rec.uid)
        if key is None:
            raise UnmatchedScore(str(rec.uid))
        scored[rec.uid] = rec
    warnings = []
    for uid in sorted(by_uid, key=_sort_key):
        if uid not in scored:
            if strict:
                raise MissingScore(str(uid))
            warnings.append(f"key trial {uid!s} has no score; skipped")
    if warnings:
        log.warning("permissive join skipped %d unscored key trials", len(warnings))
    pairs = tuple((by_uid[u], scored[u]) for u in sorted(scored, key=_sort_key))
    return JoinedTrialSet(scores.track, pairs, tuple(warnings))


def load(score_path, key_path, track: int, strict: bool = True) -> JoinedTrialSet:
    return join(parse_scores(score_path, track), parse_keys(key_path, track), strict=strict)
