"""Loading documents from disk and turning recorded audio into sessions.

The toolkit never decodes audio. A speech-to-text backend receives the raw
bytes and returns time-stamped segments. Two backends ship: ``ReplayBackend``
reads a sidecar JSON next to the audio file, ``HttpBackend`` POSTs the audio to
a configurable endpoint. Channels recorded on different devices must share one
clock; the toolkit merges them by timestamp and does no synchronisation.
"""
from __future__ import annotations

import heapq
import json
import logging
import socket
import urllib.error
import urllib.request
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .model import (
    AuthMethod,
    Channel,
    PlatformSetting,
    SchemaError,
    ScreenReaderProfile,
    SessionRecord,
    TranscriptEvent,
    WorkflowSpec,
    catalog_from_dict,
    profile_from_dict,
    session_from_dict,
    validate_catalog,
    validate_profile,
    validate_session,
    validate_workflow,
    workflow_from_dict,
)

log = logging.getLogger(__name__)

MEDIA_TYPES = {".wav": "audio/wav", ".mp3": "audio/mpeg"}


class IngestError(Exception):
    def __init__(self, path, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class ValidationError(IngestError):
    def __init__(self, path, violations: list[str]):
        super().__init__(path, "; ".join(violations))
        self.violations = violations


class TransportError(Exception):
    """The speech-to-text backend could not be reached; safe to retry."""

    retryable = True


class EmptyTranscriptError(Exception):
    retryable = False


@dataclass(frozen=True)
class SttSegment:
    t_start_s: float
    t_end_s: float
    text: str
    confidence: float = 1.0


class SttBackend(ABC):
    @abstractmethod
    def transcribe(self, audio: bytes, media_type: str) -> list[SttSegment]:
        """Return time-ordered segments or raise TransportError."""

    def transcribe_file(self, path: Path, media_type: str) -> list[SttSegment]:
        try:
            audio = path.read_bytes()
        except OSError as exc:
            raise IngestError(path, f"cannot read audio: {exc.strerror or exc}") from exc
        return self.transcribe(audio, media_type)


def _read_json(path):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IngestError(path, f"cannot read: {exc.strerror or exc}") from exc
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IngestError(path, f"not UTF-8 JSON: {exc}") from exc


def _parse(path, fn, doc):
    try:
        return fn(doc)
    except SchemaError as exc:
        raise IngestError(path, f"schema error in field {exc.field!r}: {exc.reason}") from exc


def load_catalog(path) -> list[AuthMethod]:
    catalog = _parse(path, catalog_from_dict, _read_json(path))
    problems = validate_catalog(catalog)
    if problems:
        raise ValidationError(path, problems)
    return catalog


def load_profile(path) -> ScreenReaderProfile:
    prof = _parse(path, profile_from_dict, _read_json(path))
    problems = validate_profile(prof)
    if problems:
        raise ValidationError(path, problems)
    return prof


def load_profiles(paths: Iterable) -> dict[str, ScreenReaderProfile]:
    out: dict[str, ScreenReaderProfile] = {}
    for p in paths:
        prof = load_profile(p)
        if prof.id in out:
            raise ValidationError(p, [f"duplicate profile id {prof.id!r}"])
        out[prof.id] = prof
    return out


def load_workflow(path, catalog: Iterable[AuthMethod]) -> WorkflowSpec:
    spec = _parse(path, workflow_from_dict, _read_json(path))
    problems = validate_workflow(spec, catalog)
    if problems:
        raise ValidationError(path, problems)
    return spec


def load_session(path) -> SessionRecord:
    """Load a session; out-of-order events are re-sorted with a warning."""
    session = _parse(path, session_from_dict, _read_json(path))
    starts = [e.t_start_s for e in session.events]
    if starts != sorted(starts):
        log.warning("%s: events out of order, re-sorted by t_start_s", path)
        session = session.sorted_events()
    problems = validate_session(session)
    if problems:
        raise ValidationError(path, problems)
    return session


# -- speech to text -----------------------------------------------------------

def segments_from_json(doc, source="<segments>") -> list[SttSegment]:
    if not isinstance(doc, list):
        raise IngestError(source, "segment document must be a JSON array")
    out = []
    for i, d in enumerate(doc):
        try:
            seg = SttSegment(float(d["t_start_s"]), float(d["t_end_s"]), str(d["text"]),
                             float(d.get("confidence", 1.0)))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise IngestError(source, f"segment[{i}] malformed: {exc}") from exc
        if seg.t_end_s <= seg.t_start_s:
            raise IngestError(source, f"segment[{i}] t_end_s <= t_start_s")
        if not 0.0 <= seg.confidence <= 1.0:
            raise IngestError(source, f"segment[{i}] confidence outside [0,1]")
        out.append(seg)
    return out


def sidecar_path(audio_path) -> Path:
    return Path(audio_path).with_suffix(".segments.json")


class ReplayBackend(SttBackend):
    """Replays pre-computed segments instead of recognising speech.

    Given a file, the segments come from ``<audio stem>.segments.json``. The
    bytes-only ``transcribe`` returns the fixed ``segments`` passed at
    construction, which is what the tests use as a mock engine.
    """

    def __init__(self, segments: list[SttSegment] | None = None):
        self.segments = segments

    def transcribe(self, audio: bytes, media_type: str) -> list[SttSegment]:
        if self.segments is None:
            raise TransportError("replay backend has no segments for raw audio; use transcribe_file")
        return list(self.segments)

    def transcribe_file(self, path: Path, media_type: str) -> list[SttSegment]:
        side = sidecar_path(path)
        if not side.exists():
            if self.segments is not None:
                return list(self.segments)
            raise TransportError(f"sidecar {side} missing")
        return segments_from_json(_read_json(side), side)


class HttpBackend(SttBackend):
    """POST raw audio, receive the segment JSON array back."""

    def __init__(self, endpoint: str, timeout_s: float = 60.0, headers: Mapping[str, str] | None = None):
        self.endpoint = endpoint
        self.timeout_s = timeout_s
        self.headers = dict(headers or {})

    def transcribe(self, audio: bytes, media_type: str) -> list[SttSegment]:
        req = urllib.request.Request(
            self.endpoint, data=audio, method="POST",
            headers={"Content-Type": media_type, **self.headers},
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                body = resp.read()
        except (urllib.error.URLError, socket.timeout, TimeoutError, ConnectionError) as exc:
            raise TransportError(f"{self.endpoint}: {exc}") from exc
        try:
            doc = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise TransportError(f"{self.endpoint}: unreadable response: {exc}") from exc
        return segments_from_json(doc, self.endpoint)


def merge_channels(per_channel: list[tuple[Channel, list[SttSegment]]]) -> list[TranscriptEvent]:
    """Stable merge by start time; ties keep channel-list order."""
    streams = [
        [(seg.t_start_s, k, i, ch, seg) for i, seg in enumerate(sorted(segs, key=lambda s: s.t_start_s))]
        for k, (ch, segs) in enumerate(per_channel)
    ]
    return [
        TranscriptEvent(seg.t_start_s, seg.t_end_s, ch, seg.text, seg.confidence)
        for _, _, _, ch, seg in heapq.merge(*streams)
    ]


def transcribe_session(
    audio_paths: Mapping[Channel, str | Path] | list[tuple[Channel, str | Path]],
    backend: SttBackend,
    workflow_id: str,
    setting: PlatformSetting,
    *,
    session_id: str | None = None,
    speech_rate_pct: int = 50,
    headphones_on_terminal: bool = False,
    headphones_on_smartphone: bool = False,
    confidence_floor: float = 0.0,
) -> SessionRecord:
    """Transcribe one audio file per channel and merge them into a session.

    Transport errors propagate untouched so nothing partial is produced.
    """
    items = list(audio_paths.items()) if isinstance(audio_paths, Mapping) else list(audio_paths)
    per_channel = []
    for channel, path in items:
        path = Path(path)
        media_type = MEDIA_TYPES.get(path.suffix.lower())
        if media_type is None:
            raise IngestError(path, f"unsupported audio type {path.suffix!r}; use .wav or .mp3")
        if not path.exists():
            raise IngestError(path, "audio file not found")
        segs = backend.transcribe_file(path, media_type)
        for s in segs:
            if s.confidence < confidence_floor:
                log.warning("%s: segment at %.3fs below confidence floor (%.2f < %.2f): %r",
                            path, s.t_start_s, s.confidence, confidence_floor, s.text)
        per_channel.append((Channel(channel), segs))
    events = merge_channels(per_channel)
    if not events:
        raise EmptyTranscriptError("backend returned no segments")
    session = SessionRecord(
        id=session_id or workflow_id,
        workflow=workflow_id,
        setting=setting,
        speech_rate_pct=speech_rate_pct,
        events=tuple(events),
        headphones_on_terminal=headphones_on_terminal,
        headphones_on_smartphone=headphones_on_smartphone,
    )
    problems = validate_session(session)
    if problems:
        raise ValidationError(session.id, problems)
    return session


def low_confidence_events(session: SessionRecord, floor: float) -> list[int]:
    return [i for i, e in enumerate(session.events) if e.confidence is not None and e.confidence < floor]
