"""Shared domain types for workflows, sessions, screen reader profiles and verdicts.

Everything here is an immutable value. JSON (de)serialisation lives next to the
types so that every module reads and writes the same field names.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Mapping


class SchemaError(ValueError):
    """A document is missing a field or has a field of the wrong shape."""

    def __init__(self, field_name: str, reason: str):
        super().__init__(f"{field_name}: {reason}")
        self.field = field_name
        self.reason = reason


class PlatformKind(str, Enum):
    TERMINAL = "TERMINAL"
    SMARTPHONE = "SMARTPHONE"


class SettingKind(str, Enum):
    TERMINAL = "TERMINAL"
    SMARTPHONE = "SMARTPHONE"
    CONCURRENT = "CONCURRENT"


class AuthCategory(str, Enum):
    OTP_TEXT = "OTP_TEXT"
    OTP_CALL = "OTP_CALL"
    OTP_AUTHENTICATOR = "OTP_AUTHENTICATOR"
    PUSH = "PUSH"
    PUSH_SELECT_CONFIRM = "PUSH_SELECT_CONFIRM"
    FIDO_MFA = "FIDO_MFA"
    PHONE_CALL_KEYPRESS = "PHONE_CALL_KEYPRESS"

    @property
    def is_otp(self) -> bool:
        return self in (AuthCategory.OTP_TEXT, AuthCategory.OTP_CALL, AuthCategory.OTP_AUTHENTICATOR)

    @property
    def is_push(self) -> bool:
        return self in (AuthCategory.PUSH, AuthCategory.PUSH_SELECT_CONFIRM)


class PromptReading(str, Enum):
    FULL = "FULL"
    PARTIAL = "PARTIAL"
    NONE = "NONE"


class OverlayHandling(str, Enum):
    READS_OVERLAY = "READS_OVERLAY"
    READS_UNDERLYING = "READS_UNDERLYING"


class NotificationOrdering(str, Enum):
    NEWEST_OVERRIDES = "NEWEST_OVERRIDES"
    OLDEST_ON_TOP = "OLDEST_ON_TOP"


class OtpStyle(str, Enum):
    """How a reader speaks a one-time code it can see."""

    DIGIT_BY_DIGIT = "DIGIT_BY_DIGIT"
    NUMERIC_WHOLE = "NUMERIC_WHOLE"
    NUMERIC_GROUPED = "NUMERIC_GROUPED"
    HIDDEN = "HIDDEN"


class ElementKind(str, Enum):
    INSTRUCTION = "INSTRUCTION"
    OTP = "OTP"
    SECURITY_PROMPT = "SECURITY_PROMPT"
    BUTTON = "BUTTON"
    SERVICE_NAME = "SERVICE_NAME"
    LINK = "LINK"


class Location(str, Enum):
    IN_BROWSER = "IN_BROWSER"
    OUTSIDE_BROWSER = "OUTSIDE_BROWSER"
    PHONE_CALL_AUDIO = "PHONE_CALL_AUDIO"
    NOTIFICATION = "NOTIFICATION"


class Channel(str, Enum):
    SCREEN_READER = "SCREEN_READER"
    PHONE_CALL = "PHONE_CALL"
    SYSTEM_AUDIO = "SYSTEM_AUDIO"


class Verdict(str, Enum):
    VULNERABLE = "VULNERABLE"
    PARTIAL = "PARTIAL"  # the half-filled "fifty-fifty" marker
    NOT_VULNERABLE = "NOT_VULNERABLE"
    NOT_APPLICABLE = "NOT_APPLICABLE"


OTP_PATTERN = re.compile(r"^\d+( \d+)*$")


def _ms(x: float) -> float:
    return round(float(x), 3)


@dataclass(frozen=True)
class AuthMethod:
    """One authentication method of a catalog.

    The optional presentation traits describe where the one-time code shows up
    and how the method behaves under repeated prompts; the simulator reads them.
    """

    id: str
    category: AuthCategory
    vendor: str
    supported_platforms: frozenset[PlatformKind]
    otp_location: Location | None = None
    otp_masked: bool = False
    exposes_device_details: bool = False
    admin_lockout: bool = False

    def supports(self, setting: "PlatformSetting") -> bool:
        if setting.kind is SettingKind.CONCURRENT:
            return bool(self.supported_platforms)
        return PlatformKind(setting.kind.value) in self.supported_platforms


@dataclass(frozen=True)
class PlatformSetting:
    kind: SettingKind
    terminal_reader: str | None = None
    smartphone_reader: str | None = None

    def problems(self) -> list[str]:
        need_t = self.kind in (SettingKind.TERMINAL, SettingKind.CONCURRENT)
        need_s = self.kind in (SettingKind.SMARTPHONE, SettingKind.CONCURRENT)
        out = []
        if need_t and not self.terminal_reader:
            out.append(f"setting {self.kind.value} requires terminal_reader")
        if not need_t and self.terminal_reader:
            out.append(f"setting {self.kind.value} forbids terminal_reader")
        if need_s and not self.smartphone_reader:
            out.append(f"setting {self.kind.value} requires smartphone_reader")
        if not need_s and self.smartphone_reader:
            out.append(f"setting {self.kind.value} forbids smartphone_reader")
        return out

    @property
    def readers(self) -> tuple[str, ...]:
        return tuple(r for r in (self.terminal_reader, self.smartphone_reader) if r)

    @property
    def label(self) -> str:
        return "+".join(self.readers) or self.kind.value


@dataclass(frozen=True)
class ScreenReaderProfile:
    id: str
    platform: PlatformKind
    reads_outside_browser: bool
    reads_security_prompts: PromptReading
    reads_service_name_in_prompt: bool
    overlay_handling: OverlayHandling
    notification_ordering: NotificationOrdering
    otp_pronunciation: OtpStyle
    default_speech_rate_pct: int = 50
    # per-method exceptions to otp_pronunciation, kept sorted by method id
    otp_pronunciation_overrides: tuple[tuple[str, OtpStyle], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "otp_pronunciation_overrides", tuple(sorted(self.otp_pronunciation_overrides))
        )

    def pronunciation_for(self, method_id: str) -> OtpStyle:
        return dict(self.otp_pronunciation_overrides).get(method_id, self.otp_pronunciation)


@dataclass(frozen=True)
class CriticalElement:
    kind: ElementKind
    text: str
    location: Location
    required: bool = True


@dataclass(frozen=True)
class WorkflowSpec:
    id: str
    method: str
    setting: PlatformSetting
    full_text: str
    elements: tuple[CriticalElement, ...] = ()
    verification_timeout_s: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    @property
    def otp_element(self) -> CriticalElement | None:
        return next((e for e in self.elements if e.kind is ElementKind.OTP), None)


@dataclass(frozen=True)
class TranscriptEvent:
    t_start_s: float
    t_end_s: float
    channel: Channel
    text: str
    # set when the event came from speech-to-text; None for hand-written sessions
    confidence: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "t_start_s", _ms(self.t_start_s))
        object.__setattr__(self, "t_end_s", _ms(self.t_end_s))

    @property
    def duration_s(self) -> float:
        return self.t_end_s - self.t_start_s


@dataclass(frozen=True)
class SessionRecord:
    id: str
    workflow: str
    setting: PlatformSetting
    speech_rate_pct: int = 50
    events: tuple[TranscriptEvent, ...] = ()
    headphones_on_terminal: bool = False
    headphones_on_smartphone: bool = False

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def sorted_events(self) -> "SessionRecord":
        # sorted() is stable, which keeps tie order
        evs = tuple(sorted(self.events, key=lambda e: e.t_start_s))
        return SessionRecord(
            self.id, self.workflow, self.setting, self.speech_rate_pct, evs,
            self.headphones_on_terminal, self.headphones_on_smartphone,
        )


def full_transcript(session: SessionRecord) -> str:
    """Screen reader speech in timeline order, single-space separated."""
    return " ".join(e.text for e in session.events if e.channel is Channel.SCREEN_READER)


def validate_setting(setting: PlatformSetting, profiles: Mapping[str, ScreenReaderProfile] | None = None) -> list[str]:
    out = setting.problems()
    if profiles is None:
        return out
    for slot, rid, want in (
        ("terminal_reader", setting.terminal_reader, PlatformKind.TERMINAL),
        ("smartphone_reader", setting.smartphone_reader, PlatformKind.SMARTPHONE),
    ):
        if rid is None:
            continue
        prof = profiles.get(rid)
        if prof is None:
            out.append(f"{slot} {rid!r} is not a known profile")
        elif prof.platform is not want:
            out.append(f"{slot} {rid!r} is a {prof.platform.value} profile")
    return out


def validate_profile(profile: ScreenReaderProfile) -> list[str]:
    out = []
    if not profile.id:
        out.append("profile id is empty")
    if not 1 <= profile.default_speech_rate_pct <= 100:
        out.append(f"default_speech_rate_pct {profile.default_speech_rate_pct} outside [1,100]")
    return out


def validate_catalog(catalog: Iterable[AuthMethod]) -> list[str]:
    out, seen = [], set()
    for m in catalog:
        if not m.id:
            out.append("auth method with empty id")
        elif m.id in seen:
            out.append(f"duplicate auth method id {m.id!r}")
        seen.add(m.id)
        if not m.supported_platforms:
            out.append(f"auth method {m.id!r} has no supported platforms")
    return out


def validate_workflow(spec: WorkflowSpec, catalog: Iterable[AuthMethod]) -> list[str]:
    """Return human-readable invariant violations; an empty list means valid."""
    catalog = sorted(catalog, key=lambda m: m.id)
    out = validate_catalog(catalog)
    if not spec.id:
        out.append("workflow id is empty")
    out.extend(spec.setting.problems())
    by_id = {m.id: m for m in catalog}
    method = by_id.get(spec.method)
    if method is None:
        out.append(f"method {spec.method!r} not in catalog")
    elif not method.supports(spec.setting):
        out.append(f"method {spec.method!r} does not support setting {spec.setting.kind.value}")
    otps = 0
    for i, el in enumerate(spec.elements):
        name = f"element[{i}] {el.kind.value} {el.text!r}"
        if not el.text:
            out.append(f"element[{i}] {el.kind.value} has empty text")
            continue
        if el.kind is ElementKind.OTP:
            otps += 1
            if not OTP_PATTERN.match(el.text):
                out.append(f"{name} is not digits with single-space groups")
        if el.location is not Location.PHONE_CALL_AUDIO and el.text not in spec.full_text:
            out.append(f"{name} does not occur in full_text")
    if otps > 1:
        out.append(f"workflow has {otps} OTP elements, at most one allowed")
    if spec.verification_timeout_s is not None and spec.verification_timeout_s <= 0:
        out.append("verification_timeout_s must be positive")
    return out


def validate_session(session: SessionRecord) -> list[str]:
    out = []
    if not session.id:
        out.append("session id is empty")
    if not 1 <= session.speech_rate_pct <= 100:
        out.append(f"speech_rate_pct {session.speech_rate_pct} outside [1,100]")
    out.extend(session.setting.problems())
    prev = None
    for i, ev in enumerate(session.events):
        if ev.t_start_s < 0:
            out.append(f"event[{i}] starts before 0")
        if ev.t_end_s <= ev.t_start_s:
            out.append(f"event[{i}] t_end_s {ev.t_end_s} <= t_start_s {ev.t_start_s}")
        if not ev.text:
            out.append(f"event[{i}] has empty text")
        if ev.confidence is not None and not 0.0 <= ev.confidence <= 1.0:
            out.append(f"event[{i}] confidence outside [0,1]")
        if prev is not None and ev.t_start_s < prev:
            out.append(f"event[{i}] out of order")
        prev = ev.t_start_s
    return out


# -- JSON ------------------------------------------------------------------

def _get(d: Mapping[str, Any], key: str, ctx: str, default: Any = ...) -> Any:
    if not isinstance(d, Mapping):
        raise SchemaError(ctx or "<root>", "expected an object")
    if key not in d:
        if default is ...:
            raise SchemaError(f"{ctx}{key}", "missing required field")
        return default
    return d[key]


def _enum(cls, value, name):
    try:
        return cls(value)
    except ValueError:
        raise SchemaError(name, f"{value!r} is not one of {[m.value for m in cls]}") from None


def _typed(value, types, name):
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise SchemaError(name, f"expected {types}, got bool")
    if not isinstance(value, types):
        raise SchemaError(name, f"expected {getattr(types, '__name__', types)}, got {type(value).__name__}")
    return value


def setting_to_dict(s: PlatformSetting) -> dict:
    return {"kind": s.kind.value, "terminal_reader": s.terminal_reader, "smartphone_reader": s.smartphone_reader}


def setting_from_dict(d: Mapping[str, Any], ctx: str = "setting.") -> PlatformSetting:
    return PlatformSetting(
        kind=_enum(SettingKind, _get(d, "kind", ctx), ctx + "kind"),
        terminal_reader=_get(d, "terminal_reader", ctx, None),
        smartphone_reader=_get(d, "smartphone_reader", ctx, None),
    )


def method_to_dict(m: AuthMethod) -> dict:
    return {
        "id": m.id,
        "category": m.category.value,
        "vendor": m.vendor,
        "supported_platforms": sorted(p.value for p in m.supported_platforms),
        "otp_location": m.otp_location.value if m.otp_location else None,
        "otp_masked": m.otp_masked,
        "exposes_device_details": m.exposes_device_details,
        "admin_lockout": m.admin_lockout,
    }


def method_from_dict(d: Mapping[str, Any], ctx: str = "") -> AuthMethod:
    loc = _get(d, "otp_location", ctx, None)
    plats = _typed(_get(d, "supported_platforms", ctx), list, ctx + "supported_platforms")
    return AuthMethod(
        id=_typed(_get(d, "id", ctx), str, ctx + "id"),
        category=_enum(AuthCategory, _get(d, "category", ctx), ctx + "category"),
        vendor=_typed(_get(d, "vendor", ctx), str, ctx + "vendor"),
        supported_platforms=frozenset(_enum(PlatformKind, p, ctx + "supported_platforms") for p in plats),
        otp_location=_enum(Location, loc, ctx + "otp_location") if loc is not None else None,
        otp_masked=bool(_get(d, "otp_masked", ctx, False)),
        exposes_device_details=bool(_get(d, "exposes_device_details", ctx, False)),
        admin_lockout=bool(_get(d, "admin_lockout", ctx, False)),
    )


def catalog_to_dict(catalog: Iterable[AuthMethod]) -> dict:
    return {"methods": [method_to_dict(m) for m in catalog]}


def catalog_from_dict(d: Mapping[str, Any]) -> list[AuthMethod]:
    items = _typed(_get(d, "methods", ""), list, "methods")
    return [method_from_dict(m, f"methods[{i}].") for i, m in enumerate(items)]


def profile_to_dict(p: ScreenReaderProfile) -> dict:
    return {
        "id": p.id,
        "platform": p.platform.value,
        "reads_outside_browser": p.reads_outside_browser,
        "reads_security_prompts": p.reads_security_prompts.value,
        "reads_service_name_in_prompt": p.reads_service_name_in_prompt,
        "overlay_handling": p.overlay_handling.value,
        "notification_ordering": p.notification_ordering.value,
        "otp_pronunciation": p.otp_pronunciation.value,
        "default_speech_rate_pct": p.default_speech_rate_pct,
        "otp_pronunciation_overrides": {k: v.value for k, v in p.otp_pronunciation_overrides},
    }


def profile_from_dict(d: Mapping[str, Any], ctx: str = "") -> ScreenReaderProfile:
    overrides = _typed(_get(d, "otp_pronunciation_overrides", ctx, {}), dict, ctx + "otp_pronunciation_overrides")
    return ScreenReaderProfile(
        id=_typed(_get(d, "id", ctx), str, ctx + "id"),
        platform=_enum(PlatformKind, _get(d, "platform", ctx), ctx + "platform"),
        reads_outside_browser=_typed(_get(d, "reads_outside_browser", ctx), bool, ctx + "reads_outside_browser"),
        reads_security_prompts=_enum(PromptReading, _get(d, "reads_security_prompts", ctx), ctx + "reads_security_prompts"),
        reads_service_name_in_prompt=_typed(
            _get(d, "reads_service_name_in_prompt", ctx), bool, ctx + "reads_service_name_in_prompt"
        ),
        overlay_handling=_enum(OverlayHandling, _get(d, "overlay_handling", ctx), ctx + "overlay_handling"),
        notification_ordering=_enum(
            NotificationOrdering, _get(d, "notification_ordering", ctx), ctx + "notification_ordering"
        ),
        otp_pronunciation=_enum(OtpStyle, _get(d, "otp_pronunciation", ctx), ctx + "otp_pronunciation"),
        default_speech_rate_pct=_typed(_get(d, "default_speech_rate_pct", ctx, 50), int, ctx + "default_speech_rate_pct"),
        otp_pronunciation_overrides=tuple(
            (k, _enum(OtpStyle, v, f"{ctx}otp_pronunciation_overrides.{k}")) for k, v in overrides.items()
        ),
    )


def element_to_dict(e: CriticalElement) -> dict:
    return {"kind": e.kind.value, "text": e.text, "location": e.location.value, "required": e.required}


def element_from_dict(d: Mapping[str, Any], ctx: str) -> CriticalElement:
    return CriticalElement(
        kind=_enum(ElementKind, _get(d, "kind", ctx), ctx + "kind"),
        text=_typed(_get(d, "text", ctx), str, ctx + "text"),
        location=_enum(Location, _get(d, "location", ctx), ctx + "location"),
        required=_typed(_get(d, "required", ctx, True), bool, ctx + "required"),
    )


def workflow_to_dict(w: WorkflowSpec) -> dict:
    return {
        "id": w.id,
        "method": w.method,
        "setting": setting_to_dict(w.setting),
        "full_text": w.full_text,
        "elements": [element_to_dict(e) for e in w.elements],
        "verification_timeout_s": w.verification_timeout_s,
    }


def workflow_from_dict(d: Mapping[str, Any]) -> WorkflowSpec:
    els = _typed(_get(d, "elements", "", []), list, "elements")
    timeout = _get(d, "verification_timeout_s", "", None)
    if timeout is not None:
        timeout = float(_typed(timeout, (int, float), "verification_timeout_s"))
    return WorkflowSpec(
        id=_typed(_get(d, "id", ""), str, "id"),
        method=_typed(_get(d, "method", ""), str, "method"),
        setting=setting_from_dict(_get(d, "setting", "")),
        full_text=_typed(_get(d, "full_text", ""), str, "full_text"),
        elements=tuple(element_from_dict(e, f"elements[{i}].") for i, e in enumerate(els)),
        verification_timeout_s=timeout,
    )


def event_to_dict(e: TranscriptEvent) -> dict:
    d = {"t_start_s": e.t_start_s, "t_end_s": e.t_end_s, "channel": e.channel.value, "text": e.text}
    if e.confidence is not None:
        d["confidence"] = e.confidence
    return d


def event_from_dict(d: Mapping[str, Any], ctx: str) -> TranscriptEvent:
    conf = _get(d, "confidence", ctx, None)
    return TranscriptEvent(
        t_start_s=_typed(_get(d, "t_start_s", ctx), (int, float), ctx + "t_start_s"),
        t_end_s=_typed(_get(d, "t_end_s", ctx), (int, float), ctx + "t_end_s"),
        channel=_enum(Channel, _get(d, "channel", ctx), ctx + "channel"),
        text=_typed(_get(d, "text", ctx), str, ctx + "text"),
        confidence=float(conf) if conf is not None else None,
    )


def session_to_dict(s: SessionRecord) -> dict:
    return {
        "id": s.id,
        "workflow": s.workflow,
        "setting": setting_to_dict(s.setting),
        "speech_rate_pct": s.speech_rate_pct,
        "events": [event_to_dict(e) for e in s.events],
        "headphones_on_terminal": s.headphones_on_terminal,
        "headphones_on_smartphone": s.headphones_on_smartphone,
    }


def session_from_dict(d: Mapping[str, Any]) -> SessionRecord:
    evs = _typed(_get(d, "events", ""), list, "events")
    return SessionRecord(
        id=_typed(_get(d, "id", ""), str, "id"),
        workflow=_typed(_get(d, "workflow", ""), str, "workflow"),
        setting=setting_from_dict(_get(d, "setting", "")),
        speech_rate_pct=_typed(_get(d, "speech_rate_pct", "", 50), int, "speech_rate_pct"),
        events=tuple(event_from_dict(e, f"events[{i}].") for i, e in enumerate(evs)),
        headphones_on_terminal=_typed(_get(d, "headphones_on_terminal", "", False), bool, "headphones_on_terminal"),
        headphones_on_smartphone=_typed(
            _get(d, "headphones_on_smartphone", "", False), bool, "headphones_on_smartphone"
        ),
    )
