"""Deterministic discrete-event simulation of attacks on screen reader assisted logins.

Flows are modelled at the level of what gets announced and what the modelled
user decides. The user acts only on announced content: a prompt is accepted as
legitimate unless the reader announces a detail that tells it apart.

Attacker timing is fixed by ``SimConfig``; the seeded RNG only breaks ties
between events scheduled for the same instant.
"""
from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping

from .model import (
    AuthCategory,
    AuthMethod,
    Location,
    NotificationOrdering,
    OtpStyle,
    OverlayHandling,
    PlatformKind,
    PlatformSetting,
    PromptReading,
    ScreenReaderProfile,
    SettingKind,
    Verdict,
    validate_setting,
)
from .phonetics import DEFAULT_THRESHOLD, spoken_similarity


class AttackKind(str, Enum):
    PHISHING_RELAY = "PHISHING_RELAY"
    CONCURRENT_LOGIN = "CONCURRENT_LOGIN"
    NOTIFICATION_FATIGUE = "NOTIFICATION_FATIGUE"
    SHOULDER_SURF_OTP = "SHOULDER_SURF_OTP"
    DISPLAY_OVERLAY = "DISPLAY_OVERLAY"
    CROSS_SERVICE = "CROSS_SERVICE"
    DOWNGRADE = "DOWNGRADE"
    MIS_REGISTRATION = "MIS_REGISTRATION"


_OTP = (AuthCategory.OTP_TEXT, AuthCategory.OTP_CALL, AuthCategory.OTP_AUTHENTICATOR)
_PUSH = (AuthCategory.PUSH, AuthCategory.PUSH_SELECT_CONFIRM)
_FIDO = (AuthCategory.FIDO_MFA,)

# which method categories each attack is defined for
APPLICABLE: dict[AttackKind, tuple[AuthCategory, ...]] = {
    AttackKind.PHISHING_RELAY: _OTP + _PUSH + _FIDO,
    AttackKind.CONCURRENT_LOGIN: _PUSH,
    AttackKind.NOTIFICATION_FATIGUE: _PUSH,
    AttackKind.SHOULDER_SURF_OTP: _OTP + _PUSH,
    AttackKind.DISPLAY_OVERLAY: _FIDO,
    AttackKind.CROSS_SERVICE: _FIDO,
    AttackKind.DOWNGRADE: _FIDO,
    AttackKind.MIS_REGISTRATION: _FIDO,
}


def is_applicable(attack: AttackKind, category: AuthCategory) -> bool:
    return category in APPLICABLE[attack]


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    fatigue_interval_s: float = 30.0
    fatigue_rounds: int = 20
    # only methods whose catalog entry has admin_lockout honour this
    admin_lockout_threshold: int | None = 5
    exhaustion_threshold: int = 10
    concurrency_skew_s: float = 1.0
    rng_seed: int = 0
    # in the concurrent setting one pair of headphones goes on this device
    concurrent_headphones_on: PlatformKind = PlatformKind.TERMINAL
    lure_domain: str = "bankoffamerica.com"
    trusted_domain: str = "bankofamerica.com"
    lookalike_threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if self.fatigue_interval_s <= 0:
            raise ValueError("fatigue_interval_s must be positive")
        if self.fatigue_rounds < 1:
            raise ValueError("fatigue_rounds must be a positive integer")
        if self.admin_lockout_threshold is not None and self.admin_lockout_threshold < 1:
            raise ValueError("admin_lockout_threshold must be a positive integer or None")
        if self.exhaustion_threshold < 1:
            raise ValueError("exhaustion_threshold must be a positive integer")
        if self.concurrency_skew_s < 0:
            raise ValueError("concurrency_skew_s must be >= 0")
        object.__setattr__(self, "concurrent_headphones_on", PlatformKind(self.concurrent_headphones_on))


@dataclass(frozen=True)
class AttackOutcome:
    attack: AttackKind
    method: str
    setting: SettingKind
    terminal_reader: str | None
    smartphone_reader: str | None
    verdict: Verdict
    trace: tuple[str, ...] = ()
    rounds_elapsed: int = 0

    @property
    def key(self) -> tuple[str, str, str, str, str]:
        return (self.method, self.setting.value, self.terminal_reader or "",
                self.smartphone_reader or "", self.attack.value)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "setting": self.setting.value,
            "terminal_reader": self.terminal_reader,
            "smartphone_reader": self.smartphone_reader,
            "attack": self.attack.value,
            "verdict": self.verdict.value,
            "rounds_elapsed": self.rounds_elapsed,
            "trace": list(self.trace),
        }


class _Clock:
    """Minimal event queue; simultaneous events are ordered by a seeded draw."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.queue: list = []
        self.seq = 0
        self.now = 0.0
        self.trace: list[str] = []
        self.stopped = False

    def at(self, t: float, fn: Callable, *args) -> None:
        heapq.heappush(self.queue, (t, self.rng.random(), self.seq, fn, args))
        self.seq += 1

    def log(self, who: str, what: str) -> None:
        self.trace.append(f"t={self.now:.3f} {who}: {what}")

    def run(self) -> None:
        while self.queue and not self.stopped:
            t, _, _, fn, args = heapq.heappop(self.queue)
            self.now = t
            fn(*args)


@dataclass
class ModeledUser:
    """Acts on what the reader announces, in the reader's notification order."""

    ordering: NotificationOrdering
    queue: list[str] = field(default_factory=list)
    denials: int = 0

    def receive(self, item: str) -> None:
        if self.ordering is NotificationOrdering.NEWEST_OVERRIDES:
            self.queue.insert(0, item)
        else:
            self.queue.append(item)

    def announced(self) -> str | None:
        return self.queue[0] if self.queue else None

    def dismiss(self, item: str) -> None:
        self.queue.remove(item)


def _reader(profiles: Mapping[str, ScreenReaderProfile], rid: str | None) -> ScreenReaderProfile | None:
    if rid is None:
        return None
    try:
        return profiles[rid]
    except KeyError:
        raise SimulationError(f"unknown profile id {rid!r}") from None


def _push_reader(setting, t_prof, s_prof):
    return s_prof if s_prof is not None else t_prof


def _otp_device(method: AuthMethod, setting: PlatformSetting) -> PlatformKind:
    """Device whose reader speaks the one-time code."""
    if method.category in (AuthCategory.OTP_TEXT, AuthCategory.OTP_CALL):
        return PlatformKind.SMARTPHONE
    if setting.kind is SettingKind.TERMINAL:
        return PlatformKind.TERMINAL
    if setting.kind is SettingKind.SMARTPHONE:
        return PlatformKind.SMARTPHONE
    if PlatformKind.SMARTPHONE in method.supported_platforms:
        return PlatformKind.SMARTPHONE
    return PlatformKind.TERMINAL


def _fido_reader(setting, t_prof, s_prof):
    return t_prof if t_prof is not None else s_prof


def otp_gate(method: AuthMethod, reader: ScreenReaderProfile) -> tuple[str, str]:
    """Can the user get the code from this reader? Returns (gate, reason).

    gate is one of "blocked", "degraded", "clean".
    """
    if method.otp_location is Location.OUTSIDE_BROWSER and not reader.reads_outside_browser:
        return "blocked", f"{reader.id} cannot read the code outside the browser (UCEOB)"
    if method.otp_masked:
        return "blocked", f"{method.id} masks the code; {reader.id} cannot speak it (UCO)"
    if method.category is AuthCategory.OTP_CALL:
        return "blocked", f"call audio collides with {reader.id} speech (CBI)"
    style = reader.pronunciation_for(method.id)
    if style is OtpStyle.HIDDEN:
        return "blocked", f"{reader.id} does not speak the code (UCO)"
    if style in (OtpStyle.NUMERIC_WHOLE, OtpStyle.NUMERIC_GROUPED):
        return "degraded", f"{reader.id} speaks the code as numbers (NPO)"
    return "clean", f"{reader.id} speaks the code digit by digit"


def _lure_passes(clock: _Clock, config: SimConfig) -> bool:
    sim = spoken_similarity(config.lure_domain, config.trusted_domain)
    passes = sim >= config.lookalike_threshold
    clock.log("reader", f"announces lure {config.lure_domain!r}; spoken similarity to "
                        f"{config.trusted_domain!r} = {sim:.3f}")
    clock.log("user", "takes the lure for the trusted site" if passes else "hears the difference")
    return passes


# -- attack procedures ---------------------------------------------------------

def _concurrent_login(clock, method, setting, t_prof, s_prof, config):
    reader = _push_reader(setting, t_prof, s_prof)
    user = ModeledUser(reader.notification_ordering)
    skew = config.concurrency_skew_s
    # the attacker times its request to land where the reader announces first
    attacker_after = reader.notification_ordering is NotificationOrdering.NEWEST_OVERRIDES
    t_victim, t_attacker = (0.0, skew) if attacker_after else (skew, 0.0)
    result = {}

    def arrive(who):
        clock.log("server", f"push for {who}'s login delivered to victim phone")
        user.receive(who)

    def decide():
        top = user.announced()
        clock.log("reader", f"{reader.id} announces top notification ({reader.notification_ordering.value})")
        if top == "victim":
            clock.log("user", "approves own login; attacker request left pending and expires")
            result["v"] = Verdict.NOT_VULNERABLE
        elif reader.reads_service_name_in_prompt and method.exposes_device_details:
            clock.log("reader", "announces requesting device and city")
            clock.log("user", "may notice the foreign device details; outcome depends on the user")
            result["v"] = Verdict.PARTIAL
        else:
            what = "select-confirm options" if method.category is AuthCategory.PUSH_SELECT_CONFIRM else "approve prompt"
            clock.log("user", f"hears no distinguishing detail; accepts attacker's {what}")
            result["v"] = Verdict.VULNERABLE

    clock.log("scenario", f"victim login at t={t_victim:.3f}, attacker login at t={t_attacker:.3f}")
    clock.at(t_victim, arrive, "victim")
    clock.at(t_attacker, arrive, "attacker")
    clock.at(max(t_victim, t_attacker) + 0.5, decide)
    clock.run()
    return result["v"], 1


def _fatigue(clock, method, setting, t_prof, s_prof, config):
    reader = _push_reader(setting, t_prof, s_prof)
    user = ModeledUser(reader.notification_ordering)
    lockout = config.admin_lockout_threshold if method.admin_lockout else None
    state = {"v": Verdict.NOT_VULNERABLE, "rounds": 0, "select_confirm": method.category is AuthCategory.PUSH_SELECT_CONFIRM}

    def push(k):
        state["rounds"] = k + 1
        label = f"attacker push #{k + 1}"
        user.receive(label)
        top = user.announced()
        kind = "select-confirm" if state["select_confirm"] else "approve/deny"
        clock.log("reader", f"{reader.id} announces {top} ({kind})")
        if user.denials >= config.exhaustion_threshold:
            clock.log("user", f"exhausted after {user.denials} denials; approves")
            state["v"] = Verdict.VULNERABLE
            clock.stopped = True
            return
        clock.log("user", "denies")
        user.dismiss(top)
        user.denials += 1
        if state["select_confirm"]:
            state["select_confirm"] = False
            clock.log("server", "falls back to plain approve/deny prompts")
        if lockout is not None and user.denials >= lockout:
            clock.log("server", f"admin lockout after {user.denials} denials; account locked")
            state["v"] = Verdict.PARTIAL
            clock.stopped = True

    for k in range(config.fatigue_rounds):
        clock.at(k * config.fatigue_interval_s, push, k)
    clock.run()
    if state["v"] is Verdict.NOT_VULNERABLE:
        clock.log("attacker", f"gives up after {state['rounds']} pushes")
    return state["v"], state["rounds"]


def _shoulder_surf(clock, method, setting, t_prof, s_prof, config):
    if method.category in _PUSH:
        clock.log("scenario", "push approval carries no spoken secret to overhear")
        return Verdict.NOT_VULNERABLE, 0
    device = _otp_device(method, setting)
    reader = s_prof if device is PlatformKind.SMARTPHONE else t_prof
    if setting.kind is SettingKind.CONCURRENT:
        headphones = {p: p is config.concurrent_headphones_on for p in PlatformKind}
    else:
        headphones = {p: p.value == setting.kind.value for p in PlatformKind}
    if method.category is AuthCategory.OTP_CALL:
        headphones[PlatformKind.SMARTPHONE] = False
    state = {}

    def victim_login():
        clock.log("victim", "requests login; OTP requested")

    def attacker_reset():
        clock.log("attacker", "triggers forgot-password for the victim's account")

    def deliver():
        clock.log("server", f"OTP delivered to {device.value.lower()}")
        if method.category is AuthCategory.OTP_CALL:
            clock.log("phone", "call audio collides with reader speech; headphones drop, loudspeaker on")
        for p in PlatformKind:
            if setting.kind is SettingKind.CONCURRENT or p.value == setting.kind.value:
                clock.log("device", f"{p.value.lower()} headphones {'on' if headphones[p] else 'off'}")
        gate, why = otp_gate(method, reader)
        spoken = not (gate == "blocked" and method.category is not AuthCategory.OTP_CALL)
        clock.log("reader", why)
        if not spoken:
            state["v"] = Verdict.NOT_VULNERABLE
            clock.log("attacker", "hears nothing useful")
        elif headphones[device]:
            state["v"] = Verdict.NOT_VULNERABLE
            clock.log("attacker", "code spoken into headphones; nothing overheard")
        else:
            state["v"] = Verdict.VULNERABLE
            clock.log("attacker", "overhears the code and completes the password reset")

    clock.at(0.0, victim_login)
    clock.at(0.0, attacker_reset)
    clock.at(config.concurrency_skew_s, deliver)
    clock.run()
    return state["v"], 1


def _phishing(clock, method, setting, t_prof, s_prof, config, stage="login"):
    if method.category in _PUSH:
        clock.log("scenario", "push approval has no code the phishing page could relay")
        return Verdict.NOT_VULNERABLE, 0
    if not _lure_passes(clock, config):
        return Verdict.NOT_VULNERABLE, 1
    if method.category in _FIDO:
        clock.log("user", f"completes FIDO {stage} on the lure; attacker relays it")
        return Verdict.VULNERABLE, 1
    device = _otp_device(method, setting)
    reader = s_prof if device is PlatformKind.SMARTPHONE else t_prof
    gate, why = otp_gate(method, reader)
    clock.log("reader", why)
    if gate == "blocked":
        clock.log("user", "cannot obtain the code; flow infeasible, nothing to relay")
        return Verdict.NOT_APPLICABLE, 1
    if gate == "degraded":
        clock.log("user", "may or may not transcribe the code correctly before relaying")
        return Verdict.PARTIAL, 1
    clock.log("user", "types the code into the lure; attacker relays it in real time")
    return Verdict.VULNERABLE, 1


def _overlay(clock, method, setting, t_prof, s_prof, config):
    reader = _fido_reader(setting, t_prof, s_prof)
    clock.log("attacker", "draws a false overlay over the authenticator prompt")
    if reader.overlay_handling is OverlayHandling.READS_OVERLAY:
        clock.log("reader", f"{reader.id} reads the overlay text")
        return Verdict.VULNERABLE, 1
    clock.log("reader", f"{reader.id} reads the real prompt beneath the overlay")
    return Verdict.NOT_VULNERABLE, 1


def _cross_service(clock, method, setting, t_prof, s_prof, config):
    reader = _fido_reader(setting, t_prof, s_prof)
    clock.log("attacker", "requests an assertion for a different service on the victim's key")
    if reader.reads_security_prompts is PromptReading.NONE:
        clock.log("reader", f"{reader.id} cannot read the OS security prompt")
        clock.log("user", "touches the key as instructed")
        return Verdict.VULNERABLE, 1
    if reader.reads_service_name_in_prompt:
        clock.log("reader", f"{reader.id} announces the requesting service name")
        clock.log("user", "notices the wrong service and cancels")
        return Verdict.NOT_VULNERABLE, 1
    clock.log("reader", f"{reader.id} reads the prompt without the service name")
    clock.log("user", "touches the key as instructed")
    return Verdict.VULNERABLE, 1


def _downgrade(clock, method, setting, t_prof, s_prof, config):
    reader = _fido_reader(setting, t_prof, s_prof)
    sim = spoken_similarity(config.lure_domain, config.trusted_domain)
    clock.log("reader", f"{reader.id} announces lure {config.lure_domain!r} (spoken similarity {sim:.3f})")
    clock.log("reader", f"{reader.id} reads the fake 'use another method' prompt like a real one")
    clock.log("user", "switches to a one-time code; attacker relays it")
    return Verdict.VULNERABLE, 1


_PROCEDURES = {
    AttackKind.CONCURRENT_LOGIN: _concurrent_login,
    AttackKind.NOTIFICATION_FATIGUE: _fatigue,
    AttackKind.SHOULDER_SURF_OTP: _shoulder_surf,
    AttackKind.PHISHING_RELAY: _phishing,
    AttackKind.MIS_REGISTRATION: lambda *a: _phishing(*a, stage="registration"),
    AttackKind.DISPLAY_OVERLAY: _overlay,
    AttackKind.CROSS_SERVICE: _cross_service,
    AttackKind.DOWNGRADE: _downgrade,
}


def run_attack(method: AuthMethod, setting: PlatformSetting, profiles: Mapping[str, ScreenReaderProfile],
               attack: AttackKind, config: SimConfig = SimConfig()) -> AttackOutcome:
    """Simulate one (method, setting, attack) cell."""
    attack = AttackKind(attack)
    problems = validate_setting(setting, profiles)
    if problems:
        unknown = [p for p in problems if "not a known profile" in p]
        raise SimulationError("; ".join(unknown or problems))
    if not method.supports(setting):
        raise SimulationError(f"method {method.id!r} does not support setting {setting.kind.value}")
    t_prof = _reader(profiles, setting.terminal_reader)
    s_prof = _reader(profiles, setting.smartphone_reader)

    def outcome(verdict, trace=(), rounds=0):
        return AttackOutcome(attack, method.id, setting.kind, setting.terminal_reader,
                             setting.smartphone_reader, verdict, tuple(trace), rounds)

    if not is_applicable(attack, method.category):
        return outcome(Verdict.NOT_APPLICABLE,
                       [f"{attack.value} is not defined for {method.category.value} methods"])
    if attack in (AttackKind.CONCURRENT_LOGIN, AttackKind.NOTIFICATION_FATIGUE) and s_prof is None:
        raise SimulationError(f"{attack.value} needs a smartphone reader for push delivery")
    clock = _Clock(config.rng_seed)
    verdict, rounds = _PROCEDURES[attack](clock, method, setting, t_prof, s_prof, config)
    return outcome(verdict, clock.trace, rounds)


def run_matrix(methods: Iterable[AuthMethod], settings: Iterable[PlatformSetting],
               profiles: Mapping[str, ScreenReaderProfile], attacks: Iterable[AttackKind],
               config: SimConfig = SimConfig()) -> list[AttackOutcome]:
    """Every supported, defined (method, setting, attack) cell in input order."""
    settings, attacks = list(settings), [AttackKind(a) for a in attacks]
    out = []
    for m in methods:
        for s in settings:
            if not m.supports(s):
                continue
            for a in attacks:
                if is_applicable(a, m.category):
                    out.append(run_attack(m, s, profiles, a, config))
    return out
