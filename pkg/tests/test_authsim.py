import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srauth import presets
from srauth.authsim import (
    APPLICABLE,
    AttackKind,
    SimConfig,
    SimulationError,
    is_applicable,
    otp_gate,
    run_attack,
    run_matrix,
)
from srauth.model import AuthCategory, PlatformKind, PlatformSetting, SettingKind, Verdict

T = lambda r: PlatformSetting(SettingKind.TERMINAL, terminal_reader=r)  # noqa: E731
S = lambda r: PlatformSetting(SettingKind.SMARTPHONE, smartphone_reader=r)  # noqa: E731
C = lambda t, s: PlatformSetting(SettingKind.CONCURRENT, t, s)  # noqa: E731
V = Verdict


def cell(methods, profiles, mid, setting, attack, **cfg):
    return run_attack(methods[mid], setting, profiles, attack, SimConfig(**cfg))


@pytest.mark.parametrize("mid,setting,attack,verdict", [
    ("google_titan_fido", T("NVDA"), AttackKind.DISPLAY_OVERLAY, V.NOT_VULNERABLE),
    ("google_titan_fido", T("JAWS"), AttackKind.DISPLAY_OVERLAY, V.VULNERABLE),
    ("google_titan_fido", T("JAWS"), AttackKind.CROSS_SERVICE, V.VULNERABLE),
    ("google_titan_fido", T("NVDA"), AttackKind.CROSS_SERVICE, V.NOT_VULNERABLE),
    ("google_titan_fido", T("ChromeVox"), AttackKind.CROSS_SERVICE, V.VULNERABLE),
    ("google_titan_fido", T("NVDA"), AttackKind.DOWNGRADE, V.VULNERABLE),
    ("duo_push", S("Talkback"), AttackKind.NOTIFICATION_FATIGUE, V.PARTIAL),
    ("google_push", S("Talkback"), AttackKind.NOTIFICATION_FATIGUE, V.VULNERABLE),
    ("microsoft_select_confirm", S("VoiceOver"), AttackKind.NOTIFICATION_FATIGUE, V.VULNERABLE),
    ("google_otp_text", C("JAWS", "VoiceOver"), AttackKind.SHOULDER_SURF_OTP, V.VULNERABLE),
    ("gauth", T("JAWS"), AttackKind.PHISHING_RELAY, V.VULNERABLE),
    ("winauth", T("JAWS"), AttackKind.PHISHING_RELAY, V.NOT_APPLICABLE),
    ("authy", T("NVDA"), AttackKind.PHISHING_RELAY, V.PARTIAL),
])
def test_documented_cells(methods, profiles, mid, setting, attack, verdict):
    assert run_attack(methods[mid], setting, profiles, attack).verdict is verdict


def test_undefined_pairs_are_not_applicable(methods, profiles):
    out = cell(methods, profiles, "gauth", T("JAWS"), AttackKind.NOTIFICATION_FATIGUE)
    assert out.verdict is V.NOT_APPLICABLE
    out = cell(methods, profiles, "duo_push", S("VoiceOver"), AttackKind.DISPLAY_OVERLAY)
    assert out.verdict is V.NOT_APPLICABLE


def test_not_applicable_only_when_undefined_or_infeasible(profiles, catalog):
    for o in run_matrix(catalog, presets.study_settings(), profiles, list(AttackKind)):
        cat = next(m.category for m in catalog if m.id == o.method)
        assert is_applicable(o.attack, cat)
        if o.verdict is V.NOT_APPLICABLE:
            # defined pairs only go N/A when the code cannot be obtained at all
            assert o.attack in (AttackKind.PHISHING_RELAY, AttackKind.MIS_REGISTRATION)
            assert cat.is_otp


def test_errors(methods, profiles):
    with pytest.raises(SimulationError, match="Orca"):
        run_attack(methods["gauth"], T("Orca"), profiles, AttackKind.PHISHING_RELAY)
    with pytest.raises(SimulationError, match="does not support"):
        run_attack(methods["winauth"], S("VoiceOver"), profiles, AttackKind.PHISHING_RELAY)
    with pytest.raises(SimulationError):
        run_attack(methods["gauth"], PlatformSetting(SettingKind.TERMINAL, "VoiceOver"), profiles,
                   AttackKind.PHISHING_RELAY)


def test_config_validation():
    for bad in (dict(fatigue_interval_s=0), dict(fatigue_rounds=0), dict(admin_lockout_threshold=0),
                dict(exhaustion_threshold=0), dict(concurrency_skew_s=-1)):
        with pytest.raises(ValueError):
            SimConfig(**bad)


def test_fatigue_rounds_and_trace(methods, profiles):
    out = cell(methods, profiles, "google_push", S("VoiceOver"), AttackKind.NOTIFICATION_FATIGUE,
               exhaustion_threshold=3)
    assert out.verdict is V.VULNERABLE and out.rounds_elapsed == 4
    assert sum("denies" in line for line in out.trace) == 3
    assert out.trace[-1].startswith("t=90.000")


def test_fatigue_lockout_cases(methods, profiles):
    duo = lambda **kw: cell(methods, profiles, "duo_push", S("Talkback"),  # noqa: E731
                            AttackKind.NOTIFICATION_FATIGUE, **kw)
    assert duo().rounds_elapsed == 5
    assert duo(admin_lockout_threshold=None).verdict is V.VULNERABLE
    # exhaustion before lockout
    assert duo(admin_lockout_threshold=8, exhaustion_threshold=3).verdict is V.VULNERABLE
    # attacker runs out of rounds first
    assert duo(admin_lockout_threshold=None, fatigue_rounds=4).verdict is V.NOT_VULNERABLE


def test_select_confirm_falls_back(methods, profiles):
    out = cell(methods, profiles, "microsoft_select_confirm", S("VoiceOver"), AttackKind.NOTIFICATION_FATIGUE)
    assert "select-confirm" in out.trace[0]
    assert any("falls back" in line for line in out.trace)
    assert "approve/deny" in [line for line in out.trace if "announces" in line][1]


def test_concurrent_login(methods, profiles):
    assert cell(methods, profiles, "duo_push", S("VoiceOver"), AttackKind.CONCURRENT_LOGIN).verdict is V.VULNERABLE
    assert cell(methods, profiles, "google_push", C("NVDA", "Talkback"),
                AttackKind.CONCURRENT_LOGIN).verdict is V.VULNERABLE


def test_shoulder_surf_headphones(methods, profiles):
    m = "google_authenticator"
    assert cell(methods, profiles, m, T("JAWS"), AttackKind.SHOULDER_SURF_OTP).verdict is V.NOT_VULNERABLE
    assert cell(methods, profiles, m, S("VoiceOver"), AttackKind.SHOULDER_SURF_OTP).verdict is V.NOT_VULNERABLE
    assert cell(methods, profiles, m, C("JAWS", "VoiceOver"), AttackKind.SHOULDER_SURF_OTP).verdict is V.VULNERABLE
    # headphones on the phone instead leave the terminal open, but the code is spoken on the phone
    out = cell(methods, profiles, m, C("JAWS", "VoiceOver"), AttackKind.SHOULDER_SURF_OTP,
               concurrent_headphones_on=PlatformKind.SMARTPHONE)
    assert out.verdict is V.NOT_VULNERABLE
    assert cell(methods, profiles, "google_otp_call", S("VoiceOver"),
                AttackKind.SHOULDER_SURF_OTP).verdict is V.VULNERABLE


def test_concurrent_trace_has_device_without_headphones(methods, profiles, catalog):
    concurrent = [C(*p) for p in presets.CONCURRENT_PAIRS]
    for o in run_matrix(catalog, concurrent, profiles, [AttackKind.SHOULDER_SURF_OTP]):
        if o.verdict is V.NOT_APPLICABLE or not any("headphones" in t for t in o.trace):
            continue
        assert any("headphones off" in t for t in o.trace)


def test_otp_gate(methods, profiles):
    assert otp_gate(methods["winauth"], profiles["JAWS"])[0] == "blocked"
    assert otp_gate(methods["authy"], profiles["ChromeVox"])[0] == "blocked"
    assert otp_gate(methods["authy"], profiles["JAWS"])[0] == "degraded"
    assert otp_gate(methods["gauth"], profiles["JAWS"])[0] == "clean"


def test_lure_gate(methods, profiles):
    far = cell(methods, profiles, "gauth", T("JAWS"), AttackKind.PHISHING_RELAY, lure_domain="evil.example")
    assert far.verdict is V.NOT_VULNERABLE


def test_run_matrix_shapes(methods, profiles):
    assert run_matrix(list(methods.values()), presets.study_settings(), profiles, []) == []
    one = run_matrix([methods["gauth"]], [T("JAWS")], profiles, [AttackKind.PHISHING_RELAY])
    assert one == [run_attack(methods["gauth"], T("JAWS"), profiles, AttackKind.PHISHING_RELAY)]


def test_applicability_table():
    assert set(APPLICABLE) == set(AttackKind)
    assert not is_applicable(AttackKind.NOTIFICATION_FATIGUE, AuthCategory.OTP_AUTHENTICATOR)


def test_golden_matrix(catalog, profiles):
    from srauth.report import compare_golden
    out = run_matrix(catalog, presets.study_settings(), profiles, list(AttackKind))
    assert compare_golden(out, presets.golden_matrix()) == []


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_deterministic_given_seed(seed):
    cfg = SimConfig(rng_seed=seed)
    cat, profs, sets = presets.catalog(), presets.profiles(), presets.study_settings()
    a = run_matrix(cat, sets, profs, list(AttackKind), cfg)
    b = run_matrix(cat, sets, profs, list(AttackKind), cfg)
    assert a == b


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 30), st.none() | st.integers(1, 30))
def test_fatigue_monotone_in_exhaustion(lo, extra, rounds, lockout):
    profs, cat = presets.profiles(), presets.catalog()
    pushes = [m for m in cat if m.category.is_push]
    for m in pushes:
        a = run_attack(m, S("Talkback"), profs, AttackKind.NOTIFICATION_FATIGUE,
                       SimConfig(exhaustion_threshold=lo, fatigue_rounds=rounds, admin_lockout_threshold=lockout))
        b = run_attack(m, S("Talkback"), profs, AttackKind.NOTIFICATION_FATIGUE,
                       SimConfig(exhaustion_threshold=lo + extra, fatigue_rounds=rounds,
                                 admin_lockout_threshold=lockout))
        if a.verdict is V.NOT_VULNERABLE:
            assert b.verdict is not V.VULNERABLE


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 30))
def test_removing_lockout_never_yields_partial_from_vulnerable(ex, rounds, lockout):
    profs, cat = presets.profiles(), presets.catalog()
    for m in (m for m in cat if m.category.is_push):
        cfg = SimConfig(exhaustion_threshold=ex, fatigue_rounds=rounds, admin_lockout_threshold=lockout)
        a = run_attack(m, S("VoiceOver"), profs, AttackKind.NOTIFICATION_FATIGUE, cfg)
        b = run_attack(m, S("VoiceOver"), profs, AttackKind.NOTIFICATION_FATIGUE,
                       dataclasses.replace(cfg, admin_lockout_threshold=None))
        if a.verdict is V.VULNERABLE:
            assert b.verdict is V.VULNERABLE
