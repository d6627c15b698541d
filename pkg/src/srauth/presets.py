"""The curated reader profiles, method catalog and golden files shipped as package data."""
from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

from .ingest import load_catalog, load_profiles
from .model import AuthMethod, PlatformSetting, ScreenReaderProfile, SettingKind

DATA = Path(str(resources.files("srauth") / "data"))
PROFILE_DIR = DATA / "profiles"
CATALOG_PATH = DATA / "catalog.json"
GOLDEN_MATRIX = DATA / "golden_matrix.csv"
GOLDEN_COMMUNICABILITY = DATA / "golden_communicability.csv"
FIXTURE_WORKFLOWS = DATA / "fixtures" / "workflows"
FIXTURE_SESSIONS = DATA / "fixtures" / "sessions"

TERMINAL_READERS = ("JAWS", "NVDA", "Dolphin", "ChromeVox")
SMARTPHONE_READERS = ("VoiceOver", "Talkback")
CONCURRENT_PAIRS = (("JAWS", "VoiceOver"), ("NVDA", "Talkback"))


def catalog() -> list[AuthMethod]:
    return load_catalog(CATALOG_PATH)


def profiles(profile_dir: Path = PROFILE_DIR) -> dict[str, ScreenReaderProfile]:
    return load_profiles(sorted(Path(profile_dir).glob("*.json")))


def study_settings() -> list[PlatformSetting]:
    """The eight reader settings evaluated: four terminal, two phone, two concurrent pairs."""
    out = [PlatformSetting(SettingKind.TERMINAL, terminal_reader=r) for r in TERMINAL_READERS]
    out += [PlatformSetting(SettingKind.SMARTPHONE, smartphone_reader=r) for r in SMARTPHONE_READERS]
    out += [PlatformSetting(SettingKind.CONCURRENT, t, s) for t, s in CONCURRENT_PAIRS]
    return out


def read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def golden_matrix(path: Path = GOLDEN_MATRIX) -> list[dict[str, str]]:
    return read_csv(path)


def golden_communicability(path: Path = GOLDEN_COMMUNICABILITY) -> list[dict[str, str]]:
    return read_csv(path)
