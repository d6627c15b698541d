"""Command line entry point: validate, transcribe, analyze, simulate, phish.

Exit codes: 0 success, 1 internal or input error, 2 findings present,
64 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, fields, replace
from datetime import datetime, timezone
from pathlib import Path

from . import presets
from .authsim import AttackKind, SimConfig, SimulationError, run_matrix
from .ingest import (
    EmptyTranscriptError,
    HttpBackend,
    IngestError,
    ReplayBackend,
    TransportError,
    load_catalog,
    load_profiles,
    load_session,
    load_workflow,
    transcribe_session,
)
from .issues import AnalysisError, AnalyzerConfig, analyze
from .model import (
    Channel,
    PlatformSetting,
    SchemaError,
    SettingKind,
    session_to_dict,
    setting_from_dict,
    validate_setting,
)
from .phonetics import DEFAULT_THRESHOLD, DomainError, flag_lookalikes, read_trusted_list
from .report import (
    EXTENSIONS,
    FORMATS,
    communicability_cells,
    compare_golden,
    comprehensibility_cells,
    dumps_json,
    render_method_reader_matrix,
    render_outcomes,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("srauth")

EXIT_OK, EXIT_ERROR, EXIT_FINDINGS, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    workflow_dir: Path | None = None
    session_dir: Path | None = None
    profile_dir: Path = presets.PROFILE_DIR
    catalog: Path = presets.CATALOG_PATH
    output_dir: Path = Path("out")
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    stt_backend: str = "replay"
    stt_endpoint: str | None = None
    stt_timeout_s: float = 60.0
    confidence_floor: float = 0.0
    formats: tuple[str, ...] = FORMATS

    def check(self) -> None:
        for name in ("workflow_dir", "session_dir", "profile_dir"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_dir():
                raise UsageError(f"{name} {p} is not a directory")
        if not Path(self.catalog).is_file():
            raise UsageError(f"catalog {self.catalog} not found")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise UsageError(f"unknown format(s) {bad}; choose from {list(FORMATS)}")
        if self.stt_backend not in ("replay", "http"):
            raise UsageError(f"stt backend must be replay or http, not {self.stt_backend!r}")
        if not 0.0 <= self.confidence_floor <= 1.0:
            raise UsageError("confidence_floor must be in [0, 1]")


def _section(doc: dict, cls, name: str):
    raw = doc.get(name, {})
    known = {f.name for f in fields(cls)}
    extra = set(raw) - known
    if extra:
        raise UsageError(f"unknown key(s) in [{name}]: {sorted(extra)}")
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"[{name}]: {exc}") from None


def load_config(path: Path | None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    try:
        doc = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    paths = doc.get("paths", {})
    for key in ("workflow_dir", "session_dir", "profile_dir", "catalog", "output_dir"):
        if key in paths:
            setattr(cfg, key, Path(path).parent / paths[key])
    cfg.analyzer = _section(doc, AnalyzerConfig, "analyzer")
    cfg.sim = _section(doc, SimConfig, "sim")
    stt = doc.get("stt", {})
    cfg.stt_backend = stt.get("backend", cfg.stt_backend)
    cfg.stt_endpoint = stt.get("endpoint", cfg.stt_endpoint)
    cfg.stt_timeout_s = float(stt.get("timeout_s", cfg.stt_timeout_s))
    cfg.confidence_floor = float(stt.get("confidence_floor", cfg.confidence_floor))
    if "formats" in doc:
        cfg.formats = tuple(doc["formats"])
    return cfg


class Writer:
    """Collects output files and writes them in one go, in a stable order."""

    def __init__(self, out_dir: Path, deterministic: bool):
        self.out_dir = Path(out_dir)
        self.deterministic = deterministic
        self.files: dict[Path, str] = {}

    def stamp(self, doc: dict) -> dict:
        if not self.deterministic:
            doc = {**doc, "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds")}
        return doc

    def add(self, sub: str, name: str, text: str) -> None:
        self.files[self.out_dir / sub / name] = text

    def flush(self) -> list[Path]:
        for path in sorted(self.files):
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(self.files[path], encoding="utf-8")
        return sorted(self.files)


def _json_files(items: list[str] | None, default_dir: Path | None) -> list[Path]:
    out = []
    for item in items or ([str(default_dir)] if default_dir else []):
        p = Path(item)
        if p.is_dir():
            out += sorted(p.glob("*.json"))
        elif p.exists():
            out.append(p)
        else:
            raise UsageError(f"{p} does not exist")
    return out


def _report_error(exc: Exception) -> None:
    print(f"error: {exc}", file=sys.stderr)


# -- commands -----------------------------------------------------------------

def cmd_validate(args, cfg: RunConfig) -> int:
    catalog = load_catalog(cfg.catalog)
    bad = 0
    try:
        profiles = load_profiles(_json_files(args.profiles, cfg.profile_dir))
    except IngestError as exc:
        _report_error(exc)
        return EXIT_FINDINGS
    for p in _json_files(args.workflows, cfg.workflow_dir):
        try:
            w = load_workflow(p, catalog)
            problems = validate_setting(w.setting, profiles)
            if problems:
                raise IngestError(p, "; ".join(problems))
            print(f"ok\t{p}")
        except IngestError as exc:
            bad += 1
            _report_error(exc)
    for p in _json_files(args.sessions, cfg.session_dir):
        try:
            load_session(p)
            print(f"ok\t{p}")
        except IngestError as exc:
            bad += 1
            _report_error(exc)
    return EXIT_FINDINGS if bad else EXIT_OK


def _session_reader(session, profiles):
    rid = session.setting.terminal_reader or session.setting.smartphone_reader
    if rid not in profiles:
        raise AnalysisError(f"session {session.id!r}: unknown profile id {rid!r}")
    return profiles[rid]


def cmd_analyze(args, cfg: RunConfig) -> int:
    catalog = load_catalog(cfg.catalog)
    profiles = load_profiles(_json_files(args.profiles, cfg.profile_dir))
    errors = 0
    workflows = {}
    for p in _json_files(args.workflows, cfg.workflow_dir):
        try:
            w = load_workflow(p, catalog)
            workflows[w.id] = w
        except IngestError as exc:
            errors += 1
            _report_error(exc)
            if args.strict:
                return EXIT_ERROR
    reports = []
    for p in _json_files(args.sessions, cfg.session_dir):
        try:
            session = load_session(p)
            if session.workflow not in workflows:
                raise AnalysisError(f"{p}: workflow {session.workflow!r} not loaded")
            reports.append(analyze(session, workflows[session.workflow], _session_reader(session, profiles),
                                   cfg.analyzer))
            log.info("analyzed %s", p)
        except (IngestError, AnalysisError) as exc:
            errors += 1
            _report_error(exc)
            if args.strict:
                return EXIT_ERROR
    reports.sort(key=lambda r: r.session_id)

    out = Writer(cfg.output_dir, args.deterministic)
    for r in reports:
        out.add("reports", f"{r.session_id}.json", dumps_json(out.stamp(r.to_dict())))
    comm, comp = communicability_cells(reports), comprehensibility_cells(reports)
    for fmt in cfg.formats:
        ext = EXTENSIONS[fmt]
        for name, cells, title in (("communicability", comm, "Communicability issues"),
                                   ("comprehensibility", comp, "Comprehensibility")):
            text = render_method_reader_matrix(cells, fmt, title)
            if fmt == "json":
                text = dumps_json(out.stamp(json.loads(text)))
            out.add("matrices", f"{name}.{ext}", text)
    out.flush()

    for r in reports:
        print(f"{r.session_id}\t{r.method}\t{r.reader}\t{' '.join(r.codes) or '-'}\t{r.comprehensibility.percent}")
    if errors:
        return EXIT_ERROR
    return EXIT_FINDINGS if any(r.findings for r in reports) else EXIT_OK


def _settings_from_args(args, profiles) -> list[PlatformSetting]:
    if not (args.setting or args.terminal_reader or args.smartphone_reader):
        return presets.study_settings()
    kind = SettingKind(args.setting) if args.setting else (
        SettingKind.CONCURRENT if args.terminal_reader and args.smartphone_reader
        else SettingKind.TERMINAL if args.terminal_reader else SettingKind.SMARTPHONE)
    if kind is SettingKind.CONCURRENT:
        pairs = [(args.terminal_reader, args.smartphone_reader)] if args.terminal_reader else list(presets.CONCURRENT_PAIRS)
        settings = [PlatformSetting(kind, t, s) for t, s in pairs]
    elif kind is SettingKind.TERMINAL:
        readers = [args.terminal_reader] if args.terminal_reader else presets.TERMINAL_READERS
        settings = [PlatformSetting(kind, terminal_reader=r) for r in readers]
    else:
        readers = [args.smartphone_reader] if args.smartphone_reader else presets.SMARTPHONE_READERS
        settings = [PlatformSetting(kind, smartphone_reader=r) for r in readers]
    for s in settings:
        problems = validate_setting(s, profiles)
        if problems:
            raise UsageError("; ".join(problems))
    return settings


def cmd_simulate(args, cfg: RunConfig) -> int:
    catalog = load_catalog(cfg.catalog)
    profiles = load_profiles(_json_files(args.profiles, cfg.profile_dir))
    by_id = {m.id: m for m in catalog}
    methods = catalog
    if args.method:
        unknown = [m for m in args.method if m not in by_id]
        if unknown:
            raise UsageError(f"unknown method id(s) {unknown}")
        methods = [by_id[m] for m in args.method]
    try:
        attacks = [AttackKind(a) for a in args.attack] if args.attack else list(AttackKind)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    settings = _settings_from_args(args, profiles)
    sim = cfg.sim
    if args.seed is not None:
        sim = replace(sim, rng_seed=args.seed)
    try:
        outcomes = run_matrix(methods, settings, profiles, attacks, sim)
    except SimulationError as exc:
        raise UsageError(str(exc)) from None

    out = Writer(cfg.output_dir, args.deterministic)
    for fmt in cfg.formats:
        text = render_outcomes(outcomes, fmt)
        if fmt == "json":
            text = dumps_json(out.stamp({"config": _sim_dict(sim), "outcomes": json.loads(text)}))
        out.add("matrices", f"verdicts.{EXTENSIONS[fmt]}", text)
    out.flush()
    print(f"{len(outcomes)} cells simulated", file=sys.stderr)
    if args.golden:
        golden = presets.read_csv(Path(args.golden))
        problems = compare_golden(outcomes, golden)
        for p in problems:
            print(f"golden mismatch: {p}")
        print(f"golden: {len(golden) - len(problems)}/{len(golden)} cells match", file=sys.stderr)
        return EXIT_FINDINGS if problems else EXIT_OK
    return EXIT_OK


def _sim_dict(sim: SimConfig) -> dict:
    d = {f.name: getattr(sim, f.name) for f in fields(sim)}
    d["concurrent_headphones_on"] = sim.concurrent_headphones_on.value
    return d


def cmd_phish(args, cfg: RunConfig) -> int:
    try:
        text = Path(args.trusted).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read trusted list {args.trusted}: {exc.strerror}") from None
    trusted = read_trusted_list(text)
    if not trusted:
        raise UsageError(f"trusted list {args.trusted} is empty")
    try:
        flags = flag_lookalikes(args.candidate, trusted, args.threshold)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    for domain, score in flags:
        print(f"{args.candidate}\tsounds like\t{domain}\t{score:.3f}")
    return EXIT_FINDINGS if flags else EXIT_OK


def _load_manifest(path: Path) -> dict:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        channels = {Channel(k): path.parent / v for k, v in doc["channels"].items()}
        return {
            "audio_paths": channels,
            "workflow_id": doc["workflow"],
            "setting": setting_from_dict(doc["setting"]),
            "session_id": doc.get("session_id"),
            "speech_rate_pct": int(doc.get("speech_rate_pct", 50)),
            "headphones_on_terminal": bool(doc.get("headphones_on_terminal", False)),
            "headphones_on_smartphone": bool(doc.get("headphones_on_smartphone", False)),
        }
    except (OSError, json.JSONDecodeError, KeyError, ValueError, SchemaError, AttributeError) as exc:
        raise IngestError(path, f"bad manifest: {exc}") from exc


def cmd_transcribe(args, cfg: RunConfig) -> int:
    backend_name = args.backend or cfg.stt_backend
    if backend_name == "http":
        endpoint = args.endpoint or cfg.stt_endpoint
        if not endpoint:
            raise UsageError("http backend needs --endpoint or [stt] endpoint")
        backend = HttpBackend(endpoint, args.timeout if args.timeout is not None else cfg.stt_timeout_s)
    else:
        backend = ReplayBackend()
    out = Writer(cfg.output_dir, args.deterministic)
    errors = 0
    for m in args.manifests:
        try:
            spec = _load_manifest(Path(m))
            session = transcribe_session(backend=backend, confidence_floor=cfg.confidence_floor, **spec)
        except TransportError as exc:
            errors += 1
            print(f"error: {m}: speech-to-text transport failed (retryable): {exc}", file=sys.stderr)
            if args.strict:
                return EXIT_ERROR
            continue
        except (IngestError, EmptyTranscriptError) as exc:
            errors += 1
            _report_error(exc)
            if args.strict:
                return EXIT_ERROR
            continue
        out.add("sessions", f"{session.id}.json", dumps_json(session_to_dict(session)))
    for p in out.flush():
        print(p)
    return EXIT_ERROR if errors else EXIT_OK


# -- argument parsing ------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", type=Path, default=d, help="TOML run configuration")
    p.add_argument("--strict", action="store_true", default=d if suppress else False,
                   help="stop at the first load or validation error")
    p.add_argument("--deterministic", action="store_true", default=d if suppress else False,
                   help="omit timestamps so repeated runs are byte-identical")
    p.add_argument("--format", default=d, help=f"comma-separated subset of {','.join(FORMATS)}")
    p.add_argument("-o", "--output-dir", type=Path, default=d)
    p.add_argument("-v", "--verbose", action="store_true", default=d if suppress else False)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srauth", description="Screen reader authentication evaluation toolkit.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check workflow, session and profile files")
    _global_flags(v, suppress=True)
    v.add_argument("--workflows", nargs="*")
    v.add_argument("--sessions", nargs="*")
    v.add_argument("--profiles", nargs="*")

    a = sub.add_parser("analyze", help="detect communicability issues and score comprehensibility")
    _global_flags(a, suppress=True)
    a.add_argument("--workflows", nargs="*")
    a.add_argument("--sessions", nargs="*")
    a.add_argument("--profiles", nargs="*")

    s = sub.add_parser("simulate", help="run attack simulations and write verdict matrices")
    _global_flags(s, suppress=True)
    s.add_argument("--profiles", nargs="*")
    s.add_argument("--method", action="append", help="method id (repeatable)")
    s.add_argument("--attack", action="append", help="attack kind (repeatable)")
    s.add_argument("--setting", choices=[k.value for k in SettingKind])
    s.add_argument("--terminal-reader")
    s.add_argument("--smartphone-reader")
    s.add_argument("--seed", type=int)
    s.add_argument("--golden", help="golden verdict CSV to compare against")

    p = sub.add_parser("phish", help="check whether a domain sounds like a trusted one")
    _global_flags(p, suppress=True)
    p.add_argument("candidate")
    p.add_argument("--trusted", required=True, help="file with one domain per line, # comments")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)

    t = sub.add_parser("transcribe", help="turn recorded audio manifests into session files")
    _global_flags(t, suppress=True)
    t.add_argument("manifests", nargs="+")
    t.add_argument("--backend", choices=["replay", "http"])
    t.add_argument("--endpoint")
    t.add_argument("--timeout", type=float)
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "phish": cmd_phish,
    "transcribe": cmd_transcribe,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        if args.output_dir is not None:
            cfg.output_dir = args.output_dir
        if args.format:
            cfg.formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
        cfg.check()
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IngestError as exc:
        _report_error(exc)
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
