"""Communicability failure detection for one recorded session.

Codes:
    CBI    screen reader speech overlaps a phone call or other system audio
    NPO    the one-time code was spoken as a quantity, not digit by digit
    UCO    the one-time code was never spoken
    UCSP   a required security prompt was (mostly) not spoken
    UCEOB  the reader cannot reach a required element outside the browser
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import (
    Channel,
    ElementKind,
    Location,
    ScreenReaderProfile,
    SessionRecord,
    WorkflowSpec,
    full_transcript,
)
from .numberspeak import classify_otp
from .similarity import SimilarityResult, comprehensibility, tokenize

CODES = ("CBI", "NPO", "UCO", "UCSP", "UCEOB")

Span = tuple[int, int, int]  # (event index, first token, end token)


@dataclass(frozen=True)
class AnalyzerConfig:
    overlap_epsilon_s: float = 0.5
    prompt_recall_threshold: float = 0.6

    def __post_init__(self):
        if self.overlap_epsilon_s < 0:
            raise ValueError("overlap_epsilon_s must be >= 0")
        if not 0.0 < self.prompt_recall_threshold <= 1.0:
            raise ValueError("prompt_recall_threshold must be in (0, 1]")


@dataclass(frozen=True)
class IssueFinding:
    code: str
    evidence: str
    spans: tuple[Span, ...] = ()


@dataclass(frozen=True)
class IssueReport:
    session_id: str
    workflow_id: str
    method: str
    reader: str
    findings: tuple[IssueFinding, ...]
    comprehensibility: SimilarityResult
    exceeds_verification_time: bool | None = None
    speech_rate_pct: int = 50

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(f.code for f in self.findings)

    def to_dict(self) -> dict:
        c = self.comprehensibility
        return {
            "session_id": self.session_id,
            "workflow_id": self.workflow_id,
            "method": self.method,
            "reader": self.reader,
            "speech_rate_pct": self.speech_rate_pct,
            "findings": [
                {"code": f.code, "evidence": f.evidence, "spans": [list(s) for s in f.spans]}
                for f in self.findings
            ],
            "comprehensibility": {
                "score": c.score,
                "percent": round(100 * c.score, 2),
                "shared_tokens": c.shared_tokens,
                "corpus_size": c.corpus_size,
                "degenerate": c.degenerate,
            },
            "exceeds_verification_time": self.exceeds_verification_time,
        }


class AnalysisError(ValueError):
    pass


def _token_count(text: str) -> int:
    return len(tokenize(text))


def detect_cbi(session: SessionRecord, epsilon_s: float = 0.5) -> IssueFinding | None:
    reader = [(i, e) for i, e in enumerate(session.events) if e.channel is Channel.SCREEN_READER]
    other = [(i, e) for i, e in enumerate(session.events) if e.channel is not Channel.SCREEN_READER]
    worst = None
    spans = []
    for i, a in reader:
        for j, b in other:
            overlap = min(a.t_end_s, b.t_end_s) - max(a.t_start_s, b.t_start_s)
            if overlap > epsilon_s:
                spans.append((i, 0, _token_count(a.text)))
                if worst is None or overlap > worst[0]:
                    worst = (overlap, i, j, b.channel)
                break
    if worst is None:
        return None
    overlap, i, j, ch = worst
    return IssueFinding(
        "CBI",
        f"screen reader event {i} overlaps {ch.value} event {j} by {overlap:.3f}s",
        tuple(spans),
    )


def _otp_in_scope(workflow: WorkflowSpec, skip_locations=()):
    el = workflow.otp_element
    # a code spoken by the phone call itself is not the reader's to convey
    if el is None or el.location is Location.PHONE_CALL_AUDIO or el.location in skip_locations:
        return None
    return el


def detect_npo(session: SessionRecord, workflow: WorkflowSpec) -> IssueFinding | None:
    el = _otp_in_scope(workflow)
    if el is None:
        return None
    got = classify_otp(session, el.text)
    if got.style in ("NUMERIC_WHOLE", "NUMERIC_GROUPED"):
        how = "as one number" if got.style == "NUMERIC_WHOLE" else "group by group as numbers"
        return IssueFinding("NPO", f"OTP {el.text!r} pronounced {how}", (got.matched_span,))
    return None


def detect_uco(session: SessionRecord, workflow: WorkflowSpec) -> IssueFinding | None:
    el = _otp_in_scope(workflow)
    if el is None:
        return None
    if classify_otp(session, el.text).style == "ABSENT":
        return IssueFinding("UCO", f"OTP {el.text!r} never spoken by the screen reader")
    return None


def prompt_recall(prompt: str, transcript: str) -> float:
    want = set(tokenize(prompt))
    if not want:
        return 1.0
    return len(want & set(tokenize(transcript))) / len(want)


def detect_ucsp(session: SessionRecord, workflow: WorkflowSpec, tau: float = 0.6,
                skip_locations=()) -> IssueFinding | None:
    transcript = full_transcript(session)
    misses = []
    for el in workflow.elements:
        if el.kind is not ElementKind.SECURITY_PROMPT or not el.required or el.location in skip_locations:
            continue
        r = prompt_recall(el.text, transcript)
        if r < tau:
            misses.append(f"prompt {el.text!r} recall {r:.2f} < {tau:.2f}")
    if not misses:
        return None
    return IssueFinding("UCSP", "; ".join(misses))


def detect_uceob(workflow: WorkflowSpec, profile: ScreenReaderProfile) -> IssueFinding | None:
    if profile.reads_outside_browser:
        return None
    outside = [e for e in workflow.elements if e.required and e.location is Location.OUTSIDE_BROWSER]
    if not outside:
        return None
    kinds = ", ".join(sorted({e.kind.value for e in outside}))
    return IssueFinding("UCEOB", f"{profile.id} cannot read outside the browser; required: {kinds}")


def reader_speaking_time(session: SessionRecord) -> float:
    return sum(e.duration_s for e in session.events if e.channel is Channel.SCREEN_READER)


def analyze(session: SessionRecord, workflow: WorkflowSpec, profile: ScreenReaderProfile,
            config: AnalyzerConfig = AnalyzerConfig()) -> IssueReport:
    """Run every detector and the comprehensibility score for one session.

    When the reader cannot leave the browser, elements outside it are charged to
    UCEOB only, so the same missing code or prompt is not reported twice.
    """
    if session.workflow != workflow.id:
        raise AnalysisError(f"session {session.id!r} is for workflow {session.workflow!r}, not {workflow.id!r}")
    if profile.id not in session.setting.readers:
        raise AnalysisError(f"profile {profile.id!r} not part of session {session.id!r} setting {session.setting.readers}")

    uceob = detect_uceob(workflow, profile)
    skip = (Location.OUTSIDE_BROWSER,) if uceob else ()
    found = [detect_cbi(session, config.overlap_epsilon_s)]
    if _otp_in_scope(workflow, skip) is not None:
        found += [detect_npo(session, workflow), detect_uco(session, workflow)]
    found += [detect_ucsp(session, workflow, config.prompt_recall_threshold, skip), uceob]
    findings = tuple(f for f in found if f is not None)

    exceeds = None
    if workflow.verification_timeout_s is not None:
        exceeds = reader_speaking_time(session) > workflow.verification_timeout_s
    return IssueReport(
        session_id=session.id,
        workflow_id=workflow.id,
        method=workflow.method,
        reader=profile.id,
        findings=findings,
        comprehensibility=comprehensibility(workflow.full_text, full_transcript(session)),
        exceeds_verification_time=exceeds,
        speech_rate_pct=session.speech_rate_pct,
    )
