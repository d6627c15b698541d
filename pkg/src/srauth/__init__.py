"""Evaluate how screen readers convey two-factor authentication flows.

Submodules:
    similarity   TF-IDF cosine comprehensibility score
    numberspeak  English number words and OTP pronunciation classes
    issues       communicability failure codes for a recorded session
    phonetics    spoken-form lookalike domain detection
    authsim      discrete-event attack simulator
    ingest       file loaders and speech-to-text backends
"""
from .authsim import AttackKind, AttackOutcome, SimConfig, run_attack, run_matrix
from .issues import AnalyzerConfig, IssueReport, analyze
from .phonetics import flag_lookalikes, spoken_similarity
from .similarity import comprehensibility

__all__ = [
    "AnalyzerConfig",
    "AttackKind",
    "AttackOutcome",
    "IssueReport",
    "SimConfig",
    "analyze",
    "comprehensibility",
    "flag_lookalikes",
    "run_attack",
    "run_matrix",
    "spoken_similarity",
]
