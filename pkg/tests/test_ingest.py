import json
import logging
import random
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from srauth import presets
from srauth.ingest import (
    EmptyTranscriptError,
    HttpBackend,
    IngestError,
    ReplayBackend,
    SttBackend,
    SttSegment,
    TransportError,
    ValidationError,
    load_catalog,
    load_profile,
    load_profiles,
    load_session,
    load_workflow,
    low_confidence_events,
    merge_channels,
    sidecar_path,
    transcribe_session,
)
from srauth.model import Channel, PlatformSetting, SettingKind, session_to_dict, workflow_to_dict

PC = PlatformSetting(SettingKind.TERMINAL, terminal_reader="JAWS")


def write(path, doc):
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_shipped_data_loads():
    cat = load_catalog(presets.CATALOG_PATH)
    assert len(cat) == 13
    profs = load_profiles(sorted(presets.PROFILE_DIR.glob("*.json")))
    assert sorted(profs) == ["ChromeVox", "Dolphin", "JAWS", "NVDA", "Talkback", "VoiceOver"]


def test_duplicate_profile_rejected(tmp_path):
    p = presets.PROFILE_DIR / "jaws.json"
    with pytest.raises(IngestError, match="duplicate"):
        load_profiles([p, p])
    assert load_profile(p).id == "JAWS"


def test_load_workflow(tmp_path, catalog, fixtures):
    _, wf = fixtures["winauth_jaws_s1"]
    path = write(tmp_path / "w.json", workflow_to_dict(wf))
    assert load_workflow(path, catalog).id == wf.id

    d = workflow_to_dict(wf)
    del d["full_text"]
    with pytest.raises(IngestError, match="full_text"):
        load_workflow(write(tmp_path / "m.json", d), catalog)

    d = workflow_to_dict(wf)
    d["full_text"] = "nothing here"
    with pytest.raises(ValidationError) as info:
        load_workflow(write(tmp_path / "v.json", d), catalog)
    assert info.value.violations


def test_unreadable_files(tmp_path, catalog):
    with pytest.raises(IngestError):
        load_workflow(tmp_path / "missing.json", catalog)
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(IngestError, match="bad.json"):
        load_session(tmp_path / "bad.json")


def test_load_session_sorts_with_warning(tmp_path, fixtures, caplog):
    s, _ = fixtures["authy_nvda_s1"]
    d = session_to_dict(s)
    d["events"] = list(reversed(d["events"]))
    with caplog.at_level(logging.WARNING):
        got = load_session(write(tmp_path / "s.json", d))
    assert got == s
    assert any("out of order" in r.message for r in caplog.records)


def test_load_session_rejects_bad_interval(tmp_path, fixtures):
    s, _ = fixtures["authy_nvda_s1"]
    d = session_to_dict(s)
    d["events"][0]["t_end_s"] = d["events"][0]["t_start_s"]
    with pytest.raises(ValidationError, match="t_end_s"):
        load_session(write(tmp_path / "s.json", d))


class FixedBackend(SttBackend):
    def __init__(self, by_name):
        self.by_name = by_name
        self.calls = []

    def transcribe(self, audio, media_type):
        raise AssertionError("not used")

    def transcribe_file(self, path, media_type):
        self.calls.append((path.name, media_type))
        return self.by_name[path.name]


class FailingBackend(SttBackend):
    def transcribe(self, audio, media_type):
        raise TransportError("connection reset")


def _audio(tmp_path, name):
    p = tmp_path / name
    p.write_bytes(b"RIFF0000WAVE")
    return p


def test_mock_backend_two_segments(tmp_path):
    a = _audio(tmp_path, "sr.wav")
    backend = ReplayBackend([SttSegment(0, 1, "enter code"), SttSegment(1.5, 2, "one two")])
    s = transcribe_session({Channel.SCREEN_READER: a}, backend, "w", PC, session_id="s1")
    assert [e.channel for e in s.events] == [Channel.SCREEN_READER] * 2
    assert s.id == "s1" and s.workflow == "w"


def test_replay_reads_sidecar(tmp_path):
    a = _audio(tmp_path, "sr.wav")
    write(sidecar_path(a), [{"t_start_s": 0, "t_end_s": 1, "text": "hi", "confidence": 0.4}])
    s = transcribe_session({Channel.SCREEN_READER: a}, ReplayBackend(), "w", PC)
    assert s.events[0].text == "hi" and s.events[0].confidence == 0.4
    assert low_confidence_events(s, 0.5) == [0]


def test_transport_failure_propagates(tmp_path):
    a = _audio(tmp_path, "sr.wav")
    with pytest.raises(TransportError) as info:
        transcribe_session({Channel.SCREEN_READER: a}, FailingBackend(), "w", PC)
    assert info.value.retryable


def test_media_checks(tmp_path):
    with pytest.raises(IngestError, match="unsupported"):
        transcribe_session({Channel.SCREEN_READER: _audio(tmp_path, "a.ogg")}, ReplayBackend([]), "w", PC)
    with pytest.raises(IngestError, match="not found"):
        transcribe_session({Channel.SCREEN_READER: tmp_path / "gone.mp3"}, ReplayBackend([]), "w", PC)
    with pytest.raises(EmptyTranscriptError):
        transcribe_session({Channel.SCREEN_READER: _audio(tmp_path, "b.mp3")}, ReplayBackend([]), "w", PC)


def test_confidence_floor_warns(tmp_path, caplog):
    a = _audio(tmp_path, "sr.wav")
    backend = ReplayBackend([SttSegment(0, 1, "mumble", 0.2)])
    with caplog.at_level(logging.WARNING):
        transcribe_session({Channel.SCREEN_READER: a}, backend, "w", PC, confidence_floor=0.5)
    assert any("confidence floor" in r.message for r in caplog.records)


def test_two_channels_interleave(tmp_path):
    sr, call = _audio(tmp_path, "sr.wav"), _audio(tmp_path, "call.mp3")
    backend = FixedBackend({
        "sr.wav": [SttSegment(0, 2, "a"), SttSegment(4, 5, "c"), SttSegment(9, 10, "e")],
        "call.mp3": [SttSegment(1, 3, "b"), SttSegment(4, 6, "d")],
    })
    s = transcribe_session([(Channel.SCREEN_READER, sr), (Channel.PHONE_CALL, call)], backend, "w", PC)
    assert [e.text for e in s.events] == ["a", "b", "c", "d", "e"]
    assert backend.calls == [("sr.wav", "audio/wav"), ("call.mp3", "audio/mpeg")]


def test_merge_matches_brute_force():
    rng = random.Random(3)
    chans = list(Channel)
    for _ in range(100):
        per = []
        for ch in rng.sample(chans, rng.randint(1, 3)):
            starts = sorted(rng.choice([0.0, 0.5, 1.0, 1.5, 2.0, 3.0]) for _ in range(rng.randint(0, 5)))
            per.append((ch, [SttSegment(t, t + 1, f"{ch.value}{i}") for i, t in enumerate(starts)]))
        # brute force: among all segments pick the earliest start, earliest channel, earliest index
        flat = [(seg.t_start_s, k, i, seg.text) for k, (_, segs) in enumerate(per) for i, seg in enumerate(segs)]
        want = []
        while flat:
            best = min(flat)
            flat.remove(best)
            want.append(best[3])
        assert [e.text for e in merge_channels(per)] == want


class _Handler(BaseHTTPRequestHandler):
    delay = 0.0

    def do_POST(self):
        body = self.rfile.read(int(self.headers["Content-Length"]))
        if self.server.delay:
            threading.Event().wait(self.server.delay)
        doc = [{"t_start_s": 0, "t_end_s": 1, "text": f"{len(body)} bytes {self.headers['Content-Type']}"}]
        out = json.dumps(doc).encode()
        try:
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(out)))
            self.end_headers()
            self.wfile.write(out)
        except (BrokenPipeError, ConnectionResetError):
            pass

    def log_message(self, *args):
        pass


@pytest.fixture
def stt_server():
    srv = HTTPServer(("127.0.0.1", 0), _Handler)
    srv.delay = 0.0
    t = threading.Thread(target=srv.serve_forever, daemon=True)
    t.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def test_http_backend(stt_server):
    url = f"http://127.0.0.1:{stt_server.server_port}/stt"
    segs = HttpBackend(url, timeout_s=5).transcribe(b"12345", "audio/wav")
    assert segs == [SttSegment(0.0, 1.0, "5 bytes audio/wav", 1.0)]


def test_http_timeout_is_retryable(stt_server):
    stt_server.delay = 1.0
    url = f"http://127.0.0.1:{stt_server.server_port}/stt"
    with pytest.raises(TransportError) as info:
        HttpBackend(url, timeout_s=0.2).transcribe(b"x", "audio/wav")
    assert info.value.retryable


def test_http_unreachable():
    with pytest.raises(TransportError):
        HttpBackend("http://127.0.0.1:9/none", timeout_s=1).transcribe(b"x", "audio/wav")
