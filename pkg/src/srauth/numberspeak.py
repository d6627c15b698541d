"""English cardinal number words and one-time-code pronunciation classification."""
from __future__ import annotations

from dataclasses import dataclass

from .model import OTP_PATTERN, Channel, SessionRecord
from .similarity import tokenize

MAX_VALUE = 999_999_999_999

DIGIT_WORDS = ("zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine")
TEENS = ("ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
         "eighteen", "nineteen")
TENS = ("", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety")
SCALES = (("billion", 10**9), ("million", 10**6), ("thousand", 10**3))

_SMALL = {w: i for i, w in enumerate(DIGIT_WORDS)}
_SMALL.update({w: 10 + i for i, w in enumerate(TEENS)})
_TENS = {w: 10 * i for i, w in enumerate(TENS) if w}
_SCALE = dict(SCALES)
VOCABULARY = frozenset(_SMALL) | frozenset(_TENS) | frozenset(_SCALE) | {"hundred", "and"}


class NumberParseError(ValueError):
    def __init__(self, token: str | None, position: int, reason: str):
        where = f"token {token!r} at position {position}" if token is not None else f"end of input ({position})"
        super().__init__(f"{reason}: {where}")
        self.token = token
        self.position = position


def words_to_number(words: list[str]) -> int:
    """Parse cardinal words such as ``["one", "thousand", "two", "hundred", "thirty", "four"]``.

    "and" is ignored anywhere. Scale words must appear in strictly decreasing
    order, each preceded by a group in 1..999.
    """
    toks = [(i, w) for i, w in enumerate(words) if w != "and"]
    if not toks:
        raise NumberParseError(None, len(words), "no number words")
    for i, w in toks:
        if w not in VOCABULARY:
            raise NumberParseError(w, i, "not a cardinal number word")
    if toks[0][1] == "zero":
        if len(toks) > 1:
            i, w = toks[1]
            raise NumberParseError(w, i, "nothing may follow zero")
        return 0

    total = 0
    last_scale = None
    pos = 0
    while pos < len(toks):
        group, pos = _parse_group(toks, pos)
        if pos < len(toks) and toks[pos][1] in _SCALE:
            i, w = toks[pos]
            scale = _SCALE[w]
            if last_scale is not None and scale >= last_scale:
                raise NumberParseError(w, i, "scale word out of order")
            total += group * scale
            last_scale = scale
            pos += 1
        else:
            total += group
            if pos < len(toks):
                i, w = toks[pos]
                raise NumberParseError(w, i, "unexpected word after a complete group")
    return total


def _parse_group(toks: list[tuple[int, str]], pos: int) -> tuple[int, int]:
    """Parse a 1..999 group: [digit hundred] [tens [digit] | teen | digit]."""
    value = 0
    start = pos

    def peek():
        return toks[pos][1] if pos < len(toks) else None

    w = peek()
    if w is None:
        i = toks[-1][0] + 1
        raise NumberParseError(None, i, "expected a number group")
    if w in _SMALL and 1 <= _SMALL[w] <= 9 and pos + 1 < len(toks) and toks[pos + 1][1] == "hundred":
        value = 100 * _SMALL[w]
        pos += 2
        w = peek()
    if w in _TENS:
        value += _TENS[w]
        pos += 1
        w = peek()
        if w in _SMALL and 1 <= _SMALL[w] <= 9:
            value += _SMALL[w]
            pos += 1
    elif w in _SMALL and _SMALL[w] >= 1:
        value += _SMALL[w]
        pos += 1
    if pos == start or value == 0:
        i, w = toks[pos] if pos < len(toks) else (toks[-1][0] + 1, None)
        raise NumberParseError(w, i, "expected a number group")
    return value, pos


def _group_words(n: int) -> list[str]:
    out = []
    if n >= 100:
        out += [DIGIT_WORDS[n // 100], "hundred"]
        n %= 100
    if n >= 20:
        out.append(TENS[n // 10])
        if n % 10:
            out.append(DIGIT_WORDS[n % 10])
    elif n >= 10:
        out.append(TEENS[n - 10])
    elif n:
        out.append(DIGIT_WORDS[n])
    return out


def number_to_numeric_words(n: int) -> list[str]:
    if not 0 <= n <= MAX_VALUE:
        raise ValueError(f"{n} outside supported range 0..{MAX_VALUE}")
    if n == 0:
        return ["zero"]
    out = []
    for word, scale in SCALES:
        if n >= scale:
            out += _group_words(n // scale) + [word]
            n %= scale
    return out + _group_words(n)


def number_to_digit_words(digits: str) -> list[str]:
    if not digits.isdigit() or not digits.isascii():
        raise ValueError(f"{digits!r} is not a digit string")
    return [DIGIT_WORDS[int(c)] for c in digits]


# -- OTP pronunciation --------------------------------------------------------

ABSENT = "ABSENT"


@dataclass(frozen=True)
class OtpPronunciation:
    style: str  # DIGIT_BY_DIGIT | NUMERIC_WHOLE | NUMERIC_GROUPED | ABSENT
    # (event index, first token, end token) relative to that event's spoken tokens;
    # end may run past the event when a reading spans several events
    matched_span: tuple[int, int, int] | None = None


def _spoken_stream(session: SessionRecord) -> list[tuple[str, int, int]]:
    """Screen reader tokens with literal digits expanded, tagged with (event, index)."""
    stream = []
    for ev_i, ev in enumerate(session.events):
        if ev.channel is not Channel.SCREEN_READER:
            continue
        k = 0
        for tok in tokenize(ev.text):
            words = number_to_digit_words(tok) if tok.isdigit() else [tok]
            for w in words:
                stream.append((w, ev_i, k))
                k += 1
    return stream


def _find(words: list[str], pattern: list[str], skip_and: bool = False) -> tuple[int, int] | None:
    idx = [i for i, w in enumerate(words) if not (skip_and and w == "and")]
    seq = [words[i] for i in idx]
    m = len(pattern)
    for s in range(len(seq) - m + 1):
        if seq[s:s + m] == pattern:
            return idx[s], idx[s + m - 1] + 1
    return None


def classify_otp(session: SessionRecord, otp: str) -> OtpPronunciation:
    """Work out how the screen reader spoke ``otp``, if at all.

    Readings are tried in priority order: digit by digit, the whole value as a
    number, then each space-separated group as a number.
    """
    if not OTP_PATTERN.match(otp):
        raise ValueError(f"{otp!r} is not an OTP (digits with single-space groups)")
    stream = _spoken_stream(session)
    words = ["zero" if w == "oh" else w for w, _, _ in stream]
    plain = [w for w, _, _ in stream]
    digits = otp.replace(" ", "")
    groups = otp.split(" ")

    candidates = [
        ("DIGIT_BY_DIGIT", words, number_to_digit_words(digits), False),
        ("NUMERIC_WHOLE", plain, number_to_numeric_words(int(digits)), True),
    ]
    if len(groups) > 1:
        grouped = [w for g in groups for w in number_to_numeric_words(int(g))]
        candidates.append(("NUMERIC_GROUPED", plain, grouped, True))
    for style, hay, pattern, skip_and in candidates:
        hit = _find(hay, pattern, skip_and)
        if hit is not None:
            _, ev_i, k = stream[hit[0]]
            return OtpPronunciation(style, (ev_i, k, k + hit[1] - hit[0]))
    return OtpPronunciation(ABSENT)
