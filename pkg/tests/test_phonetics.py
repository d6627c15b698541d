from functools import lru_cache

import pytest
from brands import DISTINCT_PAIRS
from hypothesis import assume, given
from hypothesis import strategies as st

from srauth.phonetics import (
    DomainError,
    flag_lookalikes,
    levenshtein,
    read_trusted_list,
    registrable_host,
    spoken_key,
    spoken_similarity,
)

labels = st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=12)
domains = st.builds(lambda a, tld: f"{a}.{tld}", labels, st.sampled_from(["com", "org", "net"]))


def edit_distance_oracle(a, b):
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))
    return d(len(a), len(b))


@pytest.mark.parametrize("a,b", [
    ("bankofamerica.com", "bankoffamerica.com"),
    ("wellsfargo.com", "wellssfargo.com"),
    ("abc.com", "abc.com"),
])
def test_sound_alike_pairs_share_key(a, b):
    assert spoken_key(a).key == spoken_key(b).key
    assert spoken_similarity(a, b) == 1.0


def test_key_strips_scheme_path_and_subdomain():
    assert registrable_host("https://login.Example.com/path?q=1") == "example.com"
    assert spoken_key("https://www.example.com/x").key == spoken_key("example.com").key


def test_rewrite_order():
    assert spoken_key("phone.com").key == "fonekom"
    assert spoken_key("quick.com").key == "kwikkom"
    assert spoken_key("ceci.com").key == "sesikom"
    assert spoken_key("whizz.com").key == "wiskom"
    assert spoken_key("fox.com").key == "fokskom"


@pytest.mark.parametrize("bad", ["", "   ", "123.456", "http://1.2"])
def test_no_letters(bad):
    with pytest.raises(DomainError):
        spoken_key(bad)


def test_unrelated_domains_score_low():
    a, b = spoken_key("example.com").key, spoken_key("zq.org").key
    want = 1 - edit_distance_oracle(a, b) / max(len(a), len(b))
    assert spoken_similarity("example.com", "zq.org") == pytest.approx(want)
    assert want < 0.8


@pytest.mark.parametrize("a,b", DISTINCT_PAIRS)
def test_distinct_brands_not_flagged(a, b):
    assert spoken_similarity(a, b) < 0.9
    assert flag_lookalikes(a, [b]) == []


def test_flag_lookalikes():
    assert flag_lookalikes("bankoffamerica.com", ["bankofamerica.com"]) == [("bankofamerica.com", 1.0)]
    assert flag_lookalikes("bankofamerica.com", ["bankofamerica.com", "chase.com"]) == []
    assert flag_lookalikes("bankoffamerica.com", ["chase.com"]) == []
    with pytest.raises(ValueError):
        flag_lookalikes("a.com", [])


def test_flag_order():
    trusted = ["wellsfargo.com", "bankofamerica.com", "bankofamerika.com"]
    got = flag_lookalikes("bankoffamerica.com", trusted, threshold=0.5)
    assert [t for t, _ in got] == ["bankofamerica.com", "bankofamerika.com"]


def test_read_trusted_list():
    text = "# banks\nbankofamerica.com\n\n  chase.com  # main\n#x\n"
    assert read_trusted_list(text) == ["bankofamerica.com", "chase.com"]


@given(st.text(alphabet="abcxyz", max_size=9), st.text(alphabet="abcxyz", max_size=9))
def test_levenshtein_matches_recursive_oracle(a, b):
    assert levenshtein(a, b) == edit_distance_oracle(a, b)


@given(domains, domains)
def test_similarity_symmetric_and_bounded(a, b):
    s = spoken_similarity(a, b)
    assert s == spoken_similarity(b, a)
    assert 0.0 <= s <= 1.0
    assert spoken_similarity(a, a) == 1.0


@given(domains, st.data())
def test_doubling_a_letter_keeps_key(d, data):
    i = data.draw(st.integers(0, d.index(".") - 1))
    doubled = d[:i] + d[i] + d[i:]
    assert spoken_key(doubled).key == spoken_key(d).key


@given(domains, st.lists(domains, min_size=1, max_size=6), st.floats(0.0, 1.0))
def test_flags_sorted_and_above_threshold(c, trusted, th):
    assume(c not in trusted)
    got = flag_lookalikes(c, trusted, th)
    assert all(s >= th for _, s in got)
    assert got == sorted(got, key=lambda h: (-h[1], h[0]))
