import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from analytics.edits import EditKind
from analytics.suffixes import (
    BUCKET_LABELS, AliasPair, ChangePattern, change_pattern, pattern_counts, similarity_bucket,
    similarity_histogram, suffix_distance, suffix_similarity,
)
from model.doi import normalize_doi
from model.errors import IdenticalPair


def pair(alias, primary):
    return AliasPair.build(normalize_doi(alias), normalize_doi(primary))


@pytest.mark.parametrize("alias, primary, pattern", [
    ("10.14359/15303", "10.14359/15306", ChangePattern.SUFFIX_ONLY),
    ("10.2523/114033-MS", "10.2118/114033-MS", ChangePattern.PREFIX_ONLY),
    ("10.3403/bs1000", "10.3406/zz9999", ChangePattern.PREFIX_AND_SUFFIX),
])
def test_change_pattern(alias, primary, pattern):
    assert change_pattern(normalize_doi(alias), normalize_doi(primary)) == pattern


def test_identical_pair_is_rejected():
    doi = normalize_doi("10.1/a")
    with pytest.raises(IdenticalPair):
        change_pattern(doi, doi)
    with pytest.raises(IdenticalPair):
        AliasPair.build(doi, normalize_doi("10.1/A"))


def test_prefix_only_pair_has_no_similarity():
    p = pair("10.2523/114033-MS", "10.2118/114033-MS")
    assert p.sim is None and p.bucket is None and p.edits is None


def test_pair_invariants_are_checked():
    alias, primary = normalize_doi("10.1/a"), normalize_doi("10.1/b")
    with pytest.raises(ValueError):
        AliasPair(alias, primary, ChangePattern.PREFIX_ONLY)
    with pytest.raises(ValueError):
        AliasPair(alias, primary, ChangePattern.SUFFIX_ONLY)


def test_similarity():
    assert suffix_distance("15303", "15306") == 1
    assert suffix_similarity("15303", "15306") == pytest.approx(0.8)
    assert suffix_similarity("bs1000", "zz9999") == 0
    with pytest.raises(ValueError):
        suffix_similarity("", "a")


def test_distance_counts_code_points():
    assert suffix_distance("ärger", "arger") == 1


@pytest.mark.parametrize("distance, max_len, bucket", [
    (2, 10, 7),   # exactly 0.8 belongs to (0.7, 0.8]
    (1, 10, 8),   # exactly 0.9
    (1, 15, 9),
    (0, 5, 9),
    (9, 10, 0),   # exactly 0.1
    (10, 10, 0),
    (8, 10, 1),
    (6, 6, 0),
    (1, 9, 8),
])
def test_similarity_bucket(distance, max_len, bucket):
    assert similarity_bucket(distance, max_len) == bucket


def reference_bucket(distance, max_len):
    sim = Fraction(max_len - distance, max_len)
    if sim <= Fraction(1, 10):
        return 0
    return min(math.ceil(sim * 10) - 1, 9)


@given(st.integers(min_value=1, max_value=500).flatmap(
    lambda m: st.tuples(st.integers(min_value=0, max_value=m), st.just(m))))
def test_bucket_matches_exact_fractions(args):
    distance, max_len = args
    assert similarity_bucket(distance, max_len) == reference_bucket(distance, max_len)


def test_bucket_labels():
    assert len(BUCKET_LABELS) == 10
    assert BUCKET_LABELS[0] == "0 <= sim <= 0.1"
    assert BUCKET_LABELS[7] == "0.7 < sim <= 0.8"
    assert BUCKET_LABELS[9] == "0.9 < sim < 1.0"


async def test_demo_patterns(demo_pairs):
    assert len(demo_pairs) == 21
    assert pattern_counts(demo_pairs) == {
        ChangePattern.SUFFIX_ONLY: 16,
        ChangePattern.PREFIX_AND_SUFFIX: 2,
        ChangePattern.PREFIX_ONLY: 3,
    }


async def test_demo_histogram(demo_pairs):
    histogram = similarity_histogram(demo_pairs)
    assert histogram[ChangePattern.SUFFIX_ONLY] == [0, 0, 0, 0, 0, 1, 0, 6, 5, 4]
    assert histogram[ChangePattern.PREFIX_AND_SUFFIX] == [1, 0, 0, 0, 0, 0, 0, 0, 1, 0]
    assert ChangePattern.PREFIX_ONLY not in histogram


async def test_demo_pair_sources(demo_pairs):
    sources = {p.alias.full: p.source for p in demo_pairs}
    assert sources["10.2523/114033-ms"] == "redirect"
    assert sources["10.2523/114034-ms"] == "handle"
    assert sources["10.14359/15303"] == "conflict_report"


def reference_levenshtein(s1, s2):
    previous = list(range(len(s2) + 1))
    for i, a in enumerate(s1, start=1):
        current = [i]
        for j, b in enumerate(s2, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (a != b)))
        previous = current
    return previous[-1]


@given(st.text(alphabet="ab-/9é", max_size=12), st.text(alphabet="ab-/9é", max_size=12))
def test_distance_matches_reference(s1, s2):
    assert suffix_distance(s1, s2) == reference_levenshtein(s1, s2)


@pytest.mark.slow
def test_seeded_distance_grid():
    rng = random.Random(4)
    alphabet = "abcxyz0123456789-/._"
    for _ in range(10_000):
        s1 = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 16)))
        s2 = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 16)))
        assert suffix_distance(s1, s2) == reference_levenshtein(s1, s2)


def test_double_slash_correction_similarity():
    alias, primary = "/s12445-012-0033-7", "s12445-012-0033-7"
    assert suffix_distance(alias, primary) == 1
    assert suffix_similarity(alias, primary) == pytest.approx(1 - 1 / 18)
    assert similarity_bucket(1, 18) == 9


def test_pair_with_inserted_characters_carries_its_edits():
    p = pair("10.4018/9781591401087.ch001", "10.4018/978-1-59140-108-7.ch001")
    assert p.pattern == ChangePattern.SUFFIX_ONLY
    assert p.distance == 4
    assert p.edits.signature() == ((EditKind.ADD, None, "-", 4),)
