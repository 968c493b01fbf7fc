import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erratlas.cooccurrence import PairExtraction, extract_pairs, is_spurious, read_pairs_csv, write_pairs_csv
from erratlas.errors import UnknownSynset
from erratlas.label_space import shares_superclass

from conftest import make_space

A, B, C, D = "a00000001", "b00000002", "c00000003", "d00000004"


@pytest.fixture(scope="module")
def space(tmp_path_factory):
    classes = [
        (A, "a", "organism"),
        (B, "b", "organism"),
        (C, "c", "artifact"),
        (D, "d", "artifact"),
    ]
    # c and d share a superclass; a and b are in a different one
    superclasses = {"cd": [C, D], "ab": [A, B]}
    hyper = [(sid, "r00000000") for sid, _, _ in classes]
    return make_space(tmp_path_factory.mktemp("space"), classes, superclasses=superclasses, hypernyms=hyper)


def oracle_extract(real, excluded, space):
    """Hand enumeration: count unordered pairs image by image, then filter."""
    counts = {}
    raw = 0
    multi = 0
    for img, labels in real.items():
        if img in excluded or len(labels) < 2:
            continue
        multi += 1
        for a, b in itertools.combinations(sorted(labels), 2):
            counts[(a, b)] = counts.get((a, b), 0) + 1
            raw += 1
    kept = {
        p: c for p, c in counts.items() if c >= 2 and not shares_superclass(p[0], p[1], space)
    }
    return raw, multi, kept


def test_hand_fixture(space):
    real = {
        "img1": frozenset({A, C}),
        "img2": frozenset({A, C}),
        "img3": frozenset({A, D}),
    }
    got = extract_pairs(real, set(), space)
    assert got.pairs == {(A, C): 2}
    assert got.raw_pair_count == 3
    assert got.multi_label_image_count == 3


def test_same_superclass_pair_dropped(space):
    real = {f"img{i}": frozenset({C, D}) for i in range(5)}
    got = extract_pairs(real, set(), space)
    assert got.pairs == {}
    assert got.raw_pair_count == 5


def test_exclusion_and_missing_count(space):
    real = {
        "img1": frozenset({A, C}),
        "img2": frozenset({A, C}),
    }
    got = extract_pairs(real, {"img2", "ghost"}, space)
    assert got.pairs == {}  # only one non-excluded occurrence
    assert got.raw_pair_count == 1
    assert got.missing_excluded == 1


def test_raw_count_is_l_choose_2(space):
    real = {
        "img1": frozenset({A, B, C}),       # 3 pairs
        "img2": frozenset({A, B, C, D}),    # 6 pairs
        "img3": frozenset({A}),             # single label, no pairs
    }
    got = extract_pairs(real, set(), space)
    assert got.raw_pair_count == 3 + 6
    assert got.multi_label_image_count == 2


def test_unknown_synset(space):
    with pytest.raises(UnknownSynset):
        extract_pairs({"img1": frozenset({A, "z99999999"})}, set(), space)


def test_random_fixture_matches_oracle(space):
    rng = random.Random(11)
    labels = [A, B, C, D]
    real = {}
    for i in range(300):
        n = rng.choice([1, 2, 2, 3, 4])
        real[f"img{i}"] = frozenset(rng.sample(labels, n))
    excluded = {f"img{i}" for i in range(0, 300, 7)}
    got = extract_pairs(real, excluded, space)
    raw, multi, kept = oracle_extract(real, excluded, space)
    assert (got.raw_pair_count, got.multi_label_image_count, got.pairs) == (raw, multi, kept)


def test_survivors_satisfy_filters(space):
    rng = random.Random(12)
    real = {f"img{i}": frozenset(rng.sample([A, B, C, D], rng.choice([2, 3]))) for i in range(100)}
    got = extract_pairs(real, set(), space)
    for (a, b), count in got.pairs.items():
        assert a < b
        assert count >= 2
        assert not shares_superclass(a, b, space)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_order_independence(seed, space):
    rng = random.Random(seed)
    items = [(f"img{i}", frozenset(rng.sample([A, B, C, D], rng.choice([2, 3])))) for i in range(40)]
    base = extract_pairs(dict(items), set(), space)
    rng.shuffle(items)
    shuffled = extract_pairs(dict(items), set(), space)
    assert base.pairs == shuffled.pairs
    assert base.raw_pair_count == shuffled.raw_pair_count


def test_is_spurious(space):
    pairs = PairExtraction(raw_pair_count=2, multi_label_image_count=2, pairs={(A, C): 2}, missing_excluded=0)
    # prediction C with a ground-truth label A forms the mined pair
    assert is_spurious(C, {A, B}, pairs)
    assert is_spurious(A, {C}, pairs)
    assert not is_spurious(B, {A}, pairs)
    assert not is_spurious(C, {C}, pairs)  # own label never anchors
    empty = PairExtraction.empty()
    assert not is_spurious(C, {A}, empty)


def test_pairs_csv_round_trip(tmp_path, space):
    real = {"img1": frozenset({A, C}), "img2": frozenset({A, C}), "img3": frozenset({B, D})}
    got = extract_pairs(real, set(), space)
    path = tmp_path / "pairs.csv"
    write_pairs_csv(path, got)
    lines = path.read_text().splitlines()
    assert lines[0] == "a,b,count"
    assert lines[1:] == sorted(lines[1:])
    loaded = read_pairs_csv(path)
    assert loaded.pairs == got.pairs
