import csv
import random

import pytest

from erratlas.annotations import Verdict, correct_label_set, load_annotations
from erratlas.errors import (
    DuplicateImage,
    DuplicateVerdict,
    UnknownImage,
    UnknownSynset,
    ValidationError,
)

OX = "a00000001"
BARN = "b00000002"
FENCE = "c00000003"
OTHER = "d00000004"


@pytest.fixture
def space(tmp_path):
    from conftest import make_space

    classes = [
        (OX, "ox", "organism"),
        (BARN, "barn", "artifact"),
        (FENCE, "fence", "artifact"),
        (OTHER, "other thing", "other"),
    ]
    hyper = [(sid, "r00000000") for sid, _, _ in classes]
    return make_space(tmp_path, classes, hypernyms=hyper)


def write_rows(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        for row in rows:
            w.writerow(row)


def build_store(tmp_path, space, originals, verdicts=None, problematic=None, non_proto=None, real=None):
    o = tmp_path / "originals.csv"
    write_rows(o, originals)
    kwargs = {}
    if verdicts is not None:
        v = tmp_path / "multilabel.csv"
        write_rows(v, verdicts)
        kwargs["multilabel_path"] = v
    if problematic is not None:
        p = tmp_path / "problematic.txt"
        p.write_text("".join(x + "\n" for x in problematic), encoding="utf-8")
        kwargs["problematic_path"] = p
    if non_proto is not None:
        np_ = tmp_path / "nonproto.txt"
        np_.write_text("".join(x + "\n" for x in non_proto), encoding="utf-8")
        kwargs["non_prototypical_path"] = np_
    if real is not None:
        r = tmp_path / "real.csv"
        write_rows(r, real)
        kwargs["real_labels_path"] = r
    return load_annotations(space, o, **kwargs)


def test_problematic_images_filtered_from_eval(tmp_path, space):
    store = build_store(
        tmp_path,
        space,
        [("img1", OX), ("img2", BARN), ("img3", FENCE)],
        problematic=["img2"],
    )
    assert store.evaluated_images() == ["img1", "img3"]
    assert store.annotations["img2"].problematic


def test_duplicate_verdict_rejected(tmp_path, space):
    with pytest.raises(DuplicateVerdict):
        build_store(
            tmp_path,
            space,
            [("img1", OX)],
            verdicts=[("img1", BARN, "correct"), ("img1", BARN, "wrong")],
        )


def test_duplicate_image_rejected(tmp_path, space):
    with pytest.raises(DuplicateImage):
        build_store(tmp_path, space, [("img1", OX), ("img1", BARN)])


def test_non_prototypical_must_be_annotated(tmp_path, space):
    with pytest.raises(ValidationError):
        build_store(tmp_path, space, [("img1", OX)], non_proto=["ghost"])


def test_unknown_synset_in_verdicts(tmp_path, space):
    with pytest.raises(UnknownSynset):
        build_store(tmp_path, space, [("img1", OX)], verdicts=[("img1", "z99999999", "correct")])


def test_correct_label_set_ox_barn_fence(tmp_path, space):
    store = build_store(
        tmp_path,
        space,
        [("img1", OX)],
        verdicts=[("img1", OX, "correct"), ("img1", BARN, "correct"), ("img1", FENCE, "correct")],
    )
    assert correct_label_set("img1", store) == {OX, BARN, FENCE}


def test_correct_label_set_singleton(tmp_path, space):
    store = build_store(tmp_path, space, [("img1", OX)])
    assert correct_label_set("img1", store) == {OX}


def test_correct_label_set_unclear_included(tmp_path, space):
    store = build_store(tmp_path, space, [("img1", OX)], verdicts=[("img1", BARN, "unclear")])
    assert correct_label_set("img1", store) == {OX, BARN}
    assert store.annotations["img1"].verdicts[BARN] is Verdict.UNCLEAR


def test_correct_label_set_original_marked_wrong(tmp_path, space):
    store = build_store(
        tmp_path,
        space,
        [("img1", OX)],
        verdicts=[("img1", OX, "wrong"), ("img1", BARN, "correct")],
    )
    assert correct_label_set("img1", store) == {BARN}


def test_correct_label_set_unknown_image(tmp_path, space):
    store = build_store(tmp_path, space, [("img1", OX)])
    with pytest.raises(UnknownImage):
        correct_label_set("ghost", store)


def test_row_order_independence(tmp_path, space):
    rows = [
        ("img1", OX, "correct"),
        ("img1", BARN, "correct"),
        ("img1", FENCE, "unclear"),
        ("img2", OTHER, "wrong"),
    ]
    originals = [("img1", OX), ("img2", OX)]
    base = build_store(tmp_path, space, originals, verdicts=rows)
    expected = {img: correct_label_set(img, base) for img in ("img1", "img2")}

    rng = random.Random(0)
    for trial in range(5):
        shuffled = rows[:]
        rng.shuffle(shuffled)
        sub = tmp_path / f"t{trial}"
        sub.mkdir()
        store = build_store(sub, space, originals, verdicts=shuffled)
        assert {img: correct_label_set(img, store) for img in ("img1", "img2")} == expected


def test_real_labels_loaded(tmp_path, space):
    store = build_store(
        tmp_path,
        space,
        [("img1", OX)],
        real=[("val1", OX), ("val1", BARN), ("val2", FENCE)],
    )
    assert store.real_labels == {"val1": frozenset({OX, BARN}), "val2": frozenset({FENCE})}
