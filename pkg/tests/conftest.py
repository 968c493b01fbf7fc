import csv
import json

import pytest

from erratlas.label_space import LabelSpace, load_bundled_label_space, load_label_space


def write_space_files(
    tmp_path,
    classes,
    overlap=None,
    superclasses=None,
    hypernyms=None,
):
    """Write the four taxonomy files and return their paths.

    classes: list of (id, name, group); hypernyms: list of (child, parent).
    """
    labels = tmp_path / "labels.json"
    labels.write_text(
        json.dumps([{"id": s, "name": n, "group": g} for s, n, g in classes]),
        encoding="utf-8",
    )
    ov = tmp_path / "overlap.json"
    ov.write_text(json.dumps(overlap or {"equivalent": [], "contains": []}), encoding="utf-8")
    sc = tmp_path / "superclasses.json"
    sc.write_text(json.dumps(superclasses or {}), encoding="utf-8")
    hy = tmp_path / "hypernyms.csv"
    with open(hy, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        for child, parent in hypernyms or []:
            w.writerow([child, parent])
    return labels, ov, sc, hy


def make_space(tmp_path, classes, overlap=None, superclasses=None, hypernyms=None, strict=False) -> LabelSpace:
    paths = write_space_files(tmp_path, classes, overlap, superclasses, hypernyms)
    return load_label_space(*paths, strict_imagenet=strict)


@pytest.fixture(scope="session")
def bundled_space() -> LabelSpace:
    return load_bundled_label_space()


@pytest.fixture
def tiny_space(tmp_path) -> LabelSpace:
    """Six classes, two superclasses, a small DAG with a two-parent node.

    DAG:  r00000000 is the root; p1/p2 are internal nodes.
      a,b -> p1 -> root;  c -> p2 -> root;  d -> p1 and p2;  e,f -> root
    """
    classes = [
        ("a00000001", "alpha", "organism"),
        ("b00000002", "beta", "organism"),
        ("c00000003", "gamma", "artifact"),
        ("d00000004", "delta", "artifact"),
        ("e00000005", "epsilon", "other"),
        ("f00000006", "zeta", "other"),
    ]
    superclasses = {
        "first": ["a00000001", "b00000002"],
        "second": ["c00000003", "d00000004"],
        "wide": ["b00000002", "c00000003"],
    }
    hypernyms = [
        ("p00000001", "r00000000"),
        ("p00000002", "r00000000"),
        ("a00000001", "p00000001"),
        ("b00000002", "p00000001"),
        ("c00000003", "p00000002"),
        ("d00000004", "p00000001"),
        ("d00000004", "p00000002"),
        ("e00000005", "r00000000"),
        ("f00000006", "r00000000"),
    ]
    overlap = {
        "equivalent": [["e00000005", "f00000006"]],
        "contains": [{"superset": "a00000001", "subsets": ["b00000002"]}],
    }
    return make_space(tmp_path, classes, overlap, superclasses, hypernyms)
