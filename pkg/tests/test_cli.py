import csv
import hashlib
import json

import pytest

from erratlas.cli import main
from erratlas.fixtures import generate_world
from erratlas.label_space import bundled_asset_dir


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def world(tmp_path):
    return generate_world(21, tmp_path / "world")


def records_bytes(out_dir):
    return {
        p.name: p.read_bytes() for p in sorted(out_dir.glob("*.records.csv"))
    }


def test_validate_bundled_assets(capsys):
    assert run("validate", "--manifest", bundled_asset_dir() / "manifest.json", "--verify") == 0
    out = capsys.readouterr().out
    assert "superclasses: 161" in out
    assert "organism: 50 superclasses, mean size 9.8" in out
    assert "artifact: 101 superclasses, mean size 5.3" in out
    assert "74 classes unclassified" in out
    assert "OK" in out


def test_validate_world(world, capsys):
    assert run("validate", "--manifest", world.manifest_path, "--verify") == 0
    assert "OK" in capsys.readouterr().out


def test_validate_checksum_mismatch(world, capsys):
    (world.root / "labels.json").write_text(
        (world.root / "labels.json").read_text() + "\n", encoding="utf-8"
    )
    assert run("validate", "--manifest", world.manifest_path, "--verify") == 1
    assert "ChecksumMismatch" in capsys.readouterr().err


def test_validate_imagenet_a_manifest_without_multilabel(tmp_path, world, capsys):
    manifest = json.loads(world.manifest_path.read_text())
    manifest["dataset_mode"] = "imagenet-a"
    for key in ("multilabel", "non_prototypical"):
        manifest["files"].pop(key)
    manifest.pop("checksums")
    path = world.root / "manifest_a.json"
    path.write_text(json.dumps(manifest), encoding="utf-8")
    assert run("validate", "--manifest", path) == 0
    assert "mode: imagenet-a" in capsys.readouterr().out


def test_extract_pairs_cmd(world, tmp_path, capsys):
    out = tmp_path / "pairs.csv"
    assert run("extract-pairs", "--manifest", world.manifest_path, "--out", out) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["a", "b", "count"]
    n_spurious = world.params.n_per_category
    assert len(rows) - 1 == n_spurious  # one mined pair per spurious planting


def test_classify_jobs_byte_identical(world, tmp_path):
    out1, out8 = tmp_path / "o1", tmp_path / "o8"
    glob = str(world.root / "predictions" / "*.csv")
    assert run("classify", "--manifest", world.manifest_path, "--predictions", glob, "--out", out1, "--jobs", 1) == 0
    assert run("classify", "--manifest", world.manifest_path, "--predictions", glob, "--out", out8, "--jobs", 8) == 0
    assert records_bytes(out1) == records_bytes(out8)
    assert (out1 / "errors.csv").read_bytes() == (out8 / "errors.csv").read_bytes()


def test_classify_recovers_planted_counts(world, tmp_path):
    out = tmp_path / "records"
    glob = str(world.root / "predictions" / "*.csv")
    assert run("classify", "--manifest", world.manifest_path, "--predictions", glob, "--out", out) == 0
    from erratlas.cascade import read_records_csv

    for model in world.model_names:
        records = read_records_csv(out / f"{model}.records.csv")
        got = {}
        for r in records:
            got[r.category.value] = got.get(r.category.value, 0) + 1
        planted = {}
        for outcome in world.truth.values():
            if outcome not in ("correct", "problematic"):
                planted[outcome] = planted.get(outcome, 0) + 1
        assert got == planted


def test_classify_soft_fails_on_missing_embedding(world, tmp_path, capsys):
    # drop one OOV evaluation embedding: row skipped, exit stays 0
    from erratlas.embeddings import read_embeddings, write_embeddings

    m = read_embeddings(world.root / "eval.emb", world.root / "eval.ids")
    oov_imgs = [img for img, outcome in sorted(world.truth.items()) if outcome == "fine_grained_oov"]
    keep = [i for i, img in enumerate(m.ids) if img != oov_imgs[0]]
    write_embeddings(
        world.root / "eval.emb",
        world.root / "eval.ids",
        [m.ids[i] for i in keep],
        m.unit_vectors[keep].astype("float32"),
    )
    manifest = json.loads(world.manifest_path.read_text())
    manifest.pop("checksums")
    world.manifest_path.write_text(json.dumps(manifest), encoding="utf-8")

    out = tmp_path / "records"
    glob = str(world.root / "predictions" / "*.csv")
    assert run("classify", "--manifest", world.manifest_path, "--predictions", glob, "--out", out) == 0
    errors = (out / "errors.csv").read_text()
    assert oov_imgs[0] in errors
    assert "warnings" in capsys.readouterr().out


def test_report_cmd(world, tmp_path):
    records = tmp_path / "records"
    out = tmp_path / "report"
    glob = str(world.root / "predictions" / "*.csv")
    assert run("classify", "--manifest", world.manifest_path, "--predictions", glob, "--out", records) == 0
    assert (
        run(
            "report",
            "--manifest",
            world.manifest_path,
            "--records",
            records,
            "--models",
            world.root / "models.json",
            "--out",
            out,
        )
        == 0
    )
    report_rows = list(csv.reader((out / "report.csv").open()))
    assert report_rows[0] == ["model", "group", "category", "count", "denominator", "portion"]
    # 2 models x 4 groups x 7 categories
    assert len(report_rows) - 1 == len(world.model_names) * 4 * 7
    acc_rows = list(csv.reader((out / "accuracy.csv").open()))
    assert len(acc_rows) - 1 == len(world.model_names)


def test_compare_cmd_diagonal(world, tmp_path):
    records_dir = tmp_path / "records"
    glob = str(world.root / "predictions" / "*.csv")
    run("classify", "--manifest", world.manifest_path, "--predictions", glob, "--out", records_dir)
    from erratlas.cascade import read_records_csv

    model = world.model_names[0]
    records = read_records_csv(records_dir / f"{model}.records.csv")
    expert = tmp_path / "expert.csv"
    with open(expert, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["model", "image_id", "category"])
        for r in records:
            w.writerow([r.model, r.image, r.category.value])
    out = tmp_path / "matrix.csv"
    assert run("compare", "--records", records_dir / f"{model}.records.csv", "--expert", expert, "--out", out) == 0
    rows = list(csv.reader(out.open()))
    header = rows[0][1:-1]
    body = {row[0]: row[1:-1] for row in rows[1:-1]}
    for cat, counts in body.items():
        for name, value in zip(header, counts):
            if name == cat:
                assert int(value) > 0
            else:
                assert int(value) == 0


def test_manifest_defaults_to_env_var(world, monkeypatch, capsys):
    monkeypatch.setenv("ERRATLAS_ASSETS", str(world.root))
    assert run("validate") == 0
    assert "OK" in capsys.readouterr().out


def test_summary_carries_manifest_digest(world, tmp_path):
    import hashlib as h

    out = tmp_path / "records"
    glob = str(world.root / "predictions" / "*.csv")
    run("classify", "--manifest", world.manifest_path, "--predictions", glob, "--out", out)
    summary = json.loads((out / f"{world.model_names[0]}.summary.json").read_text())
    expected = h.sha256(world.manifest_path.read_bytes()).hexdigest()
    assert summary["manifest_sha256"] == expected


def test_gen_fixture_cmd_deterministic(tmp_path):
    out1, out2 = tmp_path / "w1", tmp_path / "w2"
    assert run("gen-fixture", "--seed", 13, "--out", out1) == 0
    assert run("gen-fixture", "--seed", 13, "--out", out2) == 0
    h = lambda p: {q.relative_to(p).as_posix(): hashlib.sha256(q.read_bytes()).hexdigest() for q in sorted(p.rglob("*")) if q.is_file()}
    assert h(out1) == h(out2)
