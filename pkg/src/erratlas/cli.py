"""Command-line surface: validate, extract-pairs, classify, report, compare, gen-fixture.

The analysis path is fully deterministic; all randomness lives behind the
explicit seed of gen-fixture. classify soft-fails on per-image data gaps
(warning rows in errors.csv) and hard-fails on structural problems.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .cascade import (
    CascadeConfig,
    ClassifyResult,
    ErrorCategory,
    Mode,
    classify_model,
    read_records_csv,
    write_records_csv,
)
from .cooccurrence import extract_pairs, write_pairs_csv
from .errors import ErratlasError
from .fixtures import WorldParams, generate_world
from .label_space import superclass_stats
from .manifest import (
    AssetManifest,
    build_context,
    load_manifest,
    verify_checksums,
)
from .metrics import (
    ALL,
    GROUPS,
    compare_categorizations,
    load_expert_csv,
    load_models_manifest,
    mla_from_tallies,
    mla_tallies,
    report_from_parts,
    write_accuracy_csv,
    write_confusion_csv,
    write_report_csv,
)
from .trend import trend_fit, write_fits_csv


def _load_predictions_csv(path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.reader(f):
            if row:
                out[row[0]] = row[1]
    return out


def _manifest_from_args(args) -> AssetManifest:
    manifest = load_manifest(args.manifest)
    if args.verify:
        verify_checksums(manifest)
    return manifest


def _config_from_args(args, manifest: AssetManifest) -> CascadeConfig:
    mode = Mode(args.mode) if args.mode else manifest.dataset_mode
    return CascadeConfig(mode=mode)


def cmd_validate(args) -> int:
    manifest = _manifest_from_args(args)
    ctx = build_context(manifest, _config_from_args(args, manifest)) if manifest.has("originals") else None
    if ctx is None:
        from .manifest import load_space

        space = load_space(manifest)
        store = None
    else:
        space, store = ctx.space, ctx.store

    print(f"mode: {manifest.dataset_mode.value}")
    print(f"classes: {len(space.classes)}")
    by_group: dict[str, int] = {}
    for info in space.classes.values():
        by_group[info.group.value] = by_group.get(info.group.value, 0) + 1
    print("groups: " + ", ".join(f"{g}={by_group.get(g, 0)}" for g in GROUPS))
    print(f"overlap accepted pairs (incl. reflexive): {len(space.overlap_accepts)}")

    stats = superclass_stats(space)
    print(
        f"superclasses: {stats.count} (sizes {stats.min_size}..{stats.max_size}, "
        f"mean {stats.mean_size:.1f}, median {stats.median_size:g}); "
        f"{stats.unclassified} classes unclassified"
    )
    for g in GROUPS:
        gs = stats.per_group[g]
        print(f"  {g}: {gs.count} superclasses, mean size {gs.mean_size:.1f}")
    print(f"hypernym nodes: {len(space.hypernym_parents)}")

    if store is not None:
        n_prob = sum(1 for a in store.annotations.values() if a.problematic)
        print(
            f"annotated images: {len(store.annotations)} "
            f"({n_prob} problematic, {len(store.non_prototypical)} non-prototypical)"
        )
        if store.real_labels:
            print(f"full-set multi-label images: {len(store.real_labels)}")
    else:
        print("annotations: not listed in manifest (taxonomy-only validation)")
    print("OK")
    return 0


def cmd_extract_pairs(args) -> int:
    manifest = _manifest_from_args(args)
    from .manifest import load_space, load_store

    space = load_space(manifest)
    store = load_store(manifest, space)
    if not store.real_labels:
        print("error: manifest lists no real_labels file", file=sys.stderr)
        return 1
    extraction = extract_pairs(store.real_labels, set(store.annotations), space)
    write_pairs_csv(args.out, extraction)
    print(
        f"raw pairs: {extraction.raw_pair_count} from "
        f"{extraction.multi_label_image_count} multi-label images; "
        f"{len(extraction.pairs)} survive filtering -> {args.out}"
    )
    return 0


def cmd_classify(args) -> int:
    manifest = _manifest_from_args(args)
    ctx = build_context(manifest, _config_from_args(args, manifest))
    pred_paths = sorted(Path(p) for p in glob.glob(args.predictions))
    if not pred_paths:
        print(f"error: no prediction files match {args.predictions!r}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .manifest import sha256_of

    manifest_digest = sha256_of(manifest.path)

    def run_one(path: Path) -> ClassifyResult:
        model = path.stem
        predictions = _load_predictions_csv(path)
        result = classify_model(model, predictions, ctx)
        write_records_csv(out_dir / f"{model}.records.csv", result.records)
        tallies = mla_tallies(predictions, ctx.store)
        summary = {
            "model": model,
            "correct": result.correct,
            "evaluated": result.evaluated,
            "top1_acc": result.correct / result.evaluated if result.evaluated else 0.0,
            "mla": mla_from_tallies(tallies),
            "missing_predictions": result.missing_predictions,
            "extra_predictions": result.extra_predictions,
            "skipped": result.skipped,
            "per_class": {c: list(t) for c, t in sorted(tallies.items())},
            "manifest_sha256": manifest_digest,
        }
        with open(out_dir / f"{model}.summary.json", "w", encoding="utf-8") as f:
            json.dump(summary, f, indent=1, sort_keys=True)
            f.write("\n")
        return result

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_one, pred_paths))
    else:
        results = [run_one(p) for p in pred_paths]

    warnings = []
    for res in results:
        for img, reason in res.skipped:
            warnings.append((res.model, img, reason))
        for img in res.missing_predictions:
            warnings.append((res.model, img, "no prediction for annotated image"))
    with open(out_dir / "errors.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["model", "image_id", "warning"])
        for row in sorted(warnings):
            w.writerow(row)

    total_records = sum(len(r.records) for r in results)
    print(f"{len(results)} models classified; {total_records} records -> {out_dir}")
    if warnings:
        print(f"{len(warnings)} warnings -> {out_dir / 'errors.csv'}")
    return 0


def cmd_report(args) -> int:
    manifest = _manifest_from_args(args)
    from .manifest import load_space, load_store

    space = load_space(manifest)
    store = load_store(manifest, space)
    metas = load_models_manifest(args.models) if args.models else {}

    records_dir = Path(args.records)
    record_files = sorted(records_dir.glob("*.records.csv"))
    if not record_files:
        print(f"error: no *.records.csv under {records_dir}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    for rf in record_files:
        model = rf.name[: -len(".records.csv")]
        records = read_records_csv(rf)
        summary_path = records_dir / f"{model}.summary.json"
        if summary_path.exists():
            with open(summary_path, encoding="utf-8") as f:
                summary = json.load(f)
            top1, mla = summary["top1_acc"], summary["mla"]
        else:
            top1 = mla = float("nan")
        meta = metas.get(model)
        if args.models and meta is None:
            from .errors import MissingMeta

            raise MissingMeta(f"no ModelMeta for {model!r} in {args.models}")
        reports.append(report_from_parts(model, records, top1, mla, meta, space, store))

    write_report_csv(out_dir / "report.csv", reports)
    write_accuracy_csv(out_dir / "accuracy.csv", reports)

    fits = {}
    for group in (ALL, *GROUPS):
        pts = [(r.mla, r.cells[group][ErrorCategory.MODEL_FAILURE].portion) for r in reports]
        if len(pts) >= 3:
            try:
                fits[f"mlf_of_mle_vs_mla_{group}"] = trend_fit(pts, split_at=args.split_at)
            except ErratlasError:
                pass
    if fits:
        write_fits_csv(out_dir / "fits.csv", fits)
    from .manifest import sha256_of

    with open(out_dir / "provenance.json", "w", encoding="utf-8") as f:
        json.dump(
            {
                "manifest_sha256": sha256_of(manifest.path),
                "records_dir": str(records_dir),
                "fit_weighting": "each model weighted equally",
            },
            f,
            indent=1,
            sort_keys=True,
        )
        f.write("\n")
    print(f"{len(reports)} model reports -> {out_dir}")
    return 0


def cmd_compare(args) -> int:
    records = []
    for path in sorted(glob.glob(args.records)):
        records.extend(read_records_csv(Path(path)))
    expert = load_expert_csv(args.expert)
    matrix = compare_categorizations(records, expert)
    write_confusion_csv(args.out, matrix)
    print(f"{matrix.total()} shared records -> {args.out}")
    for e in matrix.expert_categories:
        row = " ".join(f"{matrix.cell(e, a):5d}" for a in matrix.auto_categories)
        print(f"  {e:22s} {row}")
    return 0


def cmd_gen_fixture(args) -> int:
    params = WorldParams(n_per_category=args.per_category, n_models=args.models_count)
    world = generate_world(args.seed, args.out, params)
    print(
        f"world seed={args.seed}: {world.class_count} classes, "
        f"{len(world.truth)} images, models: {', '.join(world.model_names)} -> {world.root}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="erratlas", description=__doc__)
    parser.add_argument("--version", action="version", version=f"erratlas {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--manifest", default=None, help="manifest path (default: $ERRATLAS_ASSETS/manifest.json)")
        p.add_argument("--verify", action="store_true", help="verify manifest checksums before loading")
        p.add_argument("--mode", choices=[m.value for m in Mode], default=None, help="override dataset mode")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers (output is schedule-independent)")

    p = sub.add_parser("validate", help="load all listed assets and run invariant checks")
    add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("extract-pairs", help="mine co-occurrence pairs from full-set multi-labels")
    add_common(p)
    p.add_argument("--out", required=True, help="output pairs CSV")
    p.set_defaults(func=cmd_extract_pairs)

    p = sub.add_parser("classify", help="run the error cascade for each prediction file")
    add_common(p)
    p.add_argument("--predictions", required=True, help="glob of per-model prediction CSVs")
    p.add_argument("--out", required=True, help="output directory for records/summaries")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", help="aggregate records into per-model reports and trend fits")
    add_common(p)
    p.add_argument("--records", required=True, help="directory with *.records.csv (+ summaries)")
    p.add_argument("--models", default=None, help="models manifest JSON with metadata")
    p.add_argument("--split-at", type=float, default=None, help="x split for two-segment trend fits")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("compare", help="confusion matrix of expert vs engine categories")
    add_common(p)
    p.add_argument("--records", required=True, help="glob of records CSVs")
    p.add_argument("--expert", required=True, help="expert categorization CSV")
    p.add_argument("--out", required=True, help="output matrix CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen-fixture", help="generate a deterministic planted-error world")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--per-category", type=int, default=3, help="plantings per outcome")
    p.add_argument("--models-count", type=int, default=2, help="synthetic models to emit")
    p.set_defaults(func=cmd_gen_fixture)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ErratlasError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
