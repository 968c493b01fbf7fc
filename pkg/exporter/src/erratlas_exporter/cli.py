"""CLI wrapper: erratlas-export --eval-images DIR --ref-images DIR ..."""

from __future__ import annotations

import argparse
import sys

from .jobs import ExportJob, export_all


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="erratlas-export", description=__doc__)
    p.add_argument("--model", action="append", required=True, dest="models",
                   help="classifier spec, repeatable (stub:<name> | torchvision:<arch>[@weights.pt])")
    p.add_argument("--eval-images", required=True, help="flat directory, file stem = image id")
    p.add_argument("--ref-images", required=True, help="directory of <label_id>/ image folders")
    p.add_argument("--labels", required=True, help="engine labels.json")
    p.add_argument("--hypernyms", required=True, help="engine hypernyms.csv")
    p.add_argument("--synset-names", default=None, help="optional synsets.csv for non-class names")
    p.add_argument("--eval-labels", default=None, help="optional image_id,label_id ground-truth CSV")
    p.add_argument("--embedder", default="stub:dim=32",
                   help="embedding backend (stub:dim=<d> | open_clip:<model>/<tag>)")
    p.add_argument("--prompt", default="a photo of a {}.", help="text prompt template")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output asset directory")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        model_specs=args.models,
        eval_image_root=args.eval_images,
        ref_image_root=args.ref_images,
        labels_path=args.labels,
        hypernyms_path=args.hypernyms,
        out_dir=args.out,
        synset_names_path=args.synset_names,
        eval_labels_path=args.eval_labels,
        embedding_model=args.embedder,
        prompt_template=args.prompt,
        seed=args.seed,
    )
    manifest = export_all(job)
    print(f"assets -> {manifest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
