"""End-to-end pipeline on a generated world with known planted outcomes.

Run: python demos/03_planted_world_pipeline.py
"""

import csv
import tempfile
from collections import Counter
from pathlib import Path

from erratlas import classify_model, generate_world, load_manifest, build_context
from erratlas.cascade import severity_audit
from erratlas.metrics import load_models_manifest, model_report

workdir = Path(tempfile.mkdtemp(prefix="erratlas_demo_"))
world = generate_world(seed=42, out_dir=workdir / "world")
print(f"world written to {world.root} ({world.class_count} classes, {len(world.truth)} images)")

ctx = build_context(load_manifest(world.manifest_path))
model = world.model_names[0]
with open(world.root / "predictions" / f"{model}.csv", newline="") as f:
    predictions = dict(csv.reader(f))

result = classify_model(model, predictions, ctx)
print(f"\n{model}: {result.correct} correct, {len(result.records)} records")

# every record carries the least severe applicable explanation
assert all(severity_audit(r, ctx) == [] for r in result.records)

planted = Counter(o for o in world.truth.values() if o not in ("correct", "problematic"))
recovered = Counter(r.category.value for r in result.records)
print(f"\n{'category':24s} {'planted':>8s} {'recovered':>10s}")
for category in sorted(planted):
    print(f"{category:24s} {planted[category]:8d} {recovered[category]:10d}")
assert planted == recovered

metas = load_models_manifest(world.root / "models.json")
report = model_report(model, result.records, predictions, metas[model], ctx.space, ctx.store)
print(f"\ntop-1 accuracy : {report.top1_acc:.3f}")
print(f"multi-label acc: {report.mla:.3f}")
print(f"model failures : {report.mlf_portion_of_mle:.1%} of multi-label errors")
for group in ("organism", "artifact", "other"):
    mle = report.multi_label_errors[group]
    print(f"  {group:8s} {mle:3d} multi-label errors")
