"""Tour of the bundled label space: groups, overlap, superclasses, hypernyms.

Run: python demos/01_taxonomy_tour.py
"""

from erratlas import (
    ancestors_below_common,
    direct_siblings,
    is_overlap_correct,
    load_bundled_label_space,
    shares_superclass,
    superclass_stats,
)

space = load_bundled_label_space()

print(f"{len(space.classes)} classes loaded")
by_group = {}
for info in space.classes.values():
    by_group[info.group.value] = by_group.get(info.group.value, 0) + 1
print("group split:", by_group)

# ---------------------------------------------------------------------------
# The overlap relation is directed: a prediction naming a superset or an
# equivalent of the label is accepted, the reverse is not.
# ---------------------------------------------------------------------------
african_elephant, tusker = "n02504458", "n01871265"
print("\ntusker accepted for african elephant :", is_overlap_correct(african_elephant, tusker, space))
print("african elephant accepted for tusker :", is_overlap_correct(tusker, african_elephant, space))

# ---------------------------------------------------------------------------
# Superclasses group visually confusable classes; membership is many-to-many.
# ---------------------------------------------------------------------------
cornet, french_horn = "n03110669", "n03394916"
boston_bull, chihuahua = "n02096585", "n02085620"
print("\ncornet ~ french horn (brass)         :", shares_superclass(cornet, french_horn, space))
print("boston bull ~ chihuahua (toy dogs)   :", shares_superclass(boston_bull, chihuahua, space))

stats = superclass_stats(space)
print(
    f"\ncatalogue: {stats.count} superclasses, sizes {stats.min_size}..{stats.max_size}, "
    f"mean {stats.mean_size:.1f}, median {stats.median_size:g}, "
    f"{stats.unclassified} classes in none"
)
for group, gs in stats.per_group.items():
    print(f"  {group:8s} {gs.count:3d} superclasses, mean size {gs.mean_size:.1f}")

# ---------------------------------------------------------------------------
# Hypernym queries behind the out-of-vocabulary proposals: siblings of the
# prediction plus its ancestors below the first one shared with the label.
# Non-class synsets (possible OOV proposals) get their names from synsets.csv.
# ---------------------------------------------------------------------------
import csv

from erratlas.label_space import bundled_asset_dir

with open(bundled_asset_dir() / "synsets.csv", newline="") as f:
    extra_names = dict(csv.reader(f))

def name(sid):
    return space.classes[sid].name if sid in space.classes else extra_names.get(sid, sid)

rock_beauty, coral_reef = "n02606052", "n09256479"
print("\nsiblings(rock beauty)                :", sorted(map(name, direct_siblings(rock_beauty, space))))
print(
    "ancestors below common w/ coral reef :",
    sorted(map(name, ancestors_below_common(rock_beauty, coral_reef, space))),
)
