"""The two-level sidewalk vocabulary and time-ranged annotations.

Six top-level categories fan out into 68 leaf elements.  The leaf
"Trunck" keeps its original spelling for dataset compatibility; "Trunk"
is accepted as an alias on input.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import uuid
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidAnnotations
from .instance import ANNOTATIONS_FILE, Instance, ValidationReport

_CATEGORIES: list[tuple[str, list[str]]] = [
    ("Adjacent road type", [
        "Motorway / highway",
        "None",
        "Residential",
        "Service",
    ]),
    ("Obstacles", [
        "Aerial vegetation",
        "Barrier",
        "Bench",
        "Bike rack",
        "Black ice",
        "Bus stop",
        "Car barrier",
        "Construction material",
        "Dirt",
        "Fence",
        "Fire hydrant",
        "Floor standing board",
        "Garage entrance",
        "Ground light",
        "Ground vegetation",
        "Manhole cover",
        "Newsstand",
        "Parked vehicle",
        "Parking booth",
        "Person",
        "Pole",
        "Potted plant",
        "Puddle",
        "Rock",
        "Snow",
        "Telephone booth",
        "Traffic cone",
        "Transit sign",
        "Trash can",
        "Tree leaves",
        "Trunck",
        "Water channel",
        "Water fountain",
    ]),
    ("Pavement condition", [
        "Broken",
        "Corrugation",
        "Cracked",
        "Detached",
        "Patching",
        "Pothole",
    ]),
    ("Sidewalk geometry", [
        "Height difference",
        "Narrow",
        "Steep",
    ]),
    ("Sidewalk structure", [
        "Bioswale",
        "Curb ramp",
        "Footbridge",
        "Friction strip",
        "Grate",
        "Ramp",
        "Stairs",
        "Tactile paving",
    ]),
    ("Surface type", [
        "Asphalt",
        "Bluestone",
        "Brick",
        "Coating",
        "Cobblestone",
        "Concrete",
        "Concrete with aggregates",
        "Grass",
        "Gravel",
        "Large pavers",
        "Red brick",
        "Slab",
        "Stone pavement",
        "Tiles",
    ]),
]

ALIASES = {("Obstacles", "Trunk"): "Trunck"}


@dataclass(frozen=True)
class TaxonomyCategory:
    name: str
    elements: tuple[str, ...]


@dataclass(frozen=True)
class Taxonomy:
    categories: tuple[TaxonomyCategory, ...]

    @property
    def leaf_count(self) -> int:
        return sum(len(c.elements) for c in self.categories)

    def category(self, name: str) -> TaxonomyCategory | None:
        for c in self.categories:
            if c.name == name:
                return c
        return None

    def resolve(self, category: str, element: str) -> str | None:
        """Canonical leaf name if (category, element) exists, else None."""
        c = self.category(category)
        if c is None:
            return None
        element = ALIASES.get((category, element), element)
        return element if element in c.elements else None

    def leaves(self) -> list[tuple[str, str]]:
        return [(c.name, e) for c in self.categories for e in c.elements]

    def to_dict(self) -> dict:
        return {"categories": [{"name": c.name, "elements": list(c.elements)}
                               for c in self.categories]}

    def checksum(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_taxonomy() -> Taxonomy:
    return Taxonomy(tuple(TaxonomyCategory(name, tuple(elements))
                          for name, elements in _CATEGORIES))


# --- annotations ---------------------------------------------------------------


@dataclass
class Annotation:
    id: str
    instance_id: str
    t_start_ms: int
    t_end_ms: int
    category: str
    element: str
    note: str = ""
    author: str = ""
    created_at: int = 0  # wall-clock ms

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "instance_id": self.instance_id,
            "t_start_ms": self.t_start_ms,
            "t_end_ms": self.t_end_ms,
            "category": self.category,
            "element": self.element,
            "note": self.note,
            "author": self.author,
            "created_at": self.created_at,
        }

    @staticmethod
    def from_dict(d: dict) -> "Annotation":
        return Annotation(
            id=str(d.get("id") or uuid.uuid4()),
            instance_id=str(d.get("instance_id", "")),
            t_start_ms=int(d["t_start_ms"]),
            t_end_ms=int(d["t_end_ms"]),
            category=str(d.get("category", "")),
            element=str(d.get("element", "")),
            note=str(d.get("note", "")),
            author=str(d.get("author", "")),
            created_at=int(d.get("created_at", 0)),
        )


def validate_annotations(anns: list[Annotation], inst: Instance | None,
                         tax: Taxonomy | None = None) -> ValidationReport:
    """Report every violated annotation invariant.

    inst may be None when only vocabulary checks are wanted (no span
    information available).
    """
    tax = tax or load_taxonomy()
    report = ValidationReport()
    seen_ids: set[str] = set()
    for i, a in enumerate(anns):
        where = f"annotation[{i}] (id={a.id})"
        if a.id in seen_ids:
            report.add("error", "id.duplicate", f"{where}: duplicate id")
        seen_ids.add(a.id)
        if a.t_start_ms >= a.t_end_ms:
            report.add("error", "interval.invalid",
                       f"{where}: t_end_ms must exceed t_start_ms")
        elif inst is not None:
            start = inst.metadata.start_epoch_ms
            stop = inst.metadata.stop_epoch_ms
            if a.t_start_ms < start or a.t_end_ms > stop:
                report.add("error", "interval.range",
                           f"{where}: [{a.t_start_ms}, {a.t_end_ms}) outside "
                           f"instance span [{start}, {stop})")
        if inst is not None and a.instance_id and a.instance_id != inst.instance_id:
            report.add("error", "instance.mismatch",
                       f"{where}: targets {a.instance_id!r}, "
                       f"not {inst.instance_id!r}")
        if tax.resolve(a.category, a.element) is None:
            report.add("error", "taxonomy.mismatch",
                       f"{where}: {a.category!r} / {a.element!r} is not in "
                       "the taxonomy")
    return report


@dataclass
class AnnotationStats:
    total: int
    per_category: dict[str, int]
    per_leaf: dict[str, int]                # "Category/Leaf" -> count
    covered_ms_per_leaf: dict[str, int]     # union of intervals, no double count


def _union_length_ms(intervals: list[tuple[int, int]]) -> int:
    total = 0
    end = None
    for a, b in sorted(intervals):
        if end is None or a > end:
            total += b - a
            end = b
        elif b > end:
            total += b - end
            end = b
    return total


def annotation_stats(anns: list[Annotation], tax: Taxonomy | None = None
                     ) -> AnnotationStats:
    """Counts and covered time per category and leaf."""
    tax = tax or load_taxonomy()
    report = validate_annotations(anns, None, tax)
    if not report.passed:
        raise InvalidAnnotations("; ".join(e.message for e in report.errors))
    per_category: dict[str, int] = {c.name: 0 for c in tax.categories}
    per_leaf: dict[str, int] = {}
    intervals: dict[str, list[tuple[int, int]]] = {}
    for a in anns:
        leaf = tax.resolve(a.category, a.element)
        key = f"{a.category}/{leaf}"
        per_category[a.category] += 1
        per_leaf[key] = per_leaf.get(key, 0) + 1
        intervals.setdefault(key, []).append((a.t_start_ms, a.t_end_ms))
    covered = {key: _union_length_ms(iv) for key, iv in intervals.items()}
    return AnnotationStats(total=len(anns), per_category=per_category,
                           per_leaf=per_leaf, covered_ms_per_leaf=covered)


# --- persistence ------------------------------------------------------------------


def annotations_path(instance_dir: str | Path) -> Path:
    return Path(instance_dir) / ANNOTATIONS_FILE


def read_annotations(instance_dir: str | Path) -> list[Annotation]:
    path = annotations_path(instance_dir)
    if not path.is_file():
        return []
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise InvalidAnnotations("annotations.json must hold an array")
    return [Annotation.from_dict(d) for d in raw]


def write_annotations(instance_dir: str | Path, anns: list[Annotation]) -> Path:
    """Atomically replace annotations.json (readers see old or new, whole)."""
    path = annotations_path(instance_dir)
    payload = json.dumps([a.to_dict() for a in anns], indent=2,
                         ensure_ascii=False) + "\n"
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=".annotations-",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
