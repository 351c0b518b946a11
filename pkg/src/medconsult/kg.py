"""Multi-modal medical knowledge graph: CSV loader, alias index, and queries.

The graph is read from a directory of UTF-8 CSV tables (one file per entity
kind, relation columns on the diseases table, ``|`` separating multi-valued
cells) and is immutable after load. Image locators attached to drugs make the
graph multi-modal; they are carried as opaque URIs and never fetched at load
time.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (
    AssetMissing,
    DanglingReference,
    DuplicateId,
    EmptySymptomSet,
    InvalidTable,
    ManifestMismatch,
    MissingTable,
    OrphanSymptom,
    UnknownEntity,
    WrongKind,
)
from .text import normalize

EntityId = str


class EntityKind(Enum):
    DISEASE = "disease"
    SYMPTOM = "symptom"
    EXAMINATION = "examination"
    DRUG = "drug"
    FOOD = "food"
    DEPARTMENT = "department"
    IMAGE = "image"


# Table name -> (filename, kind, required). Diseases carry the relation columns.
_ENTITY_TABLES = [
    ("symptoms.csv", EntityKind.SYMPTOM, ("id", "name", "aliases"), True),
    ("examinations.csv", EntityKind.EXAMINATION, ("id", "name", "aliases"), False),
    ("drugs.csv", EntityKind.DRUG, ("id", "name", "aliases", "image_uris"), False),
    ("foods.csv", EntityKind.FOOD, ("id", "name"), False),
    ("departments.csv", EntityKind.DEPARTMENT, ("id", "name"), False),
]

_DISEASE_COLUMNS = (
    "id",
    "name",
    "department",
    "symptoms",
    "examinations",
    "drugs",
    "foods_avoid",
    "description",
)


@dataclass(frozen=True)
class Entity:
    id: EntityId
    kind: EntityKind
    name: str


@dataclass(frozen=True)
class AliasEntry:
    """One normalized surface form pointing at an entity, with a match prior."""

    surface: str
    entity: EntityId
    weight: float


@dataclass(frozen=True)
class DrugImage:
    drug: EntityId
    image_uri: str


@dataclass(frozen=True)
class DiseaseRecord:
    id: EntityId
    name: str
    department: EntityId
    symptoms: frozenset[EntityId]
    examinations: tuple[EntityId, ...]
    drugs: tuple[EntityId, ...]
    foods_avoid: tuple[EntityId, ...]
    description: str = ""


@dataclass
class KnowledgeGraph:
    """Validated, immutable-after-load view of one graph directory.

    ``aliases`` maps a normalized surface to its entries sorted by
    (weight desc, entity id asc); ``stats`` holds per-kind entity counts with
    images counted per attachment row.
    """

    source: str
    entities: dict[EntityId, Entity]
    diseases: dict[EntityId, DiseaseRecord]
    aliases: dict[str, list[AliasEntry]]
    images: dict[EntityId, list[DrugImage]]
    stats: dict[EntityKind, int] = field(default_factory=dict)

    def entity(self, entity_id: EntityId) -> Entity:
        ent = self.entities.get(entity_id)
        if ent is None:
            raise UnknownEntity(f"unknown entity id: {entity_id!r}")
        return ent

    def name_of(self, entity_id: EntityId) -> str:
        return self.entity(entity_id).name

    def kind_of(self, entity_id: EntityId) -> EntityKind:
        return self.entity(entity_id).kind

    def require_kind(self, entity_id: EntityId, kind: EntityKind) -> Entity:
        ent = self.entity(entity_id)
        if ent.kind is not kind:
            raise WrongKind(f"{entity_id!r} is a {ent.kind.value}, expected {kind.value}")
        return ent

    def disease(self, disease_id: EntityId) -> DiseaseRecord:
        self.require_kind(disease_id, EntityKind.DISEASE)
        return self.diseases[disease_id]

    def max_alias_length(self) -> int:
        return max((len(s) for s in self.aliases), default=0)


def _split_multi(cell: str) -> list[str]:
    return [part.strip() for part in cell.split("|") if part.strip()]


def _read_table(path: Path, columns: tuple[str, ...]) -> list[dict[str, str]]:
    try:
        with path.open("r", encoding="utf-8-sig", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise InvalidTable(f"{path.name}: empty file, header row required")
            header = tuple(name.strip() for name in reader.fieldnames)
            if header != columns:
                raise InvalidTable(
                    f"{path.name}: header {header} does not match required columns {columns}"
                )
            rows = []
            for row in reader:
                rows.append({key: (value or "").strip() for key, value in row.items() if key})
            return rows
    except UnicodeDecodeError as exc:
        raise InvalidTable(f"{path.name}: not valid UTF-8 ({exc})") from exc


def load_kg(
    source: str | Path,
    *,
    asset_root: str | Path | None = None,
    validate_assets: bool = False,
) -> KnowledgeGraph:
    """Load and validate a graph directory.

    Requires at least ``diseases.csv`` and ``symptoms.csv``. Every relation
    endpoint must exist with the declared kind, every disease needs a
    non-empty symptom set, and every symptom must be reachable from at least
    one disease. When ``manifest.json`` is present its per-kind counts are
    cross-checked against the recomputed stats.

    With ``validate_assets`` set, relative image locators must exist under
    ``asset_root``; remote URLs are never touched.
    """
    src = Path(source)
    if not src.is_dir():
        raise MissingTable(f"graph directory not found: {src}")

    entities: dict[EntityId, Entity] = {}
    aliases_raw: dict[str, dict[EntityId, float]] = {}
    images: dict[EntityId, list[DrugImage]] = {}

    def add_entity(entity_id: str, kind: EntityKind, name: str, where: str) -> None:
        if not entity_id:
            raise InvalidTable(f"{where}: empty id")
        if not name:
            raise InvalidTable(f"{where}: empty name for id {entity_id!r}")
        if entity_id in entities:
            raise DuplicateId(f"{where}: duplicate entity id {entity_id!r}")
        entities[entity_id] = Entity(entity_id, kind, name)

    def add_alias(surface: str, entity_id: str, weight: float) -> None:
        norm = normalize(surface)
        if not norm:
            return
        bucket = aliases_raw.setdefault(norm, {})
        bucket[entity_id] = max(weight, bucket.get(entity_id, 0.0))

    for filename, kind, columns, required in _ENTITY_TABLES:
        path = src / filename
        if not path.exists():
            if required:
                raise MissingTable(f"required table missing: {filename}")
            continue
        for lineno, row in enumerate(_read_table(path, columns), start=2):
            where = f"{filename}:{lineno}"
            add_entity(row["id"], kind, row["name"], where)
            add_alias(row["name"], row["id"], 1.0)
            for alias in _split_multi(row.get("aliases", "")):
                add_alias(alias, row["id"], 1.0)
            if kind is EntityKind.DRUG:
                for uri in _split_multi(row.get("image_uris", "")):
                    images.setdefault(row["id"], []).append(DrugImage(row["id"], uri))

    diseases_path = src / "diseases.csv"
    if not diseases_path.exists():
        raise MissingTable("required table missing: diseases.csv")

    diseases: dict[EntityId, DiseaseRecord] = {}

    def check_ref(ref: str, kind: EntityKind, where: str) -> str:
        ent = entities.get(ref)
        if ent is None or ent.kind is not kind:
            raise DanglingReference(f"{where}: reference to unknown {kind.value} id {ref!r}")
        return ref

    for lineno, row in enumerate(_read_table(diseases_path, _DISEASE_COLUMNS), start=2):
        where = f"diseases.csv:{lineno}"
        add_entity(row["id"], EntityKind.DISEASE, row["name"], where)
        add_alias(row["name"], row["id"], 1.0)
        symptoms = _split_multi(row["symptoms"])
        if not symptoms:
            raise EmptySymptomSet(f"{where}: disease {row['id']!r} lists no symptoms")
        record = DiseaseRecord(
            id=row["id"],
            name=row["name"],
            department=check_ref(row["department"], EntityKind.DEPARTMENT, where),
            symptoms=frozenset(check_ref(s, EntityKind.SYMPTOM, where) for s in symptoms),
            examinations=tuple(
                check_ref(e, EntityKind.EXAMINATION, where) for e in _split_multi(row["examinations"])
            ),
            drugs=tuple(check_ref(d, EntityKind.DRUG, where) for d in _split_multi(row["drugs"])),
            foods_avoid=tuple(
                check_ref(f, EntityKind.FOOD, where) for f in _split_multi(row["foods_avoid"])
            ),
            description=row["description"],
        )
        diseases[record.id] = record

    used_symptoms = {s for rec in diseases.values() for s in rec.symptoms}
    for ent in entities.values():
        if ent.kind is EntityKind.SYMPTOM and ent.id not in used_symptoms:
            raise OrphanSymptom(
                f"symptom {ent.id!r} is not referenced by any disease and could never be elicited"
            )

    alias_index = {
        surface: sorted(
            (AliasEntry(surface, entity_id, weight) for entity_id, weight in bucket.items()),
            key=lambda entry: (-entry.weight, entry.entity),
        )
        for surface, bucket in aliases_raw.items()
    }

    stats = {kind: 0 for kind in EntityKind}
    for ent in entities.values():
        stats[ent.kind] += 1
    stats[EntityKind.IMAGE] = sum(len(lst) for lst in images.values())

    kg = KnowledgeGraph(
        source=str(src),
        entities=entities,
        diseases=diseases,
        aliases=alias_index,
        images=images,
        stats=stats,
    )

    manifest_path = src / "manifest.json"
    if manifest_path.exists():
        _check_manifest(kg, manifest_path)

    if validate_assets:
        _check_assets(kg, Path(asset_root) if asset_root else src)

    return kg


def _check_manifest(kg: KnowledgeGraph, manifest_path: Path) -> None:
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InvalidTable(f"manifest.json: unreadable ({exc})") from exc
    counts = manifest.get("counts", manifest)
    if not isinstance(counts, dict):
        raise InvalidTable("manifest.json: expected an object of per-kind counts")
    by_name = {kind.value: kg.stats[kind] for kind in EntityKind}
    for key, expected in counts.items():
        if key not in by_name:
            raise ManifestMismatch(f"manifest.json: unknown kind {key!r}")
        if by_name[key] != expected:
            raise ManifestMismatch(
                f"manifest.json: {key} count is {by_name[key]}, manifest says {expected}"
            )


def _check_assets(kg: KnowledgeGraph, asset_root: Path) -> None:
    for image_list in kg.images.values():
        for image in image_list:
            if "://" in image.image_uri:
                continue
            if not (asset_root / image.image_uri).exists():
                raise AssetMissing(
                    f"image asset {image.image_uri!r} not found under {asset_root}"
                )


def export_kg(kg: KnowledgeGraph, target: str | Path) -> Path:
    """Write the graph back out in the table schema; rows sorted by id.

    Reloading the exported directory yields a graph equal to the original in
    entities, relations, and stats (explicit aliases are preserved; canonical
    self-aliases are re-derived by the loader).
    """
    out = Path(target)
    out.mkdir(parents=True, exist_ok=True)

    def entities_of(kind: EntityKind) -> list[Entity]:
        return sorted(
            (e for e in kg.entities.values() if e.kind is kind), key=lambda e: e.id
        )

    def explicit_aliases(ent: Entity) -> str:
        surfaces = [
            entry.surface
            for surface, entries in sorted(kg.aliases.items())
            for entry in entries
            if entry.entity == ent.id and surface != normalize(ent.name)
        ]
        return "|".join(surfaces)

    def write(filename: str, header: tuple[str, ...], rows: list[tuple[str, ...]]) -> None:
        with (out / filename).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)

    write(
        "symptoms.csv",
        ("id", "name", "aliases"),
        [(e.id, e.name, explicit_aliases(e)) for e in entities_of(EntityKind.SYMPTOM)],
    )
    write(
        "examinations.csv",
        ("id", "name", "aliases"),
        [(e.id, e.name, explicit_aliases(e)) for e in entities_of(EntityKind.EXAMINATION)],
    )
    write(
        "drugs.csv",
        ("id", "name", "aliases", "image_uris"),
        [
            (
                e.id,
                e.name,
                explicit_aliases(e),
                "|".join(img.image_uri for img in kg.images.get(e.id, [])),
            )
            for e in entities_of(EntityKind.DRUG)
        ],
    )
    write("foods.csv", ("id", "name"), [(e.id, e.name) for e in entities_of(EntityKind.FOOD)])
    write(
        "departments.csv",
        ("id", "name"),
        [(e.id, e.name) for e in entities_of(EntityKind.DEPARTMENT)],
    )
    write(
        "diseases.csv",
        _DISEASE_COLUMNS,
        [
            (
                rec.id,
                rec.name,
                rec.department,
                "|".join(sorted(rec.symptoms)),
                "|".join(rec.examinations),
                "|".join(rec.drugs),
                "|".join(rec.foods_avoid),
                rec.description,
            )
            for rec in sorted(kg.diseases.values(), key=lambda r: r.id)
        ],
    )
    return out


def lookup_alias(kg: KnowledgeGraph, surface: str) -> list[tuple[EntityId, float]]:
    """All alias entries whose surface equals the (already normalized) query.

    Sorted by weight descending, then entity id ascending; empty when unknown.
    """
    return [(entry.entity, entry.weight) for entry in kg.aliases.get(surface, [])]


def diseases_with_symptom(kg: KnowledgeGraph, symptom: EntityId) -> set[EntityId]:
    """Exactly the diseases whose symptom set contains ``symptom``."""
    kg.require_kind(symptom, EntityKind.SYMPTOM)
    return {rec.id for rec in kg.diseases.values() if symptom in rec.symptoms}


def drug_images(kg: KnowledgeGraph, drug: EntityId) -> list[DrugImage]:
    """All images for a drug in file order; possibly empty."""
    kg.require_kind(drug, EntityKind.DRUG)
    return list(kg.images.get(drug, []))
