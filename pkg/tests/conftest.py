"""Shared fixtures: the bundled demo graph plus builders for custom graphs."""

from __future__ import annotations

import csv
import random
from pathlib import Path

import pytest

from medconsult.kg import KnowledgeGraph, load_kg
from medconsult.resources import fixture_graph_dir

FIXTURE_DIR = fixture_graph_dir()


@pytest.fixture(scope="session")
def fixture_kg() -> KnowledgeGraph:
    return load_kg(FIXTURE_DIR)


def write_graph(
    target: Path,
    diseases: dict[str, dict],
    symptom_aliases: dict[str, list[str]] | None = None,
    drug_images: dict[str, list[str]] | None = None,
) -> Path:
    """Write a minimal graph directory from a disease spec.

    ``diseases`` maps id -> {symptoms: [...], department?, examinations?,
    drugs?, foods_avoid?, name?}. Symptom/exam/drug/food/department tables are
    derived from whatever the diseases reference, so the result always has
    referential integrity unless the caller injects extras.
    """
    symptom_aliases = symptom_aliases or {}
    drug_images = drug_images or {}
    target.mkdir(parents=True, exist_ok=True)

    symptoms: list[str] = []
    exams: list[str] = []
    drugs: list[str] = []
    foods: list[str] = []
    departments: list[str] = []
    for spec in diseases.values():
        for s in spec["symptoms"]:
            if s not in symptoms:
                symptoms.append(s)
        for e in spec.get("examinations", []):
            if e not in exams:
                exams.append(e)
        for d in spec.get("drugs", []):
            if d not in drugs:
                drugs.append(d)
        for f in spec.get("foods_avoid", []):
            if f not in foods:
                foods.append(f)
        dept = spec.get("department", "general")
        if dept not in departments:
            departments.append(dept)

    def name_of(entity_id: str) -> str:
        return entity_id.replace("_", " ")

    def write(filename: str, header: list[str], rows: list[list[str]]) -> None:
        with (target / filename).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)

    write(
        "symptoms.csv",
        ["id", "name", "aliases"],
        [[s, name_of(s), "|".join(symptom_aliases.get(s, []))] for s in symptoms],
    )
    write("examinations.csv", ["id", "name", "aliases"], [[e, name_of(e), ""] for e in exams])
    write(
        "drugs.csv",
        ["id", "name", "aliases", "image_uris"],
        [[d, name_of(d), "", "|".join(drug_images.get(d, []))] for d in drugs],
    )
    write("foods.csv", ["id", "name"], [[f, name_of(f)] for f in foods])
    write("departments.csv", ["id", "name"], [[d, name_of(d)] for d in departments])
    write(
        "diseases.csv",
        ["id", "name", "department", "symptoms", "examinations", "drugs", "foods_avoid", "description"],
        [
            [
                did,
                spec.get("name", name_of(did)),
                spec.get("department", "general"),
                "|".join(spec["symptoms"]),
                "|".join(spec.get("examinations", [])),
                "|".join(spec.get("drugs", [])),
                "|".join(spec.get("foods_avoid", [])),
                spec.get("description", ""),
            ]
            for did, spec in diseases.items()
        ],
    )
    return target


def random_disease_spec(
    rng: random.Random, n_diseases: int, n_symptoms: int
) -> dict[str, dict]:
    """Random disease/symptom structure with every symptom used at least once."""
    pool = [f"s{i:03d}" for i in range(n_symptoms)]
    diseases: dict[str, dict] = {}
    for i in range(n_diseases):
        k = rng.randint(1, max(1, min(n_symptoms, 5)))
        diseases[f"d{i:03d}"] = {"symptoms": sorted(rng.sample(pool, k))}
    used = {s for spec in diseases.values() for s in spec["symptoms"]}
    leftovers = [s for s in pool if s not in used]
    disease_ids = sorted(diseases)
    for s in leftovers:
        diseases[rng.choice(disease_ids)]["symptoms"].append(s)
    for spec in diseases.values():
        spec["symptoms"] = sorted(set(spec["symptoms"]))
    return diseases


def build_random_graph(tmp_path: Path, n_diseases: int, n_symptoms: int, seed: int) -> KnowledgeGraph:
    rng = random.Random(seed)
    spec = random_disease_spec(rng, n_diseases, n_symptoms)
    return load_kg(write_graph(tmp_path, spec))
