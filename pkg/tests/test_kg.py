"""Loader validation, alias lookup, graph queries, and round-trip export."""

from __future__ import annotations

import csv
import json
import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from medconsult.errors import (
    DanglingReference,
    DuplicateId,
    EmptySymptomSet,
    ManifestMismatch,
    MissingTable,
    OrphanSymptom,
    UnknownEntity,
    WrongKind,
)
from medconsult.kg import (
    EntityKind,
    diseases_with_symptom,
    drug_images,
    export_kg,
    load_kg,
    lookup_alias,
)
from medconsult.text import normalize

from conftest import FIXTURE_DIR, write_graph


def recount_fixture_tables() -> dict[str, int]:
    """Independent count oracle: parse the CSV files directly."""

    def rows(filename):
        with (FIXTURE_DIR / filename).open(newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))

    return {
        "symptom": len(rows("symptoms.csv")),
        "examination": len(rows("examinations.csv")),
        "drug": len(rows("drugs.csv")),
        "food": len(rows("foods.csv")),
        "department": len(rows("departments.csv")),
        "disease": len(rows("diseases.csv")),
        "image": sum(
            len([u for u in r["image_uris"].split("|") if u.strip()])
            for r in rows("drugs.csv")
        ),
    }


class TestLoad:
    def test_fixture_counts_match_manifest_and_recount(self, fixture_kg):
        manifest = json.loads((FIXTURE_DIR / "manifest.json").read_text())["counts"]
        recount = recount_fixture_tables()
        stats = {kind.value: n for kind, n in fixture_kg.stats.items()}
        assert recount == manifest
        for key, expected in manifest.items():
            assert stats[key] == expected

    def test_stats_equal_recomputed_counts(self, fixture_kg):
        by_kind = {kind: 0 for kind in EntityKind}
        for ent in fixture_kg.entities.values():
            by_kind[ent.kind] += 1
        by_kind[EntityKind.IMAGE] = sum(len(v) for v in fixture_kg.images.values())
        assert fixture_kg.stats == by_kind

    def test_dangling_symptom_reference_reports_row(self, tmp_path):
        write_graph(tmp_path, {"d1": {"symptoms": ["s1"]}})
        diseases = tmp_path / "diseases.csv"
        diseases.write_text(
            diseases.read_text().replace("s1", "ghost").replace("ghost,s1", "s1"),
            encoding="utf-8",
        )
        with pytest.raises(DanglingReference) as err:
            load_kg(tmp_path)
        assert "diseases.csv:2" in str(err.value)
        assert "ghost" in str(err.value)

    def test_missing_required_table(self, tmp_path):
        write_graph(tmp_path, {"d1": {"symptoms": ["s1"]}})
        (tmp_path / "symptoms.csv").unlink()
        with pytest.raises(MissingTable):
            load_kg(tmp_path)

    def test_duplicate_id_rejected(self, tmp_path):
        write_graph(tmp_path, {"d1": {"symptoms": ["s1"]}})
        with (tmp_path / "symptoms.csv").open("a", encoding="utf-8") as fh:
            fh.write("s1,s1 again,\n")
        with pytest.raises(DuplicateId):
            load_kg(tmp_path)

    def test_empty_symptom_set_rejected(self, tmp_path):
        write_graph(tmp_path, {"d1": {"symptoms": ["s1"]}})
        diseases = tmp_path / "diseases.csv"
        text = diseases.read_text().replace("s1\n", "\n").replace(",s1,", ",,")
        diseases.write_text(text, encoding="utf-8")
        with pytest.raises(EmptySymptomSet):
            load_kg(tmp_path)

    def test_orphan_symptom_rejected(self, tmp_path):
        write_graph(tmp_path, {"d1": {"symptoms": ["s1"]}})
        with (tmp_path / "symptoms.csv").open("a", encoding="utf-8") as fh:
            fh.write("lonely,lonely symptom,\n")
        with pytest.raises(OrphanSymptom):
            load_kg(tmp_path)

    def test_manifest_mismatch_rejected(self, tmp_path):
        write_graph(tmp_path, {"d1": {"symptoms": ["s1"]}})
        (tmp_path / "manifest.json").write_text('{"counts": {"disease": 99}}')
        with pytest.raises(ManifestMismatch):
            load_kg(tmp_path)

    def test_roundtrip_export_load(self, fixture_kg, tmp_path):
        export_kg(fixture_kg, tmp_path)
        again = load_kg(tmp_path)
        assert set(again.entities) == set(fixture_kg.entities)
        assert again.diseases == fixture_kg.diseases
        assert again.stats == fixture_kg.stats
        assert again.aliases == fixture_kg.aliases
        assert again.images == fixture_kg.images

    @pytest.mark.skipif(
        "MEDCONSULT_FULL_KG_DIR" not in os.environ,
        reason="full graph dump not bundled; set MEDCONSULT_FULL_KG_DIR to run",
    )
    def test_full_graph_dump_stats(self):
        kg = load_kg(os.environ["MEDCONSULT_FULL_KG_DIR"])
        assert kg.stats[EntityKind.SYMPTOM] == 8808
        assert kg.stats[EntityKind.EXAMINATION] == 3353
        assert kg.stats[EntityKind.DRUG] == 17318
        assert kg.stats[EntityKind.FOOD] == 366
        assert kg.stats[EntityKind.IMAGE] == 3770


class TestAliasLookup:
    def test_canonical_name_is_self_alias_weight_one(self, fixture_kg):
        assert lookup_alias(fixture_kg, "gastritis") == [("gastritis", 1.0)]

    def test_shared_surface_deterministic_order(self, fixture_kg):
        # "upset stomach" is an alias of both gassralgia and nausea; ties on
        # weight resolve by ascending entity id.
        assert lookup_alias(fixture_kg, "upset stomach") == [
            ("gassralgia", 1.0),
            ("nausea", 1.0),
        ]

    def test_unknown_surface_empty(self, fixture_kg):
        assert lookup_alias(fixture_kg, "definitely not a thing") == []

    def test_ordering_is_total(self, fixture_kg):
        for entries in fixture_kg.aliases.values():
            keys = [(-e.weight, e.entity) for e in entries]
            assert keys == sorted(keys)
            assert len(set(keys)) == len(keys)

    @given(st.text(max_size=40))
    def test_normalization_idempotent(self, raw):
        assert normalize(normalize(raw)) == normalize(raw)


class TestQueries:
    def test_paper_trio_for_stomachache(self, fixture_kg):
        entity = lookup_alias(fixture_kg, normalize("stomachache"))[0][0]
        assert diseases_with_symptom(fixture_kg, entity) == {
            "gastritis",
            "gastric_cancer",
            "gastric_ulcer",
        }

    def test_single_disease_symptom_by_brute_force(self, fixture_kg):
        # Independent oracle: scan the CSV directly for symptom membership.
        with (FIXTURE_DIR / "diseases.csv").open(newline="", encoding="utf-8") as fh:
            expected = {
                row["id"]
                for row in csv.DictReader(fh)
                if "jaundice" in row["symptoms"].split("|")
            }
        assert diseases_with_symptom(fixture_kg, "jaundice") == expected == {"hepatitis_a"}

    def test_every_disease_reachable_from_each_symptom(self, fixture_kg):
        for rec in fixture_kg.diseases.values():
            for sym in rec.symptoms:
                assert rec.id in diseases_with_symptom(fixture_kg, sym)

    def test_wrong_kind(self, fixture_kg):
        with pytest.raises(WrongKind):
            diseases_with_symptom(fixture_kg, "omeprazole")

    def test_unknown_entity(self, fixture_kg):
        with pytest.raises(UnknownEntity):
            diseases_with_symptom(fixture_kg, "nope")


class TestDrugImages:
    def test_two_rows_in_file_order(self, fixture_kg):
        uris = [img.image_uri for img in drug_images(fixture_kg, "tegafur")]
        assert uris == ["assets/tegafur_box.png", "assets/tegafur_blister.png"]

    def test_drug_without_images(self, fixture_kg):
        assert drug_images(fixture_kg, "zolpidem") == []

    def test_unknown_drug(self, fixture_kg):
        with pytest.raises(UnknownEntity):
            drug_images(fixture_kg, "unobtainium")

    def test_wrong_kind(self, fixture_kg):
        with pytest.raises(WrongKind):
            drug_images(fixture_kg, "gastritis")
