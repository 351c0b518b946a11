"""Simulated-patient benchmark harness and synthetic graph generation.

The simulated patient is truthful: it opens by naming one (seeded) random
symptom of its hidden disease and answers each yes/no question exactly by
membership in the hidden disease's symptom set, volunteering nothing else.
The benchmark measures rounds-to-diagnosis and diagnosis accuracy of the
selection policy, end to end through the dialogue engine.
"""

from __future__ import annotations

import json
import math
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from .crm import Phase
from .dialogue import ConsultationEngine
from .errors import InfeasibleSpec, InvalidSpec
from .kg import EntityId, KnowledgeGraph, load_kg


@dataclass
class SimulatedPatient:
    """Answers consistently with ``hidden_disease`` for the whole session."""

    kg: KnowledgeGraph
    hidden_disease: EntityId
    rng: random.Random

    def opening(self) -> str:
        symptoms = sorted(self.kg.diseases[self.hidden_disease].symptoms)
        return self.kg.name_of(self.rng.choice(symptoms))

    def answer(self, symptom: EntityId) -> str:
        return "yes" if symptom in self.kg.diseases[self.hidden_disease].symptoms else "no"


@dataclass
class RunResult:
    run: int
    hidden: EntityId
    diagnosed: EntityId | None
    rounds: int
    correct: bool


@dataclass
class BenchReport:
    graph: dict
    seed: int
    runs: int
    accuracy: float
    mean_rounds: float
    median_rounds: float
    max_rounds: int
    rounds: list[int]
    results: list[RunResult] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_document(self) -> dict:
        return {
            "graph": self.graph,
            "seed": self.seed,
            "runs": self.runs,
            "accuracy": self.accuracy,
            "mean_rounds": self.mean_rounds,
            "median_rounds": self.median_rounds,
            "max_rounds": self.max_rounds,
            "rounds": self.rounds,
            "results": [
                {
                    "run": r.run,
                    "hidden": r.hidden,
                    "diagnosed": r.diagnosed,
                    "rounds": r.rounds,
                    "correct": r.correct,
                }
                for r in self.results
            ],
            "warnings": self.warnings,
        }

    def to_json(self) -> str:
        return json.dumps(
            self.to_document(), sort_keys=True, ensure_ascii=False, separators=(",", ":")
        )

    def table(self) -> str:
        lines = [
            f"runs: {self.runs}  seed: {self.seed}",
            f"accuracy: {self.accuracy:.4f}",
            f"rounds: mean {self.mean_rounds:.2f}  median {self.median_rounds:.1f}  max {self.max_rounds}",
        ]
        for warning in self.warnings:
            lines.append(f"warning: {warning}")
        lines.append(f"{'run':>5} {'hidden':<24} {'diagnosed':<24} {'rounds':>6} ok")
        for r in self.results[:50]:
            lines.append(
                f"{r.run:>5} {r.hidden:<24} {str(r.diagnosed):<24} {r.rounds:>6} "
                f"{'y' if r.correct else 'n'}"
            )
        if len(self.results) > 50:
            lines.append(f"... ({len(self.results) - 50} more rows)")
        return "\n".join(lines)


def simulate_session(
    engine: ConsultationEngine, patient: SimulatedPatient
) -> tuple[int, EntityId | None]:
    """Run one full consultation; returns (rounds to diagnosis, diagnosis)."""
    state = engine.new_session()
    transcript: list = []
    engine.step(state, transcript, patient.opening())
    rounds = 1
    limit = len({s for rec in engine.kg.diseases.values() for s in rec.symptoms}) + 2
    while state.phase is Phase.ELICITATION:
        if rounds > limit:
            raise RuntimeError(
                f"elicitation did not terminate within {limit} rounds "
                f"(hidden {patient.hidden_disease})"
            )
        pending = state.pending_symptom
        if pending is None:
            engine.step(state, transcript, patient.opening())
        else:
            engine.step(state, transcript, patient.answer(pending))
        rounds += 1
    return rounds, state.confirmed_disease


def duplicate_symptom_sets(kg: KnowledgeGraph) -> list[tuple[EntityId, EntityId]]:
    seen: dict[frozenset, EntityId] = {}
    duplicates = []
    for did in sorted(kg.diseases):
        key = kg.diseases[did].symptoms
        if key in seen:
            duplicates.append((seen[key], did))
        else:
            seen[key] = did
    return duplicates


def bench(graph_dir: str | Path, runs: int, seed: int) -> BenchReport:
    """Seeded benchmark: draws a hidden disease uniformly per run and replays
    a full truthful-patient session; fully determined by (graph, runs, seed)."""
    if runs < 1:
        raise InvalidSpec("runs must be >= 1")
    kg = load_kg(graph_dir)
    engine = ConsultationEngine(kg)
    disease_ids = sorted(kg.diseases)

    warnings = [
        f"diseases {a} and {b} share an identical symptom set; "
        "they cannot be told apart"
        for a, b in duplicate_symptom_sets(kg)
    ]

    results: list[RunResult] = []
    for run in range(runs):
        rng = random.Random(seed * 1_000_003 + run)
        hidden = rng.choice(disease_ids)
        patient = SimulatedPatient(kg, hidden, rng)
        rounds, diagnosed = simulate_session(engine, patient)
        results.append(RunResult(run, hidden, diagnosed, rounds, diagnosed == hidden))

    rounds_list = [r.rounds for r in results]
    symptom_count = len({s for rec in kg.diseases.values() for s in rec.symptoms})
    return BenchReport(
        graph={
            "source": str(graph_dir),
            "diseases": len(kg.diseases),
            "symptoms": symptom_count,
        },
        seed=seed,
        runs=runs,
        accuracy=sum(r.correct for r in results) / runs,
        mean_rounds=statistics.fmean(rounds_list),
        median_rounds=statistics.median(rounds_list),
        max_rounds=max(rounds_list),
        rounds=rounds_list,
        results=results,
        warnings=warnings,
    )


def gen_graph(
    out_dir: str | Path,
    diseases: int,
    symptoms: int,
    per_disease: int,
    seed: int,
    distinct: bool = False,
) -> Path:
    """Write a synthetic graph directory in the standard table schema.

    Every disease receives exactly ``per_disease`` distinct symptoms sampled
    from a pool of ``symptoms``; only symptoms actually used are written, so
    the output always loads. With ``distinct`` set, symptom sets are
    rejection-sampled until pairwise distinct.
    """
    if diseases < 1 or symptoms < 1 or per_disease < 1:
        raise InvalidSpec("diseases, symptoms and per_disease must all be >= 1")
    if per_disease > symptoms:
        raise InvalidSpec(
            f"per_disease ({per_disease}) cannot exceed the symptom pool ({symptoms})"
        )
    if distinct and diseases > math.comb(symptoms, per_disease):
        raise InfeasibleSpec(
            f"cannot draw {diseases} pairwise-distinct {per_disease}-subsets "
            f"from {symptoms} symptoms (only {math.comb(symptoms, per_disease)} exist)"
        )

    rng = random.Random(seed)
    width = max(3, len(str(symptoms - 1)), len(str(diseases - 1)))
    symptom_ids = [f"s{i:0{width}d}" for i in range(symptoms)]

    sets: list[tuple[str, ...]] = []
    seen: set[tuple[str, ...]] = set()
    for _ in range(diseases):
        while True:
            chosen = tuple(sorted(rng.sample(symptom_ids, per_disease)))
            if not distinct or chosen not in seen:
                break
        seen.add(chosen)
        sets.append(chosen)

    used = sorted({s for chosen in sets for s in chosen})
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def write(filename: str, header: str, rows: list[str]) -> None:
        (out / filename).write_text("\n".join([header] + rows) + "\n", encoding="utf-8")

    write(
        "symptoms.csv",
        "id,name,aliases",
        [f"{sid},symptom {sid[1:]}," for sid in used],
    )
    write("examinations.csv", "id,name,aliases", [])
    write("drugs.csv", "id,name,aliases,image_uris", [])
    write("foods.csv", "id,name", [])
    write("departments.csv", "id,name", ["general,general medicine"])
    write(
        "diseases.csv",
        "id,name,department,symptoms,examinations,drugs,foods_avoid,description",
        [
            f"d{i:0{width}d},disease {i:0{width}d},general,{'|'.join(sets[i])},,,,"
            for i in range(diseases)
        ],
    )
    return out
