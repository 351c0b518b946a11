"""Dynamic symptom selection and staged treatment reasoning.

Each elicitation round picks the unknown symptom shared by the most suspected
diseases, so one answer rules out as many diseases as possible. Suspected
means the disease's symptom set intersects the confirmed set (all diseases
while nothing is confirmed yet). When only one suspect remains, or no unknown
symptom is left to ask, the round diagnoses instead.

All outcomes are deterministic: every tie breaks on the lowest entity id, so
the result never depends on dict iteration order. ``oracle_select`` recomputes
the same outcome by brute-force enumeration and exists for tests only.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InconsistentEvidence, UnknownEntity
from .kg import DrugImage, EntityId, KnowledgeGraph, drug_images


@dataclass(frozen=True)
class Ask:
    symptom: EntityId


@dataclass(frozen=True)
class Diagnose:
    disease: EntityId
    # True when the diagnosis fell out of exhaustion over >= 2 suspects (no
    # unknown symptom separates them); dialogue may hedge its phrasing.
    ambiguous: bool = False


@dataclass(frozen=True)
class Undecidable:
    candidates: frozenset[EntityId]


SelectionOutcome = Ask | Diagnose | Undecidable


@dataclass(frozen=True)
class TreatmentPlan:
    disease: EntityId
    examinations: tuple[EntityId, ...]
    drugs: tuple[tuple[EntityId, tuple[DrugImage, ...]], ...]
    foods_avoid: tuple[EntityId, ...]


def _check_evidence(confirmed: set[EntityId], denied: set[EntityId]) -> None:
    overlap = confirmed & denied
    if overlap:
        raise InconsistentEvidence(
            f"symptoms both confirmed and denied: {sorted(overlap)}"
        )


def select_next_symptom(
    kg: KnowledgeGraph,
    confirmed: set[EntityId],
    denied: set[EntityId],
) -> SelectionOutcome:
    """One round of greedy symptom selection.

    Builds the unknown-symptom -> suspected-diseases index and asks the
    symptom with the longest disease list. A single remaining suspect is
    diagnosed directly; with no unknown symptom left the suspect with the
    largest confirmed overlap wins. Undecidable only occurs when nothing is
    confirmed and every symptom has already been denied.
    """
    _check_evidence(confirmed, denied)

    ordered = sorted(kg.diseases)
    if confirmed:
        suspected = [d for d in ordered if kg.diseases[d].symptoms & confirmed]
        if not suspected:
            # Evidence names no known disease; start over from the full set.
            suspected = ordered
    else:
        suspected = ordered

    if len(suspected) == 1:
        return Diagnose(suspected[0])

    known = confirmed | denied
    shared: dict[EntityId, list[EntityId]] = {}
    for did in suspected:
        for sym in sorted(kg.diseases[did].symptoms):
            if sym not in known:
                shared.setdefault(sym, []).append(did)

    if not shared:
        if not confirmed:
            return Undecidable(frozenset(suspected))
        best = min(
            suspected,
            key=lambda d: (-len(kg.diseases[d].symptoms & confirmed), d),
        )
        return Diagnose(best, ambiguous=len(suspected) >= 2)

    ask = min(shared, key=lambda s: (-len(shared[s]), s))
    return Ask(ask)


def oracle_select(
    kg: KnowledgeGraph,
    confirmed: set[EntityId],
    denied: set[EntityId],
) -> SelectionOutcome:
    """Brute-force reference for select_next_symptom (tests only).

    Enumerates every (disease, symptom) pair with plain loops and explicit
    comparisons; no shared indexes or shortcuts.
    """
    for sym in confirmed:
        for other in denied:
            if sym == other:
                raise InconsistentEvidence(f"symptom {sym!r} both confirmed and denied")

    suspected: list[EntityId] = []
    for did in sorted(kg.diseases):
        if not confirmed:
            suspected.append(did)
            continue
        intersects = False
        for sym in kg.diseases[did].symptoms:
            for got in confirmed:
                if sym == got:
                    intersects = True
        if intersects:
            suspected.append(did)
    if confirmed and not suspected:
        suspected = sorted(kg.diseases)

    if len(suspected) == 1:
        return Diagnose(suspected[0])

    all_symptoms: set[EntityId] = set()
    for did in suspected:
        for sym in kg.diseases[did].symptoms:
            all_symptoms.add(sym)

    best_symptom: EntityId | None = None
    best_count = 0
    for sym in sorted(all_symptoms):
        if sym in confirmed or sym in denied:
            continue
        count = 0
        for did in suspected:
            if sym in kg.diseases[did].symptoms:
                count += 1
        if count > best_count or (count == best_count and count > 0 and sym < best_symptom):
            best_symptom = sym
            best_count = count

    if best_symptom is not None:
        return Ask(best_symptom)

    if not confirmed:
        return Undecidable(frozenset(suspected))

    best_disease: EntityId | None = None
    best_overlap = -1
    for did in suspected:
        overlap = 0
        for sym in kg.diseases[did].symptoms:
            if sym in confirmed:
                overlap += 1
        if overlap > best_overlap or (overlap == best_overlap and did < best_disease):
            best_disease = did
            best_overlap = overlap
    return Diagnose(best_disease, ambiguous=len(suspected) >= 2)


def plan_treatment(kg: KnowledgeGraph, disease: EntityId) -> TreatmentPlan:
    """Examinations, drugs (with their images), and foods to avoid for a
    disease, in knowledge-graph file order."""
    if disease not in kg.diseases:
        raise UnknownEntity(f"unknown disease id: {disease!r}")
    rec = kg.diseases[disease]
    return TreatmentPlan(
        disease=disease,
        examinations=rec.examinations,
        drugs=tuple((d, tuple(drug_images(kg, d))) for d in rec.drugs),
        foods_avoid=rec.foods_avoid,
    )


def unresolved_pairs(
    kg: KnowledgeGraph,
    suspected: set[EntityId],
    confirmed: set[EntityId],
    denied: set[EntityId],
) -> int:
    """Count of (suspected disease, unknown symptom) pairs; the progress
    measure that every answered question strictly shrinks."""
    known = confirmed | denied
    return sum(
        len(kg.diseases[d].symptoms - known) for d in suspected if d in kg.diseases
    )


def suspected_diseases(kg: KnowledgeGraph, confirmed: set[EntityId]) -> set[EntityId]:
    if not confirmed:
        return set(kg.diseases)
    hits = {d for d, rec in kg.diseases.items() if rec.symptoms & confirmed}
    return hits or set(kg.diseases)
