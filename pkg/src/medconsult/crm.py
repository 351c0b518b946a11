"""Central records memory: per-session store of entity triples and consultation state.

Each session owns one CrmState. Every patient turn appends one batch of
triples to the history, updates the confirmed/denied symptom map (first answer
wins), and narrows the candidate disease set. The phase only ever moves
forward through elicitation, examination, drug recommendation, and closed.
Snapshots are canonical JSON and restore losslessly.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from enum import Enum

from .errors import NotACandidate, SessionClosed, WrongPhase
from .kg import EntityId, EntityKind, KnowledgeGraph
from .nlu import LinkedEntity, Polarity


class Phase(Enum):
    ELICITATION = "Elicitation"
    EXAMINATION = "Examination"
    DRUG_RECOMMENDATION = "DrugRecommendation"
    CLOSED = "Closed"

    @property
    def order(self) -> int:
        return _PHASE_ORDER[self]


_PHASE_ORDER = {
    Phase.ELICITATION: 0,
    Phase.EXAMINATION: 1,
    Phase.DRUG_RECOMMENDATION: 2,
    Phase.CLOSED: 3,
}


class SymptomStatus:
    CONFIRMED = "confirmed"
    DENIED = "denied"
    # Unknown is implicit: absence from the status map.


# Closed relation vocabulary for history triples.
REL_SYMPTOM_CONFIRMED = "has_symptom_confirmed"
REL_SYMPTOM_DENIED = "has_symptom_denied"
REL_SUSPECTED = "suspected_disease"
REL_CONFIRMED_DISEASE = "confirmed_disease"
REL_EXAMINATION = "recommended_examination"
REL_DRUG = "recommended_drug"
REL_MENTIONED = "mentioned_entity"

RELATIONS = frozenset(
    {
        REL_SYMPTOM_CONFIRMED,
        REL_SYMPTOM_DENIED,
        REL_SUSPECTED,
        REL_CONFIRMED_DISEASE,
        REL_EXAMINATION,
        REL_DRUG,
        REL_MENTIONED,
    }
)

Triple = tuple[str, str, str]


@dataclass
class TurnTriples:
    turn: int
    triples: list[Triple] = field(default_factory=list)


@dataclass
class CrmState:
    session_id: str
    phase: Phase = Phase.ELICITATION
    symptom_status: dict[EntityId, str] = field(default_factory=dict)
    pending_symptom: EntityId | None = None
    asked_symptoms: set[EntityId] = field(default_factory=set)
    candidate_diseases: set[EntityId] = field(default_factory=set)
    confirmed_disease: EntityId | None = None
    recommended_examinations: list[EntityId] = field(default_factory=list)
    recommended_drugs: list[EntityId] = field(default_factory=list)
    history: list[TurnTriples] = field(default_factory=list)
    turn: int = 0
    diagnostics: dict[str, int] = field(default_factory=dict)

    def confirmed(self) -> set[EntityId]:
        return {s for s, st in self.symptom_status.items() if st == SymptomStatus.CONFIRMED}

    def denied(self) -> set[EntityId]:
        return {s for s, st in self.symptom_status.items() if st == SymptomStatus.DENIED}

    def status_of(self, symptom: EntityId) -> str | None:
        return self.symptom_status.get(symptom)


def new_session_id() -> str:
    return f"sess-{uuid.uuid4().hex}"


def session_id_from_seed(seed: int) -> str:
    """Deterministic session id, shared by the CLI and the HTTP service so
    identical scripted sessions can be compared byte-for-byte."""
    return f"sess-{uuid.uuid5(uuid.NAMESPACE_URL, f'medconsult:{seed}').hex}"


def new_session(kg: KnowledgeGraph, session_id: str | None = None) -> CrmState:
    """Fresh state: elicitation phase, turn 0, all diseases still candidates."""
    return CrmState(
        session_id=session_id or new_session_id(),
        candidate_diseases=set(kg.diseases),
    )


def record_entities(state: CrmState, linked: list[LinkedEntity], kg: KnowledgeGraph) -> CrmState:
    """Fold one turn's linked entities into the state.

    Affirmed symptoms become confirmed and denied ones denied, except that a
    recorded answer is never overwritten (first answer wins; later conflicts
    only bump the ``status_conflicts`` diagnostic). Every linked entity lands
    in the history as exactly one triple. Answering the pending symptom clears
    it; a denial of the pending symptom is remembered as an asked denial so
    candidate filtering may use it. The turn counter always advances.
    """
    if state.phase is Phase.CLOSED:
        raise SessionClosed(f"session {state.session_id} is closed")

    entry = TurnTriples(turn=state.turn)
    for item in linked:
        kind = kg.kind_of(item.entity)
        if kind is EntityKind.SYMPTOM:
            stated = (
                SymptomStatus.CONFIRMED
                if item.polarity == Polarity.AFFIRMED
                else SymptomStatus.DENIED
            )
            current = state.symptom_status.get(item.entity)
            if current is None:
                state.symptom_status[item.entity] = stated
            elif current != stated:
                state.diagnostics["status_conflicts"] = (
                    state.diagnostics.get("status_conflicts", 0) + 1
                )
            relation = (
                REL_SYMPTOM_CONFIRMED
                if item.polarity == Polarity.AFFIRMED
                else REL_SYMPTOM_DENIED
            )
        else:
            relation = REL_MENTIONED
        entry.triples.append((state.session_id, relation, item.entity))
        if item.entity == state.pending_symptom:
            state.pending_symptom = None
    state.history.append(entry)
    state.turn += 1
    return state


def append_triples(state: CrmState, triples: list[Triple]) -> CrmState:
    """Attach engine-derived triples to the current turn's history entry."""
    for _, relation, _ in triples:
        if relation not in RELATIONS:
            raise ValueError(f"relation {relation!r} outside the closed vocabulary")
    if not state.history:
        state.history.append(TurnTriples(turn=state.turn))
        state.turn += 1
    state.history[-1].triples.extend(triples)
    return state


def update_candidates(state: CrmState, kg: KnowledgeGraph) -> CrmState:
    """Narrow the candidate diseases from the evidence recorded so far.

    Candidates only ever shrink: a disease is retained iff its symptom set
    intersects the confirmed set and none of its symptoms was denied in answer
    to an explicit question (incidental free-text denials never eliminate).
    With nothing confirmed yet the full disease set remains. If contradictory
    evidence would empty the set, the previous candidates are kept and a
    diagnostic is recorded so the session can still progress.
    """
    if state.phase is not Phase.ELICITATION:
        raise WrongPhase(f"update_candidates requires Elicitation, not {state.phase.value}")
    confirmed = state.confirmed()
    if not confirmed:
        return state
    asked_denied = state.denied() & state.asked_symptoms
    retained = {
        did
        for did in state.candidate_diseases
        if kg.diseases[did].symptoms & confirmed
        and not (kg.diseases[did].symptoms & asked_denied)
    }
    if not retained:
        state.diagnostics["candidate_conflicts"] = (
            state.diagnostics.get("candidate_conflicts", 0) + 1
        )
        return state
    state.candidate_diseases = retained
    return state


def confirm_disease(state: CrmState, disease: EntityId) -> CrmState:
    """Lock in the diagnosis and advance to the examination phase."""
    if state.phase is not Phase.ELICITATION:
        raise WrongPhase(f"confirm_disease requires Elicitation, not {state.phase.value}")
    if disease not in state.candidate_diseases:
        raise NotACandidate(f"{disease!r} is not among the candidate diseases")
    state.confirmed_disease = disease
    advance_phase(state, Phase.EXAMINATION)
    return state


def mark_pending(state: CrmState, symptom: EntityId) -> CrmState:
    """Register the symptom the engine is about to ask about."""
    if symptom in state.symptom_status:
        raise ValueError(f"symptom {symptom!r} already has a recorded status")
    state.pending_symptom = symptom
    state.asked_symptoms.add(symptom)
    return state


def advance_phase(state: CrmState, phase: Phase) -> CrmState:
    """Move the phase forward; regressions are programming errors."""
    if phase.order < state.phase.order:
        raise WrongPhase(f"phase cannot regress from {state.phase.value} to {phase.value}")
    state.phase = phase
    return state


# ---------------------------------------------------------------------------
# Snapshot / restore
# ---------------------------------------------------------------------------

def to_document(state: CrmState) -> dict:
    return {
        "session_id": state.session_id,
        "phase": state.phase.value,
        "symptom_status": dict(sorted(state.symptom_status.items())),
        "pending_symptom": state.pending_symptom,
        "asked_symptoms": sorted(state.asked_symptoms),
        "candidate_diseases": sorted(state.candidate_diseases),
        "confirmed_disease": state.confirmed_disease,
        "recommended_examinations": list(state.recommended_examinations),
        "recommended_drugs": list(state.recommended_drugs),
        "history": [
            {"turn": entry.turn, "triples": [list(t) for t in entry.triples]}
            for entry in state.history
        ],
        "turn": state.turn,
        "diagnostics": dict(sorted(state.diagnostics.items())),
    }


def snapshot(state: CrmState) -> str:
    """Canonical JSON (sorted keys, fixed separators): identical states give
    identical bytes."""
    return json.dumps(to_document(state), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def restore(document: str | dict) -> CrmState:
    doc = json.loads(document) if isinstance(document, str) else document
    return CrmState(
        session_id=doc["session_id"],
        phase=Phase(doc["phase"]),
        symptom_status=dict(doc["symptom_status"]),
        pending_symptom=doc["pending_symptom"],
        asked_symptoms=set(doc["asked_symptoms"]),
        candidate_diseases=set(doc["candidate_diseases"]),
        confirmed_disease=doc["confirmed_disease"],
        recommended_examinations=list(doc["recommended_examinations"]),
        recommended_drugs=list(doc["recommended_drugs"]),
        history=[
            TurnTriples(turn=entry["turn"], triples=[tuple(t) for t in entry["triples"]])
            for entry in doc["history"]
        ],
        turn=doc["turn"],
        diagnostics=dict(doc["diagnostics"]),
    )
