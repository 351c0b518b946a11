"""Consultation orchestration: phases, prompt building, and response generation.

Each patient turn runs recognize -> link -> record -> narrow candidates, then
acts by phase: during elicitation the engine asks yes/no questions chosen by
the symptom selector until a diagnosis locks in, after which it recommends
examinations, then drugs (with image attachments), then closes and offers the
medical record.

Responses come from a generator behind a small contract. The default backend
fills data-file templates and is fully deterministic; an HTTP client backend
for an external neural generator is included but off by default, and the
engine falls back to templates (flagging the reply) when it fails.
"""

from __future__ import annotations

import json
import re
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from . import crm, nlu, reasoner
from .crm import CrmState, Phase
from .errors import (
    EmptyUtterance,
    GeneratorFailure,
    MissingSlotFiller,
    NoDiagnosis,
    SessionClosed,
    SessionNotClosed,
    UnknownTemplate,
)
from .kg import DrugImage, EntityId, KnowledgeGraph
from .nlu import LinkedEntity, LinkerConfig, Polarity
from .resources import intents_path, template_path
from .text import contains_word, normalize

PATIENT = "Patient"
SYSTEM = "System"

DEFAULT_HISTORY_WINDOW = 8

# Reasoned-entity roles; template slots carry these names.
ROLE_ASK = "ask_symptom"
ROLE_DISEASE = "confirmed_disease"
ROLE_DEPARTMENT = "department"
ROLE_EXAMINATION = "recommended_examination"
ROLE_DRUG = "recommended_drug"

# (phase, intent) -> template id.
PREFIX_TABLE: dict[tuple[str, str], str] = {
    ("Elicitation", "ask_symptom"): "elicit.ask_symptom",
    ("Elicitation", "clarify"): "elicit.clarify",
    ("Examination", "diagnose"): "diagnose.examination",
    ("Examination", "diagnose_hedged"): "diagnose.examination_hedged",
    ("Examination", "diagnose_no_exam"): "diagnose.no_examination",
    ("Examination", "diagnose_no_exam_hedged"): "diagnose.no_examination_hedged",
    ("Examination", "await"): "exam.await",
    ("DrugRecommendation", "recommend"): "drug.recommend",
    ("DrugRecommendation", "none"): "drug.none",
    ("DrugRecommendation", "await"): "drug.await",
    ("Closed", "farewell"): "close.farewell",
}

_SLOT_RE = re.compile(r"\{([a-z_]+)\}")


@dataclass(frozen=True)
class Utterance:
    speaker: str
    text: str
    turn: int
    attachments: tuple[DrugImage, ...] = ()
    fallback: bool = False


@dataclass(frozen=True)
class PromptBundle:
    history: tuple[Utterance, ...]
    reasoned_entities: tuple[tuple[EntityId, str], ...]
    prefix_id: str


class TemplateTable:
    """Key-value template file: ``id = text with {slot} placeholders``.

    Special keys starting with ``_`` hold rendering metadata: the list
    separator for multi-entity slots and the word used for empty lists in the
    record narrative.
    """

    def __init__(self, entries: dict[str, str], separator: str = ", ", none_word: str = "none"):
        self.entries = entries
        self.separator = separator
        self.none_word = none_word

    @classmethod
    def load(cls, path: str | Path) -> "TemplateTable":
        entries: dict[str, str] = {}
        separator = ", "
        none_word = "none"
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            if not raw.strip() or raw.lstrip().startswith("#"):
                continue
            key, eq, value = raw.partition("=")
            if not eq:
                continue
            key = key.strip()
            value = value.strip()
            # Quotes protect significant leading/trailing spaces.
            if len(value) >= 2 and value[0] == '"' and value[-1] == '"':
                value = value[1:-1]
            if key == "_list_separator":
                separator = value
            elif key == "_none":
                none_word = value
            else:
                entries[key] = value
        return cls(entries, separator, none_word)

    def get(self, template_id: str) -> str:
        if template_id not in self.entries:
            raise UnknownTemplate(f"template id {template_id!r} not in the loaded table")
        return self.entries[template_id]

    def fill(self, template_id: str, values: dict[str, str]) -> str:
        text = self.get(template_id)

        def sub(match: re.Match[str]) -> str:
            slot = match.group(1)
            if slot not in values:
                raise MissingSlotFiller(f"template {template_id!r}: no filler for slot {{{slot}}}")
            return values[slot]

        return _SLOT_RE.sub(sub, text)


@dataclass
class IntentLexicon:
    """Phrase lists for polar answers and phase-advance intents."""

    yes: tuple[str, ...]
    no: tuple[str, ...]
    ack: tuple[str, ...]
    drug_request: tuple[str, ...]
    bye: tuple[str, ...]

    @classmethod
    def load(cls, path: str | Path) -> "IntentLexicon":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        pick = lambda key: tuple(normalize(p) for p in data.get(key, []))
        return cls(
            yes=pick("yes"),
            no=pick("no"),
            ack=pick("ack"),
            drug_request=pick("drug_request"),
            bye=pick("bye"),
        )

    @staticmethod
    def _matches(phrases: tuple[str, ...], text_norm: str) -> bool:
        return any(contains_word(text_norm, p) for p in phrases)

    def polar(self, text: str) -> bool | None:
        """True for yes, False for no, None when neither is detected.

        Negative phrases win so "no, not really" never reads as agreement.
        """
        norm = normalize(text)
        if self._matches(self.no, norm):
            return False
        if self._matches(self.yes, norm):
            return True
        return None

    def is_ack(self, text: str) -> bool:
        return self._matches(self.ack, normalize(text))

    def is_drug_request(self, text: str) -> bool:
        return self._matches(self.drug_request, normalize(text))

    def is_bye(self, text: str) -> bool:
        norm = normalize(text)
        return self._matches(self.bye, norm) or self._matches(self.no, norm)


class GeneratorContract(Protocol):
    def generate(self, bundle: PromptBundle) -> str: ...


class TemplateGenerator:
    """Deterministic default backend: equal bundles yield equal text."""

    def __init__(self, table: TemplateTable, kg: KnowledgeGraph):
        self.table = table
        self.kg = kg

    def generate(self, bundle: PromptBundle) -> str:
        return render_template(bundle, self.kg, self.table)


class HttpGenerator:
    """Client for an external generation service.

    POSTs ``{history, entities, prefix_id}`` as JSON and expects ``{text}``
    back. Any transport or payload problem raises GeneratorFailure; the engine
    then falls back to the template backend.
    """

    def __init__(self, url: str, timeout: float = 5.0):
        self.url = url
        self.timeout = timeout

    def generate(self, bundle: PromptBundle) -> str:
        payload = json.dumps(
            {
                "history": [
                    {"speaker": u.speaker, "text": u.text, "turn": u.turn}
                    for u in bundle.history
                ],
                "entities": [[eid, role] for eid, role in bundle.reasoned_entities],
                "prefix_id": bundle.prefix_id,
            }
        ).encode("utf-8")
        request = urllib.request.Request(
            self.url, data=payload, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                body = json.loads(response.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise GeneratorFailure(f"generator backend failed: {exc}") from exc
        text = body.get("text")
        if not isinstance(text, str) or not text:
            raise GeneratorFailure("generator backend returned no text")
        return text


def build_prompt(
    state: CrmState,
    reasoned: list[tuple[EntityId, str]],
    history: list[Utterance],
    intent: str,
    table: TemplateTable,
    history_window: int = DEFAULT_HISTORY_WINDOW,
) -> PromptBundle:
    """Fuse the bounded dialogue history with the turn's reasoned entities.

    The prefix id is looked up by (phase, intent) and must exist in the loaded
    table; reasoned entities are ordered by role, then entity id.
    """
    key = (state.phase.value, intent)
    if key not in PREFIX_TABLE:
        raise UnknownTemplate(f"no template registered for phase/intent {key}")
    prefix_id = PREFIX_TABLE[key]
    table.get(prefix_id)
    window = history[-history_window:] if history_window > 0 else []
    ordered = tuple(sorted(reasoned, key=lambda pair: (pair[1], pair[0])))
    return PromptBundle(history=tuple(window), reasoned_entities=ordered, prefix_id=prefix_id)


def render_template(bundle: PromptBundle, kg: KnowledgeGraph, table: TemplateTable) -> str:
    """Deterministic slot substitution with entity display names.

    Multi-entity slots join their names (in bundle order) with the table's
    list separator; a slot with no filler raises MissingSlotFiller.
    """
    by_role: dict[str, list[str]] = {}
    for entity_id, role in bundle.reasoned_entities:
        by_role.setdefault(role, []).append(kg.name_of(entity_id))
    values = {role: table.separator.join(names) for role, names in by_role.items()}
    return table.fill(bundle.prefix_id, values)


@dataclass(frozen=True)
class MedicalRecord:
    session_id: str
    department: str
    chief_complaint: str
    confirmed_symptoms: tuple[str, ...]
    denied_symptoms: tuple[str, ...]
    disease: str
    examinations: tuple[str, ...]
    drugs: tuple[str, ...]
    narrative: str

    def to_document(self) -> dict:
        return {
            "session_id": self.session_id,
            "department": self.department,
            "chief_complaint": self.chief_complaint,
            "confirmed_symptoms": list(self.confirmed_symptoms),
            "denied_symptoms": list(self.denied_symptoms),
            "disease": self.disease,
            "examinations": list(self.examinations),
            "drugs": list(self.drugs),
            "narrative": self.narrative,
        }


def record_to_json(record: MedicalRecord) -> str:
    """Canonical bytes: sorted keys, fixed separators, UTF-8 text."""
    return json.dumps(
        record.to_document(), sort_keys=True, ensure_ascii=False, separators=(",", ":")
    )


def utterance_to_document(utterance: Utterance) -> dict:
    return {
        "speaker": utterance.speaker,
        "text": utterance.text,
        "turn": utterance.turn,
        "attachments": [
            {"drug": a.drug, "image_uri": a.image_uri} for a in utterance.attachments
        ],
        "fallback": utterance.fallback,
    }


def transcript_to_json(transcript: list[Utterance]) -> str:
    return json.dumps(
        [utterance_to_document(u) for u in transcript],
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )


def utterance_from_document(doc: dict) -> Utterance:
    return Utterance(
        speaker=doc["speaker"],
        text=doc["text"],
        turn=doc["turn"],
        attachments=tuple(
            DrugImage(a["drug"], a["image_uri"]) for a in doc.get("attachments", [])
        ),
        fallback=doc.get("fallback", False),
    )


class ConsultationEngine:
    """Drives full consultations over one immutable graph.

    The engine holds no per-session state: callers own a CrmState and a
    transcript and pass both into ``step``. One engine serves many concurrent
    sessions as long as each session's steps are serialized by its owner.
    """

    def __init__(
        self,
        kg: KnowledgeGraph,
        templates: TemplateTable | None = None,
        linker: LinkerConfig | None = None,
        intents: IntentLexicon | None = None,
        generator: GeneratorContract | None = None,
        history_window: int = DEFAULT_HISTORY_WINDOW,
        locale: str = "en",
    ):
        self.kg = kg
        self.templates = templates or TemplateTable.load(template_path(locale))
        self.linker = linker or LinkerConfig()
        self.intents = intents or IntentLexicon.load(intents_path(locale))
        self.template_backend = TemplateGenerator(self.templates, kg)
        self.generator: GeneratorContract = generator or self.template_backend
        self.history_window = history_window
        self.locale = locale

    # -- session plumbing ---------------------------------------------------

    def new_session(self, session_id: str | None = None) -> CrmState:
        return crm.new_session(self.kg, session_id=session_id)

    def interpret(self, state: CrmState, text: str) -> list[LinkedEntity]:
        """recognize + link + synthesized polar answer for the pending symptom."""
        mentions = nlu.recognize(self.kg, text)
        linked = list(nlu.link(self.kg, mentions, text, self.linker).entities)
        pending = state.pending_symptom
        if pending is not None and all(e.entity != pending for e in linked):
            polar = self.intents.polar(text)
            if polar is True:
                linked.append(nlu.make_linked(pending, text, Polarity.AFFIRMED))
            elif polar is False:
                linked.append(nlu.make_linked(pending, text, Polarity.DENIED))
        return linked

    # -- the main turn ------------------------------------------------------

    def step(self, state: CrmState, transcript: list[Utterance], patient_text: str) -> Utterance:
        """Process one patient message and append both utterances to the transcript."""
        if state.phase is Phase.CLOSED:
            raise SessionClosed(f"session {state.session_id} is closed")
        if not patient_text or not patient_text.strip():
            raise EmptyUtterance("patient message must be non-empty")

        transcript.append(Utterance(PATIENT, patient_text, turn=len(transcript)))

        linked = self.interpret(state, patient_text)
        crm.record_entities(state, linked, self.kg)

        if state.phase is Phase.ELICITATION:
            reply = self._elicitation_turn(state, transcript)
        elif state.phase is Phase.EXAMINATION:
            reply = self._examination_turn(state, transcript, patient_text)
        else:
            reply = self._drug_phase_turn(state, transcript, patient_text)

        transcript.append(reply)
        return reply

    def _elicitation_turn(self, state: CrmState, transcript: list[Utterance]) -> Utterance:
        before = set(state.candidate_diseases)
        crm.update_candidates(state, self.kg)
        if state.candidate_diseases != before:
            crm.append_triples(
                state,
                [
                    (state.session_id, crm.REL_SUSPECTED, d)
                    for d in sorted(state.candidate_diseases)
                ],
            )

        if len(state.candidate_diseases) == 1:
            outcome: reasoner.SelectionOutcome = reasoner.Diagnose(
                next(iter(state.candidate_diseases))
            )
        else:
            outcome = reasoner.select_next_symptom(self.kg, state.confirmed(), state.denied())

        if isinstance(outcome, reasoner.Ask):
            crm.mark_pending(state, outcome.symptom)
            return self._respond(
                state, transcript, [(outcome.symptom, ROLE_ASK)], intent="ask_symptom"
            )

        if isinstance(outcome, reasoner.Undecidable):
            return self._respond(state, transcript, [], intent="clarify")

        disease = outcome.disease
        hedged = outcome.ambiguous
        if disease not in state.candidate_diseases:
            # The selector ignores asked-denial eliminations; respect them here.
            confirmed = state.confirmed()
            disease = min(
                state.candidate_diseases,
                key=lambda d: (-len(self.kg.diseases[d].symptoms & confirmed), d),
            )
            hedged = True
        return self._diagnose(state, transcript, disease, hedged)

    def _diagnose(
        self,
        state: CrmState,
        transcript: list[Utterance],
        disease: EntityId,
        hedged: bool,
    ) -> Utterance:
        state.pending_symptom = None
        crm.confirm_disease(state, disease)
        plan = reasoner.plan_treatment(self.kg, disease)
        state.recommended_examinations = list(plan.examinations)
        crm.append_triples(
            state,
            [(state.session_id, crm.REL_CONFIRMED_DISEASE, disease)]
            + [(state.session_id, crm.REL_EXAMINATION, e) for e in plan.examinations],
        )
        department = self.kg.diseases[disease].department
        reasoned = [(disease, ROLE_DISEASE), (department, ROLE_DEPARTMENT)]
        reasoned += [(e, ROLE_EXAMINATION) for e in plan.examinations]
        if plan.examinations:
            intent = "diagnose_hedged" if hedged else "diagnose"
        else:
            intent = "diagnose_no_exam_hedged" if hedged else "diagnose_no_exam"
        return self._respond(state, transcript, reasoned, intent=intent)

    def _examination_turn(
        self, state: CrmState, transcript: list[Utterance], patient_text: str
    ) -> Utterance:
        if self.intents.is_drug_request(patient_text) or self.intents.is_ack(patient_text):
            crm.advance_phase(state, Phase.DRUG_RECOMMENDATION)
            disease = state.confirmed_disease
            plan = reasoner.plan_treatment(self.kg, disease)
            state.recommended_drugs = [d for d, _ in plan.drugs]
            crm.append_triples(
                state,
                [(state.session_id, crm.REL_DRUG, d) for d, _ in plan.drugs],
            )
            attachments = tuple(img for _, images in plan.drugs for img in images)
            reasoned = [(disease, ROLE_DISEASE)]
            reasoned += [(d, ROLE_DRUG) for d, _ in plan.drugs]
            if plan.drugs:
                return self._respond(
                    state, transcript, reasoned, intent="recommend", attachments=attachments
                )
            return self._respond(state, transcript, reasoned, intent="none")
        return self._respond(state, transcript, [], intent="await")

    def _drug_phase_turn(
        self, state: CrmState, transcript: list[Utterance], patient_text: str
    ) -> Utterance:
        if self.intents.is_bye(patient_text) or self.intents.is_ack(patient_text):
            crm.advance_phase(state, Phase.CLOSED)
            return self._respond(state, transcript, [], intent="farewell")
        return self._respond(state, transcript, [], intent="await")

    def _respond(
        self,
        state: CrmState,
        transcript: list[Utterance],
        reasoned: list[tuple[EntityId, str]],
        intent: str,
        attachments: tuple[DrugImage, ...] = (),
    ) -> Utterance:
        bundle = build_prompt(
            state, reasoned, transcript, intent, self.templates, self.history_window
        )
        fallback = False
        if self.generator is self.template_backend:
            text = self.template_backend.generate(bundle)
        else:
            try:
                text = self.generator.generate(bundle)
            except GeneratorFailure:
                text = self.template_backend.generate(bundle)
                fallback = True
        return Utterance(
            SYSTEM, text, turn=len(transcript), attachments=attachments, fallback=fallback
        )

    # -- record -------------------------------------------------------------

    def generate_record(self, state: CrmState, transcript: list[Utterance]) -> MedicalRecord:
        """Extractive medical record from the CRM plus the conversation."""
        return generate_record(self.kg, state, transcript, self.templates)


def generate_record(
    kg: KnowledgeGraph,
    state: CrmState,
    transcript: list[Utterance],
    table: TemplateTable,
) -> MedicalRecord:
    """Assemble the structured record and spliced narrative for a closed session."""
    if state.phase is not Phase.CLOSED:
        raise SessionNotClosed(f"session {state.session_id} is not closed yet")
    if state.confirmed_disease is None:
        raise NoDiagnosis(f"session {state.session_id} closed without a diagnosis")

    chief = next((u.text for u in transcript if u.speaker == PATIENT), "")
    disease = kg.diseases[state.confirmed_disease]
    department = kg.name_of(disease.department)
    confirmed = tuple(kg.name_of(s) for s in sorted(state.confirmed()))
    denied = tuple(kg.name_of(s) for s in sorted(state.denied()))
    examinations = tuple(kg.name_of(e) for e in state.recommended_examinations)
    drugs = tuple(kg.name_of(d) for d in state.recommended_drugs)

    def joined(names: tuple[str, ...]) -> str:
        return table.separator.join(names) if names else table.none_word

    narrative = table.fill(
        "record.narrative",
        {
            "chief_complaint": chief if chief else table.none_word,
            "confirmed_symptoms": joined(confirmed),
            "denied_symptoms": joined(denied),
            "disease": disease.name,
            "department": department,
            "examinations": joined(examinations),
            "drugs": joined(drugs),
        },
    )
    return MedicalRecord(
        session_id=state.session_id,
        department=department,
        chief_complaint=chief,
        confirmed_symptoms=confirmed,
        denied_symptoms=denied,
        disease=disease.name,
        examinations=examinations,
        drugs=drugs,
        narrative=narrative,
    )
