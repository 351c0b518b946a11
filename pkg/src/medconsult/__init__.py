"""Knowledge-graph-grounded medical consultation engine.

Pipeline: entity recognition and linking over patient text, a per-session
central records memory, greedy discriminative symptom selection, staged
examination and drug reasoning over a multi-modal knowledge graph, templated
response generation, department triage, and medical-record synthesis. Exposed
as a library, an HTTP service, and a CLI simulator.
"""

from .crm import CrmState, Phase, new_session, restore, snapshot
from .dialogue import ConsultationEngine, MedicalRecord, TemplateTable, Utterance
from .kg import KnowledgeGraph, load_kg
from .nlu import LinkedEntity, Mention, TriageResult, link, recognize, triage
from .reasoner import Ask, Diagnose, TreatmentPlan, Undecidable, plan_treatment, select_next_symptom

__version__ = "0.1.0"

__all__ = [
    "Ask",
    "ConsultationEngine",
    "CrmState",
    "Diagnose",
    "KnowledgeGraph",
    "LinkedEntity",
    "MedicalRecord",
    "Mention",
    "Phase",
    "TemplateTable",
    "TreatmentPlan",
    "TriageResult",
    "Undecidable",
    "Utterance",
    "link",
    "load_kg",
    "new_session",
    "plan_treatment",
    "recognize",
    "restore",
    "select_next_symptom",
    "snapshot",
    "triage",
    "__version__",
]
