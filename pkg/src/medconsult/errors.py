"""Exception hierarchy shared by all medconsult modules.

Every error carries a stable machine-readable ``code`` (used by the HTTP
facade) plus a human message.
"""

from __future__ import annotations


class MedconsultError(Exception):
    """Base class for all library errors."""

    code = "internal"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# ---------------------------------------------------------------------------
# Knowledge-graph loading / querying
# ---------------------------------------------------------------------------

class KgLoadError(MedconsultError):
    """A graph directory failed validation during load."""

    code = "kg_load_error"


class MissingTable(KgLoadError):
    code = "missing_table"


class InvalidTable(KgLoadError):
    """Malformed CSV: bad header, missing required cell, undecodable file."""

    code = "invalid_table"


class DuplicateId(KgLoadError):
    code = "duplicate_id"


class DanglingReference(KgLoadError):
    code = "dangling_reference"


class EmptySymptomSet(KgLoadError):
    code = "empty_symptom_set"


class OrphanSymptom(KgLoadError):
    """A symptom row that no disease references; it could never be elicited."""

    code = "orphan_symptom"


class ManifestMismatch(KgLoadError):
    code = "manifest_mismatch"


class AssetMissing(KgLoadError):
    code = "asset_missing"


class UnknownEntity(MedconsultError):
    code = "unknown_entity"


class WrongKind(MedconsultError):
    code = "wrong_kind"


# ---------------------------------------------------------------------------
# NLU
# ---------------------------------------------------------------------------

class EmptyUtterance(MedconsultError):
    code = "empty_utterance"


class NoSymptoms(MedconsultError):
    """Triage needs at least one affirmed symptom."""

    code = "no_symptoms"


# ---------------------------------------------------------------------------
# CRM / session state
# ---------------------------------------------------------------------------

class SessionClosed(MedconsultError):
    code = "session_closed"


class SessionNotClosed(MedconsultError):
    code = "session_not_closed"


class WrongPhase(MedconsultError):
    code = "wrong_phase"


class NotACandidate(MedconsultError):
    code = "not_a_candidate"


class NoDiagnosis(MedconsultError):
    code = "no_diagnosis"


# ---------------------------------------------------------------------------
# Reasoner
# ---------------------------------------------------------------------------

class InconsistentEvidence(MedconsultError):
    """Confirmed and denied symptom sets overlap."""

    code = "inconsistent_evidence"


# ---------------------------------------------------------------------------
# Dialogue / generation
# ---------------------------------------------------------------------------

class UnknownTemplate(MedconsultError):
    code = "unknown_template"


class MissingSlotFiller(MedconsultError):
    code = "missing_slot_filler"


class GeneratorFailure(MedconsultError):
    """An external generator backend failed; the engine falls back to templates."""

    code = "generator_failure"


# ---------------------------------------------------------------------------
# Service / store
# ---------------------------------------------------------------------------

class UnknownSession(MedconsultError):
    code = "unknown_session"


class UnknownImage(MedconsultError):
    code = "unknown_image"


class StoreUnavailable(MedconsultError):
    code = "store_unavailable"


class BadRequest(MedconsultError):
    code = "bad_request"


# ---------------------------------------------------------------------------
# Simulation / synthetic graphs
# ---------------------------------------------------------------------------

class InvalidSpec(MedconsultError):
    code = "invalid_spec"


class InfeasibleSpec(InvalidSpec):
    """The synthetic-graph spec cannot be satisfied (e.g. not enough distinct subsets)."""

    code = "infeasible_spec"
