"""Entity recognition, linking, and department triage over patient utterances.

Recognition is deterministic dictionary matching: left-to-right greedy longest
match of normalized utterance windows against the graph's alias index. Linking
maps each mention to its best alias candidate (exact weight, or normalized
edit similarity when the surface is unknown) and assigns polarity from a
configurable negation-cue lexicon scanned over the clause before the mention.
The matcher sits behind a small config so a learned scorer can replace it
without touching callers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import EmptyUtterance, NoSymptoms
from .kg import EntityId, EntityKind, KnowledgeGraph
from .text import CLAUSE_BREAKERS, contains_word, edit_similarity, normalize

DEFAULT_NEGATION_CUES = (
    "no",
    "not",
    "never",
    "without",
    "deny",
    "denies",
    "denied",
    "don't",
    "dont",
    "doesn't",
    "doesnt",
    "haven't",
    "havent",
    "isn't",
    "isnt",
    "没有",
    "没",
    "不",
    "无",
    "否认",
)


@dataclass(frozen=True)
class LinkerConfig:
    """Tunables for the deterministic matcher."""

    threshold: float = 0.85
    negation_cues: tuple[str, ...] = DEFAULT_NEGATION_CUES

    @classmethod
    def with_cue_file(cls, path: str | Path, threshold: float = 0.85) -> "LinkerConfig":
        """Load negation cues from a UTF-8 file, one cue per line."""
        cues = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            cue = normalize(line)
            if cue and not cue.startswith("#"):
                cues.append(cue)
        return cls(threshold=threshold, negation_cues=tuple(cues))


class Polarity:
    AFFIRMED = "affirmed"
    DENIED = "denied"


@dataclass(frozen=True)
class Mention:
    """A surface span found in the utterance; ``span`` is 0-based half-open."""

    surface: str
    span: tuple[int, int]
    normalized: str


@dataclass(frozen=True)
class LinkedEntity:
    mention: Mention
    entity: EntityId
    score: float
    polarity: str = Polarity.AFFIRMED


@dataclass
class LinkResult:
    """Linked entities plus matcher diagnostics (mentions dropped below threshold)."""

    entities: list[LinkedEntity] = field(default_factory=list)
    dropped: int = 0


@dataclass(frozen=True)
class TriageResult:
    department: EntityId
    scores: dict[EntityId, float]
    confidence: float


def recognize(kg: KnowledgeGraph, utterance: str) -> list[Mention]:
    """Maximal non-overlapping longest-match mentions, ordered by start offset.

    The scan is greedy left-to-right over the raw utterance: at each position
    the longest window whose normalized form is a known alias surface wins,
    and scanning resumes after it.
    """
    if not utterance or not utterance.strip():
        raise EmptyUtterance("utterance must be non-empty")

    max_len = kg.max_alias_length()
    if max_len == 0:
        return []
    # Raw windows can exceed the normalized length (whitespace runs collapse,
    # NFKC can contract); a generous cap keeps the scan linear in practice.
    window_cap = max(64, 3 * max_len)

    mentions: list[Mention] = []
    n = len(utterance)
    i = 0
    while i < n:
        if utterance[i].isspace():
            i += 1
            continue
        best_end = -1
        best_norm = ""
        limit = min(n, i + window_cap)
        for j in range(i + 1, limit + 1):
            norm = normalize(utterance[i:j])
            if len(norm) > max_len:
                break
            if norm in kg.aliases:
                best_end = j
                best_norm = norm
        if best_end > 0:
            # Drop trailing whitespace the window may have swallowed.
            while utterance[best_end - 1].isspace():
                best_end -= 1
            mentions.append(Mention(utterance[i:best_end], (i, best_end), best_norm))
            i = best_end
        else:
            i += 1
    return mentions


def _clause_before(utterance: str, start: int) -> str:
    clause_start = 0
    for idx in range(start - 1, -1, -1):
        if utterance[idx] in CLAUSE_BREAKERS:
            clause_start = idx + 1
            break
    return utterance[clause_start:start]


def detect_negation(utterance: str, mention_start: int, cues: tuple[str, ...]) -> bool:
    """True when a negation cue precedes the position within the same clause."""
    prefix = normalize(_clause_before(utterance, mention_start))
    if not prefix:
        return False
    return any(contains_word(prefix, cue) for cue in cues)


def link(
    kg: KnowledgeGraph,
    mentions: list[Mention],
    utterance: str,
    config: LinkerConfig | None = None,
) -> LinkResult:
    """Map mentions to entities; unlinkable mentions are dropped and counted.

    An exact alias surface scores its stored weight; otherwise the best
    normalized edit similarity against all alias surfaces is used. Candidates
    below the threshold are dropped. Ties resolve by (weight desc, id asc)
    through the alias index ordering.
    """
    cfg = config or LinkerConfig()
    result = LinkResult()
    for mention in mentions:
        entries = kg.aliases.get(mention.normalized)
        if entries:
            best = entries[0]
            score = best.weight
        else:
            best = None
            score = 0.0
            for surface in sorted(kg.aliases):
                sim = edit_similarity(mention.normalized, surface)
                if sim > score:
                    score = sim
                    best = kg.aliases[surface][0]
        if best is None or score < cfg.threshold:
            result.dropped += 1
            continue
        polarity = (
            Polarity.DENIED
            if detect_negation(utterance, mention.span[0], cfg.negation_cues)
            else Polarity.AFFIRMED
        )
        result.entities.append(LinkedEntity(mention, best.entity, score, polarity))
    return result


def affirmed_symptoms(kg: KnowledgeGraph, linked: list[LinkedEntity]) -> list[EntityId]:
    return [
        e.entity
        for e in linked
        if e.polarity == Polarity.AFFIRMED and kg.kind_of(e.entity) is EntityKind.SYMPTOM
    ]


def triage(
    kg: KnowledgeGraph,
    linked: list[LinkedEntity],
    vote_weight: float = 1.0,
) -> TriageResult:
    """Department vote: each disease carrying an affirmed symptom votes +1
    (scaled by ``vote_weight``) for its department.

    Ties break on the lowest department id, so the argmax is invariant under
    positive rescaling of the votes.
    """
    symptoms = affirmed_symptoms(kg, linked)
    if not symptoms:
        raise NoSymptoms("triage requires at least one affirmed symptom")
    symptom_set = set(symptoms)
    scores: dict[EntityId, float] = {}
    for rec in kg.diseases.values():
        hits = len(rec.symptoms & symptom_set)
        if hits:
            scores[rec.department] = scores.get(rec.department, 0.0) + hits * vote_weight
    winner = min(scores, key=lambda dept: (-scores[dept], dept))
    total = sum(scores.values())
    confidence = scores[winner] / total if total > 0 else 0.0
    return TriageResult(department=winner, scores=scores, confidence=confidence)


def make_linked(
    entity: EntityId,
    utterance: str,
    polarity: str = Polarity.AFFIRMED,
    score: float = 1.0,
) -> LinkedEntity:
    """Synthesize a link covering the whole utterance (used for polar answers)."""
    mention = Mention(utterance, (0, len(utterance)), normalize(utterance))
    return LinkedEntity(mention, entity, score, polarity)


def with_polarity(entity: LinkedEntity, polarity: str) -> LinkedEntity:
    return replace(entity, polarity=polarity)
