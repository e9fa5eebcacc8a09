"""Rule-based propagation of dependencies across coordinations.

The converter copies incident edges of a conjunction head to its conjuncts
in the enhanced layer. Each pass reads the head's incident edges from a
snapshot taken at pass start and writes into the working graph, so a single
pass does not chain through freshly added edges; enabling iterate_to_fixpoint
repeats passes until the graph stops changing, which handles nested and
multiple coordinations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .conllu import Sentence, Token
from .graph import (
    Edge, add_dep, coarse, conj_pairs, enhanced_edges,
    has_child_with_label, subject_edges_at,
)

# incoming labels of gov never copied over to the conjunct
DEFAULT_GOVERNOR_EXCEPTIONS = frozenset(
    {"vocative", "discourse", "root", "punct", "cc", "conj", "mark"})

SUBJECT_LABELS = frozenset({"nsubj", "csubj"})
CORE_NONSUBJECT_LABELS = frozenset({"obj", "iobj", "ccomp", "xcomp"})
NON_CORE_LABELS = frozenset({"obl", "advmod", "advcl"})


@dataclass(frozen=True)
class ConverterConfig:
    propagate_non_core: bool = False
    iterate_to_fixpoint: bool = False
    passive_imperative_fix: bool = False
    governor_exceptions: frozenset[str] = DEFAULT_GOVERNOR_EXCEPTIONS


MODES = {
    "rbc": ConverterConfig(),
    "rbc2": ConverterConfig(propagate_non_core=True, iterate_to_fixpoint=True),
    "rbc2+fix": ConverterConfig(propagate_non_core=True, iterate_to_fixpoint=True,
                                passive_imperative_fix=True),
}


def seed_enhanced(sent: Sentence) -> None:
    """Copy the basic layer into DEPS, in place. No-op for tokens with deps."""
    for t in sent.tokens:
        if not t.deps and t.head is not None:
            t.deps.append((t.head, t.deprel))


def _needs_seed(sent: Sentence) -> bool:
    return all(not t.deps for t in sent.tokens)


def _has_subject(sent: Sentence, dep) -> bool:
    return bool(subject_edges_at(sent, dep))


def _subject_label(dep_tok: Token, candidate: str, has_auxpass: bool,
                   cfg: ConverterConfig) -> str | None:
    """Final label for a subject copied onto dep_tok, or None to suppress it."""
    if cfg.passive_imperative_fix:
        if coarse(candidate) == "nsubj" and dep_tok.feats.get("Mood") == "Imp":
            return None
        if candidate == "nsubj:pass":
            voice = dep_tok.feats.get("Voice")
            if voice is None or voice == "Act":
                return "nsubj"
    if candidate in SUBJECT_LABELS and has_auxpass:
        return candidate + ":pass"
    return candidate


def _one_pass(work: Sentence, cfg: ConverterConfig) -> bool:
    by_id = work.token_by_id()
    snapshot = sorted(enhanced_edges(work))
    incoming: dict = {}
    outgoing: dict = {}
    for e in snapshot:
        incoming.setdefault(e.dep, []).append(e)
        outgoing.setdefault(e.head, []).append(e)

    changed = False
    for gov, dep in conj_pairs(work):
        dep_tok = by_id[dep]
        # governors of gov are copied, modulo the exception list; non-core
        # labels stay local unless non-core propagation is switched on, so
        # the default config introduces no obl/advmod/advcl edge anywhere
        for e in incoming.get(gov, ()):
            if e.label in cfg.governor_exceptions or coarse(e.label) in cfg.governor_exceptions:
                continue
            if not cfg.propagate_non_core and coarse(e.label) in NON_CORE_LABELS:
                continue
            if e.head == dep:
                continue
            changed |= add_dep(dep_tok, e.head, e.label)
        # dependents of gov, by label class
        has_auxpass = has_child_with_label(work, dep, "aux:pass")
        for e in outgoing.get(gov, ()):
            if e.dep == dep:
                continue
            base = coarse(e.label)
            if base in SUBJECT_LABELS:
                if _has_subject(work, dep):
                    continue
                label = _subject_label(dep_tok, e.label, has_auxpass, cfg)
                if label is None:
                    continue
                changed |= add_dep(by_id[e.dep], dep, label)
            elif base in CORE_NONSUBJECT_LABELS:
                # only shared if the target follows the conjunct
                if e.dep > dep:
                    changed |= add_dep(by_id[e.dep], dep, e.label)
            elif cfg.propagate_non_core and base in NON_CORE_LABELS:
                # only shared if the conjunct follows the target
                if e.dep < dep:
                    changed |= add_dep(by_id[e.dep], dep, e.label)
    return changed


def convert(sent: Sentence, cfg: ConverterConfig = ConverterConfig()) -> Sentence:
    """Propagated copy of sent. Seeds DEPS from the basic layer when empty."""
    work = sent.clone()
    if _needs_seed(work):
        seed_enhanced(work)
    while _one_pass(work, cfg):
        if not cfg.iterate_to_fixpoint:
            break
    return work


def always_baseline(sent: Sentence) -> Sentence:
    """Copy every incident edge of the head to the conjunct, labels unchanged.

    Single pass with live reads, so copies chain left to right. Only the conj
    edge to the conjunct itself is skipped; self loops are never produced.
    """
    work = sent.clone()
    if _needs_seed(work):
        seed_enhanced(work)
    by_id = work.token_by_id()
    for gov, dep in conj_pairs(work):
        dep_tok = by_id[dep]
        for e in sorted(enhanced_edges(work)):
            if e.dep == gov and e.head != dep:
                add_dep(dep_tok, e.head, e.label)
            elif e.head == gov and e.dep != dep:
                add_dep(by_id[e.dep], dep, e.label)
    return work


def convert_mode(sent: Sentence, mode: str) -> Sentence:
    if mode == "always":
        return always_baseline(sent)
    try:
        cfg = MODES[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}") from None
    return convert(sent, cfg)


def added_edges(before: Sentence, after: Sentence) -> set[Edge]:
    """Enhanced edges present in after but not in before (after seeding)."""
    seeded = before.clone()
    if _needs_seed(seeded):
        seed_enhanced(seeded)
    return enhanced_edges(after) - enhanced_edges(seeded)
