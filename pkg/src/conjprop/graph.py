"""Edge-level views of a sentence's basic and enhanced layers."""

from __future__ import annotations

import bisect
from typing import NamedTuple

from .conllu import ROOT, Sentence, Token, TokenId

VERBAL = frozenset({"VERB", "AUX"})


class Edge(NamedTuple):
    head: TokenId
    dep: TokenId
    label: str


def coarse(label: str) -> str:
    """Label without subtypes: nsubj:pass -> nsubj."""
    return label.split(":", 1)[0]


def is_conj_label(label: str) -> bool:
    return coarse(label) == "conj"


def basic_edges(sent: Sentence) -> set[Edge]:
    """One edge per regular token from its HEAD/DEPREL columns."""
    out = set()
    for t in sent.tokens:
        if t.id.is_empty or t.head is None:
            continue
        out.add(Edge(t.head, t.id, t.deprel))
    return out


def enhanced_edges(sent: Sentence) -> set[Edge]:
    """Union of all DEPS entries, empty nodes included."""
    out = set()
    for t in sent.tokens:
        for head, label in t.deps:
            out.add(Edge(head, t.id, label))
    return out


def conj_pairs(sent: Sentence, verbs_only: bool = False) -> list[tuple[TokenId, TokenId]]:
    """(gov, dep) for every basic conj edge, in surface order of dep.

    With verbs_only, both members must be VERB or AUX by UPOS.
    """
    by_id = sent.token_by_id()
    pairs = []
    for t in sent.tokens:
        if t.id.is_empty or t.head is None or t.head == ROOT:
            continue
        if not is_conj_label(t.deprel):
            continue
        if verbs_only:
            gov = by_id.get(t.head)
            if gov is None or gov.upos not in VERBAL or t.upos not in VERBAL:
                continue
        pairs.append((t.head, t.id))
    pairs.sort(key=lambda p: (p[1], p[0]))
    return pairs


def conjunct_ids(sent: Sentence) -> set[TokenId]:
    """Every token that is the gov or the dep of some basic conj edge."""
    ids: set[TokenId] = set()
    for gov, dep in conj_pairs(sent):
        ids.add(gov)
        ids.add(dep)
    return ids


def propagated_links(sent: Sentence) -> set[Edge]:
    """Enhanced edges absent from the basic layer and incident to a conjunct.

    Membership in the basic layer is exact-triple equality, so a relabeled
    edge counts as propagated. Edges labeled conj (any subtype) are excluded.
    """
    basic = basic_edges(sent)
    conjuncts = conjunct_ids(sent)
    out = set()
    for e in enhanced_edges(sent):
        if e in basic or is_conj_label(e.label):
            continue
        if e.head in conjuncts or e.dep in conjuncts:
            out.add(e)
    return out


def has_child_with_label(sent: Sentence, head: TokenId, label: str) -> bool:
    """True if head has a basic dependent attached with exactly this label."""
    for t in sent.tokens:
        if t.head == head and t.deprel == label:
            return True
    return False


def subject_edges_at(sent: Sentence, dep: TokenId) -> list[Edge]:
    """Basic or enhanced edges that attach a subject to dep."""
    found = []
    for e in basic_edges(sent) | enhanced_edges(sent):
        if e.head == dep and coarse(e.label) in ("nsubj", "csubj"):
            found.append(e)
    return found


def add_dep(token: Token, head: TokenId, label: str) -> bool:
    """Insert (head, label) into a token's DEPS if absent. Returns True if added.

    The list is kept in serialization order, so insertion order never shows
    up in written output or in equality checks.
    """
    if (head, label) in token.deps:
        return False
    bisect.insort(token.deps, (head, label))
    return True
