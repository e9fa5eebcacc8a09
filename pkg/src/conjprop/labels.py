"""Placeholder subtypes and their lexical filling.

Lexicalized enhanced labels such as "obl:in" carry a word form in the
subtype slot.  For prediction with a closed label set they are reduced to
placeholders like "obl:[case]"; the lexical part is recovered from the
graph afterwards: from the token's own marker dependent, or from its
conjunction head's when the conjunct shares the marker.
"""

from __future__ import annotations

import re

from .conllu import Sentence, TokenId
from .graph import coarse, enhanced_edges, is_conj_label

# relation types whose dependent's form may surface inside a label subtype
MARKER_LABELS = ("case", "mark", "cc")

_PLACEHOLDER = re.compile(r"(.+):\[([a-z]+)\]$")


def _marker_form(sent: Sentence, head: TokenId, marker: str) -> str | None:
    for t in sent.tokens:
        if t.head == head and coarse(t.deprel or "") == marker:
            return t.form.lower()
    return None


def lexicalize_label(placeholder: str, dep: TokenId, sent: Sentence) -> str:
    """Fills "base:[marker]" from dep's marker child, with conj fallback.

    A conjunct without its own marker child inherits the form from its
    conjunction head's child; with no form anywhere the bare base label is
    returned.  Non-placeholder labels pass through unchanged.
    """
    match = _PLACEHOLDER.fullmatch(placeholder)
    if not match:
        return placeholder
    base, marker = match.groups()
    form = _marker_form(sent, dep, marker)
    if form is None:
        tok = sent.token_by_id().get(dep)
        if tok is not None and tok.head is not None \
                and is_conj_label(tok.deprel or ""):
            form = _marker_form(sent, tok.head, marker)
    if form is None:
        return base
    return f"{base}:{form}"


def _delexicalize_one(label: str, dep: TokenId, sent: Sentence) -> str:
    if ":" not in label:
        return label
    base = label.split(":", 1)[0]
    for marker in MARKER_LABELS:
        placeholder = f"{base}:[{marker}]"
        if lexicalize_label(placeholder, dep, sent) == label:
            return placeholder
    return label


def delexicalize_corpus(corpus: list[Sentence]) -> tuple[list[Sentence], list[str]]:
    """Rewrites recoverable lexical subtypes to placeholders.

    A subtype is rewritten only when lexicalizing the placeholder at that
    token reproduces it, so grammaticalized subtypes (nmod:poss) survive
    untouched and the rewrite round-trips by construction.  Returns the new
    corpus and the sorted label inventory of its enhanced layers.
    """
    out = []
    inventory: set[str] = set()
    for sent in corpus:
        copy = sent.clone()
        for tok in copy.tokens:
            tok.deps = sorted(
                (head, _delexicalize_one(label, tok.id, copy))
                for head, label in tok.deps)
        inventory.update(e.label for e in enhanced_edges(copy))
        out.append(copy)
    return out, sorted(inventory)
