from __future__ import annotations

import random

from conjprop.conllu import ROOT, TokenId
from conjprop.graph import (
    Edge, basic_edges, coarse, conj_pairs, conjunct_ids, enhanced_edges,
    propagated_links,
)
from conftest import make_sentence, perturb_enhanced, random_sentence


def edge(h, d, label):
    return Edge(TokenId(h), TokenId(d), label)


# Independent re-derivation of the propagated-link set, kept deliberately
# naive: flat loops over raw columns, no shared helpers.
def oracle_propagated(sent):
    basic = set()
    for t in sent.tokens:
        if not t.id.is_empty and t.head is not None:
            basic.add((t.head, t.id, t.deprel))
    conjuncts = set()
    for h, d, lab in basic:
        if lab == "conj" or lab.startswith("conj:"):
            conjuncts.add(h)
            conjuncts.add(d)
    found = set()
    for t in sent.tokens:
        for h, lab in t.deps:
            if (h, t.id, lab) in basic:
                continue
            if lab == "conj" or lab.startswith("conj:"):
                continue
            if h in conjuncts or t.id in conjuncts:
                found.add((h, t.id, lab))
    return found


def test_basic_edges_fig1(fig1):
    edges = basic_edges(fig1)
    assert edge(5, 4, "nsubj") in edges
    assert edge(5, 7, "conj") in edges
    assert edge(7, 6, "cc") in edges
    assert Edge(ROOT, TokenId(5), "root") in edges
    assert len(edges) == 10


def test_enhanced_edges_empty_without_seed(fig1):
    assert enhanced_edges(fig1) == set()


def test_propagated_links_fig1_gold(fig1_gold):
    assert propagated_links(fig1_gold) == {
        edge(7, 4, "nsubj"), edge(7, 9, "obj"), edge(7, 3, "obl")}


def test_propagated_links_need_conjunct_incidence():
    sent = make_sentence([
        ("a", "NOUN", 2, "nsubj"),
        ("b", "VERB", 0, "root"),
        ("c", "NOUN", 2, "obj"),
    ])
    for t in sent.tokens:
        t.deps = [(t.head, t.deprel)]
    # extra non-basic edge, but no conj edge anywhere in the sentence
    sent.tokens[0].deps.append((TokenId(3), "nmod"))
    assert propagated_links(sent) == set()


def test_propagated_links_exclude_conj_labels(fig1_gold):
    fig1_gold.tokens[6].deps.append((TokenId(9), "conj:and"))
    assert propagated_links(fig1_gold) == {
        edge(7, 4, "nsubj"), edge(7, 9, "obj"), edge(7, 3, "obl")}


def test_relabeled_edge_counts_as_propagated(fig3a):
    for t in fig3a.tokens:
        t.deps = [(t.head, t.deprel)]
    tok1 = fig3a.tokens[0]
    tok1.deps = [(TokenId(4), "nsubj:pass"), (TokenId(9), "nsubj")]
    assert propagated_links(fig3a) == {edge(9, 1, "nsubj")}


def test_conj_pairs_fig3c(fig3c):
    assert conj_pairs(fig3c) == [(TokenId(1), TokenId(4)), (TokenId(5), TokenId(10))]
    assert conj_pairs(fig3c, verbs_only=True) == [(TokenId(5), TokenId(10))]
    assert conjunct_ids(fig3c) == {TokenId(1), TokenId(4), TokenId(5), TokenId(10)}


def test_conj_subtype_counts():
    sent = make_sentence([
        ("a", "VERB", 0, "root"),
        ("and", "CCONJ", 3, "cc"),
        ("b", "VERB", 1, "conj:and"),
    ])
    assert conj_pairs(sent) == [(TokenId(1), TokenId(3))]


def test_coarse():
    assert coarse("nsubj:pass") == "nsubj"
    assert coarse("obl:tmod") == "obl"
    assert coarse("obj") == "obj"


def test_propagated_links_match_oracle_on_random_sentences():
    rng = random.Random(20240817)
    for i in range(300):
        sent = perturb_enhanced(rng, random_sentence(rng, f"r{i}"))
        got = {(e.head, e.dep, e.label) for e in propagated_links(sent)}
        assert got == oracle_propagated(sent), f"sentence r{i}"


def test_layer_views_match_oracle_on_random_sentences():
    rng = random.Random(7)
    for i in range(100):
        sent = perturb_enhanced(rng, random_sentence(rng, f"v{i}"))
        want_basic = set()
        for t in sent.tokens:
            if not t.id.is_empty and t.head is not None:
                want_basic.add((t.head, t.id, t.deprel))
        want_enh = set()
        for t in sent.tokens:
            for h, lab in t.deps:
                want_enh.add((h, t.id, lab))
        assert {(e.head, e.dep, e.label) for e in basic_edges(sent)} == want_basic
        assert {(e.head, e.dep, e.label) for e in enhanced_edges(sent)} == want_enh
