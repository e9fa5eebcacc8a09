from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from conjprop.conllu import (
    ROOT, ParseError, Token, TokenId, parse_corpus, parse_token_id,
    read_file, write_corpus,
)
from conftest import data_path

FIG_FILES = ["fig1.conllu", "fig1_gold.conllu", "fig3a.conllu",
             "fig3b.conllu", "fig3c.conllu"]


def test_parse_fig1_shape(fig1):
    assert len(fig1.tokens) == 10
    assert fig1.sent_id == "fig1"
    wrote = fig1.tokens[4]
    assert wrote.form == "wrote"
    assert wrote.head == ROOT
    assert wrote.deprel == "root"
    assert fig1.tokens[6].form == "published"
    assert fig1.tokens[6].head == TokenId(5)
    assert fig1.tokens[6].deprel == "conj"
    assert wrote.feats == {"Mood": "Ind", "Tense": "Past", "VerbForm": "Fin"}


@pytest.mark.parametrize("name", FIG_FILES)
def test_round_trip_bytes(name):
    with open(data_path(name), encoding="utf-8") as fh:
        raw = fh.read()
    assert write_corpus(parse_corpus(raw)) == raw


def test_round_trip_fields(fig1_gold):
    text = write_corpus([fig1_gold])
    assert parse_corpus(text) == [fig1_gold]


MWT_DOC = """# sent_id = mwt
1	I	I	PRON	PRP	_	3	nsubj	3:nsubj	_
2-3	won't	_	_	_	_	_	_	_	_
2	wo	will	AUX	MD	_	3	aux	3:aux	_
3	n't	not	PART	RB	_	0	root	0:root	_
3.1	stay	stay	VERB	VB	_	_	_	3:conj	_
4	.	.	PUNCT	.	_	3	punct	3:punct	_

"""


def test_multiword_range_is_opaque_and_round_trips():
    sents = parse_corpus(MWT_DOC)
    sent = sents[0]
    ids = [str(t.id) for t in sent.tokens]
    assert ids == ["1", "2", "3", "3.1", "4"]
    assert [str(t.id) for t in sent.words()] == ["1", "2", "3", "4"]
    assert sent.ranges == {1: ["2-3\twon't\t_\t_\t_\t_\t_\t_\t_\t_"]}
    assert write_corpus(sents) == MWT_DOC


def test_empty_node_fields():
    sent = parse_corpus(MWT_DOC)[0]
    empty = sent.tokens[3]
    assert empty.id == TokenId(3, 1)
    assert empty.id.is_empty
    assert empty.head is None and empty.deprel is None
    assert empty.deps == [(TokenId(3), "conj")]


def test_deps_serialize_sorted_by_head():
    sent = parse_corpus(MWT_DOC)[0]
    tok = sent.tokens[0]
    tok.deps = [(TokenId(8, 1), "obj"), (TokenId(3), "nsubj"), (TokenId(8), "obl")]
    assert tok.deps_str() == "3:nsubj|8:obl|8.1:obj"


def test_feats_canonical_order():
    tok = Token(TokenId(1), "x", "x", "X", "_",
                {"VerbForm": "Fin", "Abbr": "Yes", "Mood": "Ind", "aspect": "Perf"},
                ROOT, "root", [], "_")
    assert tok.feats_str() == "Abbr=Yes|aspect=Perf|Mood=Ind|VerbForm=Fin"


def test_subtyped_deps_label_kept_verbatim():
    doc = ("1\tw\tw\tX\t_\t_\t0\troot\t0:root\t_\n"
           "2\tv\tv\tX\t_\t_\t1\tobl\t1:obl:in|1:ref\t_\n\n")
    sent = parse_corpus(doc)[0]
    assert sent.tokens[1].deps == [(TokenId(1), "obl:in"), (TokenId(1), "ref")]
    assert write_corpus([sent]) == doc


@pytest.mark.parametrize("bad,what", [
    ("1\tw\tw\tX\t_\t_\t0\troot\t_\n\n", "columns"),
    ("zork\tw\tw\tX\t_\t_\t0\troot\t_\t_\n\n", "token id"),
    ("1\tw\tw\tX\t_\t_\t4\tdep\t_\t_\n\n", "dangling head"),
    ("1\tw\tw\tX\t_\t_\t0\troot\t9:dep\t_\n\n", "dangling deps head"),
    ("1\tw\tw\tX\t_\t_\t_\t_\t_\t_\n\n", "lacks a HEAD"),
    ("1\tw\tw\tX\t_\tNumber\t0\troot\t_\t_\n\n", "malformed feature"),
    ("2\tw\tw\tX\t_\t_\t0\troot\t_\t_\n\n", "not contiguous"),
])
def test_parse_errors(bad, what):
    with pytest.raises(ParseError) as err:
        parse_corpus(bad)
    assert what in str(err.value)


def test_parse_error_carries_line_number():
    doc = ("1\tw\tw\tX\t_\t_\t0\troot\t_\t_\n"
           "2\tv\tv\tX\t_\t_\t1\tbad\tcolumn\n\n")
    with pytest.raises(ParseError) as err:
        parse_corpus(doc)
    assert err.value.line == 2


def test_out_of_order_empty_node_rejected():
    doc = ("1\tw\tw\tX\t_\t_\t0\troot\t_\t_\n"
           "1.2\te\te\tX\t_\t_\t_\t_\t_\t_\n"
           "1.1\te\te\tX\t_\t_\t_\t_\t_\t_\n"
           "2\tv\tv\tX\t_\t_\t1\tdep\t_\t_\n\n")
    with pytest.raises(ParseError) as err:
        parse_corpus(doc)
    assert "out of order" in str(err.value)


def test_parse_failure_is_total():
    doc = ("1\tw\tw\tX\t_\t_\t0\troot\t_\t_\n\n"
           "1\tw\tw\tX\t_\t_\t9\tdep\t_\t_\n\n")
    with pytest.raises(ParseError):
        parse_corpus(doc)


def test_token_id_parse_and_str():
    assert parse_token_id("7") == TokenId(7)
    assert parse_token_id("8.1") == TokenId(8, 1)
    assert str(TokenId(8, 1)) == "8.1"
    assert str(TokenId(7)) == "7"
    assert TokenId(8) < TokenId(8, 1) < TokenId(9)


@given(st.dictionaries(
    st.sampled_from(["Number", "Mood", "Voice", "Person", "VerbForm",
                     "Abbr", "Tense", "Case", "Gender"]),
    st.sampled_from(["Sing", "Plur", "Ind", "Imp", "Act", "Pass", "3", "Fin"]),
    max_size=6))
def test_feats_round_trip(feats):
    from conjprop.conllu import _parse_feats
    tok = Token(TokenId(1), "x", "x", "X", "_", dict(feats), ROOT, "root", [], "_")
    assert _parse_feats(tok.feats_str(), 1) == feats


@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 3)), max_size=5))
def test_token_id_ordering_matches_tuple_order(pairs):
    ids = [TokenId(a, b) for a, b in pairs]
    assert sorted(ids) == [TokenId(a, b) for a, b in sorted(pairs)]
