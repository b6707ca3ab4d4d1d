import random

import pytest
from hypothesis import given, settings

from amrx.graph import (AmrEntry, AmrGraph, Constant, GraphError, PenmanError, canonical_penman, extract_triples,
                        format_entry, isomorphic, parse_corpus, parse_penman, rename_variables, serialize_penman,
                        strip_sense, write_corpus, read_corpus)
from conftest import ALL_DISPLAYED, DIVERGENCES, EXAMPLE_PARSES, graphs, random_graph


def test_parse_worked_example(sovereignty):
    g = sovereignty
    assert g.root == "s"
    assert g.concepts == {"s": "sovereignty", "c": "country", "e": "each", "t": "this"}
    assert sorted(r for _, r, _ in g.edges) == [":domain", ":mod", ":poss"]


def test_minimal_graph():
    g = parse_penman("(a / a)")
    assert g.concepts == {"a": "a"} and g.edges == ()
    assert serialize_penman(g) == "(a / a)"
    assert extract_triples(g) == {("a", "instance", "a"), ("a", "TOP", "a")}


def test_reentrancy():
    g = parse_penman(DIVERGENCES["fear"])
    assert len(g.concepts) == 2 and len(g.edges) == 2
    assert ("f", ":ARG1", "i") in g.edges and ("f", ":ARG0", "i") in g.edges


def test_inverse_roles_kept_verbatim():
    g = parse_penman(EXAMPLE_PARSES["do"])
    assert ("s", ":ARG0-of", "h") in g.edges


def test_serialize_canonical_order(sovereignty):
    assert serialize_penman(sovereignty) == "(s / sovereignty :domain (t / this) :poss (c / country :mod (e / each)))"


def test_serialize_reentrant_as_bare_variable():
    g = parse_penman(DIVERGENCES["like"])
    assert serialize_penman(g) == "(l / like-01 :ARG0 (i / i) :ARG1 (g / grape :ARG0 i))"


def test_triples_worked_example(sovereignty):
    triples = extract_triples(sovereignty)
    assert len(triples) == 8
    assert sum(1 for t in triples if t[1] == "instance") == 4
    assert ("s", "TOP", "sovereignty") in triples


def test_polarity_attribute_triple():
    g = parse_penman(EXAMPLE_PARSES["do"])
    assert ("d", ":polarity", Constant("-")) in extract_triples(g)


def test_constants_quoted_and_numeric():
    g = parse_penman('(n / name :op1 "New York" :op2 1998)')
    values = {e[2].value for e in g.constants()}
    assert values == {"New York", "1998"}
    assert serialize_penman(parse_penman(serialize_penman(g))) == serialize_penman(g)


@pytest.mark.parametrize("text", sorted(ALL_DISPLAYED.values()))
def test_displayed_graphs_round_trip(text):
    g = parse_penman(text)
    again = parse_penman(serialize_penman(g))
    assert isomorphic(g, again)
    assert serialize_penman(again) == serialize_penman(g)


@pytest.mark.parametrize("text, offset", [
    ("(a / b", 6),
    ("(a / b))", 7),
    ("(a / b :ARG0 (a / c))", 14),
    ("(a / b :ARG0 x)", 13),
    ("(a / )", 5),
])
def test_errors_report_offsets(text, offset):
    with pytest.raises(PenmanError) as info:
        parse_penman(text)
    assert info.value.offset == offset


def test_error_offset_is_in_bytes():
    with pytest.raises(PenmanError) as info:
        parse_penman("(é / b :ARG0 x)")
    assert info.value.offset == len("(é / b :ARG0 ".encode("utf-8"))


def test_duplicate_edge_rejected():
    with pytest.raises(PenmanError):
        parse_penman("(a / b :ARG0 (c / d) :ARG0 c)")


def test_graph_validation():
    with pytest.raises(GraphError):
        AmrGraph("a", {"a": "x", "b": "y"}, [])  # b unreachable
    with pytest.raises(GraphError):
        AmrGraph("a", {"a": ""}, [])
    with pytest.raises(GraphError):
        AmrGraph("a", {"a": "x"}, [("a", "ARG0", Constant("1"))])


def test_strip_sense():
    assert strip_sense("answer-01") == "answer"
    assert strip_sense("have-org-role-91") == "have-org-role"
    assert strip_sense("dog") == "dog"


def test_addresses(sovereignty):
    addrs = sovereignty.addresses()
    assert addrs == {"0": "s", "0.0": "t", "0.1": "c", "0.1.0": "e"}


def test_addresses_reentrant_keep_first_visit():
    g = parse_penman(DIVERGENCES["like"])
    addrs = g.addresses()
    assert addrs["0.0"] == "i" and list(addrs.values()).count("i") == 1
    assert set(addrs) == {"0", "0.0", "0.1"}


def test_addresses_cover_constants():
    g = parse_penman(EXAMPLE_PARSES["do"])
    nodes = list(g.addresses().values())
    assert len(nodes) == len(g.concepts) + len(g.constants())
    assert len(set(map(repr, nodes))) == len(nodes)


def test_rename_variables_isomorphic(sovereignty):
    renamed = rename_variables(sovereignty, {"s": "q", "c": "r", "e": "z", "t": "w"})
    assert renamed.root == "q"
    assert isomorphic(sovereignty, renamed)
    assert canonical_penman(sovereignty) == canonical_penman(renamed)


def test_isomorphism_detects_differences(sovereignty):
    other = parse_penman("(s / sovereignty :poss (c / country :mod (e / each)) :mod (t / this))")
    assert not isomorphic(sovereignty, other)


def test_corpus_io(tmp_path, sovereignty):
    entries = [AmrEntry("1", "This is the sovereignty of each country", sovereignty, {"alignments": "0|3-3"}),
               AmrEntry("2", "a", parse_penman("(a / a)"))]
    path = tmp_path / "c.amr"
    write_corpus(entries, path)
    back = read_corpus(path)
    assert [e.id for e in back] == ["1", "2"]
    assert back[0].metadata == {"alignments": "0|3-3"}
    assert back[0].tokens[3] == "sovereignty"
    assert isomorphic(back[0].graph, sovereignty)
    assert format_entry(back[1]).startswith("# ::id 2\n# ::snt a\n")


def test_corpus_multiline_graph():
    text = "# ::id x\n# ::snt we will answer\n(a / answer-01\n   :ARG0 (w / we))\n"
    (entry,) = parse_corpus(text)
    assert entry.snt == "we will answer" and len(entry.graph.edges) == 1


def test_corpus_error_names_block():
    with pytest.raises(PenmanError, match="block at line 3: unbalanced"):
        parse_corpus("(a / a)\n\n# ::id 2\n(b / b\n")


# -- properties ------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(graphs())
def test_round_trip_isomorphic(g):
    back = parse_penman(serialize_penman(g))
    assert isomorphic(g, back)


@settings(max_examples=200, deadline=None)
@given(graphs())
def test_serialization_idempotent(g):
    once = serialize_penman(g)
    assert serialize_penman(parse_penman(once)) == once


@settings(max_examples=200, deadline=None)
@given(graphs())
def test_triple_count_identity(g):
    assert len(extract_triples(g)) == len(g.concepts) + len(g.edges) + 1


@settings(max_examples=200, deadline=None)
@given(graphs())
def test_addresses_bijective_and_stable(g):
    addrs = g.addresses()
    nodes = list(addrs.values())
    assert len(nodes) == len(g.concepts) + len(g.constants())
    back = parse_penman(serialize_penman(g))
    relabel = {addr: g.node_label(node) for addr, node in addrs.items()}
    assert {addr: back.node_label(node) for addr, node in back.addresses().items()} == relabel


def test_round_trip_500_seeded():
    rng = random.Random(7)
    for _ in range(500):
        g = random_graph(rng, max_vars=8)
        assert isomorphic(g, parse_penman(serialize_penman(g)))
