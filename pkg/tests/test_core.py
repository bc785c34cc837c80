import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wordrev import corpus
from wordrev.core import (
    ParseError,
    Presentation,
    Relation,
    format_word,
    inverse,
    mirror,
    parse_positive_word,
    parse_presentation,
    parse_word,
    relations_for_pair,
    serialize_presentation,
    syntactic_flags,
)

signed_words = st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from((1, -1))),
                        max_size=12).map(tuple)


def test_parse_two_relation_presentation():
    P = parse_presentation("letters: a b\nrel: a a = b b\nrel: a b = b a")
    assert P.alphabet == ("a", "b")
    assert [(r.lhs, r.rhs, r.id) for r in P.relations] == [
        (("a", "a"), ("b", "b"), 1), (("a", "b"), ("b", "a"), 2)]


def test_parse_relation_free():
    P = parse_presentation("letters: a\n")
    assert P.alphabet == ("a",) and P.relations == ()


def test_parse_empty_side_reports_position():
    with pytest.raises(ParseError) as info:
        parse_presentation("letters: a\nrel: a = ")
    assert info.value.line == 2


@pytest.mark.parametrize("text", [
    "letters: a\nrel: a = b",          # unknown letter
    "letters: a a\n",                  # duplicate letter
    "rel: a = a\n",                    # relations before letters
    "letters: a b\nrel: a b\n",        # missing '='
    "letters: a\npseudolength: weights a=0\n",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_presentation(text)


def test_comments_and_tokens():
    P = parse_presentation("# braids\nletters: s1 s2  # two strands\nrel: s1 s2 s1 = s2 s1 s2\n")
    assert P.alphabet == ("s1", "s2")
    assert P.relations[0].lhs == ("s1", "s2", "s1")


def test_relation_chain_gives_all_pairs():
    P = parse_presentation("letters: a b c\nrel: a b = b c = c a\n")
    got = {frozenset((r.lhs, r.rhs)) for r in P.relations}
    assert got == {frozenset({("a", "b"), ("b", "c")}), frozenset({("a", "b"), ("c", "a")}),
                   frozenset({("b", "c"), ("c", "a")})}


def test_relations_are_unordered():
    assert Relation(("a", "b"), ("b", "a")) == Relation(("b", "a"), ("a", "b"))


def test_duplicate_relation_rejected():
    with pytest.raises(ValueError):
        Presentation(("a", "b"), (Relation(("a", "b"), ("b", "a"), 1),
                                  Relation(("b", "a"), ("a", "b"), 2)))


def test_empty_relation_side_rejected():
    with pytest.raises(ValueError):
        Relation((), ("a",))


def test_inverse_examples():
    assert inverse(parse_word("a^-1 b a b^-1")) == parse_word("b a^-1 b^-1 a")
    assert inverse(()) == ()
    assert inverse(parse_word("a")) == parse_word("a^-1")


@settings(max_examples=1000)
@given(signed_words)
def test_inverse_is_involution(w):
    assert inverse(inverse(w)) == w
    assert len(inverse(w)) == len(w)


@settings(max_examples=300)
@given(signed_words)
def test_mirror_is_involution(w):
    assert mirror(mirror(w)) == w


def test_parse_and_format_words():
    w = parse_word("a^-1 b' 1 c")
    assert w == (("a", -1), ("b'", 1), ("c", 1))
    assert format_word(w) == "a^-1 b' c"
    assert format_word(()) == "1"
    assert parse_positive_word("1") == ()
    with pytest.raises(ParseError):
        parse_positive_word("a^-1")
    with pytest.raises(ParseError):
        parse_word("d", "abc")


def test_relations_for_pair_two_relations():
    P = corpus.load_entry("s2").presentation
    # a a = b b read as a.a = b.b, and a b = b a read as a.b = b.a
    assert relations_for_pair(P, "a", "b") == [(("a",), ("b",), 1), (("b",), ("a",), 2)]
    assert relations_for_pair(P, "a", "a") == []


def test_relations_for_pair_heisenberg():
    P = corpus.load_entry("heis").presentation
    assert relations_for_pair(P, "c", "b") == [(("b",), ("c",), 3)]


@pytest.mark.parametrize("name", corpus.names())
def test_relations_for_pair_symmetry(name):
    P = corpus.load_entry(name).presentation
    for s in P.alphabet:
        for t in P.alphabet:
            ab = relations_for_pair(P, s, t)
            ba = relations_for_pair(P, t, s)
            assert sorted((up, vp, i) for vp, up, i in ab) == sorted((vp, up, i) for vp, up, i in ba)


def test_flags_braid_presentation():
    flags = syntactic_flags(corpus.load_entry("b3").presentation)
    assert all(flags)


def test_flags_lee():
    assert not syntactic_flags(corpus.load_entry("lee").presentation).satisfies_Cr


def test_flags_hakp_not_complemented():
    P = corpus.load_entry("hakp").presentation
    firsts = [(r.lhs[0], r.rhs[0]) for r in P.relations]
    pairs = [frozenset(p) for p in firsts if p[0] != p[1]]
    assert len(pairs) != len(set(pairs))  # some pair of first letters repeats
    assert not syntactic_flags(P).is_r_complemented


def test_flags_uniform_length():
    assert syntactic_flags(corpus.load_entry("s3").presentation).uniform_length
    assert not syntactic_flags(corpus.load_entry("heis").presentation).uniform_length


@pytest.mark.parametrize("name", corpus.names())
def test_round_trip(name):
    P = corpus.load_entry(name).presentation
    Q = parse_presentation(serialize_presentation(P))
    assert Q == P
    assert [r.id for r in Q.relations] == list(range(1, len(Q.relations) + 1))


def test_mirror_presentation_keeps_ids():
    P = corpus.load_entry("heis").presentation
    M = P.mirror()
    for r, m in zip(P.relations, M.relations):
        assert r.id == m.id
        assert {m.lhs, m.rhs} == {r.lhs[::-1], r.rhs[::-1]}


def test_with_relation_idempotent():
    P = corpus.load_entry("s2").presentation
    assert P.with_relation(("b", "a"), ("a", "b")) is P
    Q = P.with_relation(("a", "a", "a"), ("b", "b", "a"))
    assert len(Q.relations) == 3 and Q.relations[-1].id == 3


def test_homogeneous_weights():
    assert corpus.load_entry("s3").presentation.homogeneous_weights == {"a": 1, "b": 1, "c": 1}
    assert corpus.load_entry("noet").presentation.homogeneous_weights == {"a": 1, "b": 2}
    assert corpus.load_entry("heis").presentation.homogeneous_weights is None
    assert corpus.load_entry("bs").presentation.homogeneous_weights is None
