"""Randomised properties of reversing, checked with hypothesis."""

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from oracles import free_reduce
from props import (
    COMPLEMENTED,
    COMPLETE,
    SMALL,
    TERMINATING,
    check_determinism,
    check_inverse_symmetry,
    check_soundness,
    check_split,
    check_weak,
    load,
)
from wordrev.core import negative, positive
from wordrev.engine import Fraction, reverse_exhaustive, reverses_to_empty

FAST = settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
SLOW = settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def signed_word(draw, names, max_len=8):
    name = draw(st.sampled_from(names))
    P = load(name)
    letters = st.tuples(st.sampled_from(P.alphabet), st.sampled_from((1, -1)))
    return P, tuple(draw(st.lists(letters, max_size=max_len)))


@st.composite
def positive_words(draw, names, count, lo=1, hi=3):
    name = draw(st.sampled_from(names))
    P = load(name)
    word = st.lists(st.sampled_from(P.alphabet), min_size=lo, max_size=hi).map(tuple)
    return (P,) + tuple(draw(word) for _ in range(count))


@FAST
@given(signed_word(TERMINATING + ["bs", "artin"]))
def test_steps_commute_with_inversion(data):
    P, w = data
    assert check_inverse_symmetry(P, w) is None


@FAST
@given(signed_word(COMPLEMENTED, max_len=7))
def test_complemented_presentations_are_deterministic(data):
    P, w = data
    assert check_determinism(P, w) is None


@FAST
@given(signed_word(["free"], max_len=12))
def test_free_reversing_is_free_reduction_up_to_order(data):
    # with no relations only deletions apply: either every branch gets stuck
    # on some s^-1 t, or there is one terminal, equal to w in the free group
    P, w = data
    out = reverse_exhaustive(P, w, budget=SMALL)
    assert len(out.terminals) <= 1
    assert bool(out.terminals) != bool(out.stuck)
    for frac in out.terminals:
        assert free_reduce(frac.word()) == free_reduce(w)


@SLOW
@given(positive_words(["s3", "b3", "hakq", "heis", "heit"], 2))
def test_terminals_name_equal_elements(data):
    P, u, v = data
    assert check_soundness(P, u, v) is None


@SLOW
@given(signed_word(["b3", "heis", "s2", "hakq"], max_len=8), st.integers(min_value=0, max_value=8))
def test_split_at_any_point(data, cut):
    P, w = data
    cut = min(cut, len(w))
    if 0 < cut < len(w):
        assert check_split(P, w[:cut], w[cut:]) is None


@SLOW
@given(positive_words(COMPLETE, 3, hi=2))
def test_strong_cube_gives_cube(data):
    P, u, v, w = data
    assert check_weak(P, u, v, w) is None


@FAST
@given(positive_words(COMPLETE + ["noet"], 1, lo=0, hi=5))
def test_complete_presentations_decide_equality(data):
    # on a complete presentation u^-1 v -> e exactly when u == v
    P, u = data
    from wordrev.analysis import oracle_class

    cls, complete = oracle_class(P, u)
    if not complete:
        return
    for v in sorted(cls)[:4]:
        assert reverses_to_empty(P, u, v, budget=SMALL).value == "yes"


@FAST
@given(positive_words(COMPLETE + COMPLEMENTED, 1, lo=0, hi=6))
def test_word_against_itself_reverses_to_empty(data):
    P, u = data
    out = reverse_exhaustive(P, negative(u) + positive(u), budget=SMALL)
    assert Fraction((), ()) in out.terminals
