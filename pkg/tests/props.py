"""Property checks used by the acceptance suite and the hypothesis tests.

Each ``check_*`` takes a presentation and random data and returns None when
the property holds, or a short description of the violation.
"""

from wordrev import corpus
from wordrev.analysis import OracleConfig, oracle_class, oracle_equiv
from wordrev.completeness import check_cube_at
from wordrev.core import inverse, negative, positive, syntactic_flags
from wordrev.engine import Budget, reverse_exhaustive, split_check, step_left, step_right

SMALL = Budget(max_branch_steps=200, max_word_len=64, max_visited=20_000)
ORACLE = OracleConfig(max_len=24, max_states=200_000)

# presentations whose reversings all terminate on short words
TERMINATING = ["s2", "s3", "b3", "b4", "bkl3", "hako", "hakp", "hakq", "heis", "heit", "bkls",
               "nemb", "lee", "noet"]
COMPLETE = ["s2", "s3", "b3", "hakq", "heit"]
COMPLEMENTED = ["b3", "b4", "bkl3", "heis", "free"]

_cache = {}


def load(name):
    if name not in _cache:
        _cache[name] = corpus.load_entry(name).presentation
    return _cache[name]


def check_inverse_symmetry(P, w):
    """Every right (left) step w -> w' gives a right (left) step w^-1 -> w'^-1."""
    for stepper in (step_right, step_left):
        targets = {nxt for _, nxt in stepper(P, inverse(w))}
        for _, nxt in stepper(P, w):
            if inverse(nxt) not in targets:
                return f"{stepper.__name__}: {w} -> {nxt} has no mirrored step"
    return None


_classes = {}


def oracle_same(P, x, y):
    """Oracle equivalence; for length-preserving relations whole classes are cached."""
    if not syntactic_flags(P).uniform_length:
        return oracle_equiv(P, x, y, ORACLE)
    known = _classes.setdefault(P.name, {})
    if x not in known:
        cls, complete = oracle_class(P, x, ORACLE)
        if not complete:
            return oracle_equiv(P, x, y, ORACLE)
        cls = frozenset(cls)
        for word in cls:
            known[word] = cls
    return "yes" if y in known[x] else "no_within_bound"


def check_soundness(P, u, v):
    """Every terminal v' u'^-1 of u^-1 v has u v' == v u' by the oracle."""
    out = reverse_exhaustive(P, negative(u) + positive(v), "right", SMALL)
    for frac in out.terminals:
        res = oracle_same(P, u + frac.num, v + frac.den)
        if res != "yes":
            return f"{u}^-1 {v} -> {frac}: oracle says {res}"
    return None


def check_split(P, w1, w2):
    """A trace of w1 w2 to a fraction decomposes into the three sub-reversings."""
    out = reverse_exhaustive(P, w1 + w2, "right", SMALL)
    for frac in sorted(out.terminals, key=lambda f: (f.num, f.den))[:2]:
        trace = out.trace(frac)
        try:
            d = split_check(P, w1, w2, trace)
        except ValueError as exc:
            return f"split of {w1}|{w2}: {exc}"
        if d.u1 + d.u2 != frac.den or d.v1 + d.v2 != frac.num:
            return f"split of {w1}|{w2} does not recombine"
        if d.left_trace.start != w1 or d.right_trace.start != w2:
            return f"split of {w1}|{w2}: partial traces start elsewhere"
    return None


def check_determinism(P, w):
    out = reverse_exhaustive(P, w, "right", SMALL)
    if len(out.terminals) > 1:
        return f"{w} has {len(out.terminals)} terminals"
    return None


def check_weak(P, u, v, w):
    """Strong cube ok at (u, v, w) implies the plain cube condition there (oracle mode)."""
    strong, _ = check_cube_at(P, u, v, w, strong=True, budget=SMALL)
    if strong != "ok":
        return None
    plain, witness = check_cube_at(P, u, v, w, strong=False, budget=SMALL, mode="oracle",
                                   oracle_cfg=ORACLE)
    if plain == "fail":
        return f"cube fails at {u},{v},{w}: {witness}"
    return None
