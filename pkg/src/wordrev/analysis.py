"""Monoid and group properties read from a (complete) presentation.

Every decider returns a ``TriVerdict`` listing the hypotheses its answer
depends on: the criteria used here hold for complete presentations only,
and the tool does not silently assume completeness.

``oracle_equiv`` is the independent check: a breadth-first walk through
the congruence class of a word, applying relations both ways in every
context.  It never uses reversing.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product

from .closure import compute_closure
from .core import Presentation, format_word, inverse, negative, positive, syntactic_flags
from .engine import (
    DEFAULT_BUDGET,
    LEFT,
    RIGHT,
    Budget,
    Terminals,
    reverse_exhaustive,
    reverses_to_empty,
    right_terminals,
)

YES, NO, UNKNOWN = "yes", "no", "unknown"


@dataclass
class TriVerdict:
    value: str  # "yes" | "no" | "unknown"
    witness: object = None
    assumptions: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.value == YES

    def report(self) -> dict:
        out = {"value": self.value, "assumptions": list(self.assumptions)}
        if self.witness is not None:
            out["witness"] = _render(self.witness)
        out.update({k: _render(v) for k, v in self.details.items()})
        return out


def _render(obj):
    if hasattr(obj, "to_text"):
        return obj.to_text()
    if hasattr(obj, "report"):
        return obj.report()
    if isinstance(obj, tuple) and all(isinstance(x, str) for x in obj):
        return format_word(obj)
    if isinstance(obj, dict):
        return {str(_render(k)): _render(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_render(x) for x in obj]
    return obj


# -- brute-force congruence oracle -----------------------------------------------

@dataclass(frozen=True)
class OracleConfig:
    max_len: int = 12
    max_states: int = 200_000

    def __post_init__(self):
        if self.max_len < 1 or self.max_states < 1:
            raise ValueError("oracle bounds must be positive")


def oracle_class(P: Presentation, u, cfg: OracleConfig = OracleConfig(), target=None):
    """``(words, complete)``: the congruence class of ``u`` within the bounds.

    ``complete`` is true when nothing was cut off, in which case ``words``
    is the whole class.  With a ``target`` the walk stops as soon as it
    reaches that word (``complete`` is then False).
    """
    u = tuple(u)
    seen = {u}
    if target is not None and u == tuple(target):
        return seen, False
    queue = deque([u])
    complete = True
    rules = P.rewrite_rules
    while queue:
        w = queue.popleft()
        n = len(w)
        for src, dst, _, _ in rules:
            k = len(src)
            for i in range(n - k + 1):
                if w[i:i + k] == src:
                    nxt = w[:i] + dst + w[i + k:]
                    if nxt in seen:
                        continue
                    if len(nxt) > cfg.max_len or len(seen) >= cfg.max_states:
                        complete = False
                        continue
                    seen.add(nxt)
                    if nxt == target:
                        return seen, False
                    queue.append(nxt)
    return seen, complete


def oracle_equiv(P: Presentation, u, v, cfg: OracleConfig = OracleConfig()) -> str:
    """``yes``, ``no_within_bound`` (class fully enumerated without ``v``) or ``unknown``."""
    u, v = tuple(u), tuple(v)
    if u == v:
        return YES
    cls, complete = oracle_class(P, u, cfg, target=v)
    if v in cls:
        return YES
    return "no_within_bound" if complete else UNKNOWN


def oracle_partition(P: Presentation, words, cfg: OracleConfig = OracleConfig()) -> dict:
    """Map each word to a class index; classes that were cut off raise ValueError."""
    index: dict = {}
    k = 0
    for w in words:
        w = tuple(w)
        if w in index:
            continue
        cls, complete = oracle_class(P, w, cfg)
        if not complete:
            raise ValueError(f"class of {format_word(w)} exceeds the oracle bounds")
        for x in cls:
            index[x] = k
        k += 1
    return index


# -- cancellativity and the monoid word problem ----------------------------------

def check_left_cancellative(P: Presentation, budget: Budget = DEFAULT_BUDGET) -> TriVerdict:
    """Left cancellation holds iff ``u^-1 v ->r e`` for every relation ``s u = s v``."""
    return _cancellative(P, budget, RIGHT)


def check_right_cancellative(P: Presentation, budget: Budget = DEFAULT_BUDGET) -> TriVerdict:
    """Right cancellation holds iff ``u v^-1 ->l e`` for every relation ``u s = v s``."""
    return _cancellative(P, budget, LEFT)


def _cancellative(P, budget, direction):
    side = "r" if direction == RIGHT else "l"
    assumptions = [f"{side}-complete"]
    checked = []
    undecided = []
    for r in P.relations:
        if direction == RIGHT and r.lhs[0] == r.rhs[0]:
            u, v = r.lhs[1:], r.rhs[1:]
        elif direction == LEFT and r.lhs[-1] == r.rhs[-1]:
            u, v = r.lhs[:-1], r.rhs[:-1]
        else:
            continue
        verdict = reverses_to_empty(P, u, v, direction, budget)
        checked.append((r.id, verdict.value))
        if verdict.value == NO:
            return TriVerdict(NO, str(r), assumptions, {"relation": r.id})
        if verdict.value == UNKNOWN:
            undecided.append(r.id)
    if undecided:
        return TriVerdict(UNKNOWN, None, assumptions, {"undecided_relations": undecided})
    how = f"C_{side}" if not checked else "reversing"
    return TriVerdict(YES, None, assumptions, {"via": how})


def monoid_word_problem(P: Presentation, u, v, budget: Budget = DEFAULT_BUDGET,
                        table=None, quotients=None) -> TriVerdict:
    """Decide ``u == v`` in the monoid by right reversing of ``u^-1 v``.

    Sound when the presentation is right complete.  With a closed table
    of closure words the macro search is used; it always terminates.
    ``quotients`` shares the memo of the emptiness test across calls.
    """
    from .closure import bounded_terminals

    u, v = tuple(u), tuple(v)
    assumptions = ["r-complete"]
    if table is not None and table.closed:
        found = bounded_terminals(P, table, negative(u) + positive(v))
        value = YES if any(not f.num and not f.den for f in found) else NO
        return TriVerdict(value, None, assumptions, {"path": "table"})
    verdict = reverses_to_empty(P, u, v, RIGHT, budget, quotients=quotients)
    return TriVerdict(verdict.value, verdict.trace, assumptions, {"path": "reversing"})


# -- common multiples ----------------------------------------------------------------

def check_Er(P: Presentation, seed=None, budget: Budget = DEFAULT_BUDGET,
             max_words: int = 2000) -> TriVerdict:
    """Look for a family containing the letters in which all pairs have common multiples.

    The candidate family is ``seed`` (letters added if missing) or the
    closure of the letters under reversing.  For each pair ``(u, v)`` a
    witness ``(u', v')`` with ``(u v')^-1 (v u') ->r e`` is searched,
    terminals of ``u^-1 v`` first.
    """
    if seed is None:
        res = compute_closure(P, budget, max_words=max_words)
        if not res.closed:
            cert = triangular_certificate(P)
            if cert is not None:
                return TriVerdict(YES, cert, [], {"family": "all words"})
            return TriVerdict(UNKNOWN, None, [], {"reason": "closure not computed within budget"})
        family = set(res.words)
    else:
        family = {tuple(w) for w in seed} | {(x,) for x in P.alphabet}
    ordered = sorted(family, key=lambda w: (len(w), w))
    witnesses = {}
    table = Terminals(P, budget)
    for u, v in product(ordered, repeat=2):
        found = None
        fracs, _ = right_terminals(P, negative(u) + positive(v), budget, table)
        for f in fracs:
            if f.num in family and f.den in family:
                found = (f.den, f.num)
                break
        if found is None:
            for up, vp in product(ordered, repeat=2):
                if reverses_to_empty(P, u + vp, v + up, RIGHT, budget).value == YES:
                    found = (up, vp)
                    break
        if found is None:
            return TriVerdict(UNKNOWN, None, [], {"failed_pair": (u, v),
                                                   "family_size": len(family)})
        witnesses[(u, v)] = found
    return TriVerdict(YES, witnesses, [], {"family": ordered})


def triangular_certificate(P: Presentation, max_letters: int = 6):
    """Ranks and rules proving that every two words have a common right multiple.

    Looks for letter ranks and, for each pair ``s != t``, a relation
    ``s (t X) = t (s Y)`` where ``X`` and ``Y`` only use letters ranked below
    both ``s`` and ``t``.  Reversing with these rules terminates on every
    word: two lines of a diagram cross at most once and a crossing only
    spawns lower-ranked lines, so by induction on the rank finitely many
    lines and crossings occur.  Each terminal ``v' u'^-1`` of ``u^-1 v``
    gives ``u v' == v u'``.  Returns ``{"ranks": ..., "rules": ...}`` or None.
    """
    letters = P.alphabet
    n = len(letters)
    if n > max_letters:
        return None
    for levels in product(range(n), repeat=n):
        ranks = dict(zip(letters, levels))
        rules = {}
        for s_, t_ in product(letters, repeat=2):
            if s_ == t_:
                continue
            floor = min(ranks[s_], ranks[t_])
            for r in P.relations:
                for x, y in ((r.lhs, r.rhs), (r.rhs, r.lhs)):
                    if x[:2] == (s_, t_) and y[:2] == (t_, s_) and \
                            all(ranks[z] < floor for z in x[2:] + y[2:]):
                        rules[(s_, t_)] = r.id
                        break
                if (s_, t_) in rules:
                    break
            else:
                break
        if len(rules) == n * (n - 1):
            return {"ranks": ranks, "rules": rules}
    return None


@dataclass
class LcmResult:
    status: str  # "lcm" | "none" | "inapplicable" | "unknown"
    word: tuple | None = None
    trace: object = None
    assumptions: list = field(default_factory=list)


def lcm_right(P: Presentation, u, v, budget: Budget = DEFAULT_BUDGET) -> LcmResult:
    """Right lcm of ``u`` and ``v`` as ``u v'`` where ``u^-1 v -> v' u'^-1``."""
    flags = syntactic_flags(P)
    assumptions = ["r-complete", "U_r"]
    if not flags.is_r_complemented:
        return LcmResult("inapplicable", assumptions=assumptions)
    u, v = tuple(u), tuple(v)
    out = reverse_exhaustive(P, negative(u) + positive(v), RIGHT, budget)
    if out.budget_exceeded:
        return LcmResult("unknown", assumptions=assumptions)
    if not out.terminals:
        return LcmResult("none", trace=out.trace_to(next(iter(out.stuck))) if out.stuck else None,
                         assumptions=assumptions)
    frac = out.sorted_terminals()[0]
    return LcmResult("lcm", u + frac.num, out.trace(frac), assumptions)


# -- groups of fractions -----------------------------------------------------------

def ore_report(P: Presentation, budget: Budget = DEFAULT_BUDGET, completeness=None,
               seed=None) -> dict:
    """Embedding of the monoid in a group of fractions, from (C) and (E_r).

    ``completeness`` is a ``CompletenessVerdict``; it is computed when not
    given.  Hypotheses the check could not discharge stay listed.
    """
    from .completeness import check_complete

    if completeness is None:
        completeness = check_complete(P, budget=budget)
    flags = syntactic_flags(P)
    left = check_left_cancellative(P, budget)
    right = check_right_cancellative(P, budget)
    er = check_Er(P, seed, budget)
    pending = [] if completeness.value == "complete" else ["complete"]
    cancellative = left.value == YES and right.value == YES
    if cancellative and er.value == YES:
        value = YES
    elif left.value == NO or right.value == NO:
        value = NO
    else:
        value = UNKNOWN
    hyps = ["complete", "C" if flags.satisfies_C else "cancellative", "E_r"]
    discharged = [h for h, ok in zip(hyps, (not pending, cancellative, er.value == YES)) if ok]
    embeds = TriVerdict(value, None, hyps,
                        {"completeness": completeness.value, "discharged": discharged})
    fractions = TriVerdict(value, None, pending + ["E_r"], {})
    return {
        "embeds": embeds,
        "group_of_fractions": fractions,
        "details": {
            "completeness": completeness.value,
            "C": flags.satisfies_C,
            "left_cancellative": left,
            "right_cancellative": right,
            "E_r": er,
        },
    }


def group_word_problem(P: Presentation, w, budget: Budget = DEFAULT_BUDGET) -> TriVerdict:
    """Decide ``w == 1`` in the group by double reversing.

    Right reverse ``w`` to every ``v u^-1``; then ``w`` is trivial iff some
    ``u^-1 v`` reverses to the empty word.
    """
    w = tuple(w)
    assumptions = ["complete", "C", "E_r"]
    fracs, exceeded = right_terminals(P, w, budget)
    undecided = exceeded
    for frac in fracs:
        verdict = reverses_to_empty(P, frac.den, frac.num, RIGHT, budget)
        if verdict.value == YES:
            return TriVerdict(YES, verdict.trace, assumptions,
                              {"fraction": str(frac), "terminals": len(fracs)})
        if verdict.value == UNKNOWN:
            undecided = True
    return TriVerdict(UNKNOWN if undecided else NO, None, assumptions, {"terminals": len(fracs)})


def fraction_equiv(P: Presentation, w1, w2, budget: Budget = DEFAULT_BUDGET,
                   max_multiplier: int = 4) -> TriVerdict:
    """Equality of two signed words in the group, via the word problem for ``w1 w2^-1``.

    For positive inputs a multiplier ``m`` with ``w1 m == w2 m`` is also
    searched by increasing length and returned as witness.
    """
    w1, w2 = tuple(w1), tuple(w2)
    assumptions = ["r-complete", "C_r", "E_r"]
    verdict = group_word_problem(P, w1 + inverse(w2), budget)
    details = {"group_word_problem": verdict.value}
    witness = verdict.witness
    if all(e > 0 for _, e in w1 + w2):
        u1 = tuple(x for x, _ in w1)
        u2 = tuple(x for x, _ in w2)
        for n in range(max_multiplier + 1):
            hit = next((m for m in product(P.alphabet, repeat=n)
                        if reverses_to_empty(P, u1 + m, u2 + m, RIGHT, budget).value == YES), None)
            if hit is not None:
                details["multiplier"] = hit
                break
    return TriVerdict(verdict.value, witness, assumptions, details)
