"""Closure of the alphabet under right reversing, and macro-step reversing.

When the closure is finite, every reversing of a signed word decomposes
into lookups in the table of pairwise reversings of closure words, with at
most ``p*q`` lookups for ``p`` positive and ``q`` negative letters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Presentation, format_word, negative, positive
from .engine import DEFAULT_BUDGET, Budget, BudgetExceeded, Fraction, Terminals

CLOSED, FAILED_PAIRS, BUDGET_EXCEEDED = "closed", "failed_pairs", "budget_exceeded"


@dataclass
class McmTable:
    """``(u, v) -> [(Fraction, steps)]`` for the right reversings of ``u^-1 v``."""

    entries: dict = field(default_factory=dict)
    closed: bool = False

    def terminals(self, u, v) -> list:
        return self.entries.get((u, v), [])

    def chosen(self, u, v):
        """Lexicographically least terminal of ``u^-1 v`` (None if the pair fails)."""
        options = self.entries.get((u, v))
        if not options:
            return None
        return min(options, key=lambda fs: (fs[0].num, fs[0].den))[0]


@dataclass
class ClosureResult:
    words: set
    status: str
    failed_pairs: set
    max_pair_steps: int
    table: McmTable

    @property
    def closed(self) -> bool:
        return self.status in (CLOSED, FAILED_PAIRS)

    def sorted_words(self):
        return sorted(self.words, key=lambda w: (len(w), w))

    def report(self) -> dict:
        return {
            "status": self.status,
            "size": len(self.words),
            "words": [format_word(w) for w in self.sorted_words()],
            "K": self.max_pair_steps,
            "failed_pairs": sorted(f"{format_word(u)}|{format_word(v)}" for u, v in self.failed_pairs),
        }


def compute_closure(P: Presentation, budget: Budget = DEFAULT_BUDGET,
                    max_words: int = 10_000, max_rounds: int = 24) -> ClosureResult:
    """Fixed point of "add every terminal component of ``u^-1 v``".

    Stuck pairs are recorded but do not spoil the closure; a pair whose
    search hits the budget, growth past ``max_words``, or a fixed point not
    reached within ``max_rounds`` rounds does.
    """
    words = {()} | {(x,) for x in P.alphabet}
    table = McmTable()
    memo = Terminals(P, budget)
    failed = set()
    done = set()
    max_steps = 0
    exceeded = False
    rounds = 0
    while True:
        rounds += 1
        if rounds > max_rounds:
            exceeded = True
            break
        pending = [(u, v) for u in sorted(words) for v in sorted(words) if (u, v) not in done]
        if not pending:
            break
        new_words = set()
        for u, v in pending:
            done.add((u, v))
            try:
                found, stuck = memo.of_word_steps(negative(u) + positive(v))
            except BudgetExceeded:
                exceeded = True
                failed.add((u, v))
                continue
            entry = sorted(found.items(), key=lambda kv: (kv[0].num, kv[0].den))
            table.entries[(u, v)] = entry
            if stuck:
                failed.add((u, v))
            for frac, steps in entry:
                max_steps = max(max_steps, steps)
                for comp in (frac.num, frac.den):
                    if comp not in words:
                        new_words.add(comp)
            if len(words) + len(new_words) > max_words:
                exceeded = True
                break
        if exceeded:
            break
        words |= new_words
        if len(words) > max_words:
            exceeded = True
            break
    if exceeded:
        status = BUDGET_EXCEEDED
    else:
        status = FAILED_PAIRS if failed else CLOSED
    table.closed = not exceeded
    return ClosureResult(words, status, failed, max_steps, table)


def check_Fr(P: Presentation, budget: Budget = DEFAULT_BUDGET, max_words: int = 10_000,
             max_rounds: int = 24):
    """Return ``("finite", result)`` or ``("unknown", result)``."""
    res = compute_closure(P, budget, max_words, max_rounds)
    return ("finite" if res.closed else "unknown"), res


# -- macro reversing -------------------------------------------------------------

@dataclass
class BoundedResult:
    status: str  # "terminal" | "stuck" | "inapplicable"
    fraction: Fraction | None
    lookups: int
    p: int = 0
    q: int = 0
    blocks: list = field(default_factory=list)


def _blocks_of(w):
    return [((x,), e) for x, e in w]


def _flatten(blocks):
    out = ()
    for word, e in blocks:
        out += positive(word) if e > 0 else negative(word)
    return out


def bounded_reverse(P: Presentation, table: McmTable, w) -> BoundedResult:
    """Reverse ``w`` by table lookups on its closure-word slots.

    Each lookup replaces the leftmost ``u^-1 v`` slot pair by the table's
    least terminal; the number of lookups never exceeds ``p*q``.
    """
    w = tuple(w)
    p = sum(1 for _, e in w if e > 0)
    q = len(w) - p
    if not table.closed:
        return BoundedResult("inapplicable", None, 0, p, q)
    blocks = _blocks_of(w)
    lookups = 0
    while True:
        i = next((k for k in range(len(blocks) - 1)
                  if blocks[k][1] < 0 < blocks[k + 1][1]), None)
        if i is None:
            break
        u, v = blocks[i][0], blocks[i + 1][0]
        frac = table.chosen(u, v)
        lookups += 1
        if frac is None:
            return BoundedResult("stuck", None, lookups, p, q, blocks)
        repl = [b for b in ((frac.num, 1), (frac.den, -1)) if b[0]]
        blocks[i:i + 2] = repl
    num = tuple(x for word, e in blocks if e > 0 for x in word)
    # x^-1 y^-1 = (y x)^-1
    den = tuple(x for word, e in reversed(blocks) if e < 0 for x in word)
    return BoundedResult("terminal", Fraction(num, den), lookups, p, q, blocks)


def bounded_terminals(P: Presentation, table: McmTable, w) -> dict:
    """All terminals reachable by table lookups, with their lookup counts.

    Explores every table choice; the macro search always terminates since
    each lookup lowers the number of (negative, positive) slot inversions.
    """
    start = tuple(_blocks_of(tuple(w)))
    seen = {start: 0}
    stack = [start]
    found: dict = {}
    while stack:
        blocks = stack.pop()
        d = seen[blocks]
        idx = [k for k in range(len(blocks) - 1) if blocks[k][1] < 0 < blocks[k + 1][1]]
        if not idx:
            word = _flatten(blocks)
            k = 0
            while k < len(word) and word[k][1] > 0:
                k += 1
            frac = Fraction(tuple(x for x, _ in word[:k]), tuple(x for x, _ in reversed(word[k:])))
            if frac not in found or found[frac] > d:
                found[frac] = d
            continue
        # lookups on disjoint slot pairs commute; expanding the leftmost one suffices
        i = idx[0]
        for frac, _ in table.terminals(blocks[i][0], blocks[i + 1][0]):
            repl = tuple(b for b in ((frac.num, 1), (frac.den, -1)) if b[0])
            nxt = blocks[:i] + repl + blocks[i + 2:]
            if nxt not in seen:
                seen[nxt] = d + 1
                stack.append(nxt)
    return found
