"""Word reversing: single steps, exhaustive search, traces.

Right reversing rewrites a letter factor ``s^-1 t`` into ``vp up^-1`` for
every relation ``s vp = t up`` and deletes ``s^-1 s``.  Left reversing is
the mirror image on factors ``s t^-1``.  Only letter-level factors are
considered; longer factors decompose into letter steps anyway.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .core import (
    Presentation,
    fraction_split,
    format_word,
    left_fraction_split,
    mirror,
    negative,
    positive,
)

RIGHT, LEFT = "right", "left"


@dataclass(frozen=True)
class Budget:
    max_branch_steps: int = 10_000
    max_word_len: int = 256
    max_visited: int = 1_000_000

    def __post_init__(self):
        if min(self.max_branch_steps, self.max_word_len, self.max_visited) <= 0:
            raise ValueError("budget values must be positive")

    @classmethod
    def from_env(cls, var: str = "WORDREV_BUDGET") -> "Budget":
        """Read ``steps=N,len=N,visited=N`` overrides from the environment."""
        text = os.environ.get(var, "").strip()
        if not text:
            return cls()
        names = {"steps": "max_branch_steps", "len": "max_word_len", "visited": "max_visited"}
        kwargs = {}
        for part in text.split(","):
            key, _, value = part.partition("=")
            if key.strip() not in names:
                raise ValueError(f"bad {var} entry {part!r}")
            kwargs[names[key.strip()]] = int(value)
        return cls(**kwargs)


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class ReversingStep:
    direction: str
    position: int
    kind: str  # "delete" | "relation" | "extended"
    rel_id: int = 0
    orientation: int = 0
    side: int = 0  # extended steps: +1 rewrites a positive block, -1 a negative one

    def label(self) -> str:
        if self.kind == "delete":
            rule = "del"
        elif self.kind == "relation":
            rule = f"r{self.rel_id}.{self.orientation}"
        else:
            rule = f"x{self.rel_id}.{self.orientation}{'+' if self.side > 0 else '-'}"
        return f"{self.direction[0]},{self.position},{rule}"


class Fraction(NamedTuple):
    """Terminal ``num den^-1`` (right) or ``den^-1 num`` (left, ``left=True``)."""

    num: tuple
    den: tuple
    left: bool = False

    def word(self):
        if self.left:
            return negative(self.den) + positive(self.num)
        return positive(self.num) + negative(self.den)

    def __str__(self):
        n, d = format_word(self.num), format_word(self.den)
        return f"({d})^-1 ({n})" if self.left else f"({n}) ({d})^-1"


@dataclass
class ReversingTrace:
    start: tuple
    steps: list = field(default_factory=list)  # [(ReversingStep, word)]

    @property
    def end(self):
        return self.steps[-1][1] if self.steps else self.start

    def __len__(self):
        return len(self.steps)

    def words(self):
        return [self.start] + [w for _, w in self.steps]

    def replay(self, P: Presentation) -> bool:
        """Check every recorded word follows from its predecessor; raise otherwise."""
        w = self.start
        for i, (step, recorded) in enumerate(self.steps):
            w = apply_step(P, w, step)
            if w != recorded:
                raise ValueError(f"trace step {i} does not reproduce the recorded word")
        return True

    def to_text(self) -> str:
        lines = []
        prev = self.start
        for step, w in self.steps:
            lines.append(f"{format_word(prev)} --[{step.label()}]--> {format_word(w)}")
            prev = w
        return "\n".join(lines)

    def then(self, other: "ReversingTrace") -> "ReversingTrace":
        if other.start != self.end:
            raise ValueError("traces do not chain")
        return ReversingTrace(self.start, self.steps + other.steps)


# -- single steps -----------------------------------------------------------------

def _rule_words(P: Presentation, rel_id: int, orientation: int):
    r = P.relation(rel_id)
    return (r.lhs, r.rhs) if orientation == 0 else (r.rhs, r.lhs)


def apply_step(P: Presentation, w: tuple, step: ReversingStep) -> tuple:
    i = step.position
    if step.kind == "extended":
        src, dst = _rule_words(P, step.rel_id, step.orientation)
        if step.side > 0:
            old, new = positive(src), positive(dst)
        else:
            old, new = negative(src), negative(dst)
        if w[i:i + len(old)] != old:
            raise ValueError("extended step does not match the word")
        return w[:i] + new + w[i + len(old):]
    if i < 0 or i + 1 >= len(w):
        raise ValueError("step position out of range")
    (s, e1), (t, e2) = w[i], w[i + 1]
    if step.direction == RIGHT:
        if not (e1 < 0 < e2):
            raise ValueError("right step needs a factor s^-1 t")
    elif not (e2 < 0 < e1):
        raise ValueError("left step needs a factor s t^-1")
    if step.kind == "delete":
        if s != t:
            raise ValueError("deletion needs equal letters")
        return w[:i] + w[i + 2:]
    x, y = _rule_words(P, step.rel_id, step.orientation)
    if step.direction == RIGHT:
        if x[0] != s or y[0] != t:
            raise ValueError("relation does not start with the factor letters")
        return w[:i] + positive(x[1:]) + negative(y[1:]) + w[i + 2:]
    if x[-1] != s or y[-1] != t:
        raise ValueError("relation does not end with the factor letters")
    return w[:i] + negative(x[:-1]) + positive(y[:-1]) + w[i + 2:]


def _extended_successors(P, w, direction):
    out = []
    n = len(w)
    for src, dst, rel_id, orient in P.rewrite_rules:
        k = len(src)
        for side, block in ((1, positive(src)), (-1, negative(src))):
            new_block = positive(dst) if side > 0 else negative(dst)
            for i in range(n - k + 1):
                if w[i:i + k] == block:
                    out.append((ReversingStep(direction, i, "extended", rel_id, orient, side),
                                w[:i] + new_block + w[i + k:]))
    return out


def step_right(P: Presentation, w: tuple, extended: bool = False) -> list:
    """All one-step right reversings of ``w`` as ``(step, word)`` pairs."""
    out = []
    pairs = P.right_pairs
    for i in range(len(w) - 1):
        (s, e1), (t, e2) = w[i], w[i + 1]
        if e1 < 0 < e2:
            head, tail = w[:i], w[i + 2:]
            if s == t:
                out.append((ReversingStep(RIGHT, i, "delete"), head + tail))
            for rule in pairs.get((s, t), ()):
                out.append((ReversingStep(RIGHT, i, "relation", rule.rel_id, rule.orientation),
                            head + positive(rule.vp) + negative(rule.up) + tail))
    if extended:
        out.extend(_extended_successors(P, w, RIGHT))
        out.sort(key=_step_order)
    return out


def step_left(P: Presentation, w: tuple, extended: bool = False) -> list:
    """All one-step left reversings of ``w`` as ``(step, word)`` pairs."""
    out = []
    pairs = P.left_pairs
    for i in range(len(w) - 1):
        (s, e1), (t, e2) = w[i], w[i + 1]
        if e2 < 0 < e1:
            head, tail = w[:i], w[i + 2:]
            if s == t:
                out.append((ReversingStep(LEFT, i, "delete"), head + tail))
            for rule in pairs.get((s, t), ()):
                out.append((ReversingStep(LEFT, i, "relation", rule.rel_id, rule.orientation),
                            head + negative(rule.vp) + positive(rule.up) + tail))
    if extended:
        out.extend(_extended_successors(P, w, LEFT))
        out.sort(key=_step_order)
    return out


_KIND_ORDER = {"delete": 0, "relation": 1, "extended": 2}


def _step_order(item):
    st = item[0]
    return (st.position, _KIND_ORDER[st.kind], st.rel_id, st.orientation, -st.side)


def successors(P, w, direction, extended=False):
    return step_right(P, w, extended) if direction == RIGHT else step_left(P, w, extended)


def has_stuck_factor(P: Presentation, w: tuple, direction: str = RIGHT) -> bool:
    """True if ``w`` contains a reversible-shaped factor that no rule applies to."""
    pairs = P.right_pairs if direction == RIGHT else P.left_pairs
    for i in range(len(w) - 1):
        (s, e1), (t, e2) = w[i], w[i + 1]
        shaped = e1 < 0 < e2 if direction == RIGHT else e2 < 0 < e1
        if shaped and s != t and (s, t) not in pairs:
            return True
    return False


def terminal_of(w: tuple, direction: str):
    if direction == RIGHT:
        split = fraction_split(w)
        return None if split is None else Fraction(split[0], split[1])
    split = left_fraction_split(w)
    return None if split is None else Fraction(split[1], split[0], True)


# -- exhaustive search --------------------------------------------------------------

@dataclass
class SearchOutcome:
    start: tuple
    direction: str
    terminals: dict  # Fraction -> number of steps of its witness
    stuck: set
    budget_exceeded: bool
    visited_count: int
    found_empty: bool = False
    parents: dict = field(default_factory=dict, repr=False)

    def trace_to(self, word) -> ReversingTrace:
        steps = []
        while True:
            prev = self.parents[word]
            if prev is None:
                break
            prev_word, step = prev
            steps.append((step, word))
            word = prev_word
        steps.reverse()
        return ReversingTrace(self.start, steps)

    def trace(self, fraction: Fraction) -> ReversingTrace:
        return self.trace_to(fraction.word())

    @property
    def exhaustive(self) -> bool:
        return not self.budget_exceeded

    def sorted_terminals(self):
        return sorted(self.terminals, key=lambda f: (f.num, f.den))


def reverse_exhaustive(P: Presentation, w: tuple, direction: str = RIGHT,
                       budget: Budget = DEFAULT_BUDGET, extended: bool = False,
                       stop_at_empty: bool = False, prune=None) -> SearchOutcome:
    """Breadth-first exploration of every reversing sequence from ``w``.

    Words containing a factor no rule applies to are recorded as stuck and
    not expanded: such a factor survives every later step.
    """
    w = tuple(w)
    parents = {w: None}
    depth = {w: 0}
    queue = deque([w])
    terminals: dict = {}
    stuck: set = set()
    exceeded = False
    found_empty = False
    step_fn = step_right if direction == RIGHT else step_left
    while queue:
        cur = queue.popleft()
        d = depth[cur]
        frac = terminal_of(cur, direction)
        if frac is not None:
            terminals.setdefault(frac, d)
            if not cur:
                found_empty = True
                if stop_at_empty:
                    break
            if not extended:
                continue
        elif not extended and has_stuck_factor(P, cur, direction):
            stuck.add(cur)
            continue
        nexts = step_fn(P, cur, extended)
        if not nexts and frac is None:
            stuck.add(cur)
        for step, nxt in nexts:
            if nxt in parents:
                continue
            if d + 1 > budget.max_branch_steps or len(nxt) > budget.max_word_len \
                    or len(parents) >= budget.max_visited:
                exceeded = True
                continue
            parents[nxt] = (cur, step)
            depth[nxt] = d + 1
            queue.append(nxt)
    return SearchOutcome(w, direction, terminals, stuck, exceeded, len(parents),
                         found_empty, parents)


class Verdict(NamedTuple):
    value: str  # "yes" | "no" | "unknown"
    trace: ReversingTrace | None = None
    visited: int = 0


class Quotients:
    """Memoised ``D(x, y) = {z : x^-1 y ->r z}`` for an additive homogeneous presentation.

    Factors of a word are disjoint, so steps on different factors commute
    and any reversing sequence can be reordered to treat the junction factor
    first.  This gives
    ``D(s x', t y') = U over s v' = t u' of U over z1 in D(u', y') of D(x', v' z1)``
    and, since the weights are additive and relation-preserving, both calls
    are on strictly lighter words.  The recursion therefore terminates even
    when plain reversing from ``x^-1 y`` does not.
    """

    def __init__(self, P: Presentation, weights: dict):
        self.P = P
        self.weights = weights
        self.memo: dict = {}

    def weight(self, w) -> int:
        return sum(self.weights[x] for x in w)

    def __call__(self, x, y) -> dict:
        """``z -> (rule or None, z1)`` for every positive ``z`` reachable from ``x^-1 y``."""
        x, y = tuple(x), tuple(y)
        key = (x, y)
        if key in self.memo:
            return self.memo[key]
        out: dict = {}
        if not x:
            out[y] = (None, ())
        elif y and self.weight(x) <= self.weight(y):
            s, t, x1, y1 = x[0], y[0], x[1:], y[1:]
            choices = [None] if s == t else []
            choices += self.P.right_pairs.get((s, t), [])
            for rule in choices:
                vp, up = ((), ()) if rule is None else (rule.vp, rule.up)
                for z1 in self(up, y1):
                    for z in self(x1, vp + z1):
                        out.setdefault(z, (rule, z1))
        self.memo[key] = out
        return out

    def trace(self, x, y, z) -> "ReversingTrace":
        """A concrete right reversing ``x^-1 y -> z`` built from the recorded choices."""
        start = negative(x) + positive(y)
        steps: list = []
        word = [start]

        def emit(x, y, z, offset):
            if not x:
                return
            rule, z1 = self(x, y)[z]
            pos = offset + len(x) - 1
            if rule is None:
                step = ReversingStep(RIGHT, pos, "delete")
                vp, up = (), ()
            else:
                step = ReversingStep(RIGHT, pos, "relation", rule.rel_id, rule.orientation)
                vp, up = rule.vp, rule.up
            word[0] = apply_step(self.P, word[0], step)
            steps.append((step, word[0]))
            x1 = x[1:]
            emit(up, y[1:], z1, offset + len(x1) + len(vp))
            emit(x1, vp + z1, z, offset)

        emit(tuple(x), tuple(y), tuple(z), 0)
        return ReversingTrace(start, steps)


class BudgetExceeded(Exception):
    pass


class Terminals:
    """Memoised terminal sets ``T(x, y) = {(a, b) : x^-1 y ->r a b^-1}``.

    Same reordering argument as ``Quotients``:
    ``T(s x', t y')`` collects ``(c, b1 d)`` over rules ``s v' = t u'``,
    ``(a1, b1)`` in ``T(u', y')`` and ``(c, d)`` in ``T(x', v' a1)``.
    Each terminal keeps its least number of steps, and each entry records
    whether some branch gets stuck.  A subproblem met again while it is
    being solved means reversing can run forever; that, like oversized
    words, raises ``BudgetExceeded``.
    """

    def __init__(self, P: Presentation, budget: Budget = DEFAULT_BUDGET):
        self.P = P
        self.budget = budget
        self.memo: dict = {}
        self.active: set = set()

    def entry(self, x, y):
        """``({(a, b): steps}, stuck)`` for ``x^-1 y``."""
        key = (tuple(x), tuple(y))
        if key in self.memo:
            return self.memo[key]
        x, y = key
        if len(x) + len(y) > self.budget.max_word_len or len(self.memo) >= self.budget.max_visited:
            raise BudgetExceeded(key)
        if key in self.active:
            raise BudgetExceeded(key)
        if not x:
            out = ({(y, ()): 0}, False)
        elif not y:
            out = ({((), x): 0}, False)
        else:
            self.active.add(key)
            try:
                s, t, x1, y1 = x[0], y[0], x[1:], y[1:]
                choices = [((), ())] if s == t else []
                choices += [(r.vp, r.up) for r in self.P.right_pairs.get((s, t), ())]
                acc: dict = {}
                stuck = not choices
                for vp, up in choices:
                    first, st1 = self.entry(up, y1)
                    stuck = stuck or st1
                    for (a1, b1), n1 in first.items():
                        second, st2 = self.entry(x1, vp + a1)
                        stuck = stuck or st2
                        for (c, d), n2 in second.items():
                            k = (c, b1 + d)
                            n = 1 + n1 + n2
                            if k not in acc or acc[k] > n:
                                acc[k] = n
                out = (acc, stuck)
            finally:
                self.active.discard(key)
        self.memo[key] = out
        return out

    def __call__(self, x, y):
        return self.entry(x, y)[0].keys()

    def of_word_steps(self, w):
        """``({Fraction: steps}, stuck)`` for a signed word, folding its blocks left to right."""
        fracs = {((), ()): 0}
        stuck = False
        w = tuple(w)
        i = 0
        while i < len(w):
            j = i
            while j < len(w) and w[j][1] < 0:
                j += 1
            k = j
            while k < len(w) and w[k][1] > 0:
                k += 1
            # the block is x^-1 y; x is read off the inverted letters
            x = tuple(a for a, _ in reversed(w[i:j]))
            y = tuple(a for a, _ in w[j:k])
            nxt: dict = {}
            for (n, d), steps in fracs.items():
                table, st = self.entry(x + d, y)
                stuck = stuck or st
                for (c, e), more in table.items():
                    key = (n + c, e)
                    total = steps + more
                    if key not in nxt or nxt[key] > total:
                        nxt[key] = total
            fracs = nxt
            i = k
        return {Fraction(n, d): steps for (n, d), steps in fracs.items()}, stuck

    def of_word(self, w) -> set:
        return set(self.of_word_steps(w)[0])


def right_terminals(P: Presentation, w, budget: Budget = DEFAULT_BUDGET, table=None):
    """``(sorted terminal fractions, exceeded)`` of ``w`` by memoised right reversing."""
    table = table if table is not None else Terminals(P, budget)
    try:
        fracs = table.of_word(w)
    except BudgetExceeded:
        return [], True
    return sorted(fracs, key=lambda f: (f.num, f.den)), False


def _mirror_trace(P: Presentation, trace: "ReversingTrace") -> "ReversingTrace":
    """Turn a right trace on the mirrored presentation into a left trace on ``P``."""
    w = mirror(trace.start)
    steps = []
    for step, recorded in trace.steps:
        target = mirror(recorded)
        pos = len(w) - 2 - step.position
        if step.kind == "delete":
            cand = [ReversingStep(LEFT, pos, "delete")]
        else:
            cand = [ReversingStep(LEFT, pos, "relation", step.rel_id, o) for o in (0, 1)]
        for c in cand:
            try:
                if apply_step(P, w, c) == target:
                    break
            except ValueError:
                pass
        else:
            raise ValueError("mirrored step has no left counterpart")
        steps.append((c, target))
        w = target
    return ReversingTrace(mirror(trace.start), steps)


def reverses_to_empty(P: Presentation, u, v, direction: str = RIGHT,
                      budget: Budget = DEFAULT_BUDGET, weights="auto",
                      quotients: "Quotients | None" = None) -> Verdict:
    """Decide ``u^-1 v ->r e`` (right) or ``u v^-1 ->l e`` (left) by exhaustive search.

    ``weights`` is an additive pseudolength the presentation is known to
    preserve; the search then runs through ``Quotients`` and always ends.
    By default the presentation's own certified weights are used, if any;
    pass ``None`` to force the plain breadth-first search.  A ``Quotients``
    instance for the same presentation and weights may be passed to share
    its memo between calls (right direction only).
    """
    if direction == RIGHT:
        start = negative(u) + positive(v)
    else:
        start = positive(u) + negative(v)
    if weights == "auto":
        weights = P.homogeneous_weights
    if weights is not None:
        u, v = tuple(u), tuple(v)
        if sum(weights[x] for x in u) != sum(weights[x] for x in v):
            return Verdict("no", None, 0)
        Q = P if direction == RIGHT else P.mirror()
        x, y = (u, v) if direction == RIGHT else (v[::-1], u[::-1])
        if quotients is not None and direction == RIGHT:
            quot = quotients
        else:
            quot = Quotients(Q, weights)
        if () not in quot(x, y):
            return Verdict("no", None, len(quot.memo))
        trace = quot.trace(x, y, ())
        if direction == LEFT:
            trace = _mirror_trace(P, trace)
        return Verdict("yes", trace, len(quot.memo))
    out = reverse_exhaustive(P, start, direction, budget, stop_at_empty=True)
    if out.found_empty:
        return Verdict("yes", out.trace_to(()), out.visited_count)
    return Verdict("unknown" if out.budget_exceeded else "no", None, out.visited_count)


# -- alternating reversing --------------------------------------------------------

@dataclass
class AlternationResult:
    value: str
    trace: list  # [(step, word)] with directions recorded on the steps
    alternations: int
    visited: int

    def phases(self) -> list:
        """Directions of the maximal same-direction runs along the witness path."""
        out = []
        for step, _ in self.trace:
            if not out or out[-1] != step.direction:
                out.append(step.direction)
        return out


def alternating_reduce(P: Presentation, w: tuple, budget: Budget = DEFAULT_BUDGET,
                       max_alternations: int = 2, extended: bool = True) -> AlternationResult:
    """Search for ``w -> e`` mixing right and left reversing phases.

    A path may switch direction at most ``max_alternations`` times.  A ``no``
    answer only covers paths within that alternation bound.
    """
    w = tuple(w)
    starts = [(w, RIGHT, 0), (w, LEFT, 0)]
    parents = {s: None for s in starts}
    depth = {s: 0 for s in starts}
    queue = deque(starts)
    exceeded = False
    goal = None
    while queue:
        state = queue.popleft()
        word, direction, alts = state
        if not word:
            goal = state
            break
        d = depth[state]
        moves = [(step, (nxt, direction, alts)) for step, nxt in successors(P, word, direction, extended)]
        if alts < max_alternations:
            other = LEFT if direction == RIGHT else RIGHT
            moves.append((None, (word, other, alts + 1)))
        for step, nxt in moves:
            if nxt in parents:
                continue
            if d + 1 > budget.max_branch_steps or len(nxt[0]) > budget.max_word_len \
                    or len(parents) >= budget.max_visited:
                exceeded = True
                continue
            parents[nxt] = (state, step)
            depth[nxt] = d + 1
            queue.append(nxt)
    if goal is None:
        return AlternationResult("unknown" if exceeded else "no", [], 0, len(parents))
    path = []
    state = goal
    while parents[state] is not None:
        prev, step = parents[state]
        if step is not None:
            path.append((step, state[0]))
        state = prev
    path.reverse()
    result = AlternationResult("yes", path, 0, len(parents))
    result.alternations = max(len(result.phases()) - 1, 0)
    return result


# -- decomposition of a reversing along a split of its start word ----------------

@dataclass
class Decomposition:
    """Witness that ``w1 w2 ->r v u^-1`` splits as the three sub-reversings.

    ``w1 -> v1 u0^-1``, ``w2 -> v0 u1^-1`` and ``u0^-1 v0 -> v2 u2^-1`` with
    ``u = u1 u2`` and ``v = v1 v2``.
    """

    u0: tuple
    u1: tuple
    u2: tuple
    v0: tuple
    v1: tuple
    v2: tuple
    left_trace: ReversingTrace
    right_trace: ReversingTrace
    middle_trace: ReversingTrace


def _replay_by_ids(P, start_items, events):
    """Replay steps identified by consumed letter ids; return (trace, items)."""
    items = list(start_items)
    trace = ReversingTrace(tuple(letter for letter, _ in items))
    for step, (neg_id, pos_id), produced in events:
        ids = [i for _, i in items]
        try:
            k = ids.index(neg_id)
        except ValueError:
            raise ValueError("decomposition replay lost track of a letter") from None
        if k + 1 >= len(items) or items[k + 1][1] != pos_id:
            raise ValueError("decomposition replay found non-adjacent factor")
        items[k:k + 2] = produced
        word = tuple(letter for letter, _ in items)
        moved = ReversingStep(step.direction, k, step.kind, step.rel_id, step.orientation)
        trace.steps.append((moved, word))
    trace.replay(P)
    return trace, items


def split_check(P: Presentation, w1: tuple, w2: tuple, trace: ReversingTrace) -> Decomposition:
    """Recover the decomposition of a right reversing of ``w1 w2`` to a fraction.

    Letters are tagged by provenance (w1, w2, or produced by a step that
    touches both sides) and each group of steps is replayed on its own.
    """
    w1, w2 = tuple(w1), tuple(w2)
    if trace.start != w1 + w2:
        raise ValueError("trace does not start with w1 w2")
    trace.replay(P)
    final = fraction_split(trace.end)
    if final is None:
        raise ValueError("trace does not end with a fraction v u^-1")
    if any(st.kind == "extended" or st.direction != RIGHT for st, _ in trace.steps):
        raise ValueError("split_check needs a plain right reversing trace")

    counter = iter(range(10**9))
    items = [(letter, next(counter)) for letter in trace.start]
    tag = {i: ("L" if k < len(w1) else "R") for k, (_, i) in enumerate(items)}
    events = {"L": [], "R": [], "M": []}
    for step, _ in trace.steps:
        k = step.position
        (neg, a), (pos, b) = items[k], items[k + 1]
        new_word = apply_step(P, (neg, pos), ReversingStep(RIGHT, 0, step.kind, step.rel_id,
                                                           step.orientation))
        produced = [(letter, next(counter)) for letter in new_word]
        group = tag[a] if tag[a] == tag[b] and tag[a] in "LR" else "M"
        for _, i in produced:
            tag[i] = group
        events[group].append((step, (a, b), produced))
        items[k:k + 2] = produced

    start_items = [(letter, i) for letter, i in
                   zip(trace.start, range(len(trace.start)))]
    left_trace, left_items = _replay_by_ids(P, start_items[:len(w1)], events["L"])
    right_trace, right_items = _replay_by_ids(P, start_items[len(w1):], events["R"])
    lf = fraction_split(left_trace.end)
    rf = fraction_split(right_trace.end)
    if lf is None or rf is None:
        raise ValueError("partial reversings did not reach fractions")
    v1, u0 = lf
    v0, u1 = rf
    mid_items = [it for it in left_items if it[0][1] < 0] + [it for it in right_items if it[0][1] > 0]
    middle_trace, _ = _replay_by_ids(P, mid_items, events["M"])
    mf = fraction_split(middle_trace.end)
    if mf is None:
        raise ValueError("middle reversing did not reach a fraction")
    v2, u2 = mf
    v, u = final
    if v1 + v2 != v or u1 + u2 != u:
        raise ValueError("decomposition does not recombine to the terminal")
    return Decomposition(u0, u1, u2, v0, v1, v2, left_trace, right_trace, middle_trace)
