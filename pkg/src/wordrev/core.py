"""Alphabets, words, relations and positive presentations.

Positive words are tuples of letter names.  Signed words are tuples of
``(letter, sign)`` pairs with ``sign`` in ``{+1, -1}``.  Both are plain
tuples so they hash cheaply and can key visited sets during searches.

The textual presentation format is line oriented::

    letters: a b c
    rel: a b = b c = c a        # a chain lists every pairwise equality
    rel: a a = b b
    pseudolength: unit | weights a=1 b=2 | inversions a b

The empty word is written ``1`` wherever a word is expected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, NamedTuple

PositiveWord = tuple  # tuple[str, ...]
SignedWord = tuple  # tuple[tuple[str, int], ...]

EMPTY_TOKEN = "1"
_BAD_CHARS = re.compile(r"[\s^=;#:]")


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


def valid_letter(name: str) -> bool:
    return bool(name) and name != EMPTY_TOKEN and not _BAD_CHARS.search(name)


# -- words -----------------------------------------------------------------

def positive(word: Iterable[str]) -> SignedWord:
    return tuple((x, 1) for x in word)


def negative(word: Iterable[str]) -> SignedWord:
    """Return ``word^-1`` as a signed word."""
    return tuple((x, -1) for x in reversed(tuple(word)))


def inverse(w: SignedWord) -> SignedWord:
    return tuple((x, -e) for x, e in reversed(w))


def mirror(w: SignedWord) -> SignedWord:
    """Reverse the order of letters, keeping signs (left/right exchange)."""
    return tuple(reversed(w))


def is_positive(w: SignedWord) -> bool:
    return all(e > 0 for _, e in w)


def fraction_split(w: SignedWord):
    """Split ``v u^-1`` into ``(v, u)``; return None if ``w`` is not of that shape."""
    k = 0
    while k < len(w) and w[k][1] > 0:
        k += 1
    if any(e > 0 for _, e in w[k:]):
        return None
    num = tuple(x for x, _ in w[:k])
    den = tuple(x for x, _ in reversed(w[k:]))
    return num, den


def left_fraction_split(w: SignedWord):
    """Split ``u^-1 v`` into ``(u, v)``; return None if ``w`` is not of that shape."""
    k = 0
    while k < len(w) and w[k][1] < 0:
        k += 1
    if any(e < 0 for _, e in w[k:]):
        return None
    den = tuple(x for x, _ in reversed(w[:k]))
    num = tuple(x for x, _ in w[k:])
    return den, num


def format_word(w) -> str:
    """Render a positive or signed word with ``tok`` / ``tok^-1`` tokens."""
    if not w:
        return EMPTY_TOKEN
    parts = []
    for item in w:
        if isinstance(item, tuple):
            x, e = item
            parts.append(x if e > 0 else f"{x}^-1")
        else:
            parts.append(item)
    return " ".join(parts)


def parse_word(text: str, alphabet: Iterable[str] | None = None) -> SignedWord:
    """Parse a whitespace separated signed word such as ``"a^-1 b a b^-1"``."""
    letters = set(alphabet) if alphabet is not None else None
    out = []
    for col, tok in _tokens(text):
        if tok == EMPTY_TOKEN:
            continue
        sign = 1
        if tok.endswith("^-1"):
            tok, sign = tok[:-3], -1
        elif tok.endswith("^1"):
            tok = tok[:-2]
        if not valid_letter(tok):
            raise ParseError(f"bad letter token {tok!r}", 1, col)
        if letters is not None and tok not in letters:
            raise ParseError(f"unknown letter {tok!r}", 1, col)
        out.append((tok, sign))
    return tuple(out)


def parse_positive_word(text: str, alphabet: Iterable[str] | None = None) -> PositiveWord:
    w = parse_word(text, alphabet)
    if not is_positive(w):
        raise ParseError(f"expected a positive word, got {text!r}")
    return tuple(x for x, _ in w)


def _tokens(text: str):
    for m in re.finditer(r"\S+", text):
        yield m.start() + 1, m.group()


# -- relations and presentations ----------------------------------------------

class PairRule(NamedTuple):
    """One way of reversing a letter factor: ``s^-1 t -> vp up^-1`` (right)."""

    vp: PositiveWord
    up: PositiveWord
    rel_id: int
    orientation: int  # 0: the s-side is the stored lhs, 1: it is the rhs


@dataclass(frozen=True, eq=False)
class Relation:
    lhs: PositiveWord
    rhs: PositiveWord
    id: int = 0

    def __post_init__(self):
        if not self.lhs or not self.rhs:
            raise ValueError("relation sides must be nonempty positive words")
        if self.lhs == self.rhs:
            raise ValueError("trivial relation u = u")
        # canonical orientation: smaller side first
        if self.rhs < self.lhs:
            lhs, rhs = self.rhs, self.lhs
            object.__setattr__(self, "lhs", lhs)
            object.__setattr__(self, "rhs", rhs)

    @property
    def key(self):
        return (self.lhs, self.rhs)

    def __eq__(self, other):
        return isinstance(other, Relation) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def sides(self):
        return (self.lhs, self.rhs)

    def __str__(self):
        return f"{format_word(self.lhs)} = {format_word(self.rhs)}"


@dataclass(frozen=True)
class Presentation:
    alphabet: tuple
    relations: tuple = ()
    pseudolength: tuple | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        if len(set(alphabet)) != len(alphabet):
            raise ValueError("duplicate letters in alphabet")
        for x in alphabet:
            if not valid_letter(x):
                raise ValueError(f"invalid letter name {x!r}")
        letters = set(alphabet)
        rels = tuple(self.relations)
        seen = set()
        for r in rels:
            if r in seen:
                raise ValueError(f"duplicate relation {r}")
            seen.add(r)
            for x in r.lhs + r.rhs:
                if x not in letters:
                    raise ValueError(f"relation {r} uses unknown letter {x!r}")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "relations", rels)

    @classmethod
    def build(cls, alphabet, pairs, pseudolength=None, name=""):
        """Build from ``(u, v)`` pairs; words may be strings of one-char letters."""
        rels = []
        seen = set()
        for u, v in pairs:
            r = Relation(tuple(u), tuple(v), len(rels) + 1)
            if r not in seen:
                seen.add(r)
                rels.append(r)
        return cls(tuple(alphabet), tuple(rels), pseudolength, name)

    def __contains__(self, rel):
        return rel in self.relation_set

    @cached_property
    def relation_set(self):
        return frozenset(self.relations)

    def with_relation(self, u, v) -> "Presentation":
        """Return a copy with ``u = v`` appended (unchanged if already present)."""
        rel = Relation(tuple(u), tuple(v), self.next_id)
        if rel in self.relation_set:
            return self
        return Presentation(self.alphabet, self.relations + (rel,), self.pseudolength, self.name)

    @property
    def next_id(self) -> int:
        return max((r.id for r in self.relations), default=0) + 1

    def mirror(self) -> "Presentation":
        """The presentation with every relation word reversed (left <-> right)."""
        rels = tuple(Relation(r.lhs[::-1], r.rhs[::-1], r.id) for r in self.relations)
        return Presentation(self.alphabet, rels, self.pseudolength, self.name)

    def relation(self, rel_id: int) -> Relation:
        for r in self.relations:
            if r.id == rel_id:
                return r
        raise KeyError(rel_id)

    @cached_property
    def homogeneous_weights(self) -> dict | None:
        """Additive letter weights preserved by every relation, if one is known.

        Tries the declared pseudolength when it is additive, then plain length.
        """
        cands = []
        if self.pseudolength and self.pseudolength[0] == "weights":
            cands.append(dict(self.pseudolength[1]))
        cands.append({x: 1 for x in self.alphabet})
        for weights in cands:
            if all(sum(weights[x] for x in r.lhs) == sum(weights[x] for x in r.rhs)
                   for r in self.relations):
                return weights
        return None

    @cached_property
    def right_pairs(self) -> dict:
        """``(s, t) -> [PairRule]`` for every relation read as ``s vp = t up``."""
        table: dict = {}
        for r in sorted(self.relations, key=lambda r: r.id):
            for orient, (x, y) in enumerate(((r.lhs, r.rhs), (r.rhs, r.lhs))):
                table.setdefault((x[0], y[0]), []).append(PairRule(x[1:], y[1:], r.id, orient))
        return table

    @cached_property
    def left_pairs(self) -> dict:
        """``(s, t) -> [PairRule]`` for every relation read as ``vp s = up t``."""
        table: dict = {}
        for r in sorted(self.relations, key=lambda r: r.id):
            for orient, (x, y) in enumerate(((r.lhs, r.rhs), (r.rhs, r.lhs))):
                table.setdefault((x[-1], y[-1]), []).append(PairRule(x[:-1], y[:-1], r.id, orient))
        return table

    @cached_property
    def rewrite_rules(self) -> tuple:
        """Both orientations of every relation as ``(src, dst, rel_id, orientation)``."""
        out = []
        for r in sorted(self.relations, key=lambda r: r.id):
            out.append((r.lhs, r.rhs, r.id, 0))
            out.append((r.rhs, r.lhs, r.id, 1))
        return tuple(out)


def relations_for_pair(P: Presentation, s: str, t: str) -> list:
    """All ``(vp, up, rel_id)`` such that some relation reads ``s vp = t up``."""
    return [(rule.vp, rule.up, rule.rel_id) for rule in P.right_pairs.get((s, t), ())]


class Flags(NamedTuple):
    satisfies_Cr: bool
    satisfies_Cl: bool
    satisfies_C: bool
    satisfies_Ur: bool
    satisfies_Ul: bool
    is_r_complemented: bool
    is_complemented: bool
    uniform_length: bool


def syntactic_flags(P: Presentation) -> Flags:
    def no_same_letter(idx):
        return all(r.lhs[idx] != r.rhs[idx] for r in P.relations)

    def at_most_one(idx):
        count: dict = {}
        for r in P.relations:
            key = frozenset((r.lhs[idx], r.rhs[idx]))
            count[key] = count.get(key, 0) + 1
        return all(n <= 1 for n in count.values())

    # trivial relations are rejected by Relation, so "s u = s v with u != v"
    # is just "same first letter"
    cr, cl = no_same_letter(0), no_same_letter(-1)
    ur = cr and at_most_one(0)
    ul = cl and at_most_one(-1)
    return Flags(
        satisfies_Cr=cr,
        satisfies_Cl=cl,
        satisfies_C=cr and cl,
        satisfies_Ur=ur,
        satisfies_Ul=ul,
        is_r_complemented=ur,
        is_complemented=ur and ul,
        uniform_length=all(len(r.lhs) == len(r.rhs) for r in P.relations),
    )


# -- text format --------------------------------------------------------------

def parse_presentation(text: str, name: str = "") -> Presentation:
    alphabet: list | None = None
    rels: list = []
    seen: set = set()
    pl = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if ":" not in line:
            raise ParseError("expected 'letters:', 'rel:' or 'pseudolength:'", lineno, 1)
        head, body = line.split(":", 1)
        head = head.strip()
        body_col = len(line) - len(line.lstrip()) + len(head) + 2
        if head == "letters":
            if alphabet is not None:
                raise ParseError("duplicate 'letters:' line", lineno, 1)
            alphabet = []
            for col, tok in _tokens(body):
                if not valid_letter(tok):
                    raise ParseError(f"bad letter name {tok!r}", lineno, body_col + col - 1)
                if tok in alphabet:
                    raise ParseError(f"duplicate letter {tok!r}", lineno, body_col + col - 1)
                alphabet.append(tok)
        elif head == "rel":
            if alphabet is None:
                raise ParseError("'rel:' before 'letters:'", lineno, 1)
            sides = []
            offset = 0
            for chunk in body.split("="):
                col = body_col + offset
                offset += len(chunk) + 1
                toks = [t for _, t in _tokens(chunk) if t != EMPTY_TOKEN]
                if not toks:
                    raise ParseError("empty side in relation", lineno, col)
                for c, tok in _tokens(chunk):
                    if tok not in alphabet:
                        raise ParseError(f"unknown letter {tok!r}", lineno, col + c - 1)
                sides.append(tuple(toks))
            if len(sides) < 2:
                raise ParseError("relation needs at least one '='", lineno, body_col)
            for u, v in combinations(sides, 2):
                r = Relation(u, v, len(rels) + 1)
                if r in seen:
                    raise ParseError(f"duplicate relation {r}", lineno, body_col)
                seen.add(r)
                rels.append(r)
        elif head == "pseudolength":
            pl = _parse_pseudolength(body, alphabet or [], lineno, body_col)
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, 1)
    if alphabet is None:
        raise ParseError("missing 'letters:' line", 1, 1)
    return Presentation(tuple(alphabet), tuple(rels), pl, name)


def _parse_pseudolength(body, alphabet, lineno, col):
    toks = body.split()
    if not toks:
        raise ParseError("empty pseudolength", lineno, col)
    kind, args = toks[0], toks[1:]
    if kind == "unit" and not args:
        return ("unit",)
    if kind == "weights":
        weights = []
        for a in args:
            letter, _, value = a.partition("=")
            if letter not in alphabet or not value.isdigit() or int(value) < 1:
                raise ParseError(f"bad weight {a!r}", lineno, col)
            weights.append((letter, int(value)))
        return ("weights", tuple(weights))
    if kind == "inversions" and len(args) == 2 and all(a in alphabet for a in args):
        return ("inversions", args[0], args[1])
    raise ParseError(f"bad pseudolength {body.strip()!r}", lineno, col)


def serialize_presentation(P: Presentation) -> str:
    lines = []
    if P.name:
        lines.append(f"# {P.name}")
    lines.append("letters: " + " ".join(P.alphabet))
    for r in P.relations:
        lines.append(f"rel: {r}")
    if P.pseudolength:
        kind = P.pseudolength[0]
        if kind == "unit":
            lines.append("pseudolength: unit")
        elif kind == "weights":
            lines.append("pseudolength: weights " + " ".join(f"{x}={n}" for x, n in P.pseudolength[1]))
        else:
            lines.append(f"pseudolength: inversions {P.pseudolength[1]} {P.pseudolength[2]}")
    return "\n".join(lines) + "\n"
