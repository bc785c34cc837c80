"""Homogeneity certificates, cube conditions and completion.

For a homogeneous presentation, right completeness reduces to the strong
cube condition on triples of letters: for all letters ``s, t, r`` and every
terminal ``v u^-1`` of ``s^-1 r r^-1 t``, the word ``(s v)^-1 (t u)`` must
reverse to the empty word.  A failing triple yields the missing relation
``s v = t u``; adding it and repeating is the completion procedure.
Left versions run the same code on the mirrored presentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .core import Presentation, Relation, format_word, negative, positive
from .engine import (
    DEFAULT_BUDGET,
    LEFT,
    RIGHT,
    Budget,
    Quotients,
    Terminals,
    right_terminals,
    reverses_to_empty,
)

OK, FAIL, UNKNOWN = "ok", "fail", "unknown"


# -- pseudolengths ----------------------------------------------------------------

@dataclass(frozen=True)
class UnitLength:
    def __call__(self, word) -> int:
        return len(word)

    def spec(self):
        return ("unit",)


@dataclass(frozen=True)
class AdditiveWeights:
    weights: tuple  # ((letter, weight), ...)

    def __post_init__(self):
        if any(w < 1 for _, w in self.weights):
            raise ValueError("weights must be positive integers")

    def __call__(self, word) -> int:
        table = dict(self.weights)
        return sum(table[x] for x in word)

    def spec(self):
        return ("weights", self.weights)


@dataclass(frozen=True)
class LengthPlusInversions:
    """Length plus the number of pairs ``i < j`` with ``u_i = first``, ``u_j = second``."""

    first: str
    second: str

    def __call__(self, word) -> int:
        seen_first = 0
        pairs = 0
        for x in word:
            if x == self.second:
                pairs += seen_first
            if x == self.first:
                seen_first += 1
        return len(word) + pairs

    def spec(self):
        return ("inversions", self.first, self.second)


def pseudolength_from_spec(spec):
    if spec is None:
        return None
    kind = spec[0]
    if kind == "unit":
        return UnitLength()
    if kind == "weights":
        return AdditiveWeights(tuple(spec[1]))
    if kind == "inversions":
        return LengthPlusInversions(spec[1], spec[2])
    raise ValueError(f"unknown pseudolength {spec!r}")


def additive_weights(pl, alphabet) -> dict | None:
    """Letter weights when ``pl`` is additive, else None."""
    if isinstance(pl, UnitLength):
        return {x: 1 for x in alphabet}
    if isinstance(pl, AdditiveWeights):
        return dict(pl.weights)
    return None


class HomogeneityError(ValueError):
    def __init__(self, rel_id, message):
        self.rel_id = rel_id
        super().__init__(message)


@dataclass
class HomogeneityCertificate:
    pl: object
    side: str
    checked_relations: list  # [(rel_id, value_lhs, value_rhs)]

    def covers(self, P: Presentation) -> bool:
        ids = {rid for rid, _, _ in self.checked_relations}
        return all(r.id in ids for r in P.relations)


def _check_relation(pl, rel: Relation):
    a, b = pl(rel.lhs), pl(rel.rhs)
    if a != b:
        raise HomogeneityError(rel.id, f"relation {rel.id} ({rel}) has weights {a} != {b}")
    if isinstance(pl, LengthPlusInversions):
        # equal counts of the two tracked letters make the inversion count
        # contributed across a context independent of the side used
        for x in (pl.first, pl.second):
            if rel.lhs.count(x) != rel.rhs.count(x):
                raise HomogeneityError(
                    rel.id, f"relation {rel.id} ({rel}) changes the number of {x!r}")
    return a, b


def verify_pseudolength(P: Presentation, pl=None, side: str = "both") -> HomogeneityCertificate:
    """Certify that every relation preserves ``pl``; raise HomogeneityError otherwise."""
    if pl is None:
        pl = pseudolength_from_spec(P.pseudolength)
        if pl is None:
            raise HomogeneityError(None, "no pseudolength given")
    checked = []
    for rel in P.relations:
        a, b = _check_relation(pl, rel)
        checked.append((rel.id, a, b))
    return HomogeneityCertificate(pl, side, checked)


# -- cube checks -------------------------------------------------------------------

@dataclass(frozen=True)
class Obstruction:
    """Triple ``(s, t, r)`` where ``s^-1 r r^-1 t -> v u^-1`` but ``(s v)^-1 (t u)`` is not
    reversible to the empty word.  For ``direction == "left"`` the data refer to
    the mirrored presentation."""

    s: str
    t: str
    r: str
    v: tuple
    u: tuple
    direction: str = RIGHT

    def relation(self):
        """The missing relation as a pair of words of the original presentation."""
        lhs, rhs = (self.s,) + self.v, (self.t,) + self.u
        if self.direction == LEFT:
            return lhs[::-1], rhs[::-1]
        return lhs, rhs

    def describe(self) -> str:
        lhs, rhs = self.relation()
        return (f"{self.direction} triple ({self.s},{self.t},{self.r}): terminal "
                f"({format_word(self.v)})({format_word(self.u)})^-1, missing "
                f"{format_word(lhs)} = {format_word(rhs)}")


@dataclass
class CubeReport:
    direction: str
    triples: dict = field(default_factory=dict)  # (s,t,r) -> "ok" | "unknown" | [Obstruction]
    certificate: HomogeneityCertificate | None = None
    checked: int = 0

    @property
    def obstructions(self) -> list:
        return [o for res in self.triples.values() if isinstance(res, list) for o in res]

    @property
    def unknown(self) -> list:
        return [k for k, res in self.triples.items() if res == UNKNOWN]

    @property
    def verdict(self) -> str:
        if self.obstructions:
            return "incomplete"
        if self.unknown:
            return "unknown"
        return "complete" if self.certificate is not None else "no_obstruction_found"

    def report(self) -> dict:
        return {
            "direction": self.direction,
            "verdict": self.verdict,
            "triples_checked": self.checked,
            "certificate": self.certificate.pl.spec() if self.certificate else None,
            "obstructions": [o.describe() for o in self.obstructions],
            "unknown_triples": [",".join(k) for k in self.unknown],
        }


def _oriented(P, direction):
    return P if direction == RIGHT else P.mirror()


def check_strong_cube_letters(P: Presentation, budget: Budget = DEFAULT_BUDGET,
                              certificate: HomogeneityCertificate | None = None,
                              direction: str = RIGHT, stop_at_first: bool = False,
                              eps_budget: Budget | None = None) -> CubeReport:
    """Run the strong cube test on every ordered triple of letters.

    Triples are visited in alphabet order of ``(s, t, r)``, terminals in
    order of ``(v, u)``.  A triple whose reversing or emptiness test runs out
    of budget is ``unknown``; an ``unknown`` never counts as complete.
    """
    Q = _oriented(P, direction)
    eps_budget = eps_budget or budget
    weights = additive_weights(certificate.pl, P.alphabet) if certificate else None
    if weights is None:
        weights = P.homogeneous_weights
    table = Terminals(Q, budget)
    report = CubeReport(direction, certificate=certificate)
    for s, t, r in product(P.alphabet, repeat=3):
        report.checked += 1
        start = ((s, -1), (r, 1), (r, -1), (t, 1))
        fracs, exceeded = right_terminals(Q, start, budget, table)
        status = UNKNOWN if exceeded else OK
        obstructions = []
        for frac in fracs:
            verdict = reverses_to_empty(Q, (s,) + frac.num, (t,) + frac.den, RIGHT, eps_budget,
                                        weights)
            if verdict.value == "no":
                obstructions.append(Obstruction(s, t, r, frac.num, frac.den, direction))
            elif verdict.value == "unknown":
                status = UNKNOWN
        report.triples[(s, t, r)] = obstructions if obstructions else status
        if stop_at_first and obstructions:
            break
    return report


def check_cube_at(P: Presentation, u, v, w, strong: bool = True,
                  budget: Budget = DEFAULT_BUDGET, mode: str = "reversing", oracle_cfg=None):
    """Cube condition at the words ``(u, v, w)``.

    Returns ``(status, witness)`` with status ``ok``, ``fail`` or ``unknown``.
    The plain (non-strong) condition asks, for each terminal ``v' u'^-1`` of
    ``u^-1 w w^-1 v``, for a terminal ``v'' u''^-1`` of ``u^-1 v`` and a word
    ``w''`` with ``u' = u'' w''`` and ``v' = v'' w''``.  Equivalence is
    tested by reversing (``mode="reversing"``, sound for complete
    presentations) or by the bounded congruence oracle (``mode="oracle"``).
    """
    u, v, w = tuple(u), tuple(v), tuple(w)
    start = negative(u) + positive(w) + negative(w) + positive(v)
    outer, exceeded = right_terminals(P, start, budget)
    status = UNKNOWN if exceeded else OK
    weights = P.homogeneous_weights
    quot = Quotients(P, weights) if weights is not None else None
    if strong:
        for frac in outer:
            verdict = reverses_to_empty(P, u + frac.num, v + frac.den, RIGHT, budget,
                                        quotients=quot)
            if verdict.value == "no":
                return FAIL, (frac.den, frac.num)
            if verdict.value == "unknown":
                status = UNKNOWN
        return status, None

    inner, inner_exceeded = right_terminals(P, negative(u) + positive(v), budget)
    if inner_exceeded:
        status = UNKNOWN
    classes: dict = {}
    for frac in outer:
        vp, up = frac.num, frac.den
        found, undecided = False, False
        for inner_frac in inner:
            res = _factor_through(P, up, vp, inner_frac.den, inner_frac.num, budget, mode,
                                  oracle_cfg, classes, quot)
            if res == "yes":
                found = True
                break
            if res == "unknown":
                undecided = True
        if not found:
            if undecided or inner_exceeded:
                status = UNKNOWN
            else:
                return FAIL, (up, vp)
    return status, None


def _factor_through(P, up, vp, upp, vpp, budget, mode, oracle_cfg, classes=None, quot=None):
    """Is there ``w''`` with ``up = upp w''`` and ``vp = vpp w''``?

    ``classes`` caches oracle classes between calls.
    """
    from .analysis import OracleConfig, oracle_class

    if mode == "oracle":
        cfg = oracle_cfg or OracleConfig()
        classes = {} if classes is None else classes
        for word in (up, vp):
            if word not in classes:
                classes[word] = oracle_class(P, word, cfg)
        cls, complete = classes[up]
        target, target_complete = classes[vp]
        undecided = not complete
        for word in sorted(cls):
            if word[:len(upp)] == upp:
                if vpp + word[len(upp):] in target:
                    return "yes"
                if not target_complete:
                    undecided = True
        return "unknown" if undecided else "no"
    # reversing mode: w'' is forced by a terminal of upp^-1 up whose
    # denominator is empty (upp w'' = up)
    fracs, undecided = right_terminals(P, negative(upp) + positive(up), budget)
    for frac in fracs:
        if frac.den:
            continue
        res = reverses_to_empty(P, vpp + frac.num, vp, RIGHT, budget, quotients=quot)
        if res.value == "yes":
            return "yes"
        if res.value == "unknown":
            undecided = True
    return "unknown" if undecided else "no"


# -- completion ---------------------------------------------------------------------

class ObstructionReplayError(ValueError):
    pass


def one_completion(P: Presentation, obstruction: Obstruction,
                   budget: Budget = DEFAULT_BUDGET, weights="auto") -> Presentation:
    """Add the relation repairing ``obstruction`` after replaying its data."""
    ob = obstruction
    Q = _oriented(P, ob.direction)
    start = ((ob.s, -1), (ob.r, 1), (ob.r, -1), (ob.t, 1))
    fracs, _ = right_terminals(Q, start, budget)
    if not any(f.num == ob.v and f.den == ob.u for f in fracs):
        raise ObstructionReplayError(f"terminal does not replay: {ob.describe()}")
    lhs, rhs = ob.relation()
    if lhs == rhs:
        raise ObstructionReplayError("obstruction yields a trivial relation")
    if Relation(lhs, rhs) in P:
        return P
    if reverses_to_empty(Q, (ob.s,) + ob.v, (ob.t,) + ob.u, RIGHT, budget, weights).value != "no":
        raise ObstructionReplayError(f"not an obstruction: {ob.describe()}")
    return P.with_relation(lhs, rhs)


@dataclass
class CompletionRound:
    direction: str
    obstruction: Obstruction
    added: Relation


@dataclass
class CompletionLog:
    start: Presentation
    rounds: list
    final: Presentation
    status: str  # "complete" | "budget" | "max_rounds"
    right_report: CubeReport | None = None
    left_report: CubeReport | None = None

    @property
    def added(self) -> list:
        return [r.added for r in self.rounds]

    def report(self) -> dict:
        return {
            "status": self.status,
            "rounds": len(self.rounds),
            "added": [f"{r.direction}: {r.added}" for r in self.rounds],
            "obstructions": [r.obstruction.describe() for r in self.rounds],
        }


def complete_presentation(P: Presentation, certificate: HomogeneityCertificate | None = None,
                          max_rounds: int = 64, budget: Budget = DEFAULT_BUDGET,
                          two_sided: bool = True) -> CompletionLog:
    """Repeatedly repair the first strong-cube obstruction until none remain.

    Right obstructions are repaired first; once the right check passes the
    left check runs (when ``two_sided``).  Each added relation is re-checked
    against the certificate's pseudolength.
    """
    if certificate is None:
        certificate = verify_pseudolength(P)
    pl = certificate.pl
    cur = P
    rounds: list = []
    while True:
        right = check_strong_cube_letters(cur, budget, certificate, RIGHT, stop_at_first=True)
        report = right
        if not right.obstructions and two_sided and not right.unknown:
            report = check_strong_cube_letters(cur, budget, certificate, LEFT, stop_at_first=True)
        if report.unknown and not report.obstructions:
            return CompletionLog(P, rounds, cur, "budget", right, report)
        if not report.obstructions:
            certificate = verify_pseudolength(cur, pl, certificate.side)
            return CompletionLog(P, rounds, cur, "complete", right,
                                 report if report is not right else None)
        if len(rounds) >= max_rounds:
            return CompletionLog(P, rounds, cur, "max_rounds", right, report)
        ob = report.obstructions[0]
        nxt = one_completion(cur, ob, budget, additive_weights(pl, cur.alphabet))
        added = nxt.relations[-1]
        _check_relation(pl, added)
        rounds.append(CompletionRound(ob.direction, ob, added))
        cur = nxt
        certificate = HomogeneityCertificate(pl, certificate.side,
                                             certificate.checked_relations
                                             + [(added.id, pl(added.lhs), pl(added.rhs))])


@dataclass
class CompletenessVerdict:
    value: str  # "complete" | "incomplete" | "unknown" | "no_obstruction_found"
    right: CubeReport
    left: CubeReport | None
    certificate: HomogeneityCertificate | None

    def report(self) -> dict:
        return {
            "verdict": self.value,
            "right": self.right.report(),
            "left": self.left.report() if self.left else None,
        }


def check_complete(P: Presentation, pl=None, budget: Budget = DEFAULT_BUDGET,
                   sides: str = "both") -> CompletenessVerdict:
    """Strong cube test on both sides with a homogeneity certificate when available.

    Without an explicit ``pl`` the declared pseudolength is tried, then the
    plain length.
    """
    cert = None
    candidates = [pl] if pl is not None else []
    if pl is None and P.pseudolength:
        candidates.append(pseudolength_from_spec(P.pseudolength))
    if pl is None:
        candidates.append(UnitLength())
    for cand in candidates:
        try:
            cert = verify_pseudolength(P, cand)
            break
        except HomogeneityError:
            continue
    right = check_strong_cube_letters(P, budget, cert, RIGHT)
    left = check_strong_cube_letters(P, budget, cert, LEFT) if sides == "both" else None
    reports = [right] + ([left] if left else [])
    verdicts = [r.verdict for r in reports]
    if "incomplete" in verdicts:
        value = "incomplete"
    elif "unknown" in verdicts:
        value = "unknown"
    elif cert is None:
        value = "no_obstruction_found"
    else:
        value = "complete"
    return CompletenessVerdict(value, right, left, cert)
