"""Named example presentations shipped with the package, and checks of their claims."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .core import Presentation, parse_positive_word, parse_presentation, parse_word
from .engine import DEFAULT_BUDGET, RIGHT, Budget, reverse_exhaustive


@dataclass
class CorpusEntry:
    name: str
    presentation: Presentation
    claims: list
    seed: list | None = None
    group: str = ""
    source: str = ""


@dataclass
class ClaimResult:
    entry: str
    property: str
    expected: object
    observed: object
    external: bool = False
    citation: str = ""

    @property
    def ok(self) -> bool:
        return self.external or self.observed == self.expected


@lru_cache(maxsize=None)
def _index() -> dict:
    text = resources.files("wordrev").joinpath("data", "index.json").read_text(encoding="utf-8")
    return json.loads(text)


def names() -> list:
    return sorted(_index())


def load_entry(name: str) -> CorpusEntry:
    meta = _index()[name]
    text = resources.files("wordrev").joinpath("data", meta["file"]).read_text(encoding="utf-8")
    P = parse_presentation(text, name=name)
    seed = None
    if "seed" in meta:
        seed = [parse_positive_word(w, P.alphabet) for w in meta["seed"]]
    return CorpusEntry(name, P, meta.get("claims", []), seed, meta.get("group", ""), meta["file"])


def resolve(ref: str) -> CorpusEntry:
    """A corpus name or a path to a presentation file."""
    if ref in _index():
        return load_entry(ref)
    path = Path(ref)
    text = path.read_text(encoding="utf-8")
    return CorpusEntry(path.stem, parse_presentation(text, name=path.stem), [], None, "", str(path))


def _observe(entry: CorpusEntry, prop: str, expected, budget: Budget):
    from .analysis import check_Er, check_left_cancellative, ore_report
    from .closure import compute_closure
    from .completeness import (HomogeneityError, check_complete, pseudolength_from_spec,
                               verify_pseudolength)

    P = entry.presentation
    if prop == "complete":
        return check_complete(P, budget=budget).value
    if prop == "right_complete":
        return check_complete(P, budget=budget, sides="right").value
    if prop == "closure":
        res = compute_closure(P, budget)
        return {"status": res.status, "size": len(res.words)}
    if prop == "embeds":
        return ore_report(P, budget, seed=entry.seed)["embeds"].value
    if prop == "E_r":
        return check_Er(P, entry.seed, budget).value
    if prop == "left_cancellative":
        return check_left_cancellative(P, budget).value
    if prop == "homogeneous":
        try:
            verify_pseudolength(P, pseudolength_from_spec(P.pseudolength))
            return True
        except HomogeneityError:
            return False
    if prop == "diverges":
        out = reverse_exhaustive(P, parse_word(expected, P.alphabet), RIGHT, budget)
        return expected if out.budget_exceeded else "terminates"
    raise ValueError(f"unknown corpus property {prop!r}")


def check_entry(entry: CorpusEntry, budget: Budget = DEFAULT_BUDGET) -> list:
    results = []
    for claim in entry.claims:
        external = bool(claim.get("external"))
        observed = None if external else _observe(entry, claim["property"], claim["expected"], budget)
        results.append(ClaimResult(entry.name, claim["property"], claim["expected"], observed,
                                   external, claim["citation"]))
    return results
