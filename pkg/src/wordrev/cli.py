"""Command-line front end: ``wordrev <command> ...``.

Presentations are given as corpus names (see ``wordrev corpus-check --list``)
or as paths to presentation files.  Exit codes: 0 ok / yes, 1 no,
2 input error, 3 budget exhausted, 4 precondition failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction as Q

from . import corpus
from .analysis import (
    check_left_cancellative,
    check_right_cancellative,
    group_word_problem,
    monoid_word_problem,
    ore_report,
)
from .closure import compute_closure
from .completeness import (
    HomogeneityError,
    check_complete,
    complete_presentation,
    pseudolength_from_spec,
    verify_pseudolength,
)
from .core import (
    ParseError,
    format_word,
    parse_positive_word,
    parse_word,
    serialize_presentation,
    syntactic_flags,
    _parse_pseudolength,
)
from .engine import (
    LEFT,
    RIGHT,
    Budget,
    BudgetExceeded,
    Terminals,
    alternating_reduce,
    reverse_exhaustive,
)

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_BUDGET, EXIT_PRECONDITION = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


# -- rendering -------------------------------------------------------------------

def _kv_lines(obj, indent=0):
    pad = "  " * indent
    if isinstance(obj, dict):
        for key, value in obj.items():
            if isinstance(value, (dict, list)) and value:
                yield f"{pad}{key}:"
                yield from _kv_lines(value, indent + 1)
            else:
                yield f"{pad}{key}: {_scalar(value)}"
    elif isinstance(obj, list):
        for item in obj:
            if isinstance(item, (dict, list)) and item:
                yield f"{pad}-"
                yield from _kv_lines(item, indent + 1)
            else:
                yield f"{pad}- {_scalar(item)}"
    else:
        yield f"{pad}{_scalar(obj)}"


def _scalar(value):
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (list, dict)):
        return "[]" if isinstance(value, list) else "{}"
    return str(value)


def emit(report: dict, as_json: bool, out=None):
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")
    else:
        out.write("\n".join(_kv_lines(report)) + "\n")


def _num(x) -> str:
    return f"{float(x):.4f}".rstrip("0").rstrip(".")


def emit_dot(trace, name: str = "reversing") -> str:
    """Reversing diagram of ``trace`` as a DOT digraph with pinned positions.

    Positive letters are horizontal edges, negative letters vertical ones;
    every relation step closes a rectangular cell whose corner sits at the
    right of the negative letter (right reversing) or below the positive one
    (left reversing).  Empty legs of a cell are dashed edges labelled 1.
    """
    nodes = []
    edges = []  # (a, b, label, style)
    cells = []

    def node(x, y):
        nodes.append((x, y))
        return len(nodes) - 1

    def leg(a, b, letters, sign):
        # draw ``letters`` evenly from a to b; returns path items
        if not letters:
            edges.append((a, b, "1", "dashed"))
            return [(a, b, None)]
        (xa, ya), (xb, yb) = nodes[a], nodes[b]
        n = len(letters)
        items = []
        prev = a
        for k, x in enumerate(letters, 1):
            nxt = b if k == n else node(xa + (xb - xa) * Q(k, n), ya + (yb - ya) * Q(k, n))
            edges.append((prev, nxt, x, "solid"))
            items.append((prev, nxt, (x, sign)))
            prev = nxt
        return items

    cur = node(Q(0), Q(0))
    path = []
    for x, e in trace.start:
        px, py = nodes[cur]
        nxt = node(px + 1, py) if e > 0 else node(px, py + 1)
        edges.append((cur, nxt, x, "solid"))
        path.append((cur, nxt, (x, e)))
        cur = nxt

    prev_word = tuple(trace.start)
    for count, (step, word) in enumerate(trace.steps, 1):
        letter_idx = [k for k, item in enumerate(path) if item[2] is not None]
        if step.kind == "extended":
            span = len(word) - len(prev_word)
            r = step.position
            # locate the rewritten block by diffing the words
            old_len = next(m for m in range(len(prev_word) - r + 1)
                           if prev_word[r + m:] == word[r + m + span:])
            k1, k2 = letter_idx[r], letter_idx[r + old_len - 1]
            a, b = path[k1][0], path[k2][1]
            block = word[r:r + old_len + span]
            items = leg(a, b, [x for x, _ in block], block[0][1] if block else 1)
            path[k1:k2 + 1] = items
            cells.append(f"cell {count}: {step.label()}")
            prev_word = word
            continue
        i = step.position
        k1, k2 = letter_idx[i], letter_idx[i + 1]
        a, b = path[k1][0], path[k2][1]
        (xa, ya), (xb, yb) = nodes[a], nodes[b]
        seg = word[i:i + len(word) - len(prev_word) + 2]
        pos = [x for x, e in seg if e > 0]
        neg = [x for x, e in seg if e < 0]
        if step.direction == RIGHT:
            corner = node(xb, ya)
            items = leg(a, corner, pos, 1) + leg(corner, b, neg, -1)
        else:
            corner = node(xa, yb)
            items = leg(a, corner, neg, -1) + leg(corner, b, pos, 1)
        path[k1:k2 + 1] = items
        cells.append(f"cell {count}: {step.label()}")
        prev_word = word

    lines = [f'digraph "{name}" {{', "  node [shape=point];", "  edge [arrowsize=0.6];"]
    for c in cells:
        lines.append(f"  // {c}")
    for k, (x, y) in enumerate(nodes):
        lines.append(f'  n{k} [pos="{_num(x * 2)},{_num(-y * 2)}!"];')
    for a, b, label, style in edges:
        extra = ", style=dashed" if style == "dashed" else ""
        lines.append(f'  n{a} -> n{b} [label="{label}"{extra}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- helpers -------------------------------------------------------------------------

def _entry(ref):
    try:
        return corpus.resolve(ref)
    except FileNotFoundError:
        raise InputError(f"no corpus entry or file named {ref!r}") from None
    except ParseError as exc:
        raise InputError(f"{ref}: {exc}") from None


def _word(P, text):
    try:
        return parse_word(text, P.alphabet)
    except ParseError as exc:
        raise InputError(str(exc)) from None


def _positive(P, text):
    try:
        return parse_positive_word(text, P.alphabet)
    except ParseError as exc:
        raise InputError(str(exc)) from None


def _pseudolength(P, text):
    if text is None:
        return None
    try:
        return pseudolength_from_spec(_parse_pseudolength(text, P.alphabet, 0, 0))
    except ParseError as exc:
        raise InputError(str(exc)) from None


def _budget(args) -> Budget:
    base = Budget.from_env()
    return Budget(args.max_steps or base.max_branch_steps,
                  args.max_len or base.max_word_len,
                  args.max_visited or base.max_visited)


def _verdict_code(value):
    return {"yes": EXIT_OK, "no": EXIT_NO}.get(value, EXIT_BUDGET)


# -- commands --------------------------------------------------------------------------

def cmd_reverse(args):
    entry = _entry(args.presentation)
    P = entry.presentation
    w = _word(P, args.word)
    direction = LEFT if args.dir == "left" else RIGHT
    out = reverse_exhaustive(P, w, direction, _budget(args), extended=args.extended)
    terms = sorted(out.terminals.items(), key=lambda kv: (kv[1], kv[0].num, kv[0].den))
    if args.first:
        terms = terms[:1]
    report = {
        "presentation": entry.name,
        "word": format_word(w),
        "direction": direction,
        "terminals": [{"fraction": str(f), "steps": n} for f, n in terms],
        "stuck": sorted(format_word(s) for s in out.stuck),
        "budget_exceeded": out.budget_exceeded,
        "visited": out.visited_count,
    }
    if args.trace and terms:
        report["trace"] = out.trace(terms[0][0]).to_text().splitlines()
    emit(report, args.json)
    if args.dot:
        if not terms:
            raise InputError("no terminal to draw")
        dot = emit_dot(out.trace(terms[0][0]))
        if args.dot == "-":
            sys.stdout.write(dot)
        else:
            with open(args.dot, "w", encoding="utf-8") as fh:
                fh.write(dot)
    if out.budget_exceeded and args.strict:
        return EXIT_BUDGET
    return EXIT_OK


def cmd_closure(args):
    entry = _entry(args.presentation)
    res = compute_closure(entry.presentation, _budget(args), max_words=args.max_words)
    report = res.report()
    if args.table:
        report["table"] = {
            f"{format_word(u)} | {format_word(v)}": [f"{f} [{n}]" for f, n in entries]
            for (u, v), entries in sorted(res.table.entries.items())
        }
    emit(report, args.json)
    if res.status == "budget_exceeded" and args.strict:
        return EXIT_BUDGET
    return EXIT_OK


def cmd_check_complete(args):
    entry = _entry(args.presentation)
    P = entry.presentation
    pl = _pseudolength(P, args.pseudolength)
    if pl is not None:
        try:
            verify_pseudolength(P, pl)
        except HomogeneityError as exc:
            emit({"error": str(exc)}, args.json)
            return EXIT_PRECONDITION
    verdict = check_complete(P, pl, _budget(args), sides=args.sides)
    emit(verdict.report(), args.json)
    return {"complete": EXIT_OK, "incomplete": EXIT_NO}.get(verdict.value, EXIT_BUDGET)


def cmd_complete(args):
    entry = _entry(args.presentation)
    P = entry.presentation
    pl = _pseudolength(P, args.pseudolength)
    if pl is None and P.pseudolength:
        pl = pseudolength_from_spec(P.pseudolength)
    try:
        cert = verify_pseudolength(P, pl)
    except HomogeneityError as exc:
        emit({"error": f"homogeneity certification failed: {exc}"}, args.json)
        return EXIT_PRECONDITION
    log = complete_presentation(P, cert, max_rounds=args.rounds, budget=_budget(args),
                                two_sided=not args.right_only)
    text = serialize_presentation(log.final)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    report = log.report()
    report["presentation"] = text.splitlines()
    emit(report, args.json)
    return EXIT_OK if log.status == "complete" else EXIT_BUDGET


def _seed(P, text):
    if not text:
        return None
    return [_positive(P, part) for part in text.split(",")]


def analyze_entry(entry, budget, assume_complete=False, seed=None):
    P = entry.presentation
    flags = syntactic_flags(P)
    closure = compute_closure(P, budget)
    completeness = check_complete(P, budget=budget)
    seed = seed if seed is not None else entry.seed
    report = {
        "presentation": entry.name,
        "flags": flags._asdict(),
        "closure": {"F_r": "finite" if closure.closed else "unknown",
                    "size": len(closure.words) if closure.closed else None,
                    "quadratic_wp": closure.closed},
        "completeness": completeness.value,
    }
    if completeness.value == "complete" or assume_complete:
        ore = ore_report(P, budget, completeness, seed)
        report["left_cancellative"] = check_left_cancellative(P, budget).report()
        report["right_cancellative"] = check_right_cancellative(P, budget).report()
        report["E_r"] = ore["details"]["E_r"].report()
        report["embeds"] = ore["embeds"].report()
    else:
        report["note"] = "monoid properties skipped: completeness not established"
    notes = [c for c in entry.claims if c.get("external")]
    if notes:
        report["external"] = [f"{c['property']} = {c['expected']} ({c['citation']})" for c in notes]
    return report


def cmd_analyze(args):
    entry = _entry(args.presentation)
    report = analyze_entry(entry, _budget(args), args.assume_complete,
                           _seed(entry.presentation, args.seed))
    emit(report, args.json)
    return EXIT_OK


def cmd_wp_monoid(args):
    entry = _entry(args.presentation)
    P = entry.presentation
    verdict = monoid_word_problem(P, _positive(P, args.u), _positive(P, args.v), _budget(args))
    emit(verdict.report(), args.json)
    return _verdict_code(verdict.value)


def cmd_wp_group(args):
    entry = _entry(args.presentation)
    P = entry.presentation
    verdict = group_word_problem(P, _word(P, args.word), _budget(args))
    emit(verdict.report(), args.json)
    return _verdict_code(verdict.value)


def cmd_alt_reduce(args):
    entry = _entry(args.presentation)
    P = entry.presentation
    res = alternating_reduce(P, _word(P, args.word), _budget(args), args.alternations)
    report = {"value": res.value, "alternations": res.alternations, "visited": res.visited,
              "phases": res.phases(),
              "trace": [f"[{s.label()}] {format_word(w)}" for s, w in res.trace]}
    emit(report, args.json)
    return _verdict_code(res.value)


def cmd_corpus_check(args):
    if args.list:
        for name in corpus.names():
            entry = corpus.load_entry(name)
            print(f"{name:8s} {entry.source:12s} {entry.group}")
        return EXIT_OK
    names = args.names or corpus.names()
    unknown = [n for n in names if n not in corpus.names()]
    if unknown:
        raise InputError(f"unknown corpus entries: {', '.join(unknown)}")
    budget = _budget(args)
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        batches = list(pool.map(lambda n: corpus.check_entry(corpus.load_entry(n), budget), names))
    rows = []
    failed = 0
    for batch in batches:
        for r in batch:
            failed += not r.ok
            status = "external" if r.external else ("ok" if r.ok else "FAIL")
            rows.append({"entry": r.entry, "property": r.property, "expected": r.expected,
                         "observed": r.observed, "status": status, "citation": r.citation})
    if args.json:
        emit({"claims": rows, "failed": failed}, True)
    else:
        for row in rows:
            print(f"{row['status']:8s} {row['entry']:6s} {row['property']:18s} "
                  f"expected={row['expected']} observed={row['observed']}")
        print(f"{len(rows) - failed}/{len(rows)} claims hold")
    return EXIT_NO if failed else EXIT_OK


def cmd_steplog(args):
    entry = _entry(args.presentation)
    P = entry.presentation
    rng = random.Random(args.seed)
    memo = Terminals(P, _budget(args))
    rows = []
    for _ in range(args.samples):
        n = rng.randint(1, args.word_len)
        w = tuple((rng.choice(P.alphabet), rng.choice((1, -1))) for _ in range(n))
        p = sum(1 for _, e in w if e > 0)
        try:
            found, stuck = memo.of_word_steps(w)
        except BudgetExceeded:
            rows.append((n, p, n - p, "", "budget"))
            continue
        steps = min(found.values()) if found else ""
        rows.append((n, p, n - p, steps, "stuck" if not found else "ok"))
    with open(args.output + ".csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["length", "p", "q", "min_steps", "status"])
        writer.writerows(rows)
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ok = [r for r in rows if r[4] == "ok"]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.scatter([r[0] for r in ok], [r[3] for r in ok], s=8, alpha=0.5, label="steps")
    ax.scatter([r[0] for r in ok], [r[1] * r[2] for r in ok], s=8, marker="x", alpha=0.5,
               label="p*q")
    ax.set_xlabel("word length")
    ax.set_ylabel("right reversing steps")
    ax.set_title(entry.name)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output + ".png", dpi=120)
    plt.close(fig)
    emit({"samples": len(rows), "ok": len(ok), "csv": args.output + ".csv",
          "png": args.output + ".png"}, args.json)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wordrev", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--max-steps", type=int, help="budget: steps per branch")
    common.add_argument("--max-len", type=int, help="budget: word length")
    common.add_argument("--max-visited", type=int, help="budget: visited words")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reverse", parents=[common], help="exhaustive reversing of a signed word")
    p.add_argument("presentation")
    p.add_argument("word")
    p.add_argument("--dir", choices=("right", "left"), default="right")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--all", action="store_true", help="list every terminal (default)")
    mode.add_argument("--first", action="store_true", help="list the shortest terminal only")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--extended", action="store_true", help="also rewrite positive/negative blocks")
    p.add_argument("--dot", metavar="FILE", help="write a reversing diagram ('-' for stdout)")
    p.add_argument("--strict", action="store_true", help="exit 3 when the budget is hit")
    p.set_defaults(func=cmd_reverse)

    p = sub.add_parser("closure", parents=[common], help="closure of the alphabet under reversing")
    p.add_argument("presentation")
    p.add_argument("--max-words", type=int, default=10_000)
    p.add_argument("--table", action="store_true", help="include the pair table")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("check-complete", parents=[common], help="strong cube test on letters")
    p.add_argument("presentation")
    p.add_argument("--pseudolength", help="'unit', 'weights a=1 b=2' or 'inversions a b'")
    p.add_argument("--sides", choices=("right", "both"), default="both")
    p.set_defaults(func=cmd_check_complete)

    p = sub.add_parser("complete", parents=[common], help="add missing relations until complete")
    p.add_argument("presentation")
    p.add_argument("--rounds", type=int, default=64)
    p.add_argument("--pseudolength")
    p.add_argument("--right-only", action="store_true")
    p.add_argument("-o", "--output", help="write the completed presentation here")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("analyze", parents=[common], help="monoid and group properties")
    p.add_argument("presentation")
    p.add_argument("--assume-complete", action="store_true")
    p.add_argument("--seed", help="comma separated candidate family for E_r")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("wp-monoid", parents=[common], help="u == v in the monoid?")
    p.add_argument("presentation")
    p.add_argument("u")
    p.add_argument("v")
    p.set_defaults(func=cmd_wp_monoid)

    p = sub.add_parser("wp-group", parents=[common], help="w == 1 in the group?")
    p.add_argument("presentation")
    p.add_argument("word")
    p.set_defaults(func=cmd_wp_group)

    p = sub.add_parser("alt-reduce", parents=[common], help="alternate right and left reversing")
    p.add_argument("presentation")
    p.add_argument("word")
    p.add_argument("--alternations", type=int, default=2)
    p.set_defaults(func=cmd_alt_reduce)

    p = sub.add_parser("corpus-check", parents=[common], help="re-verify corpus metadata")
    p.add_argument("names", nargs="*")
    p.add_argument("--list", action="store_true")
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(func=cmd_corpus_check)

    p = sub.add_parser("steplog", parents=[common], help="step counts of random words (CSV + PNG)")
    p.add_argument("presentation")
    p.add_argument("-o", "--output", default="steplog")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--word-len", type=int, default=12, help="longest sampled word")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_steplog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
