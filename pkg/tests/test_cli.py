import json
import re
import subprocess
import sys

import pytest

from wordrev import corpus
from wordrev.cli import emit_dot, main
from wordrev.core import parse_presentation, parse_word
from wordrev.engine import ReversingTrace, reverse_exhaustive


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


_NODE = re.compile(r'^  n\d+ \[pos="-?[\d.]+,-?[\d.]+!"\];$')
_EDGE = re.compile(r'^  n\d+ -> n\d+ \[label="[^"]+"(, style=dashed)?\];$')


def check_dot(text):
    lines = text.splitlines()
    assert lines[0].startswith("digraph ") and lines[0].endswith("{") and lines[-1] == "}"
    body = lines[1:-1]
    for line in body:
        assert (line.startswith("  node ") or line.startswith("  edge ") or line.startswith("  //")
                or _NODE.match(line) or _EDGE.match(line)), line
    nodes = {int(m) for line in body for m in re.findall(r"^  n(\d+) \[pos", line)}
    for line in body:
        m = re.match(r"^  n(\d+) -> n(\d+)", line)
        if m:
            assert {int(m.group(1)), int(m.group(2))} <= nodes
    return body


def test_reverse_lists_three_terminals(capsys):
    code, rep = run_json(capsys, "reverse", "s2", "a^-1 b a b^-1", "--dir", "right", "--all")
    assert code == 0
    assert [t["fraction"] for t in rep["terminals"]] == [
        "(a a) (b b)^-1", "(a b) (b a)^-1", "(b) (b)^-1"]


def test_reverse_cancelling_pair(capsys):
    code, rep = run_json(capsys, "reverse", "free", "a^-1 a")
    assert code == 0 and rep["terminals"] == [{"fraction": "(1) (1)^-1", "steps": 1}]


def test_reverse_budget_exit(capsys):
    code, _, _ = run(capsys, "reverse", "bs", "b^-1 a b", "--strict", "--max-visited", "2000")
    assert code == 3
    code, _, _ = run(capsys, "reverse", "bs", "b^-1 a b", "--max-visited", "2000")
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["reverse", "nosuch", "a"],
    ["reverse", "b3", "x"],
    ["wp-monoid", "b3", "s1^-1", "s1"],
])
def test_input_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_bad_presentation_file(capsys, tmp_path):
    f = tmp_path / "bad.pres"
    f.write_text("letters: a\nrel: a = b\n")
    code, _, err = run(capsys, "reverse", str(f), "a")
    assert code == 2 and "unknown letter" in err


def test_presentation_file_path(capsys, tmp_path):
    f = tmp_path / "mine.pres"
    f.write_text("letters: x y\nrel: x y = y x\n")
    code, rep = run_json(capsys, "reverse", str(f), "x^-1 y")
    assert code == 0 and rep["terminals"][0]["fraction"] == "(y) (x)^-1"


def test_trace_output(capsys):
    code, rep = run_json(capsys, "reverse", "s2", "a^-1 b a b^-1", "--first", "--trace")
    assert rep["trace"] == ["a^-1 b a b^-1 --[r,0,r1.0]--> a b^-1 a b^-1",
                            "a b^-1 a b^-1 --[r,1,r2.1]--> a a b^-1 b^-1"]


def test_dot_two_cells(capsys, tmp_path):
    target = tmp_path / "d.dot"
    code, _, _ = run(capsys, "reverse", "s2", "a^-1 b a b^-1", "--first", "--dot", str(target))
    assert code == 0
    text = target.read_text()
    body = check_dot(text)
    assert sum(1 for line in body if line.startswith("  // cell")) == 2
    # four letters of the start word plus two cells of two edges each
    assert sum(1 for line in body if "->" in line) == 8
    run(capsys, "reverse", "s2", "a^-1 b a b^-1", "--first", "--dot", str(tmp_path / "e.dot"))
    assert (tmp_path / "e.dot").read_bytes() == target.read_bytes()


def test_dot_positive_word_is_horizontal():
    trace = ReversingTrace(parse_word("a b"))
    body = check_dot(emit_dot(trace))
    assert '  n2 [pos="4,0!"];' in body
    assert not any("//" in line for line in body)


def test_dot_left_trace_is_transposed():
    P = corpus.load_entry("b3").presentation
    right = reverse_exhaustive(P, parse_word("s1^-1 s2"))
    left = reverse_exhaustive(P, parse_word("s1 s2^-1"), "left")
    r_body = check_dot(emit_dot(right.trace(right.sorted_terminals()[0])))
    l_body = check_dot(emit_dot(left.trace(left.sorted_terminals()[0])))
    # right cell: corner to the right of the start; left cell: corner below it
    assert '  n3 [pos="2,0!"];' in r_body
    assert '  n3 [pos="0,-2!"];' in l_body


def test_dot_dashed_empty_leg():
    P = parse_presentation("letters: a b\nrel: a = b a\n")
    out = reverse_exhaustive(P, parse_word("a^-1 b"))
    frac = out.sorted_terminals()[0]
    body = check_dot(emit_dot(out.trace(frac)))
    assert any('label="1", style=dashed' in line for line in body)


def test_closure_report(capsys):
    code, rep = run_json(capsys, "closure", "b3")
    assert code == 0 and rep["size"] == 5 and rep["status"] == "closed"
    code, _, _ = run(capsys, "closure", "heis", "--max-words", "50", "--strict")
    assert code == 3


def test_check_complete_codes(capsys):
    assert run(capsys, "check-complete", "b3")[0] == 0
    code, rep = run_json(capsys, "check-complete", "heis")
    assert code == 1 and rep["verdict"] == "incomplete"
    assert run(capsys, "check-complete", "heis", "--pseudolength", "unit")[0] == 4


def test_complete_writes_file(capsys, tmp_path):
    target = tmp_path / "out.pres"
    code, rep = run_json(capsys, "complete", "hako", "-o", str(target))
    assert code == 0 and rep["rounds"] == 2
    Q = parse_presentation(target.read_text())
    assert set(Q.relations) == set(corpus.load_entry("hakq").presentation.relations)


def test_complete_already_complete(capsys, tmp_path):
    target = tmp_path / "same.pres"
    code, rep = run_json(capsys, "complete", "s2", "-o", str(target))
    assert code == 0 and rep["rounds"] == 0 and rep["added"] == []
    assert parse_presentation(target.read_text()) == corpus.load_entry("s2").presentation


def test_complete_bad_pseudolength(capsys):
    assert run(capsys, "complete", "heis", "--pseudolength", "unit")[0] == 4


def test_word_problems(capsys):
    assert run(capsys, "wp-monoid", "b3", "s1 s2 s1", "s2 s1 s2")[0] == 0
    assert run(capsys, "wp-monoid", "b3", "s1 s2", "s2 s1")[0] == 1
    assert run(capsys, "wp-group", "b3", "s1 s2 s1 s2^-1 s1^-1 s2^-1")[0] == 0
    assert run(capsys, "wp-group", "b3", "s1 s2^-1")[0] == 1
    assert run(capsys, "alt-reduce", "b3", "s1 s2 s1^-1 s2^-1 s1^-1 s2")[0] == 0


def test_analyze_hakq(capsys):
    code, rep = run_json(capsys, "analyze", "hakq")
    assert code == 0
    assert rep["completeness"] == "complete"
    assert rep["left_cancellative"]["value"] == rep["right_cancellative"]["value"] == "yes"
    assert rep["E_r"]["value"] == "yes" and rep["embeds"]["value"] == "yes"


def test_corpus_check_subset(capsys):
    code, rep = run_json(capsys, "corpus-check", "b3", "lee", "nemb")
    assert code == 0 and rep["failed"] == 0
    assert any(row["status"] == "external" for row in rep["claims"])
    assert run(capsys, "corpus-check", "nosuch")[0] == 2


def test_corpus_list(capsys):
    code, out, _ = run(capsys, "corpus-check", "--list")
    assert code == 0 and len(out.splitlines()) == len(corpus.names())


def test_steplog(capsys, tmp_path):
    prefix = str(tmp_path / "log")
    code, rep = run_json(capsys, "steplog", "b3", "-o", prefix, "--samples", "30", "--word-len", "6")
    assert code == 0 and rep["samples"] == 30
    rows = (tmp_path / "log.csv").read_text().splitlines()
    assert rows[0] == "length,p,q,min_steps,status" and len(rows) == 31
    assert (tmp_path / "log.png").stat().st_size > 0


def test_budget_env(capsys, monkeypatch):
    monkeypatch.setenv("WORDREV_BUDGET", "visited=50")
    code, rep = run_json(capsys, "reverse", "bs", "b^-1 a b")
    assert rep["budget_exceeded"] and rep["visited"] <= 50


def test_entry_point():
    res = subprocess.run([sys.executable, "-m", "wordrev.cli", "reverse", "b3", "s1^-1 s2", "--json"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["terminals"][0]["fraction"] == "(s2 s1) (s1 s2)^-1"
