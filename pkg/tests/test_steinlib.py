from pathlib import Path

import pytest

from oracles import K4STAR, PATH3
from stpvnd.graph import Instance, Solution
from stpvnd.steinlib import (MAGIC, SteinLibError, bundled_optima, format_stp, load_optima,
                             parse_solution, parse_stp, read_stp, write_solution)

DATA = Path(__file__).parent / "data"
FIXTURES = sorted(DATA.glob("*.stp"))


def stp(graph_lines, terminal_lines, nodes=3, edges=None, terms=None):
    edges = len(graph_lines) if edges is None else edges
    terms = len(terminal_lines) if terms is None else terms
    return "\n".join([MAGIC, "SECTION Graph", f"Nodes {nodes}", f"Edges {edges}", *graph_lines, "END",
                      "SECTION Terminals", f"Terminals {terms}", *terminal_lines, "END", "EOF", ""])


def test_path3_file_equals_fixture():
    inst, meta = read_stp(DATA / "path3.stp")
    assert inst.graph == PATH3.graph and inst.terminals == PATH3.terminals
    assert meta["name"] == "PATH3" and meta["remark"] == "three-node line"


def test_lowercase_keywords_parallel_edges_and_skipped_sections():
    inst, _ = read_stp(DATA / "k4star.stp")
    # "e 3 1 5" duplicates (1,3) at a higher cost and is collapsed
    assert inst.graph == K4STAR.graph and inst.terminals == K4STAR.terminals


def test_self_loop_dropped(caplog):
    text = stp(["E 1 2 1", "E 2 2 4", "E 2 3 1"], ["T 1", "T 3"])
    inst, _ = parse_stp(text)
    assert inst.graph.num_edges == 2
    assert "self-loop" in caplog.text


def test_count_mismatch_reports_offending_line():
    text = stp(["E 1 2 1", "E 2 3 1", "E 1 3 2"], ["T 1"], edges=2)
    with pytest.raises(SteinLibError) as err:
        parse_stp(text)
    assert err.value.lineno == 7  # third E line
    assert "declared 2 edges" in str(err.value)


def test_too_few_edges_reported_at_end():
    text = stp(["E 1 2 1"], ["T 1"], edges=2)
    with pytest.raises(SteinLibError) as err:
        parse_stp(text)
    assert err.value.lineno == 6


@pytest.mark.parametrize("text, fragment", [
    ("SECTION Graph\nNodes 1\nEND\nEOF\n", "magic"),
    (stp(["E 1 4 1"], ["T 1"]), "outside [1,3]"),
    (stp(["E 1 2 1"], ["T 9"]), "outside [1,3]"),
    (stp(["E 1 2 x"], ["T 1"]), "non-integer"),
    (MAGIC + "\nSECTION Graph\nNodes 2\nEdges 0\nEND\nEOF\n", "missing SECTION Terminals"),
    (stp(["E 1 2 1"], ["T 1", "T 2"], terms=1), "declared 1 terminals"),
    (stp(["E 1 2 1"], ["T 1"]).replace("EOF\n", ""), "missing EOF"),
])
def test_malformed(text, fragment):
    with pytest.raises(SteinLibError) as err:
        parse_stp(text)
    assert fragment in str(err.value)
    assert err.value.lineno is not None


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.name)
def test_reparse_is_stable(path):
    inst, _ = read_stp(path)
    again, _ = parse_stp(format_stp(inst))
    assert again.graph == inst.graph and again.terminals == inst.terminals
    assert parse_stp(format_stp(again))[0].graph == again.graph


class TestSolutionText:
    def test_k4star_star(self):
        sol = Solution.from_edges(K4STAR.graph, [(4, 1), (2, 4), (3, 4)])
        text = write_solution(sol, K4STAR)
        assert text == "NAME K4STAR\nCOST 3\nE 1 4\nE 2 4\nE 3 4\n"
        assert parse_solution(text) == ("K4STAR", 3, frozenset({(1, 4), (2, 4), (3, 4)}))
        assert parse_solution(text, K4STAR) == sol

    def test_single_terminal(self):
        inst = Instance(PATH3.graph, {2}, "one")
        text = write_solution(Solution({}, frozenset({2}), 0), inst)
        assert text == "NAME one\nCOST 0\n"
        assert parse_solution(text)[1:] == (0, frozenset())

    def test_invalid_rejected(self):
        with pytest.raises(ValueError):
            write_solution(Solution.from_edges(K4STAR.graph, [(1, 4), (2, 4)]), K4STAR)


class TestOptima:
    def test_gaps(self):
        table = load_optima("E01,111,true\nHC6U,39,false\n")
        assert table["E01"].optimal and not table["HC6U"].optimal
        assert table.gap("E01", 111) == 0.0
        assert table.gap("HC6U", 40) == 2.56
        assert table.gap("e01", 111) == 0.0

    def test_empty(self):
        table = load_optima("")
        assert len(table) == 0 and table.gap("E01", 111) is None

    @pytest.mark.parametrize("text", ["E01,111,true\nE01,112,true\n", "E01,abc,true\n", "E01,0,true\n"])
    def test_rejects(self, text):
        with pytest.raises(SteinLibError):
            load_optima(text)

    def test_bundled_rows(self):
        table = bundled_optima()
        assert len(table) == 36
        assert table["E01"].cost == 111 and table["E01"].optimal
        assert table["HC6U"].cost == 39
        assert table["TAQ0631"].cost == 581
        assert table["HC10P"].cost == 59797
        # reproduces the published average gaps
        assert table.gap("E02", 227) == 6.07
        assert table.gap("HC6P", 4093.9) == 2.27
        assert table.gap("TAQ0631", 584.4) == 0.59
