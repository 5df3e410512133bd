import json
from fractions import Fraction as F

import pytest

from nearcvx.cli import main
from nearcvx.exact import box
from nearcvx.functions import NCFunction, affine
from nearcvx.opt import Problem
from nearcvx.repro import corpus_names, corpus_text
from nearcvx.serialize import dump_problem
from nearcvx.sets import CarvedPolyhedron, Polyhedron


@pytest.fixture
def corpus(tmp_path):
    def path(name):
        p = tmp_path / f"{name}.json"
        p.write_text(corpus_text(name), encoding="utf-8")
        return str(p)

    return path


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_solve_prints_value_and_solution_set(capsys, corpus):
    code, out, _ = run(capsys, "solve", corpus("ex3_1"))
    assert code == 0
    assert "status: optimal" in out and "v = 0" in out and "S = " in out


def test_solve_json(capsys, corpus):
    code, d = run_json(capsys, "solve", corpus("ex3_1"))
    assert code == 0 and d["value"] == "0" and d["regularity"]["holds"]
    assert {"base", "removed"} <= set(d["S"])


def test_regularity_failure_has_a_refutation(capsys, corpus):
    code, out, _ = run(capsys, "regularity", corpus("opt_vals"))
    assert code == 1
    assert "regularity: FAILED" in out and "refutation" in out
    code, out, _ = run(capsys, "regularity", corpus("ex3_2"))
    assert code == 0 and "regularity: holds" in out


def test_irregular_solve_is_a_hypothesis_error(capsys, corpus):
    code, _, err = run(capsys, "solve", corpus("opt_vals"))
    assert code == 3 and err.startswith("error:") and "regularity" in err
    code, d = run_json(capsys, "solve", corpus("opt_vals"))
    assert code == 3 and d["error"] == "regularity"


def test_plot_needs_two_dimensions(capsys, tmp_path):
    p = Problem(NCFunction.on(affine((1,))), CarvedPolyhedron(Polyhedron(1, box([(0, 1)]))))
    src = tmp_path / "line.json"
    src.write_text(dump_problem(p), encoding="utf-8")
    code, _, err = run(capsys, "plot", str(src), str(tmp_path / "out.svg"))
    assert code == 2 and "unsupported-dimension" in err
    assert not (tmp_path / "out.svg").exists()


def test_plot_writes_svg(capsys, corpus, tmp_path):
    target = tmp_path / "pic.svg"
    code, out, _ = run(capsys, "plot", corpus("ex3_1"), str(target), "--points", "0,1/2", "0,0")
    assert code == 0 and "wrote" in out
    svg = target.read_text(encoding="utf-8")
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    assert svg.rstrip().endswith("</svg>")


def test_kkt_commands(capsys, corpus):
    path = corpus("worked_example")
    code, out, _ = run(capsys, "kkt", path, "0,0")
    assert code == 1 and "KKT: refuted" in out
    code, d = run_json(capsys, "kkt", path, "1/2,1/2")
    assert code == 0 and d["holds"] and d["lambdas"] == ["0"]
    code, d = run_json(capsys, "kkt", path, "1/2,3/4", "--original")
    assert code == 0 and d["in_S"] is True
    code, out, _ = run(capsys, "slater", path)
    assert code == 0 and "x0 = " in out


def test_fermat_and_classification(capsys, corpus):
    code, d = run_json(capsys, "fermat", corpus("ex3_4"), "0,0")
    assert code == 1 and not d["holds"] and d["classification"] == "AssociatedOnly"
    code, d = run_json(capsys, "fermat", corpus("ex3_4"), "0,0", "--associated")
    assert code == 0 and d["holds"]


def test_pointwise_queries(capsys, corpus):
    code, d = run_json(capsys, "lsc-hull", corpus("ex3_4"), "0,0")
    assert code == 0 and d["value"] == "0" and d["f_value"] == "1"
    code, d = run_json(capsys, "subdiff", corpus("ex3_4"), "0,0")
    assert code == 0
    code, d = run_json(capsys, "normal-cone", corpus("ex3_1"), "0,0")
    assert code == 0 and d["normal_cone"]
    # (0, 1/2) sits on the removed part of the edge
    code, _ = run_json(capsys, "normal-cone", corpus("ex3_1"), "0,1/2")
    assert code == 1


def test_solve_associated(capsys, corpus):
    code, d = run_json(capsys, "solve-associated", corpus("opt_vals"))
    assert code == 0 and d["value"] == "0"


def test_validate(capsys, corpus):
    for name in corpus_names():
        if name == "ho_examples":
            continue
        code, d = run_json(capsys, "validate", corpus(name))
        assert code == 0 and d["valid"], name


def test_oracle_modes(capsys, corpus):
    path = corpus("opt_vals")
    code, d = run_json(capsys, "oracle", path, "min", "--grid-step", "1/48", "--grid-box", "0:1,0:1")
    lo, hi = (F(v) for v in d["bracket"])
    assert code == 0 and lo <= F(1, 6) <= hi
    code, d = run_json(capsys, "oracle", path, "local-minima", "--grid-step", "1/48", "--grid-box", "0:1,0:1")
    assert code == 0 and len(d["clusters"]) == 2
    code, _, err = run(capsys, "oracle", path, "liminf")
    assert code == 2 and "--point" in err


def test_input_errors_exit_two(capsys, corpus, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dimension": 2,\n}', encoding="utf-8")
    code, _, err = run(capsys, "solve", str(bad))
    assert code == 2 and "line 2, column 1" in err
    code, _, err = run(capsys, "solve", str(tmp_path / "missing.json"))
    assert code == 2
    code, _, _ = run(capsys, "fermat", corpus("ex3_1"), "1,2,3")
    assert code == 2


def test_infeasible_point_is_a_hypothesis_error(capsys, corpus):
    code, d = run_json(capsys, "fermat", corpus("ex3_1"), "5,5")
    assert code == 3 and d["error"] == "InfeasiblePoint"


def test_unknown_command_is_an_argparse_error(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_repro(capsys):
    code, out, _ = run(capsys, "repro")
    assert code == 0 and "examples match" in out and "FAIL" not in out
