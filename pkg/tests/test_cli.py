"""Command-line behavior: pipelines, file outputs, exit codes."""

import json
import subprocess
import sys

import pytest

from delsim.cli import main
from delsim.logic import from_sexp
from delsim import serialize


def run_cli(args):
    return main(args)


def read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture()
def consensus_files(tmp_path):
    is1 = tmp_path / "is1.json"
    sa1 = tmp_path / "sa1.json"
    proto = tmp_path / "proto.json"
    task = tmp_path / "task.json"
    assert run_cli(["gen", "is", "--agents", "2", "--values", "0,1",
                    "--rounds", "1", "-o", str(is1)]) == 0
    assert run_cli(["gen", "sa", "--agents", "2", "--values", "0,1",
                    "--k", "1", "-o", str(sa1)]) == 0
    assert run_cli(["update", "--action", str(is1), "-o", str(proto)]) == 0
    assert run_cli(["update", "--action", str(sa1), "-o", str(task)]) == 0
    return {"proto": proto, "task": task, "dir": tmp_path}


def test_gen_input_writes_model(tmp_path):
    out = tmp_path / "input.json"
    assert run_cli(["gen", "input", "--agents", "3", "-o", str(out)]) == 0
    doc = read(out)
    assert doc["format"] == "delsim-model/1"
    assert len(doc["facets"]) == 27
    model = serialize.model_from_json(doc)
    assert model.n_facets == 27


def test_gen_accepts_agent_names(tmp_path):
    out = tmp_path / "m.json"
    assert run_cli(["gen", "input", "--agents", "alice,bob",
                    "--values", "x,y", "-o", str(out)]) == 0
    assert read(out)["agents"] == ["alice", "bob"]


def test_update_provenance(consensus_files, tmp_path):
    prov = tmp_path / "prov.json"
    is1 = consensus_files["dir"] / "is1.json"
    out = tmp_path / "p2.json"
    assert run_cli(["update", "--action", str(is1), "-o", str(out),
                    "--provenance", str(prov)]) == 0
    doc = read(prov)
    assert doc["format"] == "delsim-provenance/1"
    assert len(doc["facets"]) == 12


def test_simulate_reports_chain(consensus_files, tmp_path):
    out = tmp_path / "sim.json"
    assert run_cli(["simulate", "--left", str(consensus_files["proto"]),
                    "--right", str(consensus_files["task"]),
                    "--mode", "K", "-o", str(out)]) == 0
    doc = read(out)
    assert doc["step_pairs"] == [18, 14, 10, 6, 2, 0]
    assert doc["total"] is False
    assert doc["pairs"] == []
    assert doc["witnesses"]


def test_obstruct_finds_consensus_obstruction(consensus_files, tmp_path):
    verdict = tmp_path / "verdict.json"
    phi = tmp_path / "phi.sexp"
    code = run_cli(["obstruct", "--protocol", str(consensus_files["proto"]),
                    "--task", str(consensus_files["task"]), "--mode", "K",
                    "--phi", str(phi), "-o", str(verdict)])
    assert code == 1
    doc = read(verdict)
    assert doc["exists"] and doc["mode"] == "K"
    assert doc["witness"] == 0 and doc["phi_file"] == str(phi)
    assert doc["verified"]["task_models_phi"] is True
    assert [s["pairs"] for s in doc["steps"]] == [18, 14, 10, 6, 2, 0]
    from_sexp(phi.read_text())  # parses back


def test_check_formula_round_trip(consensus_files, tmp_path):
    verdict = tmp_path / "v.json"
    phi = tmp_path / "phi.sexp"
    run_cli(["obstruct", "--protocol", str(consensus_files["proto"]),
             "--task", str(consensus_files["task"]), "--mode", "K",
             "--phi", str(phi), "-o", str(verdict)])
    out = tmp_path / "chk.json"
    assert run_cli(["check", "--model", str(consensus_files["task"]),
                    "--formula", str(phi), "-o", str(out)]) == 0
    assert read(out)["valid"] is True
    assert run_cli(["check", "--model", str(consensus_files["proto"]),
                    "--formula", str(phi), "--facet", "0",
                    "-o", str(out)]) == 0
    assert read(out)["holds"] is False


def test_check_relation(consensus_files, tmp_path):
    sim = tmp_path / "sim.json"
    run_cli(["simulate", "--left", str(consensus_files["proto"]),
             "--right", str(consensus_files["task"]), "--mode", "K",
             "-o", str(sim)])
    out = tmp_path / "rep.json"
    assert run_cli(["check", "--left", str(consensus_files["proto"]),
                    "--right", str(consensus_files["task"]),
                    "--relation", str(sim), "--mode", "K",
                    "-o", str(out)]) == 0
    doc = read(out)
    assert doc["atom_ok"] and doc["forth_ok"] and not doc["total"]


def test_check_requires_exactly_one_target(consensus_files):
    assert run_cli(["check", "--model", str(consensus_files["proto"])]) == 2


def test_morphism_subcommand(consensus_files, tmp_path):
    out = tmp_path / "m.json"
    assert run_cli(["morphism", "--source", str(consensus_files["proto"]),
                    "--target", str(consensus_files["task"]),
                    "-o", str(out)]) == 0
    assert read(out)["found"] is False


def test_staircase_generation(tmp_path):
    t = tmp_path / "t.json"
    p = tmp_path / "p.json"
    assert run_cli(["gen", "staircase", "--max-decision", "3",
                    "-o", str(t)]) == 0
    assert len(read(t)["facets"]) == 7
    assert run_cli(["gen", "staircase", "--protocol", "-o", str(p)]) == 0
    assert len(read(p)["facets"]) == 1


def test_knowall_generation(tmp_path):
    graphs = tmp_path / "g.json"
    graphs.write_text(json.dumps({"graphs": [{"edges": [[0, 1]]}]}))
    out = tmp_path / "ka.json"
    # missing self-loops get added with a stderr note rather than an error
    assert run_cli(["gen", "knowall", "--agents", "2", "--rounds", "1",
                    "--graphs", str(graphs), "-o", str(out)]) == 0
    assert len(read(out)["facets"]) == 4


def test_missing_file_is_usage_error(tmp_path):
    assert run_cli(["simulate", "--left", str(tmp_path / "no.json"),
                    "--right", str(tmp_path / "no.json"),
                    "--mode", "K"]) == 2


def test_bad_arguments_are_usage_errors():
    assert run_cli(["simulate"]) == 2
    assert run_cli(["no-such-command"]) == 2
    assert run_cli(["--jobs", "0", "gen", "input", "--agents", "2"]) == 2
    assert run_cli(["gen", "input", "--agents", ""]) == 2


def test_env_var_resolves_relative_paths(tmp_path, monkeypatch):
    monkeypatch.setenv("DELSIM_DIR", str(tmp_path))
    assert run_cli(["gen", "input", "--agents", "2", "-o", "m.json"]) == 0
    assert (tmp_path / "m.json").exists()
    assert run_cli(["simulate", "--left", "m.json", "--right", "m.json",
                    "--mode", "D", "-o", "sim.json"]) == 0
    assert read(tmp_path / "sim.json")["total"] is True


def test_stdin_stdout_pipeline(consensus_files, capsys, monkeypatch):
    import io
    is1 = (consensus_files["dir"] / "is1.json").read_text()
    monkeypatch.setattr(sys, "stdin", io.StringIO(is1))
    assert run_cli(["update", "--action", "-"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["facets"]) == 12


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "delsim", "gen", "input",
                           "--agents", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["format"] == "delsim-model/1"


def test_case_study_single_input(tmp_path):
    out = tmp_path / "case.json"
    code = run_cli(["case-is2", "--single-input",
                    "--outdir", str(tmp_path / "rpq"), "-o", str(out)])
    assert code == 0
    doc = read(out)
    assert doc["single_input"] is True
    assert doc["obstruction_exists"] is False
    assert doc["conflict_layers"]["0,1"] == [102, 118, 120, 122, 124, 126]
    assert doc["location_violations"] == {"0,1": 0, "0,2": 0, "1,2": 0}
    assert doc["explicit_relation"]["total"] is True
    assert len(doc["rpq_files"]) == 3
    for path in doc["rpq_files"].values():
        dump = read(path)
        assert {"p", "q", "layers", "final"} <= set(dump)
        assert len(dump["final"]) == 24
