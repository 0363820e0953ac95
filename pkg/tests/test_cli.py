import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from ampcsim import cli
from ampcsim.errors import InputMismatch
from ampcsim.graph import generate_path, load_edge_list
from ampcsim.oracles import seq_greedy_mis
from ampcsim.ranks import vertex_ranks


def call(*argv):
    buf = io.StringIO()
    code = cli.main(list(argv), stdout=buf)
    return code, buf.getvalue()


def test_run_msf_verified():
    code, out = call("run", "--alg", "msf", "--gen", "random:n=1000,m=5000", "--eps", "0.5",
                     "--seed", "7", "--verify")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "pass" and doc["schema"] == 1
    assert doc["quota_events"] == 0


def test_run_two_cycle():
    code, out = call("run", "--alg", "two-cycle", "--gen", "two-cycles:k=1000")
    assert code == 0 and json.loads(out)["result"]["components"] == 2


def test_bad_eps_is_a_config_error():
    code, out = call("run", "--alg", "mis", "--eps", "2.0", "--gen", "path:n=10")
    assert code == 1 and json.loads(out)["error"]["type"] == "ConfigError"


@pytest.mark.parametrize("alg", cli.ALGORITHMS)
def test_every_algorithm_verifies(alg):
    gen = "two-cycles:k=300" if alg in cli.CYCLE_ALGS else "random:n=400,m=1500,seed=3"
    code, out = call("run", "--alg", alg, "--gen", gen, "--verify", "--small-threshold", "100")
    assert code == 0, out
    assert json.loads(out)["verdict"] == "pass"


@pytest.mark.parametrize("alg", ["msf", "mis", "mm", "connectivity", "two-cycle"])
def test_planted_bug_is_caught(alg):
    gen = "two-cycles:k=300" if alg == "two-cycle" else "random:n=300,m=900"
    code, out = call("run", "--alg", alg, "--gen", gen, "--verify", "--plant-bug")
    assert code == 2 and json.loads(out)["verdict"] == "fail"


def test_report_round_trips(tmp_path):
    path = tmp_path / "r.json"
    code, out = call("run", "--alg", "mm", "--gen", "grid:rows=10,cols=12", "--verify",
                     "--out", str(path))
    text = path.read_text()
    assert code == 0 and text == out
    assert cli.dumps(json.loads(text)) == text


def _rows(out):
    return list(csv.DictReader(io.StringIO(out)))


def test_compare_ampc_and_mpc_mis():
    gen = "random:n=10000,m=100000"
    code, out = call("compare", "--alg", "mis", "--alg", "mpc-mis", "--gen", gen, "--verify")
    rows = _rows(out)
    assert code == 0 and out.splitlines()[0] == ",".join(cli.CSV_COLUMNS)
    assert rows[0]["shuffles"] == "1"
    rep = cli.run(cli.RunConfig("mpc-mis", generator=gen))
    assert int(rows[1]["shuffles"]) == 2 * len(rep.phases)
    assert rows[1]["bytes_kv"] == "0" and rows[0]["result"] == rows[1]["result"]


def test_compare_single_row():
    code, out = call("compare", "--alg", "mm", "--gen", "path:n=50")
    assert code == 0 and len(_rows(out)) == 1


def test_compare_caching_on_and_off():
    code, out = call("compare", "--alg", "mis", "--alg", "mis:cache=off",
                     "--gen", "random:n=2000,m=10000")
    on, off = _rows(out)
    assert off["algorithm"] == "mis:cache=off"
    assert on["result"] == off["result"]
    assert int(on["bytes_kv"]) < int(off["bytes_kv"])


def test_compare_rejects_mixed_inputs():
    a = cli.RunConfig("mis", generator="path:n=5")
    b = cli.RunConfig("mis", generator="path:n=6")
    with pytest.raises(InputMismatch):
        cli.compare([a, b])


def test_gen_writes_edge_list(tmp_path):
    path = tmp_path / "g.txt"
    code, _ = call("gen", "two-cycles:k=50", "--out", str(path))
    g = load_edge_list(path)
    assert code == 0 and (g.n, g.m) == (100, 100)
    desc = json.loads((tmp_path / "g.txt.json").read_text())
    assert desc["n"] == 100
    code, out = call("run", "--alg", "two-cycle", "--input", str(path), "--verify")
    assert code == 0 and json.loads(out)["result"]["components"] == 2


def test_result_file(tmp_path):
    res = tmp_path / "mis.txt"
    code, out = call("run", "--alg", "mis", "--gen", "path:n=7", "--result", str(res))
    want = np.flatnonzero(seq_greedy_mis(generate_path(7), vertex_ranks(7, 0)))
    assert code == 0 and res.read_text().split() == [str(v) for v in want]


@pytest.mark.parametrize("argv", [
    ["run", "--alg", "nope", "--gen", "path:n=5"],
    ["run", "--alg", "mis"],
    ["run", "--alg", "mis", "--gen", "path:n=5", "--input", "x.txt"],
    ["run", "--alg", "mis", "--gen", "path:n=-3"],
    ["run", "--alg", "mis", "--gen", "blob:n=3"],
    ["run", "--alg", "mis", "--gen", "random:n=3,m=99"],
    ["run", "--alg", "mis", "--gen", "path:n=x"],
    ["run", "--alg", "mis", "--input", "/nonexistent/graph.txt"],
    ["run", "--alg", "two-cycle", "--gen", "path:n=5"],
    ["run", "--alg", "mis", "--gen", "path:n=5", "--space", "1"],
    ["run", "--alg", "mis", "--gen", "path:n=5", "--quota-slack", "0"],
    ["run", "--alg", "two-cycle", "--gen", "two-cycles:k=5", "--sample-prob", "1.5"],
    ["compare", "--alg", "mis:cache=maybe", "--gen", "path:n=5"],
    ["run", "--alg", "mis", "--gen", "path:n=5", "--weights", "heavy"],
    ["frobnicate"],
])
def test_malformed_inputs_exit_one(argv):
    code, out = call(*argv)
    assert code == 1
    doc = json.loads(out)
    assert doc["schema"] == 1 and doc["error"]["message"]


@pytest.mark.parametrize("body", ["0 1\n1 x\n", "0 1 2 3\n", "0 1 2\n1 2\n", "0 1 w\n", "7\n"])
def test_malformed_edge_lists_exit_one(tmp_path, body):
    path = tmp_path / "bad.txt"
    path.write_text(body)
    code, out = call("run", "--alg", "mis", "--input", str(path))
    assert code == 1 and "error" in json.loads(out)


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "ampcsim", "run", "--alg", "mis", "--gen",
                        "star:n=20", "--verify"], capture_output=True, text=True)
    assert p.returncode == 0 and json.loads(p.stdout)["verdict"] == "pass"
