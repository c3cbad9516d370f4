import json
import math

import pytest

from qchar import config
from qchar.characters import CharacterTable, VoiculescuParams, character_table
from qchar.cli import run
from qchar.fluctsim import QuasiLocalChain
from qchar.partitions import Interval
from qchar.repring import RingElement


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_lr(capsys):
    assert invoke(capsys, "lr", "--lam", "1", "--mu", "1", "--nu", "2") == (0, "1\n", "")
    assert invoke(capsys, "lr", "--lam", "2,1", "--mu", "2,1", "--nu", "3,2,1")[1] == "2\n"


def test_char_table_poisson(capsys, tmp_path):
    code, out, _ = invoke(
        capsys, "char-table", "--omega", '{"gamma_plus":1}', "--q", "1", "--interval", "1..1", "--cut", "3"
    )
    assert code == 0
    data = json.loads(out)
    assert set(data) == {"q", "omega", "interval", "cut", "mass", "values"}
    for entry in data["values"]:
        k = entry["parts"][0]
        assert entry["value"] == pytest.approx(math.exp(-1) / math.factorial(k), abs=1e-12)
    # the artifact re-parses into the table the library computes
    path = tmp_path / "t.json"
    invoke(capsys, "char-table", "--omega", '{"gamma_plus":1}', "--q", "0.6", "--interval", "1..2",
           "--cut", "4", "--out", str(path))
    back = CharacterTable.from_json(json.loads(path.read_text()))
    assert back == character_table(VoiculescuParams(gamma_plus=1.0), 0.6, Interval(1, 2), 4)


def test_clt_short_chain_is_validation_error(capsys):
    chain = QuasiLocalChain.qubit(8, 0.3).to_json()
    code, out, err = invoke(capsys, "clt", "--chain", json.dumps(chain), "--ns", "10")
    assert code == 2 and out == ""
    diag = json.loads(err.strip())
    assert diag["error"] == "DomainError" and "cannot host" in diag["message"]


def test_clt_default_chain_fits_requested_sizes(capsys):
    code, out, _ = invoke(capsys, "clt", "--ns", "100,1000")
    assert code == 0
    errors = [r["abs_error"] for r in json.loads(out)["rows"]]
    assert errors[1] < errors[0]


def test_clt_csv_output(capsys, tmp_path):
    path = tmp_path / "r.csv"
    code, _, _ = invoke(capsys, "clt", "--ns", "2,4,8", "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "n,simulated_re,simulated_im,limit_re,limit_im,abs_error"
    assert [l.split(",")[0] for l in lines[1:]] == ["2", "4", "8"]


def test_exit_codes(capsys):
    assert invoke(capsys, "frobnicate")[0] == 64
    assert invoke(capsys, "lr", "--lam", "1")[0] == 2
    assert invoke(capsys, "char-table", "--omega", '{"alpha_plus":[0.5]}', "--q", "0.5",
                  "--interval", "1..1", "--cut", "2")[0] == 2
    assert invoke(capsys, "lr", "--lam", "1", "--mu", "1", "--nu", "2", "--out", "/nonexistent/dir/x")[0] == 74
    assert invoke(capsys, "wick", "--cov", "/nonexistent.json", "--word", "a")[0] == 74


def test_kms_check_is_deterministic(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run(["kms-check", "--q", "0.7", "--sizes", "2,1", "--cut", "3", "--seed", "5", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    report = json.loads(paths[0].read_text())
    assert report["ok"] and report["kms_residual"] < 1e-12 and report["ocha_residual"] < 1e-12


def test_ring_mul_round_trip(capsys):
    z1 = '{"interval":[1,1],"coeffs":[{"parts":[1],"value":1}]}'
    code, out, _ = invoke(capsys, "ring-mul", "--lhs", z1, "--rhs", z1)
    assert code == 0
    prod = RingElement.from_json(json.loads(out))
    assert RingElement.from_json(prod.to_json()) == prod
    assert len(list(prod.terms())) == 2


def test_wick(capsys, tmp_path):
    cov = {"labels": ["x", "y"], "s": [[1, 0.2], [0.2, 1]], "sigma": [[0, 0.1], [-0.1, 0]]}
    path = tmp_path / "cov.json"
    path.write_text(json.dumps(cov))
    code, out, _ = invoke(capsys, "wick", "--cov", str(path), "--word", "x,y,x,y", "--fd")
    data = json.loads(out)
    assert code == 0
    assert data["fd_re"] == pytest.approx(data["moment_re"], rel=1e-6)
    odd = json.loads(invoke(capsys, "wick", "--cov", str(path), "--word", "x,y,x")[1])
    assert odd["moment_re"] == 0 and odd["moment_im"] == 0


def test_schur_qdim_decay(capsys):
    assert json.loads(invoke(capsys, "schur", "--lam", "2,1", "--point", "1,2,3")[1]) == {"value": 60}
    assert json.loads(invoke(capsys, "qdim", "--lam", "1,0", "--q", "1/2")[1]) == {"qdim": "5/2"}
    code, out, _ = invoke(capsys, "decay", "--sizes", "1e4..1e6", "--format", "csv")
    rows = out.splitlines()
    assert code == 0 and len(rows) == 4
    assert rows[1].startswith("10000,92,1,107,")


def test_mult_check(capsys):
    code, out, _ = invoke(capsys, "mult-check", "--omega", '{"beta_plus":[0.5]}', "--q", "0.6", "--cut", "5")
    assert code == 0 and json.loads(out)["ok"]


def test_config_override_is_scoped(capsys):
    before = config.DENSE_MAX_DIM
    assert run(["--set", "DENSE_MAX_DIM=16", "clt", "--ns", "2,4", "--method", "dense"]) == 0
    assert config.DENSE_MAX_DIM == before
    assert run(["--set", "NOPE=1", "lr", "--lam", "1", "--mu", "1", "--nu", "2"]) == 2


def test_thread_cap(monkeypatch, capsys):
    monkeypatch.setenv("QCHAR_THREADS", "2")
    assert config.max_threads() == 2
    assert invoke(capsys, "lr", "--lam", "1", "--mu", "1", "--nu", "2")[0] == 0
    monkeypatch.setenv("QCHAR_THREADS", "many")
    assert config.max_threads() is None
