import json

import pytest

from potts_chain.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main, parse_sizes, read_config


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sizes():
    assert parse_sizes("8,16") == [8, 16]
    assert parse_sizes("8..12") == [8, 10, 12]
    assert parse_sizes("3..5") == [3, 4, 5]


def test_config(tmp_path):
    p = tmp_path / "job.cfg"
    p.write_text("gamma = pi/7  # angle\nL = 3\n")
    assert read_config(str(p)) == {"gamma": "pi/7", "L": "3"}


def test_weights_csv(capsys):
    code, out, _ = run(capsys, "weights", "--gamma", "pi/5", "--u", "0.3", "--gauge", "d22")
    assert code == EXIT_OK
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert len(lines) == 39


def test_json_embeds_job(capsys):
    code, out, _ = run(capsys, "characters", "--k", "5", "--series", "zm", "--m", "1", "--order", "4")
    rec = json.loads(out)
    assert code == EXIT_OK
    assert rec["job"]["version"] and rec["job"]["command"] == "characters"
    assert rec["result"]["coefficients"] == [1, 2, 3, 6, 10]


def test_complex_as_pair(capsys):
    code, out, _ = run(capsys, "bethe-solve", "--L", "4", "--sector", "1", "--gamma", "pi/5")
    rec = json.loads(out)
    assert code == EXIT_OK
    assert all(len(r) == 2 for r in rec["result"]["state"]["roots"])


def test_usage_error(capsys):
    code, _, err = run(capsys, "characters", "--series", "string", "--k", "5", "--l", "0", "--m", "1")
    assert code == EXIT_USAGE
    assert json.loads(err)["reason"]


def test_bad_angle(capsys):
    code, _, _ = run(capsys, "ybe-check", "--gamma", "pi/2")
    assert code == EXIT_USAGE


def test_verification_failure(capsys):
    code, _, err = run(capsys, "bethe-solve", "--L", "8", "--sector", "0", "--seed-spec", "shift:1,0")
    assert code == EXIT_VERIFY
    assert json.loads(err.splitlines()[-1])["error"] == "verification"


def test_unknown_recipe(capsys):
    code, _, _ = run(capsys, "reproduce", "fig-nothing")
    assert code == EXIT_USAGE


def test_out_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("POTTS_CHAIN_OUT", str(tmp_path))
    code, out, _ = run(capsys, "reproduce", "table5")
    assert code == EXIT_OK and out == ""
    assert (tmp_path / "reproduce.json").exists()


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("L = 2\ngamma = pi/5\n")
    code, out, _ = run(capsys, "degeneracies", "--config", str(cfg))
    assert code == EXIT_OK and "2[1]⊕[3]⊕[5]⊕[6]" in out
