import json

import pytest

from eoqubits.cli import UsageError, main, parse_quantity


@pytest.mark.parametrize("text,kind,expected", [
    ("3.5us", "time", 3500.0), ("10ns", "time", 10.0), ("2 ms", "time", 2e6), ("7", "time", 7.0),
    ("100MHz", "freq", 1e8), ("1.5GHz", "freq", 1.5e9), ("10kHz", "freq", 1e4),
    ("3mT", "field", 3.0), ("1T", "field", 1e3),
])
def test_parse_quantity(text, kind, expected):
    assert parse_quantity(text, kind) == pytest.approx(expected)


def test_parse_quantity_default_unit():
    assert parse_quantity("3.5", "time", "us") == 3500.0
    assert parse_quantity(2, "time", "us") == 2000.0
    for bad in ("fast", "3.5 parsecs"):
        with pytest.raises(UsageError):
            parse_quantity(bad, "time")


def _run(tmp_path, name, *argv):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def test_verify_swap(tmp_path, capsys):
    code, out = _run(tmp_path, "v", "verify", "swap")
    assert code == 0
    res = json.loads((out / "result.json").read_text())
    assert res["passed"] and res["pulses"] == 15
    assert json.loads((out / "run_config.json").read_text())["command"] == "verify"


def test_rb_is_byte_identical_and_replayable(tmp_path):
    argv = ["rb", "--lengths", "1,2,4,8", "--sequences", "2", "--shots", "2", "--seed", "7",
            "--sigma", "2e6"]
    _, a = _run(tmp_path, "a", *argv)
    _, b = _run(tmp_path, "b", *argv)
    assert (a / "result.json").read_bytes() == (b / "result.json").read_bytes()
    code, c = _run(tmp_path, "c", "rb", "--config", str(a / "run_config.json"))
    assert code in (0, 1)
    assert (a / "result.json").read_bytes() == (c / "result.json").read_bytes()


def test_usage_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"lenghts": "1,2"}))
    code, _ = _run(tmp_path, "x", "rb", "--config", str(cfg))
    assert code == 2
    assert "lenghts" in capsys.readouterr().err
    assert _run(tmp_path, "y", "rb", "--t-pulse", "10 parsecs")[0] == 2
    assert _run(tmp_path, "z", "rb", "--sigma", "1", "--t2star", "3.5us")[0] == 2
    assert main(["no-such-command"]) == 2


def test_export_waveform(tmp_path):
    code, out = _run(tmp_path, "w", "export-waveform", "--gate", "fw-cnot")
    assert code == 0
    res = json.loads((out / "result.json").read_text())
    assert res["n_x_segments"] == 28
    assert res["duration_ns"] == 28 * 10 + 27 * 5
    assert (out / "waveform.csv").exists()


def test_qpt_and_search(tmp_path):
    code, out = _run(tmp_path, "q", "qpt", "--gate", "swap")
    assert code == 0
    code, out = _run(tmp_path, "s", "search-primitive")
    assert code == 0
    assert json.loads((out / "result.json").read_text())["n_solutions"] > 0


def test_nosc(tmp_path):
    code, out = _run(tmp_path, "n", "nosc", "--j", "100MHz", "--nosc", "50", "--shots", "400")
    res = json.loads((out / "result.json").read_text())
    assert code == 0
    assert 45 <= res["fitted_nosc"] <= 55
