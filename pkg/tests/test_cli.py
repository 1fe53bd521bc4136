import csv
import json
import math
import subprocess
import sys

import pytest

from scramble_verify.cli import COMMANDS, ExperimentConfig, eval_angle, main
from scramble_verify.errors import ConfigError


def read(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def agg_of(path):
    return path.with_name(path.stem + ".agg.csv")


def run_cli(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


# ---------------------------------------------------------------- commands


def test_pairs(tmp_path):
    code, out = run_cli(tmp_path, "pairs")
    assert code == 0
    rows = read(out)
    assert len(rows) == 3 * 3 * 6
    assert list(rows[0]) == ["scrambler", "pair", "psi", "P", "F", "F_defined"]
    for r in rows:
        if r["scrambler"] == "maximal":
            assert float(r["P"]) == pytest.approx(0.25, abs=1e-9) and float(r["F"]) == pytest.approx(1, abs=1e-9)
        if r["scrambler"] == "identity":
            assert float(r["F"]) == pytest.approx(1.0 if r["pair"] == "0" else 0.5, abs=1e-9)
    agg = read(agg_of(out))
    assert [(a["scrambler"], a["pair"]) for a in agg][:3] == [("maximal", "0"), ("maximal", "1"), ("maximal", "2")]
    assert all(float(a["N"]) == pytest.approx(1, abs=1e-9) for a in agg if a["scrambler"] == "maximal")


def test_classical(tmp_path):
    code, out = run_cli(tmp_path, "classical")
    assert code == 0
    rows = read(out)
    assert {r["scrambler"] for r in rows} == {"classical"} and len(rows) == 18
    for r in rows:
        if r["pair"] != "0" and r["psi"].endswith("z"):
            assert float(r["F"]) == pytest.approx(1, abs=1e-9)


def test_mismatch_sweep(tmp_path):
    code, out = run_cli(tmp_path, "mismatch-sweep", "--theta-grid", "0,pi/8,pi/4,3*pi/8,pi/2")
    assert code == 0
    rows = read(out)
    assert len(rows) == 30
    for r in rows:
        assert float(r["P"]) == pytest.approx(math.cos(float(r["theta"]) / 2) ** 2, abs=1e-9)
        assert float(r["F"]) == pytest.approx(0.5, abs=1e-9)
    ns = [float(a["N"]) for a in read(agg_of(out))]
    assert ns[0] == pytest.approx(1, abs=1e-9)
    assert all(b <= a + 1e-12 for a, b in zip(ns, ns[1:]))


def test_mismatch_sweep_pi_writes_undefined(tmp_path):
    code, out = run_cli(tmp_path, "mismatch-sweep", "--theta-grid", "pi")
    assert code == 0
    rows = read(out)
    assert all(r["F"] == "nan" and r["F_defined"] == "0" for r in rows)


def test_alpha_sweep(tmp_path):
    code, out = run_cli(tmp_path, "alpha-sweep")
    assert code == 0
    rows = read(out)
    assert len(rows) == 30
    by_alpha = {}
    for r in rows:
        by_alpha.setdefault(float(r["alpha"]), []).append(r)
    alphas = sorted(by_alpha)
    mean = lambda key, a: sum(float(r[key]) for r in by_alpha[a]) / 6
    assert all(mean("F", b) >= mean("F", a) - 1e-12 for a, b in zip(alphas, alphas[1:]))
    assert all(mean("P", b) <= mean("P", a) + 1e-12 for a, b in zip(alphas, alphas[1:]))
    last = read(agg_of(out))[-1]
    assert float(last["alpha"]) == 1.0
    assert float(last["otoc_bound"]) == pytest.approx(0.25, abs=1e-9)


def test_grover(tmp_path):
    code, out = run_cli(tmp_path, "grover")
    assert code == 0
    rows = read(out)
    assert len(rows) == 6
    assert all(float(r["F"]) == pytest.approx(1, abs=1e-9) for r in rows)
    assert all(float(r["P"]) == pytest.approx(1, abs=1e-9) for r in rows)


def test_caveat_printed_with_channels(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "grover", "--noise-preset", "calibrated", "--states", "0z")
    assert code == 0
    assert "extrinsic decoherence" in capsys.readouterr().out
    code, _ = run_cli(tmp_path, "grover", "--states", "0z")
    assert "extrinsic decoherence" not in capsys.readouterr().out


def test_otoc_check(tmp_path):
    code, out = run_cli(tmp_path, "otoc-check", "--seed", "7", name="otoc.json")
    assert code == 0
    report = json.loads(out.read_text())
    assert report["passed"] and report["n_scramblers"] == 24
    assert report["checks"] == 24 * 18
    assert report["max_abs_diff"] < 1e-9


def test_otoc_check_negative_control(tmp_path):
    code, out = run_cli(tmp_path, "otoc-check", "--seed", "7", "--corrupt-weighting", name="otoc.json")
    assert code == 1
    assert not json.loads(out.read_text())["passed"]


def test_shots(tmp_path):
    code, out = run_cli(tmp_path, "alpha-sweep", "--alpha-grid", "1", "--shots", "1000", "--seed", "3")
    assert code == 0
    rows = read(out)
    assert list(rows[0])[-4:] == ["shots", "successes", "P_hat", "P_ci95"]
    for r in rows:
        assert int(r["shots"]) == 1000
        assert float(r["P_hat"]) == int(r["successes"]) / 1000
        assert abs(float(r["P_hat"]) - 0.25) < 0.1


# ---------------------------------------------------------------- determinism


@pytest.mark.parametrize(
    "args",
    [["pairs"], ["classical"], ["mismatch-sweep"], ["alpha-sweep", "--shots", "50", "--seed", "1"],
     ["grover", "--states", "0x"]],
)
def test_byte_identical_reruns(tmp_path, args):
    _, a = run_cli(tmp_path, *args, name="a.csv")
    _, b = run_cli(tmp_path, *args, name="b.csv")
    assert a.read_bytes() == b.read_bytes()
    assert agg_of(a).read_bytes() == agg_of(b).read_bytes()


# ---------------------------------------------------------------- config and errors


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"theta_grid": [0.0, 0.5], "pair": 2}))
    code, out = run_cli(tmp_path, "mismatch-sweep", "--config", str(cfg))
    assert code == 0
    rows = read(out)
    assert len(rows) == 12 and {r["pair"] for r in rows} == {"2"}
    code, out = run_cli(tmp_path, "mismatch-sweep", "--config", str(cfg), "--pair", "1")
    assert {r["pair"] for r in read(out)} == {"1"}


@pytest.mark.parametrize(
    "payload",
    [{"bogus": 1}, {"theta_grid": []}, {"alpha_grid": [1.5]}, {"theta_grid": [7.0]}, {"depol_1q": 2.0},
     {"states": ["2z"]}, {"n_random": 5}, {"shots": 0, "seed": 1}, [1, 2]],
)
def test_bad_config_exit_2(tmp_path, payload, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(payload))
    code, _ = run_cli(tmp_path, "alpha-sweep", "--config", str(cfg))
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_missing_or_broken_config(tmp_path):
    assert main(["pairs", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["pairs", "--config", str(bad)]) == 2


def test_seed_required():
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="otoc-check")
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="pairs", shots=10)
    assert main(["otoc-check"]) == 2


def test_unwritable_output(tmp_path):
    assert main(["grover", "--states", "0z", "--out", str(tmp_path / "missing" / "x.csv")]) == 2


def test_failed_rows_exit_1(tmp_path, monkeypatch):
    import scramble_verify.protocol as protocol
    from scramble_verify.errors import DomainError

    def broken(cfg):
        raise DomainError("nope")

    monkeypatch.setattr(protocol, "run", broken)
    code, out = run_cli(tmp_path, "grover", "--states", "0z")
    assert code == 1
    assert all(r["F"] == "nan" for r in read(out))


def test_eval_angle():
    assert eval_angle("pi/8") == pytest.approx(math.pi / 8)
    assert eval_angle("3*pi/8") == pytest.approx(3 * math.pi / 8)
    assert eval_angle("pi") == pytest.approx(math.pi)
    assert eval_angle("0.25") == 0.25


def test_module_entry_point(tmp_path):
    out = tmp_path / "g.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "scramble_verify", "grover", "--states", "1z", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()


def test_all_commands_listed():
    assert set(COMMANDS) == {"mismatch-sweep", "alpha-sweep", "pairs", "classical", "grover", "otoc-check"}
