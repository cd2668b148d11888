"""Command-line interface: exit codes, outputs, overrides."""

import json
import time

import pytest

from cfirs.cli import main

TINY_TOML = """\
L = 2
R = 2
K = 2
M = 2
N = 4
"""


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_TOML)
    return path


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    out = tmp_path / "results"
    monkeypatch.setenv("CFIRS_OUTPUT_DIR", str(out))
    return out


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_run_smoke(tiny_config, outdir):
    code = main(["run", "--config", str(tiny_config), "--drops", "2",
                 "--realizations", "5", "--quiet"])
    assert code == 0
    assert (outdir / "min_rates.csv").exists()
    summary = json.loads((outdir / "summary.json").read_text())
    assert summary["metadata"]["config"]["N"] == 4
    assert summary["metadata"]["drops"] == 2


def test_run_single_drop_n16_under_10s(tmp_path, outdir):
    path = tmp_path / "n16.toml"
    path.write_text("L = 4\nR = 4\nK = 4\nM = 8\nN = 16\n")
    t0 = time.time()
    code = main(["run", "--config", str(path), "--drops", "1",
                 "--realizations", "50", "--quiet"])
    assert code == 0
    assert time.time() - t0 < 10.0
    assert (outdir / "min_rates.csv").exists()


def test_run_missing_config(outdir, tmp_path):
    code = main(["run", "--config", str(tmp_path / "nope.toml")])
    assert code == 2
    report = json.loads((outdir / "error.json").read_text())
    assert report["error"] == "config"
    assert "nope.toml" in report["message"]


def test_run_bad_override(tiny_config, outdir):
    assert main(["run", "--config", str(tiny_config),
                 "--override", "bogus_key=3"]) == 2
    assert main(["run", "--config", str(tiny_config),
                 "--override", "no-equals-sign"]) == 2


def test_run_override_applied(tiny_config, outdir):
    code = main(["run", "--config", str(tiny_config), "--override", "N=2",
                 "--drops", "1", "--realizations", "5", "--quiet"])
    assert code == 0
    summary = json.loads((outdir / "summary.json").read_text())
    assert summary["metadata"]["config"]["N"] == 2


def test_run_invalid_config_values(tiny_config, outdir):
    # K > L*M violates the ZF invariant
    assert main(["run", "--config", str(tiny_config),
                 "--override", "K=5"]) == 2


def test_sweep_smoke(tiny_config, outdir):
    code = main(["sweep", "--config", str(tiny_config), "--axis", "N",
                 "--values", "2", "4", "--drops", "1", "--realizations", "5",
                 "--schemes", "no-irs", "random-passive", "--quiet"])
    assert code == 0
    table = json.loads((outdir / "sweep_table.json").read_text())
    assert table["axis"] == "N" and len(table["rows"]) == 2
    assert (outdir / "min_rates_N_2.csv").exists()
    assert (outdir / "min_rates_N_4.csv").exists()


def test_sweep_bad_axis(tiny_config, outdir):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--config", str(tiny_config), "--axis", "sigma2",
              "--values", "1"])
    assert exc.value.code == 1


def test_oracle_smoke(outdir, capsys):
    assert main(["oracle", "--rn", "4", "--levels", "8", "--seed", "1"]) == 0
    out = json.loads((outdir / "oracle.json").read_text())
    assert out["sdp_objective"] >= out["grid_optimum"] * (1 - 1e-6)
    assert out["extracted_objective"] <= out["sdp_objective"] * (1 + 1e-6)
    assert out["evaluations"] == 8 ** 4


def test_oracle_too_large(outdir):
    assert main(["oracle", "--rn", "10"]) == 1


def test_validate(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "zf-identity" in out and "derived:" in out
