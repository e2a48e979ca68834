"""Tests for the reoica-bench command line."""

import pandas as pd
import pytest

from reservoir_ica.cli import build_parser, cli_values, main
from reservoir_ica.errors import NumericalError
from reservoir_ica.experiments import runner
from reservoir_ica.experiments.config import SEED_ENV_VAR

SMALL_RUN = (
    "regimes=static\n"
    "methods=reoica_base,vanilla\n"
    "seeds=0\n"
    "T=3000\n"
    "eval_window=1500\n"
    "max_lag=50\n"
    "curve_window=500\n"
    "curve_stride=250\n"
    "overlay_length=200\n"
    "N=50\n"
    "d=10\n"
    "warmup=500\n"
    "ramp=500\n"
)


@pytest.fixture
def config_file(tmp_path, monkeypatch):
    monkeypatch.setenv(SEED_ENV_VAR, "0")
    monkeypatch.delenv(SEED_ENV_VAR)
    path = tmp_path / "small.env"
    path.write_text(SMALL_RUN)
    return path


def test_cli_values_only_given_flags():
    args = build_parser().parse_args(["--seeds", "0-2", "--sweep", "eps=0.1|0.8", "--T", "9000"])
    values = cli_values(args)
    assert values == {"seeds": [0, 1, 2], "sweep": {"eps": [0.1, 0.8]}, "T": 9000}


def test_main_success(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["--config", str(config_file), "--out", str(out), "--log-level", "WARNING"])

    assert code == 0
    per_seed = pd.read_csv(out / "per_seed.csv")
    assert set(per_seed["method"]) == {"reoica_base", "vanilla"}
    assert "reoica_base" in capsys.readouterr().out


def test_flags_override_file(config_file, tmp_path):
    out = tmp_path / "out"
    code = main(["--config", str(config_file), "--method", "vanilla", "--out", str(out)])

    assert code == 0
    assert set(pd.read_csv(out / "per_seed.csv")["method"]) == {"vanilla"}


def test_missing_config_file(tmp_path):
    assert main(["--config", str(tmp_path / "nope.env")]) == 2


def test_invalid_configuration(config_file, tmp_path):
    code = main(["--config", str(config_file), "--method", "orica", "--out", str(tmp_path)])
    assert code == 2


def test_unknown_preset_rejected_by_parser():
    with pytest.raises(SystemExit) as excinfo:
        main(["--preset", "table9"])
    assert excinfo.value.code == 2


def test_failed_run_exits_one(config_file, tmp_path, monkeypatch):
    def explode(config, S, X):
        raise NumericalError("Demixing matrix diverged", step=10)

    monkeypatch.setattr(runner, "run_method", explode)
    out = tmp_path / "out"
    assert main(["--config", str(config_file), "--out", str(out)]) == 1
    assert len(pd.read_csv(out / "errors.csv")) == 2
