import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conceal_cs import cli
from conceal_cs.errors import ConfigError
from conceal_cs.experiments import (
    ATTACK_COLUMNS,
    DEMOS,
    EXPERIMENT_COLUMNS,
    ExperimentConfig,
    attack_csv,
    component_rng,
    experiment_csv,
    run_attack_demo,
)
from conceal_cs.fileio import load_key, read_ciphertext
from conceal_cs.keystream import make_key
from conceal_cs.recovery import amse
from conceal_cs.signals import read_blocks_csv, sparse_dct_block, write_blocks_csv


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_component_rng_independent_and_repeatable():
    a = component_rng(1, "signal").standard_normal(4)
    assert np.array_equal(a, component_rng(1, "signal").standard_normal(4))
    assert not np.array_equal(a, component_rng(1, "key").standard_normal(4))
    assert not np.array_equal(a, component_rng(2, "signal").standard_normal(4))


@settings(max_examples=40)
@given(
    kind=st.sampled_from(["matrix", "two-basis"]),
    N=st.integers(16, 128),
    trials=st.integers(1, 500),
    seed=st.integers(0, 2**31),
)
def test_config_round_trip(kind, N, trials, seed):
    cfg = ExperimentConfig(kind=kind, N=N, M_values=[N // 2], trials=trials, seed=seed)
    assert ExperimentConfig.loads(cfg.dumps()) == cfg


@pytest.mark.parametrize(
    "kw",
    [
        {"kind": "bogus"},
        {"trials": 0},
        {"kind": "matrix", "N": 32, "M_values": [32]},
        {"N": 10, "rho_values": [1.0]},
        {"L": 4},
    ],
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kw)


def test_config_unknown_field():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"frobnicate": 1})


def test_matrix_experiment_csv_shape():
    cfg = ExperimentConfig(kind="matrix", N=32, M_values=[16], K_values=[2, 3], trials=2, seed=1)
    rows = parse(experiment_csv(cfg))
    assert list(rows[0]) == EXPERIMENT_COLUMNS
    per_trial = [r for r in rows if r["trial"] != "mean"]
    means = [r for r in rows if r["trial"] == "mean"]
    assert len(per_trial) == 2 * 2 * 2 and len(means) == 4
    assert {r["scheme"] for r in rows} == {"lfsr-gaussian", "reference-gaussian"}


def test_two_basis_experiment_rows():
    cfg = ExperimentConfig(N=32, rho_values=[0.5], blocks=3, seed=2)
    rows = parse(experiment_csv(cfg))
    means = {r["scheme"]: float(r["amse"]) for r in rows if r["trial"] == "mean"}
    assert set(means) == {"ots-dct", "concealed-two-basis"}
    assert all(np.isfinite(v) for v in means.values())


def test_experiment_deterministic(tmp_path):
    cfg = ExperimentConfig(kind="matrix", N=32, M_values=[16], K_values=[2], trials=1, seed=5)
    assert experiment_csv(cfg) == experiment_csv(cfg)
    cfg.output = str(tmp_path / "e.csv")
    text = experiment_csv(cfg)
    assert (tmp_path / "e.csv").read_text() == text


@pytest.mark.parametrize("name", ["superincreasing", "sequence-count", "period", "bm", "wrong-key"])
def test_attack_demos_pass(name):
    rows = run_attack_demo(name, trials=3, seed=0)
    assert rows and all(r["verdict"] == "pass" for r in rows)


def test_attack_csv_header():
    rows = parse(attack_csv("sequence-count", 2, 0))
    assert list(rows[0]) == ATTACK_COLUMNS
    assert rows[0]["statistic"] == "81"


def test_unknown_demo():
    assert "superincreasing" in DEMOS
    with pytest.raises(ConfigError):
        run_attack_demo("nope")
    with pytest.raises(ConfigError):
        run_attack_demo("bm", trials=0)


# --- CLI ---------------------------------------------------------------------


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def key_file(tmp_path):
    path = tmp_path / "key.json"
    assert run_cli("keygen", "--seed", 11, "--out", path) == 0
    return path


@pytest.fixture
def signal_file(tmp_path):
    rng = np.random.default_rng(0)
    blocks = [sparse_dct_block(64, 5, rng) for _ in range(4)]
    path = tmp_path / "sig.csv"
    write_blocks_csv(blocks, path)
    return path, blocks


def test_cli_keygen_reports_repeatability(key_file, capsys):
    assert run_cli("keygen", "--seed", 11) == 0
    out, err = capsys.readouterr()
    assert json.loads(out) == json.loads(key_file.read_text())
    assert "repeatability" in err and "2^19" in err
    assert load_key(key_file).L == 11


def test_cli_keygen_rejects_even_level(capsys):
    assert run_cli("keygen", "--l", 4, "--seed", 1) == 2
    assert "odd" in capsys.readouterr().err


def test_cli_keygen_custom_degrees(tmp_path):
    path = tmp_path / "k5.json"
    assert run_cli("keygen", "--l", 5, "--degrees", "9,10,11,12", "--nfsr-degree", 5, "--seed", 3, "--out", path) == 0
    key = load_key(path)
    assert [r.degree for r in key.lfsrs] == [9, 10, 11, 12]
    assert run_cli("keygen", "--l", 5, "--degrees", "9,10,11,99", "--seed", 3) == 2


@pytest.mark.parametrize("suffix", [".bin", ".csv"])
def test_cli_round_trip(tmp_path, key_file, signal_file, suffix):
    sig, blocks = signal_file
    ct = tmp_path / f"ct{suffix}"
    out = tmp_path / "out.csv"
    assert run_cli("encrypt", "--key", key_file, "--in", sig, "--out", ct, "--m", 32) == 0
    assert run_cli("decrypt", "--key", key_file, "--in", ct, "--out", out) == 0
    assert amse(blocks, read_blocks_csv(out)) < 1e-8


def test_cli_energy_overflow_exit_code(tmp_path, key_file, signal_file, capsys):
    sig, _ = signal_file
    code = run_cli("encrypt", "--key", key_file, "--in", sig, "--out", tmp_path / "c.bin", "--m", 32, "--emax", 1e-6)
    assert code == 2
    assert "block 0" in capsys.readouterr().err


def test_cli_truncated_and_missing(tmp_path, key_file, signal_file):
    sig, _ = signal_file
    ct = tmp_path / "c.bin"
    run_cli("encrypt", "--key", key_file, "--in", sig, "--out", ct, "--m", 32)
    (tmp_path / "t.bin").write_bytes(ct.read_bytes()[:-5])
    assert run_cli("decrypt", "--key", key_file, "--in", tmp_path / "t.bin", "--out", tmp_path / "o.csv") == 2
    assert run_cli("decrypt", "--key", tmp_path / "none.json", "--in", ct, "--out", tmp_path / "o.csv") == 2
    assert run_cli("encrypt", "--key", key_file) == 2


def test_cli_encrypt_deterministic(tmp_path, key_file, signal_file):
    sig, _ = signal_file
    for name in ("a.bin", "b.bin"):
        run_cli("encrypt", "--key", key_file, "--in", sig, "--out", tmp_path / name, "--m", 32)
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()
    assert read_ciphertext(tmp_path / "a.bin").header["scheme"] == "concealed"


def test_cli_experiment_config_dir(tmp_path, monkeypatch, capsys):
    cfg = ExperimentConfig(kind="matrix", N=32, M_values=[16], K_values=[2], trials=1, seed=4)
    (tmp_path / "small.json").write_text(cfg.dumps())
    monkeypatch.setenv(cli.CONFIG_ENV, str(tmp_path))
    monkeypatch.chdir(tmp_path.parent)
    assert run_cli("experiment", "--config", "small.json") == 0
    text = capsys.readouterr().out
    assert text == experiment_csv(cfg)
    assert run_cli("experiment", "--config", "absent.json") == 2


def test_cli_experiment_flags_override(tmp_path):
    out = tmp_path / "e.csv"
    assert run_cli("experiment", "--kind", "matrix", "--n", 32, "--m", 16, "--k", "2", "--trials", 1, "--out", out) == 0
    rows = parse(out.read_text())
    assert {r["value"] for r in rows} == {"2"}
    assert run_cli("experiment", "--kind", "matrix", "--n", 16, "--m", 16) == 2


def test_cli_attack(tmp_path, capsys):
    assert run_cli("attack", "bm", "--trials", 2) == 0
    rows = parse(capsys.readouterr().out)
    assert [r["verdict"] for r in rows] == ["pass", "pass"]
    assert run_cli("attack", "unknown-demo") == 2


def test_cli_requires_subcommand():
    assert run_cli() == 2


def test_key_from_cli_matches_library(key_file):
    # keygen --seed feeds numpy's default_rng directly
    assert load_key(key_file) == make_key(rng=11)
