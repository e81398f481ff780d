import csv
import io
import math
import subprocess
import sys
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from twohop import cli
from twohop.cli import ExperimentConfig

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6)


def _rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_defaults_are_reference_setup():
    cfg = ExperimentConfig()
    assert (cfg.theta, cfg.alpha, cfg.path_loss, cfg.lam_m, cfg.L) == (1.5, 4.0, "sum", 5.0, 1.0)
    assert (cfg.offset_x, cfg.offset_y, cfg.K) == (0.5, 0.5, 2)
    text = cfg.dumps()
    assert 'path_loss = "sum"' in text and "theta = 1.5" in text and "lam_m = 5.0" in text and "K = 2" in text
    p = cfg.system()
    assert p.lattice.n_sites == 25 and p.offset == (0.5, 0.5)


@given(
    theta=st.floats(1.0001, 50.0),
    snr=st.lists(finite, min_size=1, max_size=5),
    betas=st.lists(st.floats(0.0, 3.0), min_size=1, max_size=4),
    seed=st.integers(0, 2**64 - 1),
    scheme=st.sampled_from(["retransmit", "nearest", "best", "random"]),
    out=st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc")), max_size=20),
    tail=st.booleans(),
)
def test_config_round_trip(theta, snr, betas, seed, scheme, out, tail):
    cfg = ExperimentConfig(
        theta=theta, snr_db=tuple(snr), betas=tuple(betas), seed=seed, scheme=scheme, out=out, quad_tail_correction=tail
    )
    again = ExperimentConfig.loads(cfg.dumps())
    assert again == cfg
    assert again.dumps() == cfg.dumps()


def test_unknown_and_bad_keys_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown config keys: bogus"):
        ExperimentConfig.loads("bogus = 1\n")
    for text in ('trials = "many"\n', "scheme = \"fastest\"\n", "theta = 0.5\n", "seed = -1\n", "K = -1\n"):
        with pytest.raises(ValueError):
            ExperimentConfig.loads(text)
    bad = tmp_path / "c.toml"
    bad.write_text("bogus = 1\n")
    r = subprocess.run([sys.executable, "-m", "twohop", "sweep", "--config", str(bad)], capture_output=True, text=True)
    assert r.returncode == 2 and "bogus" in r.stderr


def test_constants_command(capsys):
    assert cli.main(["constants", "--alpha", "3,4"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert float(rows[0]["C"]) == pytest.approx(9.03362, abs=5e-5)
    assert float(rows[1]["C"]) == pytest.approx(6.02681, abs=5e-5)
    assert all(float(r["tolerance"]) < 1e-10 for r in rows)
    with pytest.raises(SystemExit):
        cli.main(["constants", "--alpha", "2"])


def test_flags_override_config(tmp_path):
    cfgfile = tmp_path / "c.toml"
    cfgfile.write_text("trials = 50\nseed = 4\nscheme = \"nearest\"\n")
    args = cli.build_parser().parse_args(["sweep", "--config", str(cfgfile), "--seed", "9", "--beta", "0.25,0.75"])
    cfg = cli.resolve_config(args)
    assert (cfg.trials, cfg.seed, cfg.scheme, cfg.betas) == (50, 9, "nearest", (0.25, 0.75))


def test_sweep_schema_and_determinism(tmp_path):
    cfg = ExperimentConfig(snr_db=(20.0, 30.0), betas=(0.25, 0.75), scheme="nearest", trials=3000, seed=5)
    a = cli.cmd_sweep(cfg)
    b = cli.cmd_sweep(cfg, workers=2)
    assert a == b
    assert f"# config_sha256 = {cfg.digest()}" in a and "# seed = 5" in a
    header = [line for line in a.splitlines() if not line.startswith("#")][0]
    assert header.split(",") == list(cli.SWEEP_COLUMNS)
    rows = _rows(a)
    assert len(rows) == 4
    assert float(rows[1]["analytic_asymptote"]) == pytest.approx(10.356 * 1000**-0.5, rel=1e-3)
    assert all(0 <= float(r["p_r_cond"]) <= 1 for r in rows)


def test_sweep_nan_asymptote_where_undefined():
    cfg = ExperimentConfig(snr_db=(10.0,), betas=(0.0, 0.5), scheme="best", trials=200)
    rows = _rows(cli.cmd_sweep(cfg))
    assert all(math.isnan(float(r["analytic_asymptote"])) for r in rows)


def test_gain_command_retransmit_is_unity():
    cfg = ExperimentConfig(snr_db=(20.0,), betas=(0.75,), scheme="retransmit", trials=20000, seed=2)
    (row,) = _rows(cli.cmd_gain(cfg))
    assert float(row["asymptotic_gain"]) == 1.0
    g, se = float(row["gain"]), float(row["gain_stderr"])
    assert abs(g - 1.0) < 4 * se


def test_gain_command_best_limit_column():
    cfg = ExperimentConfig(snr_db=(30.0,), betas=(0.75,), scheme="best", trials=500, seed=2)
    (row,) = _rows(cli.cmd_gain(cfg))
    assert float(row["asymptotic_gain"]) == pytest.approx(13.849, rel=1e-3)
    assert row["gain_defined"] in {"0", "1"}


def test_throughput_command_and_file_output(tmp_path):
    out = tmp_path / "tp.csv"
    rc = cli.main(["throughput", "--snr-db", "10", "--beta", "0,0.5", "--trials", "500", "--out", str(out)])
    assert rc == 0
    rows = _rows(out.read_text())
    assert [r["beta"] for r in rows] == ["0", "0.5"]
    assert all(float(r["density"]) >= 0 for r in rows)


def test_unwritable_output_reports_path(tmp_path):
    target = tmp_path / "missing" / "x.csv"
    with pytest.raises(SystemExit) as exc:
        cli.main(["throughput", "--snr-db", "10", "--beta", "0", "--trials", "10", "--out", str(target)])
    assert str(target) in str(exc.value)


def test_dump_config(capsys):
    cli.main(["gain", "--seed", "7", "--dump-config"])
    cfg = ExperimentConfig.loads(capsys.readouterr().out)
    assert cfg == replace(ExperimentConfig(), seed=7)
