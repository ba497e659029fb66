import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphon_lab import cli
from graphon_lab.config import ConfigError, ExperimentConfig, parse_config, serialize_config


def write_cfg(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(tmp_path, text, *extra):
    out = tmp_path / "out"
    code = cli.main(["run", "--config", write_cfg(tmp_path, text), "--out", str(out), *extra])
    return code, out


def summary(out):
    return json.loads((out / "summary.json").read_text())


# config


def test_parse_basic():
    cfg = parse_config("experiment = leader  # comment\n\nn = 20\ndt = 0.02\nsweep_ns = 5, 10\n")
    assert cfg.experiment == "leader" and cfg.n == 20 and cfg.dt == 0.02 and cfg.sweep_ns == (5, 10)


@pytest.mark.parametrize("text,line,field", [
    ("n = 10\nbogus = 1\n", 2, "bogus"),
    ("n = ten\n", 1, "n"),
    ("n = 10\nn = 11\n", 2, "n"),
    ("experiment = leader\ndt = -1\n", 2, "dt"),
    ("sweep_ns = 10, 5\n", 1, "sweep_ns"),
    ("experiment = flocking\n", 1, "experiment"),
    ("phi = gaussian\n", 1, "phi"),
    ("just some words\n", 1, None),
])
def test_parse_errors_report_line_and_field(text, line, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line and info.value.field_name == field
    assert f"line {line}" in str(info.value)


names = st.text(st.characters(whitelist_categories=("Ll", "Nd"), whitelist_characters="_:./-"), min_size=1, max_size=12)
pos_float = st.floats(1e-6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(st.builds(
    ExperimentConfig,
    experiment=st.sampled_from(["leader", "balanced_cycle", "symmetric_switch", "non_consensus", "rate_sweep", "custom"]),
    n=st.integers(1, 10_000), d=st.integers(1, 5),
    dt=st.none() | pos_float, t_end=st.none() | pos_float, tau=st.none() | pos_float,
    T=pos_float, n_kernel=st.integers(1, 100),
    kernel=st.none() | names, phi=st.none() | st.sampled_from(["one", "cucker_smale"]),
    initial_profile=names, out_dir=names,
    sweep_ns=st.lists(st.integers(1, 1000), min_size=1, max_size=6, unique=True).map(lambda v: tuple(sorted(v))),
    record_stride=st.none() | st.integers(1, 100), quadrature_order=st.integers(1, 16),
    decay_threshold=pos_float, tail_fraction=st.floats(1e-3, 1.0), block_duration=pos_float,
))
def test_config_roundtrip(cfg):
    if cfg.dt is not None and cfg.t_end is not None and cfg.dt > cfg.t_end:
        return
    assert parse_config(serialize_config(cfg)) == cfg


def test_resolve_requires_kernel_for_custom():
    with pytest.raises(ConfigError):
        cli.resolve(ExperimentConfig())


# runs


def test_leader_defaults_pass(tmp_path):
    code, out = run(tmp_path, "experiment = leader\n")
    s = summary(out)
    assert code == 0
    assert s["envelopes"]["linf_persistent_scrambling"]["pass"]
    assert s["envelopes"]["diameter_contraction"]["pass"]
    assert s["rates"]["linf"]["rate"] > 0
    for name in ("trajectory.csv", "diagnostics.csv", "spectral.csv", "snapshots.csv",
                 "envelope_diameter_contraction.csv", "envelope_linf_persistent_scrambling.csv"):
        assert (out / name).exists()
    head = (out / "spectral.csv").read_text().splitlines()[0]
    assert head == "t,eta,lambda2,indeg_min"


@pytest.fixture(scope="module")
def non_consensus(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("nc")
    code, out = run(tmp, "experiment = non_consensus\n")
    return code, summary(out)


def test_non_consensus_linf_stalls(non_consensus):
    code, s = non_consensus
    assert code == 0
    assert s["linf_decayed"] is False
    assert not s["equivalence"]["asserted"]


@pytest.mark.xfail(strict=True, reason="L2 distance only drops to about 0.21 of its initial value by t = 100")
def test_non_consensus_l2_decays(non_consensus):
    assert non_consensus[1]["l2_decayed"] is True


def test_custom_zero_kernel_is_constant(tmp_path):
    code, out = run(tmp_path, "experiment = custom\nkernel = zero\nn = 12\nt_end = 2\n")
    assert code == 0
    with open(out / "diagnostics.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len({r["diameter"] for r in rows}) == 1
    assert len({r["linf_norm"] for r in rows}) == 1
    s = summary(out)
    assert s["equivalence"]["l2_ratio"] == 1.0 and s["equivalence"]["linf_ratio"] == 1.0


def test_flags_override_config(tmp_path):
    code, out = run(tmp_path, "experiment = custom\nkernel = complete\n", "--n", "7", "--dt", "0.1", "--t-end", "1")
    s = summary(out)
    assert code == 0 and s["n"] == 7 and s["solver"]["dt"] == 0.1 and s["solver"]["t_end"] == 1.0


def test_determinism(tmp_path):
    text = "experiment = custom\nkernel = leader\nn = 16\nt_end = 5\nd = 2\n"
    a = tmp_path / "a"
    b = tmp_path / "b"
    p = write_cfg(tmp_path, text)
    assert cli.main(["run", "--config", p, "--out", str(a)]) == 0
    assert cli.main(["run", "--config", p, "--out", str(b)]) == 0
    files = sorted(f.name for f in a.iterdir())
    assert files == sorted(f.name for f in b.iterdir())
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_summary_has_no_nan_tokens(tmp_path):
    code, out = run(tmp_path, "experiment = custom\nkernel = zero\nn = 4\nt_end = 1\n")
    text = (out / "summary.json").read_text()
    assert "NaN" not in text and "Infinity" not in text


def test_file_profile_and_kernel(tmp_path):
    (tmp_path / "x.csv").write_text("0\n1\n0.5\n")
    (tmp_path / "k.txt").write_text("N 3 T_SAMPLES 1\n1 1 1\n1 1 1\n1 1 1\n")
    text = f"experiment = custom\nkernel = file:{tmp_path / 'k.txt'}\ninitial_profile = file:{tmp_path / 'x.csv'}\nn = 3\nt_end = 3\n"
    code, out = run(tmp_path, text)
    s = summary(out)
    assert code == 0 and s["consensus_estimate"][0] == pytest.approx(0.5, abs=1e-6)


# exit codes


def test_exit_config_error(tmp_path, capsys):
    code, _ = run(tmp_path, "experiment = leader\nn = 0\n")
    assert code == 2
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert cli.main(["frobnicate"]) == 2
    code, _ = run(tmp_path, "experiment = custom\nkernel = nope\n")
    assert code == 2
    code, _ = run(tmp_path, "experiment = custom\nkernel = complete\nn = 4\ninitial_profile = constant:abc\n")
    assert code == 2


def test_exit_unwritable_out(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    p = write_cfg(tmp_path, "experiment = custom\nkernel = complete\nn = 3\nt_end = 1\n")
    assert cli.main(["run", "--config", p, "--out", str(blocker / "sub")]) == 2


def test_exit_numerical_failure(tmp_path):
    (tmp_path / "x.csv").write_text("-1e308\n1e308\n")
    text = f"experiment = custom\nkernel = complete\nn = 2\nt_end = 1\ninitial_profile = file:{tmp_path / 'x.csv'}\n"
    code, _ = run(tmp_path, text)
    assert code == 3


def test_exit_envelope_failure(tmp_path, monkeypatch):
    real = cli.envelope_check

    def broken(traj, thm, params):
        rep = real(traj, thm, params)
        rep.passed = False
        return rep

    monkeypatch.setattr(cli, "envelope_check", broken)
    code, _ = run(tmp_path, "experiment = custom\nkernel = complete\nn = 4\nt_end = 1\n")
    assert code == 4


# sweep


def _rates(out):
    with open(out / "rates.csv") as fh:
        return list(csv.DictReader(fh))


def test_sweep_lambda2_strictly_decreasing(tmp_path):
    p = write_cfg(tmp_path, f"sweep_ns = 10, 20, 40\nout_dir = {tmp_path / 'o'}\n")
    assert cli.main(["sweep", "--config", p]) == 0
    rows = _rates(tmp_path / "o")
    lam = [float(r["lambda2"]) for r in rows]
    assert [int(r["N"]) for r in rows] == [10, 20, 40]
    assert all(b < a for a, b in zip(lam, lam[1:]))
    for n in (10, 20, 40):
        assert (tmp_path / "o" / f"N{n}" / "summary.json").exists()


def test_sweep_single_point(tmp_path):
    p = write_cfg(tmp_path, f"sweep_ns = 10\nout_dir = {tmp_path / 'o'}\nt_end = 50\n")
    assert cli.main(["sweep", "--config", p]) == 0
    assert len(_rates(tmp_path / "o")) == 1


def test_sweep_complete_kernel(tmp_path):
    p = write_cfg(tmp_path, f"kernel = complete\nsweep_ns = 5, 10, 20\nt_end = 10\nout_dir = {tmp_path / 'o'}\n")
    assert cli.main(["sweep", "--config", p]) == 0
    for r in _rates(tmp_path / "o"):
        assert float(r["lambda2"]) == pytest.approx(1.0, abs=1e-10)
        assert float(r["rate_l2"]) == pytest.approx(1.0, abs=1e-3)
        assert float(r["rate_linf"]) == pytest.approx(1.0, abs=1e-3)


def test_non_increasing_helper():
    assert cli.non_increasing([1.0, 1.04, 0.5])
    assert not cli.non_increasing([1.0, 1.06])
    assert cli.non_increasing([3.0])
