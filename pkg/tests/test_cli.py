import subprocess
import sys

import numpy as np
import pytest

from l0mix.cli import EXIT_CONFIG, EXIT_DIVERGED, emit_csv, emit_sweep_csv, main
from l0mix.harness import MsdTrace

FAST = ["--set", "runs=2", "--set", "scenario.horizon=300", "--set", "snr.segments=0:60,100:40,200:20"]


def trace(M=2, T=3, label="lambda"):
    return MsdTrace(
        msd=np.arange(T * M, dtype=float).reshape(T, M) + 0.5,
        msd_comb=np.full(T, 1 / 3),
        weights=np.full((T, 1 if label == "lambda" else M), 0.25),
        weight_label=label,
        segments=[(0, T, 20.0)],
        runs_used=1,
    )


def test_emit_csv_structure(tmp_path):
    p = emit_csv(trace(), tmp_path / "a.csv")
    text = p.read_text()
    lines = text.splitlines()
    assert text.endswith("\n") and len(lines) == 4
    assert lines[0] == "iter,msd_f1,msd_f2,msd_comb,lambda"
    assert lines[1] == "0,0.5,1.5,0.33333333333333331,0.25"


def test_emit_csv_softmax_header(tmp_path):
    p = emit_csv(trace(M=3, label="psi"), tmp_path / "b.csv")
    assert p.read_text().splitlines()[0] == "iter,msd_f1,msd_f2,msd_f3,msd_comb,w1,w2,w3"


def test_emit_csv_round_trips_values(tmp_path):
    t = trace()
    t.msd[1, 1] = 1.2345678901234567e-7
    p = emit_csv(t, tmp_path / "c.csv")
    back = np.loadtxt(p, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(back[:, 1:3], t.msd)


def test_emit_csv_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        emit_csv(trace(), blocker / "x.csv")


def test_sweep_csv_order(tmp_path):
    table = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    p = emit_sweep_csv((10.0, 40.0), np.array([1e-4, 1e-6, 1e-5]), table, tmp_path / "s.csv")
    lines = p.read_text().splitlines()
    assert lines[0] == "snr_db,kappa,steady_msd"
    assert [l.split(",")[0] for l in lines[1:]] == ["10"] * 3 + ["40"] * 3
    assert [float(l.split(",")[2]) for l in lines[1:4]] == [2.0, 3.0, 1.0]


def test_run_preset(tmp_path, capsys):
    assert main(["run", "--preset", "exp2", "--scale", "desk", "--variant", "combo", "--out", str(tmp_path)] + FAST) == 0
    out = capsys.readouterr().out
    assert "msd_comb [dB]" in out
    curve = (tmp_path / "exp2_combo.csv").read_text().splitlines()
    assert curve[0] == "iter,msd_f1,msd_f2,msd_comb,lambda" and len(curve) == 301
    steady = (tmp_path / "exp2_combo_steady.csv").read_text().splitlines()
    assert steady[0] == "start,end,snr_db,msd_f1,msd_f2,msd_comb" and len(steady) == 4


def test_run_is_byte_identical(tmp_path):
    args = ["run", "--preset", "exp4", "--scale", "desk", "--variant", "snr20", "--seed", "5"] + FAST
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "exp4_snr20.csv").read_bytes() == (tmp_path / "b" / "exp4_snr20.csv").read_bytes()


def test_seed_changes_output(tmp_path):
    args = ["run", "--preset", "exp2", "--scale", "desk", "--variant", "combo"] + FAST
    main(args + ["--out", str(tmp_path / "a"), "--seed", "1"])
    main(args + ["--out", str(tmp_path / "b"), "--seed", "2"])
    assert (tmp_path / "a" / "exp2_combo.csv").read_bytes() != (tmp_path / "b" / "exp2_combo.csv").read_bytes()


def test_run_config_file(tmp_path):
    cfg = tmp_path / "mine.cfg"
    cfg.write_text('preset = "exp3"\nscale = "desk"\nvariant = "rls_snr20"\nruns = 2\nscenario.horizon = 200\n')
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "mine.csv").exists()


def test_sweep_command(tmp_path, capsys):
    rc = main(["sweep", "--preset", "exp1", "--scale", "desk", "--out", str(tmp_path),
               "--set", "runs=2", "--set", "sweep.points=3", "--set", "sweep.snrs=10,40",
               "--set", "scenario.horizon=200"])
    assert rc == 0
    lines = (tmp_path / "exp1_sweep.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 3
    assert "best kappa" in capsys.readouterr().out


def test_sweep_needs_grid(tmp_path):
    assert main(["sweep", "--preset", "exp2", "--scale", "desk", "--variant", "combo",
                 "--out", str(tmp_path)]) == EXIT_CONFIG


@pytest.mark.parametrize(
    "extra",
    [["--set", "runs=0"], ["--set", "nope=1"], ["--variant", "zzz"], ["--config", "/nonexistent.cfg"]],
)
def test_config_errors_exit_2(tmp_path, capsys, extra):
    base = ["run", "--out", str(tmp_path)]
    if "--config" not in extra:
        base += ["--preset", "exp2", "--scale", "desk"]
    assert main(base + extra) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_divergence_exit_3(tmp_path, capsys):
    rc = main(["run", "--preset", "exp2", "--scale", "desk", "--variant", "lms", "--out", str(tmp_path),
               "--set", "filters.1.mu=0.5", "--set", "runs=1"])
    assert rc == EXIT_DIVERGED
    assert "diverged" in capsys.readouterr().err


def test_preset_and_config_are_exclusive(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["run", "--preset", "exp2", "--config", "x", "--out", str(tmp_path)])
    assert info.value.code == 2


def test_presets_list(capsys):
    assert main(["presets-list"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("exp1: sweep") and "exp4:" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "l0mix", "presets-list"], capture_output=True, text=True)
    assert res.returncode == 0 and "pu_compare" in res.stdout
