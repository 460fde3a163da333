"""End-to-end command line behavior, run in process."""

import json

import pytest

from openbaker import csvio
from openbaker.cli import build_parser, main


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_classical_sweep_row_count(tmp_path, capsys):
    code, out, err = run(
        ["classical", "--out", str(tmp_path), "--dq", "0.1",
         "--grid", "0:0.5:0.005", "--t", "9"],
        capsys,
    )
    assert code == 0
    sweep = tmp_path / "sweep_dq0.1_t9.csv"
    lines = sweep.read_text().splitlines()
    assert lines[0] == "q_c,delta_q,t,area"
    assert len(lines) == 1 + 101
    assert (tmp_path / (sweep.name + ".manifest.json")).exists()


def test_classical_zero_width_keeps_everything(tmp_path, capsys):
    code, out, err = run(
        ["classical", "--out", str(tmp_path), "--dq", "0",
         "--grid", "0:0.2:0.1", "--t", "5"],
        capsys,
    )
    assert code == 0
    lines = (tmp_path / "sweep_dq0_t5.csv").read_text().splitlines()[1:]
    assert all(line.endswith(",1") for line in lines)


def test_classical_series_and_raster(tmp_path, capsys):
    code, out, err = run(
        ["classical", "--out", str(tmp_path), "--dq", "0.1", "--grid", "0.5:0.5:1",
         "--series-qc", "0.5", "--tmax", "12", "--fit-range", "5:10",
         "--raster-qc", "0.5", "--raster-t", "3", "--resolution", "32"],
        capsys,
    )
    assert code == 0
    assert "gamma=" in out
    series = (tmp_path / "series_qc0.5_dq0.1.csv").read_text().splitlines()
    assert series[0] == "t,area"
    assert len(series) == 1 + 13
    for mode in ("initial", "image"):
        pgm = tmp_path / f"raster_qc0.5_dq0.1_t3_{mode}.pgm"
        assert pgm.read_bytes().startswith(b"P5\n32 32\n255\n")


def test_spectrum_reruns_hit_cache(tmp_path, capsys):
    argv = ["spectrum", "--out", str(tmp_path), "--n", "32,48",
            "--qc", "0.5", "--dq", "0.1"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out.count("computed") == 2
    target = tmp_path / "spectrum_N32_qc0.5_dq0.1.csv"
    first = csvio.sha256_file(target)
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out.count("cache hit") == 2
    assert csvio.sha256_file(target) == first
    manifest = json.loads(
        (tmp_path / (target.name + ".manifest.json")).read_text()
    )
    assert manifest["sha256"] == first


def test_spectrum_odd_dimension_fails_cleanly(tmp_path, capsys):
    code, out, err = run(
        ["spectrum", "--out", str(tmp_path), "--n", "601",
         "--qc", "0.5", "--dq", "0.1"],
        capsys,
    )
    assert code == 2
    assert "error: quantization requires even dimension, got 601" in err


def test_stats_width_records_failures(tmp_path, capsys):
    code, out, err = run(
        ["stats", "width", "--out", str(tmp_path), "--dq", "0.1", "--qc", "0.5",
         "--nmin", "16", "--nmax", "19", "--step", "1"],
        capsys,
    )
    assert code == 0
    assert "width point N=17" in err and "width point N=19" in err
    rows = (tmp_path / "width_dq0.1.csv").read_text().splitlines()
    assert rows[0] == "N,q_c,sigma"
    assert [r.split(",")[0] for r in rows[1:]] == ["16", "18"]


def test_stats_histogram_and_cumulative(tmp_path, capsys):
    for mode, prefix in (("cumulative", "cumulative"), ("histogram", "histogram")):
        code, out, err = run(
            ["stats", mode, "--out", str(tmp_path), "--dq", "0.1",
             "--qc", "0.5", "--n", "32"],
            capsys,
        )
        assert code == 0
        assert (tmp_path / f"{prefix}_N32_qc0.5_dq0.1.csv").exists()


def test_stats_rescaled_reports_rate(tmp_path, capsys):
    code, out, err = run(
        ["stats", "rescaled", "--out", str(tmp_path), "--dq", "0.1",
         "--qc", "0.5", "--n", "64"],
        capsys,
    )
    assert code == 0
    assert "gamma_cl=" in out
    rows = (tmp_path / "rescaled_N64_qc0.5_dq0.1.csv").read_text().splitlines()
    assert rows[0] == "gamma_over_gamma_cl,W"


def test_stats_requires_parameters(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["stats", "cumulative", "--out", str(tmp_path), "--dq", "0.1",
              "--qc", "0.5"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["stats", "cumulative", "--out", str(tmp_path), "--dq", "0.1",
              "--n", "32"])
    assert exc.value.code == 2


def test_weyl_selftest(tmp_path, capsys):
    code, out, err = run(["weyl", "--inject", "power-law", "--out", str(tmp_path)],
                         capsys)
    assert code == 0
    assert "self-test" in out
    assert (tmp_path / "weyl_synthetic.csv").exists()
    assert (tmp_path / "weyl_fit_synthetic.txt").exists()


def test_weyl_requires_opening_without_inject(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["weyl", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_weyl_degenerate_counts_fail_cleanly(tmp_path, capsys):
    code, out, err = run(
        ["weyl", "--out", str(tmp_path), "--qc", "0.5", "--dq", "0.96",
         "--n", "4,8,16,32"],
        capsys,
    )
    assert code == 2
    assert "error:" in err and "positive" in err


def test_weyl_small_fit_runs(tmp_path, capsys):
    code, out, err = run(
        ["weyl", "--out", str(tmp_path), "--qc", "0.5", "--dq", "0.1",
         "--n", "16,24,32,48,64,96", "--jobs", "2"],
        capsys,
    )
    assert code == 0
    assert "weyl fit: slope=" in out
    summary = (tmp_path / "weyl_fit_qc0.5_dq0.1.txt").read_text()
    assert "reference=" in summary and "deviation=" in summary


def test_bad_grid_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["classical", "--out", str(tmp_path), "--grid", "0.5:0:0.1"])
    assert exc.value.code == 2


def test_parser_defaults_are_parsed():
    args = build_parser().parse_args(["classical"])
    assert len(args.grid) == 101
    assert [str(dq) for dq in args.dq] == ["1/20", "1/10", "1/5"]
    args = build_parser().parse_args(["weyl", "--inject", "power-law"])
    assert args.n == []
