import csv
import io

import pytest

from doakit.array_model import read_snapshots_csv
from doakit.cli import main
from doakit.spectral import read_spectrum_csv


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(
        "m: 8\nangles_deg: [-20, 25]\nsnr_db: 10\nsnapshots: 50\nseed: 1\n"
        "grid_step: 0.05\nn_fft: 256\n"
        "plan:\n  axis: snr_db\n  values: [0, 10]\n  trials: 4\n"
    )
    return path


def test_simulate(cfg, tmp_path, capsys):
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    X = read_snapshots_csv(tmp_path / "o" / "snapshots.csv")
    assert X.shape == (8, 50)
    assert "snapshots.csv" in capsys.readouterr().out


def test_estimate_prints_every_method(cfg, capsys):
    assert main(["estimate", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "# truth: -20, 25"
    assert len(out) == 1 + 7
    esprit = next(l for l in out if l.startswith("ESPRIT:"))
    a, b = (float(v) for v in esprit.split(":")[1].split(","))
    assert abs(a + 20) < 1 and abs(b - 25) < 1


def test_estimate_seed_override_changes_output(cfg, capsys):
    main(["estimate", "--config", str(cfg), "--method", "esprit"])
    a = capsys.readouterr().out
    main(["estimate", "--config", str(cfg), "--method", "esprit", "--seed", "2"])
    assert capsys.readouterr().out != a


def test_spectrum_single_and_averaged(cfg, tmp_path):
    out = tmp_path / "s"
    assert main(["spectrum", "--config", str(cfg), "--method", "ds,music", "--out", str(out)]) == 0
    s = read_spectrum_csv(out / "spectrum_music.csv")
    assert s.angles_deg.size == 3601
    assert main(["spectrum", "--config", str(cfg), "--method", "ftdoa", "--trials", "3",
                 "--out", str(out)]) == 0
    assert (out / "spectrum_ftdoa.csv").exists()
    assert main(["spectrum", "--config", str(cfg), "--method", "esprit", "--out", str(out)]) == 2


def test_bench_writes_plan_outputs(cfg, tmp_path):
    out = tmp_path / "b"
    assert main(["bench", "--config", str(cfg), "--method", "mvdr,rmusic", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "results.csv")))
    assert [r["method"] for r in rows] == ["MVDR", "R-MUSIC", "MVDR", "R-MUSIC"]
    assert {r["I"] for r in rows} == {"4"}
    assert (out / "manifest.yaml").exists()
    assert (out / "spectra" / "mvdr_snr_db_0.csv").exists()


def test_complexity_table(capsys):
    assert main(["complexity", "--method", "ds,mvdr"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["method", "M", "S", "L", "P", "n_fft", "flops"]
    assert rows[1] == ["DS", "256", "1000", "1", "180001", "1024", "66387332.0"]
    assert rows[3][-1] == "66649476.0"
    assert len(rows) == 5


def test_speedup_table(tmp_path):
    assert main(["speedup", "--method", "ftdoa", "--processors", "100", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "speedup.csv")))
    assert len(rows) == 100
    assert rows[0]["serial_fraction"] == "0.198068"
    assert float(rows[23]["speedup"]) == pytest.approx(4.32, abs=1e-6)
    assert 4.70 <= float(rows[99]["speedup"]) <= 5.00


def test_errors_exit_with_status_two(tmp_path, capsys):
    assert main(["estimate", "--method", "nope"]) == 2
    assert "doakit estimate: error:" in capsys.readouterr().err
    assert main(["simulate", "--config", str(tmp_path / "missing.yaml")]) == 2
    with pytest.raises(SystemExit):
        main(["frobnicate"])
