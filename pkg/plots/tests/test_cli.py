import subprocess
import sys

import pytest

from driftfield_plots.cli import main


class TestMain:
    def test_renders_and_prints_path(self, single_cell_dir, tmp_path, capsys):
        out = tmp_path / "fig.svg"
        assert main(["--indir", str(single_cell_dir), "--kind", "trajectory-grid",
                     "--out", str(out)]) == 0
        assert out.exists() and out.stat().st_size > 0
        assert str(out) in capsys.readouterr().out

    def test_default_out_lands_in_indir(self, single_cell_dir):
        assert main(["--indir", str(single_cell_dir), "--kind", "trajectory-grid"]) == 0
        assert (single_cell_dir / "trajectory-grid.svg").exists()

    def test_raster_flag(self, single_cell_dir):
        assert main(["--indir", str(single_cell_dir), "--kind", "trajectory-grid",
                     "--raster"]) == 0
        assert (single_cell_dir / "trajectory-grid.png").exists()

    def test_missing_directory_is_config_error(self, tmp_path, capsys):
        assert main(["--indir", str(tmp_path / "nope"), "--kind", "scatter-grid",
                     "--out", str(tmp_path / "fig.svg")]) == 1
        assert "summary.json" in capsys.readouterr().err

    def test_unknown_kind_rejected_by_parser(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["--indir", str(tmp_path), "--kind", "pie-chart"])


def test_console_script_entry(single_cell_dir, tmp_path):
    out = tmp_path / "fig.svg"
    proc = subprocess.run(
        [sys.executable, "-c",
         "import sys; from driftfield_plots.cli import main; sys.exit(main(sys.argv[1:]))",
         "--indir", str(single_cell_dir), "--kind", "trajectory-grid",
         "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
