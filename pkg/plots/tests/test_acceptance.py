"""Release acceptance gate for the figure renderer.

One test per criterion; each prints a [PASS]/[FAIL] line with the measured
quantity so the run log doubles as a report. Run directories come from the
real solver CLI at reduced particle and iteration counts, keeping the
default grid shape (all schemes, default tau rows, both toy targets).
"""

from driftfield_plots import FigureSpec, render


def report(capsys, ok, label, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok


def test_renders_default_directories_and_rerenders_identically(
        traj_dir, toy_dir, tmp_path, capsys):
    grid_a = render(FigureSpec(traj_dir, "trajectory-grid", tmp_path / "grid_a.svg"))
    grid_b = render(FigureSpec(traj_dir, "trajectory-grid", tmp_path / "grid_b.svg"))
    curves_a = render(FigureSpec(toy_dir, "convergence-curves", tmp_path / "curves_a.svg"))
    curves_b = render(FigureSpec(toy_dir, "convergence-curves", tmp_path / "curves_b.svg"))

    grid_rows = grid_a.read_text(encoding="utf-8").count('id="axes_') // 3
    curve_panels = curves_a.read_text(encoding="utf-8").count('id="axes_')
    sizes_ok = all(p.stat().st_size > 0 for p in (grid_a, curves_a))
    identical = (grid_a.read_bytes() == grid_b.read_bytes()
                 and curves_a.read_bytes() == curves_b.read_bytes())

    ok = sizes_ok and identical and grid_rows == 4 and curve_panels == 2
    report(capsys, ok, "figure generation",
           f"trajectory grid {grid_rows} tau rows, {curve_panels} convergence panels, "
           f"rerender byte-identical={identical}")
