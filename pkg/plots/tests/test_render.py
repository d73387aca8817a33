import subprocess
import sys
from pathlib import Path

import pytest

from cvqkd_figures import (
    FigureSpec,
    SchemaError,
    from_directory,
    render,
    render_all,
)
from cvqkd_figures.render import SCHEMAS, main


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    """Reference datasets produced through the cvqkd command line."""
    out = tmp_path_factory.mktemp("datasets")
    subprocess.run(
        [sys.executable, "-m", "cvqkd.cli", "figure", "--all",
         "--out", str(out)],
        check=True, timeout=600,
    )
    return out


def test_datasets_complete(data_dir):
    for names in SCHEMAS.values():
        for name in names:
            assert (data_dir / name).is_file()


def test_render_all_ten_figures(data_dir, tmp_path):
    results = render_all(data_dir, tmp_path)
    assert [r.figure_id for r in results] == list(range(1, 11))
    for result in results:
        assert result.outputs
        for path in result.outputs:
            assert path.is_file() and path.stat().st_size > 0
    formats = {p.suffix for r in results for p in r.outputs}
    assert formats == {".png", ".svg"}


def test_wigner_pair_with_negative_contours(data_dir, tmp_path):
    result = render(from_directory(data_dir, 1, tmp_path))
    stems = {p.stem for p in result.outputs}
    assert stems == {"fig01_surface", "fig01_contour"}
    assert any(level < 0 for level in result.contour_levels)


def test_gain_figure_has_four_curves(data_dir, tmp_path):
    result = render(from_directory(data_dir, 8, tmp_path))
    assert result.series_per_axes == [4]


def test_family_comparison_has_eight_curves(data_dir, tmp_path):
    result = render(from_directory(data_dir, 9, tmp_path))
    assert result.series_per_axes == [8]


def test_rerender_overwrites_idempotently(data_dir, tmp_path):
    first = render(from_directory(data_dir, 4, tmp_path))
    second = render(from_directory(data_dir, 4, tmp_path))
    assert [p.name for p in first.outputs] == [p.name for p in second.outputs]


def test_empty_csv_rejected_before_output(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    (data / "fig04_ber_vs_intensity.csv").write_text("n,theta\n")
    out = tmp_path / "img"
    with pytest.raises(SchemaError):
        render(from_directory(data, 4, out))
    assert not out.exists() or not list(out.iterdir())


def test_wrong_header_rejected(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    (data / "fig04_ber_vs_intensity.csv").write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError, match="expected"):
        render(from_directory(data, 4, tmp_path / "img"))


def test_missing_input_rejected(tmp_path):
    with pytest.raises(SchemaError, match="does not exist"):
        from_directory(tmp_path, 4, tmp_path / "img")


def test_unknown_figure_id(tmp_path):
    with pytest.raises(SchemaError):
        FigureSpec(figure_id=11, inputs={}, output_dir=tmp_path)


def test_cli_single_figure(data_dir, tmp_path):
    code = main(["--data-dir", str(data_dir), "--id", "7",
                 "--out-dir", str(tmp_path / "img")])
    assert code == 0
    assert (tmp_path / "img" / "fig07_joint_maximum.png").is_file()


def test_cli_reports_schema_error(tmp_path, capsys):
    code = main(["--data-dir", str(tmp_path), "--id", "4",
                 "--out-dir", str(tmp_path / "img")])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_s1_acceptance(data_dir, tmp_path):
    """Dataset generation plus rendering, end to end."""
    results = render_all(data_dir, tmp_path)
    ten_figures = [r.figure_id for r in results] == list(range(1, 11))
    all_written = all(p.is_file() and p.stat().st_size > 0
                      for r in results for p in r.outputs)
    wigner = results[0]
    pair = {p.stem for p in wigner.outputs} == {"fig01_surface",
                                                "fig01_contour"}
    negative = any(level < 0 for level in wigner.contour_levels)
    four_curves = results[7].series_per_axes == [4]
    ok = ten_figures and all_written and pair and negative and four_curves
    print(f"S1: {'PASS' if ok else 'FAIL'} -- ten figures: {ten_figures}, "
          f"files written: {all_written}, surface/contour pair: {pair}, "
          f"negative contours: {negative}, four gain curves: {four_curves}")
    assert ok
