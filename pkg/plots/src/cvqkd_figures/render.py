"""Turn the cvqkd `figure` CSV datasets into rendered images.

The input contract is the CSV schema written by ``cvqkd figure``; each
figure id maps to fixed input files and headers, validated before any
output file is touched.  Every figure is written as both PNG and SVG,
and rerunning overwrites the images in place.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FORMATS = ("png", "svg")

#: input file names and their headers, per figure id
SCHEMAS: dict[int, dict[str, list[str]]] = {
    1: {"fig01_wigner.csv": ["z", "x", "value"]},
    2: {
        "fig02a_basis_densities.csv": ["z", "correct", "wrong"],
        "fig02b_state_projections.csv":
            ["z", "psi_plus", "psi_minus", "psi_plus_i", "psi_minus_i"],
    },
    3: {"fig03_error_range.csv": ["z", "psi_plus", "psi_minus", "overlap"]},
    4: {"fig04_ber_vs_intensity.csv": ["n", "theta"]},
    5: {"fig05_attack_densities.csv":
        ["z", "correct_no_eve", "wrong_no_eve", "correct_eve", "wrong_eve"]},
    6: {"fig06_ber_attack.csv":
        ["n", "theta_zc0", "theta_attacked_zc0", "theta_zc1",
         "theta_attacked_zc1"]},
    7: {"fig07_joint_maximum.csv": ["r", "z_max", "x_max"]},
    8: {"fig08_gain_vs_loss.csv":
        ["r2", "g_zc0", "g_zc0.3", "g_zc0.5", "g_zc1"]},
    9: {"fig09_family_comparison.csv": None},  # wide header, checked loosely
    10: {"fig10_threshold_behavior.csv":
         ["z_c", "theta", "i_ab", "r_acc", "g_ab"]},
}


class SchemaError(ValueError):
    """An input CSV is missing, empty, or carries the wrong columns."""


@dataclass(frozen=True)
class FigureSpec:
    """One rendering job: a figure id, its input CSVs and output stem."""

    figure_id: int
    inputs: dict[str, Path]
    output_dir: Path
    contour_levels: int = 21
    formats: tuple[str, ...] = FORMATS

    def __post_init__(self):
        if self.figure_id not in SCHEMAS:
            raise SchemaError(f"unknown figure id {self.figure_id}")
        expected = SCHEMAS[self.figure_id]
        missing = set(expected) - set(self.inputs)
        if missing:
            raise SchemaError(
                f"figure {self.figure_id} needs input(s) {sorted(missing)}")
        for name, path in self.inputs.items():
            if not Path(path).is_file():
                raise SchemaError(f"input {path} does not exist")


@dataclass
class RenderResult:
    """What was drawn, for callers that verify without parsing pixels."""

    figure_id: int
    outputs: list[Path] = field(default_factory=list)
    series_per_axes: list[int] = field(default_factory=list)
    contour_levels: list[float] = field(default_factory=list)


def from_directory(data_dir: Path, figure_id: int, output_dir: Path,
                   **style) -> FigureSpec:
    data_dir = Path(data_dir)
    inputs = {name: data_dir / name for name in SCHEMAS[figure_id]}
    return FigureSpec(figure_id=figure_id, inputs=inputs,
                      output_dir=Path(output_dir), **style)


def read_table(path: Path, expected_header: list[str] | None) -> dict:
    """Load one CSV into named float columns, validating the header."""
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise SchemaError(f"{path} is empty")
    header = rows[0]
    if expected_header is not None and header != expected_header:
        raise SchemaError(
            f"{path} carries columns {header}, expected {expected_header}")
    if len(rows) < 2:
        raise SchemaError(f"{path} has a header but no data rows")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return {name: data[:, i] for i, name in enumerate(header)}


def _save(fig, spec: FigureSpec, stem: str, result: RenderResult):
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    for fmt in spec.formats:
        path = spec.output_dir / f"{stem}.{fmt}"
        fig.savefig(path, dpi=150, bbox_inches="tight")
        result.outputs.append(path)
    plt.close(fig)


def _line_plot(spec, table, x_key, series, xlabel, ylabel, stem, result,
               title=None, styles=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, (key, label) in enumerate(series):
        kwargs = (styles or {}).get(key, {})
        ax.plot(table[x_key], table[key], label=label, **kwargs)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    result.series_per_axes.append(len(series))
    _save(fig, spec, stem, result)


def _render_wigner(spec: FigureSpec, result: RenderResult):
    table = read_table(spec.inputs["fig01_wigner.csv"], ["z", "x", "value"])
    zs = np.unique(table["z"])
    xs = np.unique(table["x"])
    values = table["value"].reshape(zs.size, xs.size)
    bound = float(np.max(np.abs(values)))
    levels = np.linspace(-bound, bound, spec.contour_levels)
    result.contour_levels = [float(v) for v in levels]

    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    zg, xg = np.meshgrid(zs, xs, indexing="ij")
    ax.plot_surface(zg, xg, values, cmap="RdBu_r", vmin=-bound, vmax=bound,
                    rstride=2, cstride=2, linewidth=0)
    ax.set_xlabel("$z_1$")
    ax.set_ylabel("$z_2$")
    ax.set_zlabel("$W$")
    result.series_per_axes.append(1)
    _save(fig, spec, "fig01_surface", result)

    fig, ax = plt.subplots(figsize=(5.4, 4.5))
    filled = ax.contourf(zs, xs, values.T, levels=levels, cmap="RdBu_r")
    negative = levels[levels < 0]
    if negative.size:
        ax.contour(zs, xs, values.T, levels=negative, colors="k",
                   linewidths=0.6, linestyles="dashed")
    fig.colorbar(filled, ax=ax, label="$W(z_1, z_2)$")
    ax.set_xlabel("$z_1$")
    ax.set_ylabel("$z_2$")
    ax.set_aspect("equal")
    result.series_per_axes.append(1)
    _save(fig, spec, "fig01_contour", result)


def _render_basis_densities(spec: FigureSpec, result: RenderResult):
    a = read_table(spec.inputs["fig02a_basis_densities.csv"],
                   SCHEMAS[2]["fig02a_basis_densities.csv"])
    b = read_table(spec.inputs["fig02b_state_projections.csv"],
                   SCHEMAS[2]["fig02b_state_projections.csv"])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(a["z"], a["correct"], color="tab:blue", label="correct basis")
    ax1.plot(a["z"], a["wrong"], color="tab:red", label="wrong basis")
    ax1.set_xlabel("$z$")
    ax1.set_ylabel("probability density")
    ax1.legend(fontsize=8)
    series = [("psi_plus", "bit 1 pulse", "tab:blue"),
              ("psi_minus", "bit 0 pulse", "tab:red"),
              ("psi_plus_i", "bit 1 pulse, conjugate basis", "tab:orange"),
              ("psi_minus_i", "bit 0 pulse, conjugate basis", "tab:green")]
    for key, label, color in series:
        ax2.plot(b["z"], b[key], color=color, label=label)
    ax2.set_xlabel("$z_1$")
    ax2.legend(fontsize=8)
    result.series_per_axes.extend([2, 4])
    _save(fig, spec, "fig02_densities", result)


def _render_error_range(spec: FigureSpec, result: RenderResult):
    t = read_table(spec.inputs["fig03_error_range.csv"],
                   SCHEMAS[3]["fig03_error_range.csv"])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t["z"], t["psi_plus"], color="tab:blue", label="bit 1 pulse")
    ax.plot(t["z"], t["psi_minus"], color="tab:red", label="bit 0 pulse")
    ax.fill_between(t["z"], t["overlap"], color="tab:purple", alpha=0.4,
                    label="error range")
    ax.set_xlabel("$z_1$")
    ax.set_ylabel("probability density")
    ax.legend(fontsize=8)
    result.series_per_axes.append(3)
    _save(fig, spec, "fig03_error_range", result)


def _render_ber(spec: FigureSpec, result: RenderResult):
    t = read_table(spec.inputs["fig04_ber_vs_intensity.csv"],
                   SCHEMAS[4]["fig04_ber_vs_intensity.csv"])
    _line_plot(spec, t, "n", [("theta", "bit error rate")],
               "pulse intensity $n$", r"$\Theta$", "fig04_ber", result)


def _render_attack_densities(spec: FigureSpec, result: RenderResult):
    t = read_table(spec.inputs["fig05_attack_densities.csv"],
                   SCHEMAS[5]["fig05_attack_densities.csv"])
    styles = {
        "correct_no_eve": dict(color="tab:orange", linestyle="--"),
        "wrong_no_eve": dict(color="tab:blue", linestyle="--"),
        "correct_eve": dict(color="tab:orange"),
        "wrong_eve": dict(color="tab:blue"),
    }
    _line_plot(spec, t, "z",
               [("correct_no_eve", "correct basis, no eavesdropper"),
                ("wrong_no_eve", "wrong basis, no eavesdropper"),
                ("correct_eve", "correct basis, after attack"),
                ("wrong_eve", "wrong basis, after attack")],
               "$z_1$", "probability density", "fig05_attack_densities",
               result, styles=styles)


def _render_ber_attack(spec: FigureSpec, result: RenderResult):
    t = read_table(spec.inputs["fig06_ber_attack.csv"],
                   SCHEMAS[6]["fig06_ber_attack.csv"])
    styles = {
        "theta_zc0": dict(color="tab:orange", linestyle="--"),
        "theta_attacked_zc0": dict(color="tab:orange"),
        "theta_zc1": dict(color="tab:blue", linestyle="--"),
        "theta_attacked_zc1": dict(color="tab:blue"),
    }
    _line_plot(spec, t, "n",
               [("theta_zc0", "$z_c=0$, no eavesdropper"),
                ("theta_attacked_zc0", "$z_c=0$, after attack"),
                ("theta_zc1", "$z_c=1$, no eavesdropper"),
                ("theta_attacked_zc1", "$z_c=1$, after attack")],
               "pulse intensity $n$", r"$\Theta$", "fig06_ber_attack",
               result, styles=styles)


def _render_joint_maximum(spec: FigureSpec, result: RenderResult):
    t = read_table(spec.inputs["fig07_joint_maximum.csv"],
                   SCHEMAS[7]["fig07_joint_maximum.csv"])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t["r"], t["z_max"], "o-", label="receiver coordinate $z_1$")
    ax.plot(t["r"], t["x_max"], "s--", label="eavesdropper coordinate $x_1$")
    ax.set_xlabel("squeezing parameter $r$")
    ax.set_ylabel("joint-maximum coordinate")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    result.series_per_axes.append(2)
    _save(fig, spec, "fig07_joint_maximum", result)


def _render_gain_vs_loss(spec: FigureSpec, result: RenderResult):
    t = read_table(spec.inputs["fig08_gain_vs_loss.csv"],
                   SCHEMAS[8]["fig08_gain_vs_loss.csv"])
    _line_plot(spec, t, "r2",
               [("g_zc0", "$z_c = 0$"), ("g_zc0.3", "$z_c = 0.3$"),
                ("g_zc0.5", "$z_c = 0.5$"), ("g_zc1", "$z_c = 1$")],
               "loss fraction $R^2$", "$G_{AB}$", "fig08_gain_vs_loss",
               result)


def _render_family_comparison(spec: FigureSpec, result: RenderResult):
    path = spec.inputs["fig09_family_comparison.csv"]
    t = read_table(path, None)
    if "r2" not in t or len(t) < 3:
        raise SchemaError(f"{path} must carry an r2 column plus gain columns")
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    colors = {}
    palette = iter(plt.rcParams["axes.prop_cycle"].by_key()["color"])
    count = 0
    for key in t:
        if key == "r2":
            continue
        family, _, zc = key.rpartition("_zc")
        if family not in colors:
            colors[family] = next(palette)
        style = "-" if zc == "0" else "--"
        ax.plot(t["r2"], t[key], style, color=colors[family],
                label=f"{family}, $z_c={zc}$")
        count += 1
    ax.set_xlabel("loss fraction $R^2$")
    ax.set_ylabel("$G_{AB}$")
    ax.legend(fontsize=7, ncols=2)
    ax.grid(alpha=0.3)
    result.series_per_axes.append(count)
    _save(fig, spec, "fig09_family_comparison", result)


def _render_threshold_behavior(spec: FigureSpec, result: RenderResult):
    t = read_table(spec.inputs["fig10_threshold_behavior.csv"],
                   SCHEMAS[10]["fig10_threshold_behavior.csv"])
    _line_plot(spec, t, "z_c",
               [("g_ab", "$G_{AB}$"), ("i_ab", "$I_{AB}$"),
                ("r_acc", "$r_{acc}$"), ("theta", r"$\Theta$")],
               "threshold $z_c$", "value", "fig10_threshold_behavior",
               result)


RENDERERS = {
    1: _render_wigner,
    2: _render_basis_densities,
    3: _render_error_range,
    4: _render_ber,
    5: _render_attack_densities,
    6: _render_ber_attack,
    7: _render_joint_maximum,
    8: _render_gain_vs_loss,
    9: _render_family_comparison,
    10: _render_threshold_behavior,
}


def render(spec: FigureSpec) -> RenderResult:
    """Render one figure; inputs are validated before any file is written."""
    result = RenderResult(figure_id=spec.figure_id)
    RENDERERS[spec.figure_id](spec, result)
    return result


def render_all(data_dir: Path, output_dir: Path) -> list[RenderResult]:
    return [render(from_directory(data_dir, figure_id, output_dir))
            for figure_id in sorted(SCHEMAS)]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cvqkd-figures",
        description="render cvqkd figure datasets to PNG and SVG")
    parser.add_argument("--data-dir", required=True,
                        help="directory holding the figure CSV datasets")
    parser.add_argument("--out-dir", required=True,
                        help="directory that receives the images")
    parser.add_argument("--id", type=int, default=None,
                        help="render a single figure id (default: all)")
    args = parser.parse_args(argv)
    try:
        if args.id is None:
            results = render_all(Path(args.data_dir), Path(args.out_dir))
        else:
            results = [render(from_directory(Path(args.data_dir), args.id,
                                             Path(args.out_dir)))]
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    written = sum(len(r.outputs) for r in results)
    print(f"rendered {len(results)} figure(s), {written} file(s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
