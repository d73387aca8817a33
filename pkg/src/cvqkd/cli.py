"""Command-line front end.

Every subcommand writes deterministic CSV/JSON artifacts plus a
``manifest.json`` recording the parameters, library versions and the
SHA-256 checksum of each output file.  Exit codes: 0 success, 2 invalid
arguments or configuration, 3 numerical failure (under-truncation,
undefined error rate, too-narrow grid).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .attacks import (
    ir_post_attack,
    ir_resend_probabilities,
    superior_argmax,
    superior_joint,
)
from .fock import UnderTruncationError
from .keyrate import (
    ChannelParams,
    family_comparison,
    optimize_gain,
    secure_key_gain,
)
from .protocol import (
    ProtocolConfig,
    UndefinedBitErrorRateError,
    basis_density,
    bit_error_rate,
    bit_probabilities,
    conditional_bit_error_rate,
    post_selection_efficiency,
    simulate_session,
)
from .quadrature import Grid1D, GridTooNarrowError, marginal, wigner_grid
from .states import Family, StateSpec, build_state, encode

FIGURE_IDS = tuple(range(1, 11))

JOINT_MAX_NOTE = (
    "joint maximum computed from the two-mode beam-splitter construction "
    "with a vacuum ancilla; its density factorizes in the rotated "
    "coordinates (z+x, z-x)/sqrt(2), which pins the maximum to the "
    "diagonal z = x"
)


def _limit_workers():
    cap = os.environ.get("CVQKD_MAX_WORKERS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def _fmt(x) -> str:
    return f"{float(x):.12g}"


class RunWriter:
    """Collects output files and finishes with a checksum manifest."""

    def __init__(self, out_dir: str, command: str, parameters: dict):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.parameters = parameters
        self.outputs: dict[str, str] = {}
        self.notes: list[str] = []

    def write_csv(self, name: str, header: list[str], rows) -> Path:
        path = self.dir / name
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(v) if not isinstance(v, str) else v
                                  for v in row))
        path.write_text("\n".join(lines) + "\n")
        self._register(path)
        return path

    def write_json(self, name: str, payload: dict) -> Path:
        path = self.dir / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self._register(path)
        return path

    def _register(self, path: Path):
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.outputs[path.name] = digest

    def finish(self) -> Path:
        manifest = {
            "command": self.command,
            "parameters": self.parameters,
            "outputs": dict(sorted(self.outputs.items())),
            "notes": self.notes,
            "versions": {
                "cvqkd": __version__,
                "numpy": np.__version__,
                "python": ".".join(map(str, sys.version_info[:3])),
            },
        }
        import scipy

        manifest["versions"]["scipy"] = scipy.__version__
        path = self.dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path


def _grid_from(args, default_lo=-8.0, default_hi=8.0, default_step=0.01):
    lo = args.lo if args.lo is not None else default_lo
    hi = args.hi if args.hi is not None else default_hi
    step = args.step if args.step is not None else default_step
    return Grid1D(lo, hi, step)


def _cfg_from(args) -> ProtocolConfig:
    return ProtocolConfig(family=Family.parse(args.family), n=args.n,
                          r=args.r, z_c=args.zc)


def _density_rows(grid, *value_arrays):
    for i, z in enumerate(grid.points):
        yield (z, *(vals[i] for vals in value_arrays))


def _wigner_rows(grid_z, grid_x, values):
    for i, z in enumerate(grid_z.points):
        for j, x in enumerate(grid_x.points):
            yield (z, x, values[i, j])


# ---------------------------------------------------------------- commands


def cmd_wigner(args) -> int:
    writer = RunWriter(args.out, "wigner", _params(args))
    spec = StateSpec(Family.parse(args.family), alpha=args.alpha, r=args.r)
    state, _ = build_state(spec, dim=args.dim)
    grid = _grid_from(args, -4.0, 4.0, 0.05)
    values = wigner_grid(state, grid, grid)
    writer.write_csv("wigner.csv", ["z", "x", "value"],
                     _wigner_rows(grid, grid, values))
    writer.write_json("wigner_summary.json", {
        "min": float(values.min()),
        "max": float(values.max()),
        "negative_fraction": float(np.mean(values < 0.0)),
    })
    writer.finish()
    return 0


def cmd_marginals(args) -> int:
    writer = RunWriter(args.out, "marginals", _params(args))
    spec = StateSpec(Family.parse(args.family), alpha=args.alpha, r=args.r,
                     phase=args.phase)
    state, _ = build_state(spec, dim=args.dim)
    grid = _grid_from(args)
    axes = ("z1", "z2") if args.axis == "both" else (args.axis,)
    for axis in axes:
        dens = marginal(state, axis, grid)
        writer.write_csv(f"marginal_{axis}.csv", ["z", "value"],
                         _density_rows(grid, dens.values))
    writer.finish()
    return 0


def cmd_protocol(args) -> int:
    writer = RunWriter(args.out, "protocol", _params(args))
    cfg = _cfg_from(args)
    grid = _grid_from(args)
    correct = basis_density(cfg, "correct", grid)
    wrong = basis_density(cfg, "wrong", grid)
    writer.write_csv("basis_densities.csv", ["z", "correct", "wrong"],
                     _density_rows(grid, correct.values, wrong.values))
    p0, p1, r_acc = bit_probabilities(cfg, grid)
    writer.write_json("protocol.json", {
        "pi": post_selection_efficiency(cfg, grid),
        "p0": p0,
        "p1": p1,
        "r_acc": r_acc,
    })
    writer.finish()
    return 0


def cmd_ber(args) -> int:
    writer = RunWriter(args.out, "ber", _params(args))
    cfg = _cfg_from(args)
    grid = _grid_from(args)
    writer.write_json("ber.json", {
        "theta": bit_error_rate(cfg, grid),
        "theta_conditional": conditional_bit_error_rate(cfg, grid),
        "pi": post_selection_efficiency(cfg, grid),
    })
    writer.finish()
    return 0


def cmd_attack_ir(args) -> int:
    writer = RunWriter(args.out, "attack-ir", _params(args))
    cfg = _cfg_from(args)
    grid = _grid_from(args)
    probs = ir_resend_probabilities(cfg)
    report = ir_post_attack(cfg, grid)
    correct = basis_density(cfg, "correct", grid)
    wrong = basis_density(cfg, "wrong", grid)
    writer.write_csv(
        "attack_densities.csv",
        ["z", "correct_no_eve", "wrong_no_eve", "correct_eve", "wrong_eve"],
        _density_rows(grid, correct.values, wrong.values,
                      report.correct_density.values,
                      report.wrong_density.values),
    )
    writer.write_json("attack_ir.json", {
        **probs.to_dict(),
        "pi": post_selection_efficiency(cfg, grid),
        "pi_prime": report.pi_prime,
        "theta": bit_error_rate(cfg, grid),
        "theta_prime": report.theta_prime,
    })
    writer.finish()
    return 0


def cmd_attack_superior(args) -> int:
    writer = RunWriter(args.out, "attack-superior", _params(args))
    cfg = _cfg_from(args)
    grid = _grid_from(args, -4.0, 4.0, 0.02)
    joint = superior_joint(cfg, args.t2, grid, grid)
    peak = superior_argmax(joint)
    writer.write_csv("joint_density.csv", ["z", "x", "value"],
                     _wigner_rows(grid, grid, joint.values))
    writer.write_json("attack_superior.json", {
        "z_max": peak.z,
        "x_max": peak.x,
        "value": peak.value,
        "degenerate": peak.degenerate,
    })
    writer.notes.append(JOINT_MAX_NOTE)
    writer.finish()
    return 0


def cmd_keygain(args) -> int:
    writer = RunWriter(args.out, "keygain", _params(args))
    report = secure_key_gain(_cfg_from(args), ChannelParams(t2=args.t2),
                             _grid_from(args))
    writer.write_json("keygain.json", report.to_dict())
    writer.finish()
    return 0


def cmd_optimize(args) -> int:
    writer = RunWriter(args.out, "optimize", _params(args))
    family = Family.parse(args.family)
    ch = ChannelParams(t2=args.t2)
    result = optimize_gain(family, args.r, ch,
                           bounds=((args.zc_lo, args.zc_hi),
                                   (args.n_lo, args.n_hi)))
    cfg = ProtocolConfig(family=family, n=result.n, r=args.r, z_c=result.z_c)
    payload = result.to_dict()
    payload["report"] = secure_key_gain(cfg, ch).to_dict()
    writer.write_json("optimize.json", payload)
    writer.finish()
    return 0


def cmd_compare(args) -> int:
    writer = RunWriter(args.out, "compare", _params(args))
    tables = family_comparison(
        [Family.parse(f) for f in args.families.split(",")],
        args.r,
        [float(z) for z in args.zc_list.split(",")],
        [float(x) for x in args.r2_list.split(",")],
        n=args.n,
    )
    writer.write_csv("compare_loss.csv", ["family", "z_c", "r2", "g_ab"],
                     ((row["family"], row["z_c"], row["r2"], row["g_ab"])
                      for row in tables["loss_sweep"]))
    writer.write_csv("compare_threshold.csv",
                     ["z_c", "theta", "i_ab", "r_acc", "g_ab"],
                     ((row["z_c"], row["theta"], row["i_ab"], row["r_acc"],
                       row["g_ab"]) for row in tables["threshold_sweep"]))
    writer.finish()
    return 0


def cmd_simulate(args) -> int:
    writer = RunWriter(args.out, "simulate", _params(args))
    stats = simulate_session(_cfg_from(args), seed=args.seed,
                             pulses=args.pulses, grid=_grid_from(args))
    writer.write_json("simulate.json", stats.to_dict())
    writer.finish()
    return 0


# ---------------------------------------------------------------- figures


def _figure_wigner(writer: RunWriter):
    spec = StateSpec(Family.ADDED_SUBTRACTED_SQUEEZED, alpha=1.0, r=0.5)
    state, _ = build_state(spec, dim=128)
    grid = Grid1D(-4.0, 4.0, 0.05)
    values = wigner_grid(state, grid, grid)
    writer.write_csv("fig01_wigner.csv", ["z", "x", "value"],
                     _wigner_rows(grid, grid, values))


def _figure_basis_densities(writer: RunWriter):
    cfg = ProtocolConfig(family=Family.ADDED_SUBTRACTED_SQUEEZED, n=1.0, r=0.2)
    grid = Grid1D(-5.0, 5.0, 0.01)
    correct = basis_density(cfg, "correct", grid)
    wrong = basis_density(cfg, "wrong", grid)
    writer.write_csv("fig02a_basis_densities.csv", ["z", "correct", "wrong"],
                     _density_rows(grid, correct.values, wrong.values))
    spec = cfg.spec()
    rows = _density_rows(
        grid,
        marginal(encode(spec, "B1", 1), "z1", grid).values,
        marginal(encode(spec, "B1", 0), "z1", grid).values,
        marginal(encode(spec, "B2", 1), "z1", grid).values,
        marginal(encode(spec, "B2", 0), "z1", grid).values,
    )
    writer.write_csv(
        "fig02b_state_projections.csv",
        ["z", "psi_plus", "psi_minus", "psi_plus_i", "psi_minus_i"], rows)


def _figure_error_range(writer: RunWriter):
    cfg = ProtocolConfig(family=Family.ADDED_SUBTRACTED_SQUEEZED, n=1.0, r=0.2)
    grid = Grid1D(-5.0, 5.0, 0.01)
    spec = cfg.spec()
    plus = marginal(encode(spec, "B1", 1), "z1", grid)
    minus = marginal(encode(spec, "B1", 0), "z1", grid)
    writer.write_csv("fig03_error_range.csv",
                     ["z", "psi_plus", "psi_minus", "overlap"],
                     _density_rows(grid, plus.values, minus.values,
                                   np.minimum(plus.values, minus.values)))


def _figure_ber(writer: RunWriter):
    rows = []
    for n in np.round(np.arange(0.05, 4.0001, 0.05), 10):
        cfg = ProtocolConfig(family=Family.ADDED_SUBTRACTED_SQUEEZED, n=float(n),
                             r=0.2, z_c=0.0)
        rows.append((n, bit_error_rate(cfg)))
    writer.write_csv("fig04_ber_vs_intensity.csv", ["n", "theta"], rows)


def _figure_attack_densities(writer: RunWriter):
    cfg = ProtocolConfig(family=Family.ADDED_SUBTRACTED_SQUEEZED, n=1.0, r=0.2)
    grid = Grid1D(-5.0, 5.0, 0.01)
    report = ir_post_attack(cfg, grid)
    correct = basis_density(cfg, "correct", grid)
    wrong = basis_density(cfg, "wrong", grid)
    writer.write_csv(
        "fig05_attack_densities.csv",
        ["z", "correct_no_eve", "wrong_no_eve", "correct_eve", "wrong_eve"],
        _density_rows(grid, correct.values, wrong.values,
                      report.correct_density.values,
                      report.wrong_density.values),
    )


def _figure_ber_attack(writer: RunWriter):
    rows = []
    for n in np.round(np.arange(0.1, 4.0001, 0.1), 10):
        base = {"family": Family.ADDED_SUBTRACTED_SQUEEZED, "n": float(n),
                "r": 0.2}
        cfg0 = ProtocolConfig(z_c=0.0, **base)
        cfg1 = ProtocolConfig(z_c=1.0, **base)
        rows.append((n,
                     bit_error_rate(cfg0),
                     ir_post_attack(cfg0).theta_prime,
                     bit_error_rate(cfg1),
                     ir_post_attack(cfg1).theta_prime))
    writer.write_csv(
        "fig06_ber_attack.csv",
        ["n", "theta_zc0", "theta_attacked_zc0", "theta_zc1",
         "theta_attacked_zc1"], rows)


def _figure_joint_maximum(writer: RunWriter):
    grid = Grid1D(-4.0, 4.0, 0.02)
    rows = []
    for r in (0.0, 0.2, 0.5, 1.0):
        cfg = ProtocolConfig(family=Family.ADDED_SUBTRACTED_SQUEEZED, n=1.0, r=r)
        peak = superior_argmax(superior_joint(cfg, 0.5, grid, grid))
        rows.append((r, peak.z, peak.x))
    writer.write_csv("fig07_joint_maximum.csv", ["r", "z_max", "x_max"], rows)
    control = superior_argmax(superior_joint(
        ProtocolConfig(family=Family.COHERENT, n=1.0, r=0.0), 0.5, grid, grid))
    writer.notes.append(JOINT_MAX_NOTE)
    writer.notes.append(
        "coherent-state control maximum at "
        f"({control.z:.4f}, {control.x:.4f}); expected (0.7071, 0.7071)")


def _figure_gain_vs_loss(writer: RunWriter):
    r2_values = np.round(np.arange(0.0, 0.9001, 0.05), 10)
    zc_values = (0.0, 0.3, 0.5, 1.0)
    rows = []
    for r2 in r2_values:
        ch = ChannelParams(t2=1.0 - float(r2))
        gains = [secure_key_gain(
            ProtocolConfig(family=Family.ADDED_SUBTRACTED_SQUEEZED, n=1.0,
                           r=0.2, z_c=zc), ch).g_ab for zc in zc_values]
        rows.append((r2, *gains))
    writer.write_csv("fig08_gain_vs_loss.csv",
                     ["r2", "g_zc0", "g_zc0.3", "g_zc0.5", "g_zc1"], rows)


def _figure_family_comparison(writer: RunWriter):
    r2_values = np.round(np.arange(0.0, 0.9001, 0.05), 10)
    families = (Family.COHERENT, Family.ADDED_SUBTRACTED, Family.SQUEEZED,
                Family.ADDED_SUBTRACTED_SQUEEZED)
    header = ["r2"]
    for fam in families:
        header += [f"{fam.value}_zc0", f"{fam.value}_zc0.3"]
    rows = []
    for r2 in r2_values:
        ch = ChannelParams(t2=1.0 - float(r2))
        row = [r2]
        for fam in families:
            for zc in (0.0, 0.3):
                row.append(secure_key_gain(
                    ProtocolConfig(family=fam, n=1.0, r=0.2, z_c=zc), ch).g_ab)
        rows.append(tuple(row))
    writer.write_csv("fig09_family_comparison.csv", header, rows)


def _figure_threshold_behavior(writer: RunWriter):
    from .keyrate import threshold_sweep

    rows = threshold_sweep(Family.ADDED_SUBTRACTED_SQUEEZED, 0.2,
                           np.round(np.linspace(0.0, 2.0, 41), 10), n=1.0,
                           t2=0.5)
    writer.write_csv("fig10_threshold_behavior.csv",
                     ["z_c", "theta", "i_ab", "r_acc", "g_ab"],
                     ((row["z_c"], row["theta"], row["i_ab"], row["r_acc"],
                       row["g_ab"]) for row in rows))


FIGURE_GENERATORS = {
    1: _figure_wigner,
    2: _figure_basis_densities,
    3: _figure_error_range,
    4: _figure_ber,
    5: _figure_attack_densities,
    6: _figure_ber_attack,
    7: _figure_joint_maximum,
    8: _figure_gain_vs_loss,
    9: _figure_family_comparison,
    10: _figure_threshold_behavior,
}


def cmd_figure(args) -> int:
    if not args.all and args.id is None:
        raise ValueError("choose --id N or --all")
    ids = FIGURE_IDS if args.all else (args.id,)
    writer = RunWriter(args.out, "figure", _params(args))
    for fig_id in ids:
        FIGURE_GENERATORS[fig_id](writer)
    writer.finish()
    return 0


# ---------------------------------------------------------------- plumbing


def _params(args) -> dict:
    skip = {"func", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _add_state_flags(p, with_phase=False):
    p.add_argument("--family", default="spasscs",
                   help="coherent | scs | pascs | spasscs")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="field amplitude (real)")
    p.add_argument("--r", type=float, default=0.0,
                   help="squeezing parameter")
    p.add_argument("--dim", type=int, default=64,
                   help="initial Fock truncation")
    if with_phase:
        p.add_argument("--phase", type=float, default=None,
                       help="encoding phase (0, pi/2, pi, 3pi/2)")


def _add_protocol_flags(p):
    p.add_argument("--family", default="spasscs",
                   help="coherent | scs | pascs | spasscs")
    p.add_argument("--n", type=float, default=1.0, help="pulse intensity")
    p.add_argument("--r", type=float, default=0.0, help="squeezing parameter")
    p.add_argument("--zc", type=float, default=0.0,
                   help="post-selection threshold")


def _add_grid_flags(p):
    p.add_argument("--lo", type=float, default=None)
    p.add_argument("--hi", type=float, default=None)
    p.add_argument("--step", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvqkd",
        description="continuous-variable BB84 numerical laboratory")
    parser.add_argument("--config", default=None,
                        help="key=value file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wigner", help="Wigner function grid")
    _add_state_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_wigner, dim=128)

    p = sub.add_parser("marginals", help="quadrature distributions")
    _add_state_flags(p, with_phase=True)
    p.add_argument("--axis", choices=("z1", "z2", "both"), default="both")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_marginals)

    p = sub.add_parser("protocol", help="basis densities and bit bookkeeping")
    _add_protocol_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("ber", help="bit error rate")
    _add_protocol_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("attack-ir", help="intercept-resend attack")
    _add_protocol_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_attack_ir)

    p = sub.add_parser("attack-superior", help="superior channel attack")
    _add_protocol_flags(p)
    p.add_argument("--t2", type=float, default=0.5,
                   help="channel transmittance T^2")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_attack_superior)

    p = sub.add_parser("keygain", help="secure key gain at one point")
    _add_protocol_flags(p)
    p.add_argument("--t2", type=float, default=0.5)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_keygain)

    p = sub.add_parser("optimize", help="maximize the gain over (z_c, n)")
    p.add_argument("--family", default="spasscs")
    p.add_argument("--r", type=float, default=0.2)
    p.add_argument("--t2", type=float, default=0.5)
    p.add_argument("--zc-lo", type=float, default=0.0)
    p.add_argument("--zc-hi", type=float, default=4.0)
    p.add_argument("--n-lo", type=float, default=0.02)
    p.add_argument("--n-hi", type=float, default=4.0)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("compare", help="family comparison tables")
    p.add_argument("--families", default="coherent,scs,pascs,spasscs")
    p.add_argument("--r", type=float, default=0.2)
    p.add_argument("--n", type=float, default=1.0)
    p.add_argument("--zc-list", default="0,0.3")
    p.add_argument("--r2-list",
                   default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="Monte Carlo protocol session")
    _add_protocol_flags(p)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--pulses", type=int, default=100000)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("figure", help="reproduce the reference datasets")
    p.add_argument("--id", type=int, choices=FIGURE_IDS, default=None)
    p.add_argument("--all", action="store_true")
    p.set_defaults(func=cmd_figure)

    for p in sub.choices.values():
        p.add_argument("--out", default="out", help="output directory")
    return parser


def _load_config(path: str) -> dict:
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = val
    return values


def main(argv=None) -> int:
    _limit_workers()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            defaults = _load_config(args.config)
            unknown = set(defaults) - set(vars(args))
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
            args = _apply_config(parser, argv, defaults)
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UnderTruncationError, UndefinedBitErrorRateError,
            GridTooNarrowError, ZeroDivisionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def _apply_config(parser, argv, defaults):
    """Re-parse with config values inserted ahead of explicit flags."""
    injected = []
    for key, val in defaults.items():
        flag = "--" + key.replace("_", "-")
        injected.extend([flag, val])
    # strip the --config occurrence; it has already been consumed
    cleaned = []
    skip_next = False
    for a in argv:
        if skip_next:
            skip_next = False
            continue
        if a == "--config":
            skip_next = True
            continue
        if a.startswith("--config="):
            continue
        cleaned.append(a)
    if not cleaned:
        raise ValueError("config file cannot supply the subcommand")
    merged = [cleaned[0]] + injected + cleaned[1:]
    return parser.parse_args(merged)


if __name__ == "__main__":
    sys.exit(main())
