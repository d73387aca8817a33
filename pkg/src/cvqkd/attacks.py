"""Eavesdropping models: intercept-resend and the superior channel attack.

The intercept-resend attack splits each pulse on a balanced beam
splitter, measures z1 on one arm and z2 on the other, and resends a
fresh pulse chosen by comparing the two readings.  The superior channel
attack replaces channel loss with a beam splitter whose reflected arm is
stored in quantum memory and measured in the correct basis after the
public announcement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .fock import beamsplitter, vacuum
from .protocol import ProtocolConfig, UndefinedBitErrorRateError
from .quadrature import (
    Density,
    Density2D,
    Grid1D,
    default_grid,
    joint_quadrature_density,
    marginal,
)
from .states import StateSpec, build_state, encode


@dataclass(frozen=True)
class ResendProbabilities:
    """Probabilities of Eve's three resend choices.

    ``e_pi2`` is the probability of either single wrong-basis resend, so
    under the decision-rule region assignment the four regions satisfy
    e0 + e_pi + 2*e_pi2 = 1.
    """

    e0: float
    e_pi: float
    e_pi2: float

    def partition_defect(self) -> float:
        return abs(self.e0 + self.e_pi + 2 * self.e_pi2 - 1.0)

    def to_dict(self) -> dict:
        return {"e0": self.e0, "e_pi": self.e_pi, "e_pi2": self.e_pi2}


@dataclass(frozen=True)
class AttackReport:
    pi_prime: float
    theta_prime: float
    correct_density: Density
    wrong_density: Density


class JointMaximum(NamedTuple):
    z: float
    x: float
    value: float
    degenerate: bool


def _half_amplitude_marginals(cfg: ProtocolConfig, grid: Grid1D):
    """Correct- and wrong-axis marginals of the bit-1 pulse at amplitude
    alpha/sqrt(2) (Eve's two beam-splitter arms)."""
    spec = StateSpec(family=cfg.family, alpha=cfg.alpha / np.sqrt(2.0), r=cfg.r,
                     phase=0.0)
    state, _ = build_state(spec)
    return marginal(state, "z1", grid), marginal(state, "z2", grid)


def ir_joint_density(cfg: ProtocolConfig, grid_z: Grid1D | None = None,
                     grid_x: Grid1D | None = None) -> Density2D:
    """Distribution of Eve's simultaneous (z1, z2) readings.

    Written as the product of the half-amplitude correct-axis marginal
    and the half-amplitude wrong-axis marginal; the genuinely two-mode
    statistics of the splitter are available through
    :func:`superior_joint` as a cross-check.
    """
    if grid_z is None:
        grid_z = default_grid()
    if grid_x is None:
        grid_x = grid_z
    a, b = _half_amplitude_marginals(cfg, grid_z)
    if grid_x is not grid_z:
        b = _half_amplitude_marginals(cfg, grid_x)[1]
    return Density2D(grid_z, grid_x, np.outer(a.values, b.values))


def _wedge_integrals(values_a: np.ndarray, values_b: np.ndarray,
                     step: float) -> tuple[float, float, float, float]:
    """Integrals of A(z1)*B(z2) over the four regions split by z2 = ±z1.

    Both factors are treated as piecewise linear on a symmetric grid, so
    each wedge integral is exact for the interpolant (Simpson per cell on
    a piecewise-cubic integrand) and the four results sum to the product
    of the totals to machine precision.
    """
    if values_a.size != values_b.size or values_a.size % 2 == 0:
        raise ValueError("wedge integration needs one symmetric odd-sized grid")
    k0 = values_a.size // 2
    a_pos, a_neg = values_a[k0:], values_a[k0::-1]
    b_pos, b_neg = values_b[k0:], values_b[k0::-1]
    a_bar = a_pos + a_neg
    b_bar = b_pos + b_neg

    def cum_sym(bar):
        out = np.zeros(bar.size)
        out[1:] = np.cumsum((bar[1:] + bar[:-1]) * 0.5 * step)
        return out

    g_a, g_b = cum_sym(a_bar), cum_sym(b_bar)

    def wedge(f, g, g_slope):
        f_mid = 0.5 * (f[:-1] + f[1:])
        g_mid = g[:-1] + (step / 8.0) * (3.0 * g_slope[:-1] + g_slope[1:])
        cells = (step / 6.0) * (f[:-1] * g[:-1] + 4.0 * f_mid * g_mid
                                + f[1:] * g[1:])
        return float(np.sum(cells))

    e0 = wedge(a_pos, g_b, b_bar)        # z1 >= |z2|
    e_pi = wedge(a_neg, g_b, b_bar)      # -z1 >= |z2|
    up = wedge(b_pos, g_a, a_bar)        # z2 > |z1|
    down = wedge(b_neg, g_a, a_bar)      # -z2 > |z1|
    return e0, e_pi, up, down


def ir_resend_probabilities(cfg: ProtocolConfig, step: float = 0.001,
                            half_width: float = 12.0,
                            printed_labels: bool = False) -> ResendProbabilities:
    """Probabilities of the four decision regions of Eve's comparison.

    Regions follow the decision rule (z1 >= |z2| keeps the original
    pulse, -z1 >= |z2| flips it, |z2| > |z1| resends a wrong-basis
    pulse); ``printed_labels`` swaps the pi and pi/2 assignments to the
    variant in which the region labels are exchanged.
    """
    grid = Grid1D(-half_width, half_width, step)
    a, b = _half_amplitude_marginals(cfg, grid)
    e0, flip, up, down = _wedge_integrals(a.values, b.values, step)
    if printed_labels:
        # verbatim label assignment: pi <- the upper wrong-basis wedge,
        # pi/2 <- the flipped-pulse wedge (breaks the partition identity)
        return ResendProbabilities(e0=e0, e_pi=up, e_pi2=flip)
    probs = ResendProbabilities(e0=e0, e_pi=flip, e_pi2=0.5 * (up + down))
    if probs.partition_defect() > 1e-8:
        raise ValueError(
            f"region integrals miss unity by {probs.partition_defect():.3e}")
    return probs


def ir_post_attack(cfg: ProtocolConfig, grid: Grid1D | None = None,
                   step: float = 0.001) -> AttackReport:
    """Bob's statistics after the intercept-resend attack.

    The resent pulses carry Alice's full amplitude; the post-attack
    correct-basis mixture is (e0 + e_pi) * rho1 + 2*e_pi2 * rho2 and the
    efficiency and error rate follow from the same integrals as the
    undisturbed ones.
    """
    if grid is None:
        grid = default_grid()
    probs = ir_resend_probabilities(cfg, step=step)
    spec = cfg.spec()
    p_plus = marginal(encode(spec, "B1", 1), "z1", grid)
    p_minus = marginal(encode(spec, "B1", 0), "z1", grid)
    pbar_plus_i = marginal(encode(spec, "B2", 1), "z1", grid)
    pbar_minus_i = marginal(encode(spec, "B2", 0), "z1", grid)
    wrong_pair = pbar_plus_i.values + pbar_minus_i.values

    p_plus_attacked = Density(grid, probs.e0 * p_plus.values
                              + probs.e_pi * p_minus.values
                              + probs.e_pi2 * wrong_pair)
    correct = Density(grid, (probs.e0 + probs.e_pi) * 0.5
                      * (p_plus.values + p_minus.values)
                      + probs.e_pi2 * wrong_pair)
    # wrong-basis data after the attack: rho2' projected on z1
    z2_pair = marginal(encode(spec, "B1", 1), "z2", grid).values \
        + marginal(encode(spec, "B1", 0), "z2", grid).values
    wrong = Density(grid, (probs.e0 + probs.e_pi) * 0.5 * wrong_pair
                    + probs.e_pi2 * z2_pair)

    pi_prime = correct.two_sided_tail(cfg.z_c)
    if pi_prime <= 1e-10:
        raise UndefinedBitErrorRateError(
            "post-attack efficiency is zero; bit error rate undefined")
    theta_prime = p_plus_attacked.prob_below(-cfg.z_c) / pi_prime
    return AttackReport(pi_prime=pi_prime, theta_prime=theta_prime,
                        correct_density=correct, wrong_density=wrong)


def superior_joint(cfg: ProtocolConfig, t2: float = 0.5,
                   grid_z: Grid1D | None = None,
                   grid_x: Grid1D | None = None) -> Density2D:
    """Joint density of Bob's and Eve's correct-basis readings.

    Built from the genuine two-mode output of the channel beam splitter
    with a vacuum ancilla; both arms are measured on z1 after the basis
    announcement.
    """
    if not 0.0 < t2 < 1.0:
        raise ValueError("channel transmittance T^2 must lie in (0, 1)")
    if grid_z is None:
        grid_z = default_grid()
    if grid_x is None:
        grid_x = grid_z
    state = encode(cfg.spec(), "B1", 1)
    tm = beamsplitter(state, vacuum(state.dim), np.sqrt(t2))
    return joint_quadrature_density(tm, grid_z, grid_x)


def superior_argmax(density: Density2D, tie_rel_tol: float = 1e-9) -> JointMaximum:
    """Location of the joint-density maximum.

    The grid argmax is refined by quadratic interpolation on the 3x3
    neighborhood; near-ties are resolved toward the smallest (z, x) in
    lexicographic order.  A flat plateau wider than 3 cells is flagged
    degenerate.
    """
    vals = density.values
    if vals.size == 0 or float(vals.max()) <= 0.0:
        raise ValueError("cannot locate the maximum of an empty density")
    vmax = float(vals.max())
    cand = np.argwhere(vals >= vmax * (1.0 - tie_rel_tol))
    zs, xs = density.grid_z.points, density.grid_x.points

    def refined(i, j):
        z, x = zs[i], xs[j]
        if 0 < i < len(zs) - 1:
            z += _parabolic_offset(vals[i - 1, j], vals[i, j], vals[i + 1, j]) \
                * density.grid_z.step
        if 0 < j < len(xs) - 1:
            x += _parabolic_offset(vals[i, j - 1], vals[i, j], vals[i, j + 1]) \
                * density.grid_x.step
        return float(z), float(x)

    points = sorted(refined(i, j) for i, j in cand)
    plateau = vals >= vmax * (1.0 - 1e-12)
    degenerate = int(plateau.sum()) > 3 and _plateau_span(np.argwhere(plateau)) > 3
    z, x = points[0]
    return JointMaximum(z=z, x=x, value=vmax, degenerate=degenerate)


def _parabolic_offset(left: float, mid: float, right: float) -> float:
    denom = left - 2.0 * mid + right
    if denom >= 0.0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))


def _plateau_span(cells: np.ndarray) -> int:
    return int(max(cells[:, 0].max() - cells[:, 0].min(),
                   cells[:, 1].max() - cells[:, 1].min()))
