"""The continuous-variable BB84 protocol without eavesdropping.

Covers the basis mixtures and their homodyne distributions, the
post-selection efficiency, bit error rate, accepted-bit bookkeeping, and
a seeded Monte Carlo session simulator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import Density, Grid1D, default_grid, marginal
from .states import Family, StateSpec, encode

#: Bob keeps an outcome z when |z| > z_c, reading sign(z) as the bit.
#: Outcomes inside the band are discarded.


class UndefinedBitErrorRateError(ZeroDivisionError):
    """Post-selection accepts nothing, so the error rate is undefined."""


@dataclass(frozen=True)
class ProtocolConfig:
    """One protocol operating point.

    ``n`` is the pulse intensity (alpha = sqrt(n), real) and ``z_c`` the
    post-selection threshold.
    """

    family: Family = Family.ADDED_SUBTRACTED_SQUEEZED
    n: float = 1.0
    r: float = 0.0
    z_c: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("pulse intensity must be non-negative")
        if self.z_c < 0:
            raise ValueError("post-selection threshold must be non-negative")

    @property
    def alpha(self) -> float:
        return float(np.sqrt(self.n))

    def spec(self) -> StateSpec:
        return StateSpec(family=self.family, alpha=self.alpha, r=self.r)


@dataclass(frozen=True)
class SessionStats:
    pulses_sent: int
    correct_basis_count: int
    accepted_count: int
    error_count: int
    empirical_ber: float
    empirical_acceptance: float

    def __post_init__(self):
        ok = (0 <= self.error_count <= self.accepted_count
              <= self.correct_basis_count <= self.pulses_sent)
        if not ok:
            raise ValueError("session counters are inconsistent")

    def to_dict(self) -> dict:
        return {
            "pulses_sent": self.pulses_sent,
            "correct_basis_count": self.correct_basis_count,
            "accepted_count": self.accepted_count,
            "error_count": self.error_count,
            "empirical_ber": self.empirical_ber,
            "empirical_acceptance": self.empirical_acceptance,
        }


def signal_marginal(cfg: ProtocolConfig, basis: str, bit: int, axis: str,
                    grid: Grid1D | None = None) -> Density:
    """Distribution of one quadrature of one encoded pulse."""
    state = encode(cfg.spec(), basis, bit)
    return marginal(state, axis, grid)


def basis_density(cfg: ProtocolConfig, kind: str,
                  grid: Grid1D | None = None) -> Density:
    """Correct- or wrong-basis homodyne distribution on the z1 axis.

    Correct: equal mixture of the two B1 pulses measured on z1.
    Wrong: equal mixture of the two B2 pulses measured on z1 (identical
    to the B1 pulses on z2 by the encoding rotation symmetry).
    """
    if grid is None:
        grid = default_grid()
    if kind == "correct":
        p1 = signal_marginal(cfg, "B1", 1, "z1", grid)
        p0 = signal_marginal(cfg, "B1", 0, "z1", grid)
    elif kind == "wrong":
        p1 = signal_marginal(cfg, "B2", 1, "z1", grid)
        p0 = signal_marginal(cfg, "B2", 0, "z1", grid)
    else:
        raise ValueError("kind must be 'correct' or 'wrong'")
    return Density(grid, 0.5 * (p1.values + p0.values))


def post_selection_efficiency(cfg: ProtocolConfig,
                              grid: Grid1D | None = None) -> float:
    """Probability that a correct-basis outcome survives the threshold."""
    return basis_density(cfg, "correct", grid).two_sided_tail(cfg.z_c)


def bit_error_rate(cfg: ProtocolConfig, grid: Grid1D | None = None) -> float:
    """Probability of reading bit 0 when the bit-1 pulse was sent,
    relative to the post-selection efficiency."""
    pi = post_selection_efficiency(cfg, grid)
    if pi <= 1e-10:
        raise UndefinedBitErrorRateError(
            "post-selection efficiency is zero; bit error rate undefined")
    p_plus = signal_marginal(cfg, "B1", 1, "z1", grid)
    return p_plus.prob_below(-cfg.z_c) / pi


def conditional_bit_error_rate(cfg: ProtocolConfig,
                               grid: Grid1D | None = None) -> float:
    """Error fraction among accepted outcomes (diagnostic variant).

    Averages the two pulses in both numerator and denominator; for the
    real-amplitude encodings this coincides with ``bit_error_rate``.
    """
    p_plus = signal_marginal(cfg, "B1", 1, "z1", grid)
    p_minus = signal_marginal(cfg, "B1", 0, "z1", grid)
    errors = 0.5 * (p_plus.prob_below(-cfg.z_c) + p_minus.prob_above(cfg.z_c))
    accepted = 0.5 * (p_plus.two_sided_tail(cfg.z_c)
                      + p_minus.two_sided_tail(cfg.z_c))
    if accepted <= 1e-10:
        raise UndefinedBitErrorRateError(
            "post-selection accepts nothing; error rate undefined")
    return errors / accepted


def bit_probabilities(cfg: ProtocolConfig,
                      grid: Grid1D | None = None) -> tuple[float, float, float]:
    """(P0, P1, r_acc): bit probabilities and the accepted-bit fraction."""
    rho = basis_density(cfg, "correct", grid)
    p0 = rho.prob_below(-cfg.z_c)
    p1 = rho.prob_above(cfg.z_c)
    return p0, p1, 0.5 * (p0 + p1)


def simulate_session(cfg: ProtocolConfig, seed: int, pulses: int,
                     grid: Grid1D | None = None) -> SessionStats:
    """Monte Carlo realization of the protocol.

    Per pulse, Alice draws a basis and bit and Bob a measurement axis,
    all uniformly; Bob's homodyne outcome is drawn by inverse-CDF
    sampling from the exact marginal of the sent state on his axis.
    Matching-basis outcomes outside the threshold band become bits and
    are tallied against Alice's. Deterministic for a fixed seed.
    """
    if pulses < 0:
        raise ValueError("pulse count must be non-negative")
    if pulses == 0:
        return SessionStats(0, 0, 0, 0, 0.0, 0.0)
    if grid is None:
        grid = default_grid()
    spec = cfg.spec()
    tables = {}
    for basis in ("B1", "B2"):
        for bit in (0, 1):
            state = encode(spec, basis, bit)
            for axis in ("z1", "z2"):
                tables[basis, bit, axis] = marginal(state, axis, grid)

    rng = np.random.default_rng(seed)
    alice_basis = rng.integers(0, 2, pulses)  # 0 -> B1, 1 -> B2
    alice_bit = rng.integers(0, 2, pulses)
    bob_axis = rng.integers(0, 2, pulses)     # 0 -> z1, 1 -> z2
    u = rng.random(pulses)

    outcomes = np.empty(pulses)
    for b_idx, basis in enumerate(("B1", "B2")):
        for bit in (0, 1):
            for a_idx, axis in enumerate(("z1", "z2")):
                mask = ((alice_basis == b_idx) & (alice_bit == bit)
                        & (bob_axis == a_idx))
                if not np.any(mask):
                    continue
                outcomes[mask] = tables[basis, bit, axis].quantile(u[mask])

    matched = alice_basis == bob_axis
    accepted = matched & (np.abs(outcomes) > cfg.z_c)
    read_bit = (outcomes > 0).astype(int)
    errors = accepted & (read_bit != alice_bit)

    n_matched = int(np.count_nonzero(matched))
    n_accepted = int(np.count_nonzero(accepted))
    n_errors = int(np.count_nonzero(errors))
    return SessionStats(
        pulses_sent=pulses,
        correct_basis_count=n_matched,
        accepted_count=n_accepted,
        error_count=n_errors,
        empirical_ber=n_errors / n_accepted if n_accepted else 0.0,
        empirical_acceptance=n_accepted / pulses,
    )
