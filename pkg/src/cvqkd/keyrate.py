"""Security bookkeeping: mutual information, collision probability,
raw-key reduction, the secure key gain, and its optimization.

Channel loss enters as an intensity rescaling within the same state
family: Bob's quantities are evaluated at T^2*n and the reduction tau at
the reflected intensity (1 - T^2)*n.  All logarithms are base 2 with
0*log(0) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import xlogy

from .protocol import ProtocolConfig, UndefinedBitErrorRateError
from .quadrature import Density, Grid1D, default_grid, marginal
from .states import Family, encode

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class ChannelParams:
    """Beam-splitter channel with intensity transmittance t2 = T^2."""

    t2: float

    def __post_init__(self):
        if not 0.0 <= self.t2 <= 1.0:
            raise ValueError("transmittance T^2 must lie in [0, 1]")

    @property
    def r2(self) -> float:
        return 1.0 - self.t2


@dataclass(frozen=True)
class GainReport:
    """All security quantities of one operating point and channel."""

    z_c: float
    n: float
    r: float
    t2: float
    pi: float
    i_ab: float
    p_coll: float
    tau: float
    g_ab: float

    def __post_init__(self):
        if abs(self.g_ab - 0.5 * self.pi * (self.i_ab - self.tau)) > 1e-10:
            raise ValueError("gain report is internally inconsistent")
        if not -1e-9 <= self.i_ab <= 1.0 + 1e-9:
            raise ValueError(f"mutual information {self.i_ab} outside [0, 1]")
        if not -1e-9 <= self.tau <= 1.0 + 1e-9:
            raise ValueError(f"raw-key reduction {self.tau} outside [0, 1]")
        if not 0.5 - 1e-6 <= self.p_coll <= 1.0 + 1e-9:
            raise ValueError(f"collision probability {self.p_coll} outside [1/2, 1]")

    def to_dict(self) -> dict:
        return {k: getattr(self, k)
                for k in ("z_c", "n", "r", "t2", "pi", "i_ab", "p_coll",
                          "tau", "g_ab")}


@dataclass(frozen=True)
class GainOptimum:
    z_c: float
    n: float
    g_max: float
    insecure: bool
    evaluations: int

    def to_dict(self) -> dict:
        return {"z_c": self.z_c, "n": self.n, "g_max": self.g_max,
                "insecure": self.insecure, "evaluations": self.evaluations}


def _signal_pair(family: Family, n: float, r: float, grid: Grid1D):
    cfg = ProtocolConfig(family=family, n=n, r=r, z_c=0.0)
    p_plus = marginal(encode(cfg.spec(), "B1", 1), "z1", grid)
    p_minus = marginal(encode(cfg.spec(), "B1", 0), "z1", grid)
    return p_plus.values, p_minus.values


def _information_integrand(p_plus: np.ndarray, p_minus: np.ndarray) -> np.ndarray:
    s = p_plus + p_minus
    return (xlogy(p_plus, p_plus) + xlogy(p_minus, p_minus) - xlogy(s, s)) / LN2 + s


def mutual_information(cfg: ProtocolConfig, grid: Grid1D | None = None) -> float:
    """Shannon information per accepted pulse between Alice and Bob.

    Evaluates (1/(2*Pi)) times the integral over |z| > z_c of
    p+*log2(p+) + p-*log2(p-) + (p+ + p-)*(1 - log2(p+ + p-)),
    with zero-density points contributing nothing.
    """
    if grid is None:
        grid = default_grid()
    p_plus, p_minus = _signal_pair(cfg.family, cfg.n, cfg.r, grid)
    pi = Density(grid, 0.5 * (p_plus + p_minus)).two_sided_tail(cfg.z_c)
    if pi <= 1e-10:
        raise UndefinedBitErrorRateError(
            "post-selection efficiency is zero; mutual information undefined")
    integrand = Density(grid, _information_integrand(p_plus, p_minus),
                        require_normalized=False)
    return integrand.two_sided_tail(cfg.z_c) / (2.0 * pi)


def collision_and_tau(n: float, r: float, family: Family,
                      grid: Grid1D | None = None) -> tuple[float, float]:
    """Collision probability of the two signal distributions and the
    raw-key reduction tau = 1 + log2(P_coll), both over the full line."""
    if n < 0:
        raise ValueError("intensity must be non-negative")
    if grid is None:
        grid = default_grid()
    p_plus, p_minus = _signal_pair(family, n, r, grid)
    s = p_plus + p_minus
    ratio = np.where(s > 1e-300, (p_plus**2 + p_minus**2) / np.where(s > 0, s, 1.0),
                     0.0)
    p_coll = 0.5 * float(np.trapezoid(ratio, grid.points))
    return p_coll, 1.0 + float(np.log2(p_coll))


def secure_key_gain(cfg: ProtocolConfig, ch: ChannelParams,
                    grid: Grid1D | None = None) -> GainReport:
    """Secret bits per pulse: (1/2) Pi(z_c, T^2 n) (I_AB(z_c, T^2 n) -
    tau((1-T^2) n)), with every quantity on the same state family.

    Negative values are reported as-is; they flag an insecure regime.
    """
    if grid is None:
        grid = default_grid()
    bob = replace(cfg, n=ch.t2 * cfg.n)
    p_plus, p_minus = _signal_pair(bob.family, bob.n, bob.r, grid)
    pi = Density(grid, 0.5 * (p_plus + p_minus)).two_sided_tail(cfg.z_c)
    if pi <= 1e-10:
        raise UndefinedBitErrorRateError(
            "post-selection efficiency is zero at this operating point")
    integrand = Density(grid, _information_integrand(p_plus, p_minus),
                        require_normalized=False)
    i_ab = integrand.two_sided_tail(cfg.z_c) / (2.0 * pi)
    p_coll, tau = collision_and_tau(ch.r2 * cfg.n, cfg.r, cfg.family, grid)
    g_ab = 0.5 * pi * (i_ab - tau)
    return GainReport(z_c=cfg.z_c, n=cfg.n, r=cfg.r, t2=ch.t2, pi=pi,
                      i_ab=i_ab, p_coll=p_coll, tau=tau, g_ab=g_ab)


class _GainEvaluator:
    """Caches the per-intensity tabulations behind the gain surface."""

    def __init__(self, family: Family, r: float, ch: ChannelParams,
                 grid: Grid1D):
        self.family = family
        self.r = r
        self.ch = ch
        self.grid = grid
        self._by_n: dict[float, tuple[Density, Density, float]] = {}
        self.evaluations = 0

    def _tab(self, n: float):
        key = round(n, 12)
        if key not in self._by_n:
            p_plus, p_minus = _signal_pair(self.family, self.ch.t2 * n, self.r,
                                           self.grid)
            correct = Density(self.grid, 0.5 * (p_plus + p_minus))
            integrand = Density(self.grid,
                                _information_integrand(p_plus, p_minus),
                                require_normalized=False)
            _, tau = collision_and_tau(self.ch.r2 * n, self.r, self.family,
                                       self.grid)
            self._by_n[key] = (correct, integrand, tau)
        return self._by_n[key]

    def gain(self, z_c: float, n: float) -> float:
        correct, integrand, tau = self._tab(n)
        self.evaluations += 1
        pi = correct.two_sided_tail(z_c)
        if pi <= 1e-12:
            return -np.inf
        i_ab = integrand.two_sided_tail(z_c) / (2.0 * pi)
        return 0.5 * pi * (i_ab - tau)


def optimize_gain(
    family: Family,
    r: float,
    ch: ChannelParams,
    bounds: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 4.0),
                                                               (0.02, 4.0)),
    coarse: int = 41,
    step_tol: float = 1e-3,
    grid: Grid1D | None = None,
) -> GainOptimum:
    """Deterministic maximization of the gain over (z_c, n).

    A coarse grid scan seeds a compass pattern search whose steps halve
    until both fall below ``step_tol``; ties prefer smaller z_c, then
    smaller n.  If the whole surface is non-positive the best point is
    still returned, flagged insecure.
    """
    (z_lo, z_hi), (n_lo, n_hi) = bounds
    if not (0.0 <= z_lo < z_hi <= 4.0 and 0.0 < n_lo < n_hi <= 4.0):
        raise ValueError("bounds must lie within [0, 4] x (0, 4]")
    if grid is None:
        grid = default_grid()
    ev = _GainEvaluator(family, r, ch, grid)

    zs = np.linspace(z_lo, z_hi, coarse)
    ns = np.linspace(n_lo, n_hi, coarse)
    best = (-np.inf, z_lo, n_lo)
    for n in ns:
        for z in zs:
            g = ev.gain(z, n)
            if g > best[0] + 1e-15 or (
                abs(g - best[0]) <= 1e-15 and (z, n) < (best[1], best[2])
            ):
                best = (g, z, n)

    g_best, z_best, n_best = best
    dz = (z_hi - z_lo) / (coarse - 1) / 2.0
    dn = (n_hi - n_lo) / (coarse - 1) / 2.0
    while dz >= step_tol or dn >= step_tol:
        moved = False
        for cand_z, cand_n in ((z_best - dz, n_best), (z_best + dz, n_best),
                               (z_best, n_best - dn), (z_best, n_best + dn)):
            cz = float(np.clip(cand_z, z_lo, z_hi))
            cn = float(np.clip(cand_n, n_lo, n_hi))
            g = ev.gain(cz, cn)
            better = g > g_best + 1e-15
            tied_smaller = abs(g - g_best) <= 1e-15 and (cz, cn) < (z_best, n_best)
            if better or tied_smaller:
                g_best, z_best, n_best = g, cz, cn
                moved = True
        if not moved:
            dz, dn = dz / 2.0, dn / 2.0
    return GainOptimum(z_c=z_best, n=n_best, g_max=g_best,
                       insecure=bool(g_best <= 0.0),
                       evaluations=ev.evaluations)


def loss_sweep(families, r: float, z_c_values, r2_values, n: float = 1.0,
               grid: Grid1D | None = None) -> list[dict]:
    """Gain versus loss fraction for each family and threshold."""
    rows = []
    for family in families:
        for z_c in z_c_values:
            cfg = ProtocolConfig(family=family, n=n, r=r, z_c=z_c)
            for r2 in r2_values:
                rep = secure_key_gain(cfg, ChannelParams(t2=1.0 - r2), grid)
                rows.append({"family": family.value, "z_c": z_c, "r2": r2,
                             "g_ab": rep.g_ab})
    return rows


def threshold_sweep(family: Family, r: float, z_c_values, n: float = 1.0,
                    t2: float = 0.5, grid: Grid1D | None = None) -> list[dict]:
    """Gain, information, accepted fraction and error rate versus z_c."""
    from .protocol import bit_error_rate, bit_probabilities

    rows = []
    ch = ChannelParams(t2=t2)
    for z_c in z_c_values:
        cfg = ProtocolConfig(family=family, n=n, r=r, z_c=z_c)
        rep = secure_key_gain(cfg, ch, grid)
        bob = replace(cfg, n=ch.t2 * cfg.n)
        theta = bit_error_rate(bob, grid)
        _, _, r_acc = bit_probabilities(bob, grid)
        rows.append({"z_c": z_c, "theta": theta, "i_ab": rep.i_ab,
                     "r_acc": r_acc, "g_ab": rep.g_ab})
    return rows


def family_comparison(families, r: float, z_c_values, r2_values,
                      n: float = 1.0, grid: Grid1D | None = None) -> dict:
    """Tabular comparison data: gain-versus-loss curves for every family
    plus the threshold behavior of the first family at 50% loss."""
    families = [Family.parse(f) if isinstance(f, str) else f for f in families]
    dense_zc = np.round(np.linspace(0.0, 2.0, 41), 10)
    return {
        "loss_sweep": loss_sweep(families, r, z_c_values, r2_values, n, grid),
        "threshold_sweep": threshold_sweep(families[0], r, dense_zc, n, 0.5,
                                           grid),
    }
