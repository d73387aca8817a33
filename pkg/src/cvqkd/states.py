"""Signal-state families and the four phase-encoded pulses Alice sends.

Four families are supported: coherent, squeezed coherent (scs), single
photon added-then-subtracted coherent (pascs, squeezing fixed at zero),
and single photon added-then-subtracted squeezed coherent (spasscs).

A family state at amplitude ``|alpha|`` is built on the real quadrature
axis and the encoding phase is applied as a whole-state phase-space
rotation, so the four pulses of one operating point are exact rotations
of each other.  For phases 0 and pi this coincides with displacing by
``alpha * e^{i*phase}`` directly; for the conjugate basis it keeps the
two bases statistically equivalent, which the protocol layer relies on.

The family squeezing parameter follows the amplitude-squeezed
convention: r > 0 narrows the quadrature that carries the displacement
(variance e^{-2r}/4 on z1) and r < 0 narrows the conjugate one.  This
is the orientation that makes the added-subtracted squeezed family
strongly non-classical at the reference operating points.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .fock import (
    DEFAULT_DIM,
    MAX_DIM,
    FockState,
    UnderTruncationError,
    apply_ladder,
    displace,
    rotate,
    squeeze,
    vacuum,
)

ENCODING_PHASES = {
    ("B1", 1): 0.0,
    ("B1", 0): np.pi,
    ("B2", 1): np.pi / 2,
    ("B2", 0): 3 * np.pi / 2,
}


class Family(str, Enum):
    COHERENT = "coherent"
    SQUEEZED = "scs"
    ADDED_SUBTRACTED = "pascs"
    ADDED_SUBTRACTED_SQUEEZED = "spasscs"

    @classmethod
    def parse(cls, token: str) -> "Family":
        try:
            return cls(token.strip().lower())
        except ValueError:
            valid = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown state family {token!r}; expected one of {valid}")

    @property
    def squeezed(self) -> bool:
        return self in (Family.SQUEEZED, Family.ADDED_SUBTRACTED_SQUEEZED)

    @property
    def photon_added_subtracted(self) -> bool:
        return self in (Family.ADDED_SUBTRACTED, Family.ADDED_SUBTRACTED_SQUEEZED)


@dataclass(frozen=True)
class StateSpec:
    """Parameter record naming one signal state.

    ``alpha`` is the complex field amplitude; the pulse intensity is
    n = |alpha|^2, a protocol label rather than the physical mean photon
    number of the non-Gaussian families.  ``phase`` is one of
    {0, pi/2, pi, 3pi/2} or None when the encoding has not been fixed.
    """

    family: Family
    alpha: complex = 0.0
    r: float = 0.0
    phase: float | None = None

    def __post_init__(self):
        if not self.family.squeezed and self.r != 0.0:
            # r is not a degree of freedom for these families
            object.__setattr__(self, "r", 0.0)
        if self.phase is not None:
            allowed = (0.0, np.pi / 2, np.pi, 3 * np.pi / 2)
            if not any(abs(self.phase - p) < 1e-12 for p in allowed):
                raise ValueError("phase must be one of 0, pi/2, pi, 3pi/2")

    @property
    def intensity(self) -> float:
        return abs(self.alpha) ** 2

    def to_record(self) -> dict:
        """Flat key-value form used by the CLI config."""
        return {
            "family": self.family.value,
            "alpha_re": float(np.real(self.alpha)),
            "alpha_im": float(np.imag(self.alpha)),
            "r": float(self.r),
            "phase": float(self.phase) if self.phase is not None else "",
        }

    @classmethod
    def from_record(cls, record: dict) -> "StateSpec":
        phase = record.get("phase", "")
        return cls(
            family=Family.parse(str(record["family"])),
            alpha=complex(float(record.get("alpha_re", 0.0)),
                          float(record.get("alpha_im", 0.0))),
            r=float(record.get("r", 0.0)),
            phase=None if phase in ("", None) else float(phase),
        )


@dataclass(frozen=True)
class NormalizationRecord:
    """Squared norm of the raw photon added-then-subtracted state.

    For the default add-then-subtract order this equals <(n+1)^2> of the
    underlying Gaussian state and can never fall below 1.
    """

    n_const: float

    def __post_init__(self):
        if self.n_const <= 0.0:
            raise ValueError("normalization constant must be positive")


def build_state(
    spec: StateSpec,
    dim: int = DEFAULT_DIM,
    subtract_before_add: bool = False,
    displace_after_squeeze: bool = False,
) -> tuple[FockState, NormalizationRecord]:
    """Construct the normalized signal state and its normalization record.

    The operator chain per family (rightmost first) is D for coherent,
    S*D for scs, a*a^dag*D for pascs and a*a^dag*S*D for spasscs, with the
    encoding phase applied afterwards as a rotation.  The truncation is
    doubled (up to 512) until the tail-mass invariant holds.

    The two keyword flags are for sensitivity studies only:
    ``subtract_before_add`` applies a^dag*a instead of a*a^dag, and
    ``displace_after_squeeze`` swaps the displacement and squeezer order.
    """
    amplitude = abs(spec.alpha)
    total_phase = float(np.angle(spec.alpha)) + (spec.phase or 0.0)
    current = dim
    while True:
        try:
            state, record = _build_at(
                spec.family, amplitude, spec.r, current,
                subtract_before_add, displace_after_squeeze,
            )
            break
        except UnderTruncationError:
            if current >= MAX_DIM:
                raise
            current = min(MAX_DIM, 2 * current)
    return rotate(state, total_phase), record


def _build_at(family, amplitude, r, dim, subtract_before_add,
              displace_after_squeeze):
    # fock.squeeze(st, s) widens z1 for s > 0, so the amplitude-squeezed
    # family convention maps r onto the generator argument -r
    st = vacuum(dim)
    if displace_after_squeeze:
        if family.squeezed:
            st = squeeze(st, -r)
        st = displace(st, amplitude)
    else:
        st = displace(st, amplitude)
        if family.squeezed:
            st = squeeze(st, -r)
    if family.photon_added_subtracted:
        first, second = ("annihilate", "create") if subtract_before_add else (
            "create", "annihilate")
        st, _ = apply_ladder(st, first)
        st, n_const = apply_ladder(st, second)
        if n_const <= 0.0:
            raise ValueError("photon operations annihilated the state")
        st = st.normalized()
    else:
        n_const = 1.0
    if st.is_under_truncated():
        raise UnderTruncationError("state fills the truncation guard band",
                                   st.tail_mass())
    return st, NormalizationRecord(n_const)


def encode(spec: StateSpec, basis: str, bit: int,
           dim: int = DEFAULT_DIM) -> FockState:
    """Alice's pulse for one (basis, bit) choice.

    Bit 1 maps to phase 0 (basis B1) or pi/2 (basis B2); bit 0 to the
    opposite pulses at pi and 3pi/2.
    """
    if spec.phase is not None:
        raise ValueError("spec.phase must be unset; encode derives it")
    key = (basis, int(bit))
    if key not in ENCODING_PHASES:
        raise ValueError("basis must be 'B1' or 'B2' and bit 0 or 1")
    state, _ = build_state(replace(spec, phase=ENCODING_PHASES[key]), dim=dim)
    return state
