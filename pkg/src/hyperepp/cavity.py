"""Single-photon reflection off an NV-center/single-sided-cavity unit.

The unit is characterized by the NV-cavity coupling ``g``, the cavity damping
rate ``kappa``, the NV decay rate ``gamma`` and three angular frequencies
(cavity mode, NV transition, probe photon).  A circularly polarized photon
reflecting off the unit picks up a complex amplitude that depends on whether
its polarization addresses the populated spin transition:

* coupled combination (R with spin +1, or L with spin -1): amplitude ``r``
* uncoupled combination (R with -1, or L with +1): empty-cavity amplitude ``r0``

At triple resonance ``r = (4 g^2 - kappa gamma) / (4 g^2 + kappa gamma)`` and
``r0 = -1`` exactly; the ideal (large-cooperativity) limit replaces these with
+1 / -1.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CavityParams:
    """Physical rates and frequencies of one NV-cavity unit (one common angular unit)."""

    g: float
    kappa: float
    gamma: float
    omega_c: float
    omega_0: float
    omega_p: float

    def __post_init__(self) -> None:
        values = (self.g, self.kappa, self.gamma, self.omega_c, self.omega_0, self.omega_p)
        if not all(math.isfinite(v) for v in values):
            raise ArgumentError("cavity parameters must be finite")
        if self.g < 0:
            raise ArgumentError("coupling strength g must be >= 0")
        if self.kappa <= 0 or self.gamma <= 0:
            raise ArgumentError("kappa and gamma must be > 0")

    @property
    def cooperativity(self) -> float:
        """Dimensionless coupling figure g / sqrt(kappa * gamma)."""
        return self.g / math.sqrt(self.kappa * self.gamma)

    @property
    def resonant(self) -> bool:
        return self.omega_0 == self.omega_c == self.omega_p

    @classmethod
    def at_resonance(cls, g: float, kappa: float, gamma: float, omega: float = 0.0) -> "CavityParams":
        return cls(g=g, kappa=kappa, gamma=gamma, omega_c=omega, omega_0=omega, omega_p=omega)

    @classmethod
    def from_over_2pi(
        cls,
        g: float,
        kappa: float,
        gamma: float,
        omega_c: float = 0.0,
        omega_0: float = 0.0,
        omega_p: float = 0.0,
    ) -> "CavityParams":
        """Build from rates quoted as nu = omega / 2pi (the usual experimental convention)."""
        return cls(
            g=TWO_PI * g,
            kappa=TWO_PI * kappa,
            gamma=TWO_PI * gamma,
            omega_c=TWO_PI * omega_c,
            omega_0=TWO_PI * omega_0,
            omega_p=TWO_PI * omega_p,
        )


def barclay_preset() -> CavityParams:
    """Chip-based microcavity working point: [g, kappa, gamma]/2pi = [0.30, 26, 0.0004] GHz.

    gamma is the narrow-band (zero-phonon-line) decay rate while g is the total
    coupling rate; this pairing is the one that yields the quoted r ~ 0.94 at
    triple resonance.
    """
    return CavityParams.from_over_2pi(g=0.30, kappa=26.0, gamma=0.0004)


class InteractionMode(enum.Enum):
    """Ideal photon-NV interface (exact +/-1 factors) vs realistic reflection amplitudes."""

    IDEAL = "ideal"
    REALISTIC = "realistic"


@dataclass(frozen=True)
class ReflectionPair:
    """Reflection amplitudes of one unit: coupled (r) and empty-cavity (r0)."""

    r: complex
    r0: complex

    def __post_init__(self) -> None:
        tol = 1.0 + 1e-12
        if abs(self.r) > tol or abs(self.r0) > tol:
            raise ArgumentError("reflection amplitudes must have magnitude <= 1")


IDEAL_PAIR = ReflectionPair(r=1.0 + 0.0j, r0=-1.0 + 0.0j)


def reflection_coupled(params: CavityParams) -> complex:
    """Reflection amplitude of the coupled NV-cavity unit at the photon frequency."""
    dc = params.omega_c - params.omega_p
    d0 = params.omega_0 - params.omega_p
    atom = 1j * d0 + params.gamma / 2.0
    num = (1j * dc - params.kappa / 2.0) * atom + params.g**2
    den = (1j * dc + params.kappa / 2.0) * atom + params.g**2
    if den == 0:
        raise DomainError("reflection amplitude diverges (zero response denominator)")
    r = num / den
    if not (math.isfinite(r.real) and math.isfinite(r.imag)):
        raise DomainError("non-finite reflection amplitude")
    return r


def reflection_empty(params: CavityParams) -> complex:
    """Reflection amplitude of the same cavity with the NV decoupled (g = 0)."""
    dc = params.omega_c - params.omega_p
    den = 1j * dc + params.kappa / 2.0
    if den == 0:
        raise DomainError("reflection amplitude diverges (zero response denominator)")
    r0 = (1j * dc - params.kappa / 2.0) / den
    if not (math.isfinite(r0.real) and math.isfinite(r0.imag)):
        raise DomainError("non-finite reflection amplitude")
    return r0


def reflection_pair(params: CavityParams) -> ReflectionPair:
    return ReflectionPair(r=reflection_coupled(params), r0=reflection_empty(params))


def resonant_reflection(g: float, kappa: float, gamma: float) -> ReflectionPair:
    """Triple-resonance amplitudes: r = (4g^2 - kg)/(4g^2 + kg), r0 = -1 exactly."""
    four_g2 = 4.0 * g * g
    kg = kappa * gamma
    return ReflectionPair(r=complex((four_g2 - kg) / (four_g2 + kg)), r0=-1.0 + 0.0j)


def reflection_from_cooperativity(x: float) -> ReflectionPair:
    """Resonant amplitudes parameterized by x = g / sqrt(kappa * gamma)."""
    if x < 0:
        raise ArgumentError("cooperativity must be >= 0")
    return ReflectionPair(r=complex((4.0 * x * x - 1.0) / (4.0 * x * x + 1.0)), r0=-1.0 + 0.0j)


def scatter(pol: str, spin: int, mode: InteractionMode, refl: ReflectionPair = IDEAL_PAIR) -> complex:
    """Amplitude factor a (polarization, NV spin) component acquires on one reflection.

    ``pol`` is "R" or "L", ``spin`` is +1 or -1.  The coupled combinations are
    (R, +1) and (L, -1).
    """
    if pol not in ("R", "L"):
        raise ArgumentError(f"polarization must be 'R' or 'L', got {pol!r}")
    if spin not in (+1, -1):
        raise ArgumentError(f"spin must be +1 or -1, got {spin!r}")
    coupled = (pol == "R") == (spin == +1)
    if mode is InteractionMode.IDEAL:
        return 1.0 + 0.0j if coupled else -1.0 + 0.0j
    return complex(refl.r) if coupled else complex(refl.r0)


def scatter_factors(
    pol_bits: np.ndarray, spin_bits: np.ndarray, mode: InteractionMode, refl: ReflectionPair
) -> np.ndarray:
    """Vectorized `scatter` over bit arrays (polarization bit: 0=R,1=L; spin bit: 0=+1,1=-1)."""
    coupled = pol_bits == spin_bits
    if mode is InteractionMode.IDEAL:
        return np.where(coupled, 1.0 + 0.0j, -1.0 + 0.0j)
    return np.where(coupled, complex(refl.r), complex(refl.r0))
