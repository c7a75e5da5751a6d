"""Primitive gate library: wave plates, beam-splitter Hadamards, NV pulses,
and the conditional NV-scattering primitive.

CPBS elements, optical switches and delay lines are not modeled as objects;
their net effect is captured by *which* basis components a gate touches.  An
`ArmCondition` names those components by required bit values of the photon's
own DOFs (e.g. polarization arm L, or spatial arm l), so a plate physically
sitting in one interferometer arm becomes a conditioned diagonal operator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cavity import InteractionMode, ReflectionPair, IDEAL_PAIR, scatter_factors
from .errors import ArgumentError
from .hilbert import (
    BIT_SYMBOLS,
    QubitLabel,
    StateVector,
    apply_single,
    bit_values,
    nv_qubit,
    photon_qubit,
    scale_amplitudes,
)

SQRT_HALF = 1.0 / math.sqrt(2.0)

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) * SQRT_HALF
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
IDENTITY = np.eye(2, dtype=np.complex128)

_ACTION_MATRICES = {
    "hadamard": HADAMARD,
    "sigma_z": SIGMA_Z,
    "sigma_x": SIGMA_X,
    "identity": IDENTITY,
}


@dataclass(frozen=True)
class ArmCondition:
    """Conjunction of required bit values over a photon's DOFs (empty = all components)."""

    requirements: tuple[tuple[str, int], ...] = ()

    def mask(self, state: StateVector, photon: str) -> np.ndarray:
        selected = np.ones(state.amps.size, dtype=bool)
        for dof, bit in self.requirements:
            selected &= bit_values(state, photon_qubit(photon, dof)) == bit
        return selected

    def __str__(self) -> str:
        if not self.requirements:
            return "all components"
        return " & ".join(f"{dof}={BIT_SYMBOLS[dof][bit]}" for dof, bit in self.requirements)


ALWAYS = ArmCondition()


def in_arm(dof: str, symbol: str) -> ArmCondition:
    """Condition selecting the components routed through one arm, e.g. in_arm("P", "L")."""
    if dof not in BIT_SYMBOLS or dof == "NV":
        raise ArgumentError(f"unknown DOF {dof!r}")
    symbols = BIT_SYMBOLS[dof]
    if symbol not in symbols:
        raise ArgumentError(f"unknown basis symbol {symbol!r} for DOF {dof}")
    return ArmCondition(((dof, symbols.index(symbol)),))


@dataclass(frozen=True)
class PlateGate:
    """Unconditioned single-qubit element (wave plate, beam splitter, NV microwave pulse)."""

    target: QubitLabel
    action: str  # "hadamard" | "sigma_z" | "sigma_x" | "identity"


@dataclass(frozen=True)
class ArmPhasePlate:
    """sigma_z^P plate inserted in the arm(s) selected by `condition` on one photon."""

    photon: str
    condition: ArmCondition


@dataclass(frozen=True)
class ConditionalScatter:
    """Reflection off one NV-cavity unit for the components selected by `condition`.

    Selected components acquire the (polarization bit, spin bit) scattering
    amplitude; everything else passes by with factor 1.
    """

    photon: str
    condition: ArmCondition
    unit: str
    mode: InteractionMode
    refl: ReflectionPair


GateOp = PlateGate | ArmPhasePlate | ConditionalScatter


# Constructors named after the optical elements they model.

def hwp_hadamard_p(photon: str) -> PlateGate:
    """Half-wave plate: R -> (R+L)/sqrt2, L -> (R-L)/sqrt2."""
    return PlateGate(photon_qubit(photon, "P"), "hadamard")


def sigma_z_p(photon: str) -> PlateGate:
    return PlateGate(photon_qubit(photon, "P"), "sigma_z")


def sigma_x_p(photon: str) -> PlateGate:
    return PlateGate(photon_qubit(photon, "P"), "sigma_x")


def bs_hadamard_f(photon: str) -> PlateGate:
    """Beam splitter mixing the r/l spatial modes: r -> (r+l)/sqrt2, l -> (r-l)/sqrt2."""
    return PlateGate(photon_qubit(photon, "F"), "hadamard")


def bs_hadamard_s(photon: str) -> PlateGate:
    return PlateGate(photon_qubit(photon, "S"), "hadamard")


def sigma_z_f(photon: str) -> PlateGate:
    return PlateGate(photon_qubit(photon, "F"), "sigma_z")


def sigma_z_s(photon: str) -> PlateGate:
    return PlateGate(photon_qubit(photon, "S"), "sigma_z")


def sigma_x_f(photon: str) -> PlateGate:
    return PlateGate(photon_qubit(photon, "F"), "sigma_x")


def sigma_x_s(photon: str) -> PlateGate:
    return PlateGate(photon_qubit(photon, "S"), "sigma_x")


def dof_gate(photon: str, dof: str, action: str) -> PlateGate:
    """Generic per-DOF plate (covers the T DOF as well)."""
    return PlateGate(photon_qubit(photon, dof), action)


def nv_hadamard(unit: str) -> PlateGate:
    """Microwave pulse: |+1> -> (|+1>+|-1>)/sqrt2, |-1> -> (|+1>-|-1>)/sqrt2."""
    return PlateGate(nv_qubit(unit), "hadamard")


def arm_sigma_z_p(photon: str, condition: ArmCondition) -> ArmPhasePlate:
    return ArmPhasePlate(photon, condition)


def conditional_scatter(
    photon: str,
    condition: ArmCondition,
    unit: str,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> ConditionalScatter:
    return ConditionalScatter(photon, condition, unit, mode, refl)


def matrix_of(gate: GateOp) -> np.ndarray:
    """Local operator of a gate.

    PlateGate / ArmPhasePlate: the 2x2 matrix acting on the targeted qubit
    (the ArmPhasePlate applies it only inside its arm).  ConditionalScatter:
    the 2x2 table of diagonal factors indexed [polarization bit, spin bit].
    """
    if isinstance(gate, PlateGate):
        return _ACTION_MATRICES[gate.action].copy()
    if isinstance(gate, ArmPhasePlate):
        return SIGMA_Z.copy()
    if isinstance(gate, ConditionalScatter):
        bits = np.array([[0, 0], [1, 1]]), np.array([[0, 1], [0, 1]])
        return scatter_factors(bits[0], bits[1], gate.mode, gate.refl)
    raise ArgumentError(f"unknown gate {gate!r}")


def diagonal_factors(state: StateVector, gate: GateOp) -> np.ndarray | None:
    """Per-basis-state factor vector of a diagonal gate, or None if not diagonal."""
    if isinstance(gate, ArmPhasePlate):
        selected = gate.condition.mask(state, gate.photon)
        pol = bit_values(state, photon_qubit(gate.photon, "P"))
        return np.where(selected & (pol == 1), -1.0 + 0.0j, 1.0 + 0.0j)
    if isinstance(gate, ConditionalScatter):
        selected = gate.condition.mask(state, gate.photon)
        pol = bit_values(state, photon_qubit(gate.photon, "P"))
        spin = bit_values(state, nv_qubit(gate.unit))
        return np.where(selected, scatter_factors(pol, spin, gate.mode, gate.refl), 1.0 + 0.0j)
    if isinstance(gate, PlateGate) and gate.action in ("sigma_z", "identity"):
        if gate.action == "identity":
            return np.ones(state.amps.size, dtype=np.complex128)
        bits = bit_values(state, gate.target)
        return np.where(bits == 1, -1.0 + 0.0j, 1.0 + 0.0j)
    return None


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Apply one gate; untouched qubits are unaffected.  Returns a new state."""
    if isinstance(gate, PlateGate) and gate.action not in ("sigma_z", "identity"):
        return apply_single(state, gate.target, _ACTION_MATRICES[gate.action])
    factors = diagonal_factors(state, gate)
    if factors is None:
        raise ArgumentError(f"unknown gate {gate!r}")
    return scale_amplitudes(state, factors)


_DIAGONAL_CACHE: dict[tuple, np.ndarray] = {}
_DIAGONAL_CACHE_LIMIT = 256


def _combined_factors(state: StateVector, gates: tuple[GateOp, ...]) -> np.ndarray | None:
    # The factor vector depends only on the register layout and the gate run,
    # which recur identically across enumeration branches; memoize it.
    key = (state.register, gates)
    cached = _DIAGONAL_CACHE.get(key)
    if cached is not None:
        return cached
    total: np.ndarray | None = None
    for gate in gates:
        factors = diagonal_factors(state, gate)
        if factors is None:
            raise ArgumentError(f"gate {gate!r} is not diagonal")
        total = factors if total is None else total * factors
    if total is not None:
        if len(_DIAGONAL_CACHE) >= _DIAGONAL_CACHE_LIMIT:
            _DIAGONAL_CACHE.clear()
        total.setflags(write=False)
        _DIAGONAL_CACHE[key] = total
    return total


def apply_diagonal(state: StateVector, gates: list[GateOp] | tuple[GateOp, ...]) -> StateVector:
    """Apply a run of mutually commuting diagonal gates as one multiplication."""
    total = _combined_factors(state, tuple(gates))
    return state if total is None else scale_amplitudes(state, total)


def apply_circuit(state: StateVector, gates: list[GateOp] | tuple[GateOp, ...]) -> StateVector:
    for gate in gates:
        state = apply_gate(state, gate)
    return state


def scatter_photon_nv(
    state: StateVector,
    photon: str,
    unit: str,
    condition: ArmCondition,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> StateVector:
    """Route the selected components of `photon` off the NV `unit` (see ConditionalScatter)."""
    return apply_gate(state, conditional_scatter(photon, condition, unit, mode, refl))
