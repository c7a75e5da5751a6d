"""Composite devices: parity-check QNDs, the NV-assisted polarization SWAP, and
the single-photon SWAPs between polarization and a spatial DOF.

Wiring conventions (fixed here, validated by the formula oracles in tests):

* Polarization parity check: per photon, the L arm reflects off the NV and a
  sigma_z^P plate follows.  Even-parity inputs leave the NV spin in
  (|+1>+|-1>)/sqrt2, odd-parity inputs flip it to (|+1>-|-1>)/sqrt2, with the
  photonic amplitudes untouched in the ideal limit.
* Spatial parity check: per photon, the l arm (first momentum DOF) reflects
  off unit 1 and the I arm (second momentum DOF) off unit 2, each arm carrying
  its own sigma_z^P plate.  Unit 1 flags the r/l parity, unit 2 the E/I parity.
* Polarization SWAP between two photons: L arms scatter, NV Hadamard,
  polarization Hadamards, R arms scatter, polarization Hadamards, NV Hadamard,
  NV measured in {|+1>, |-1>}; on +1 a sigma_z^P feed-forward lands both
  photons on the swapped state exactly.

Each device has three faces: `*_evolve` returns the full pre-measurement state
(photons + NV ancillas) used by the fidelity/efficiency oracles; `*_branches`
returns every measurement branch with the ancillas removed; the plain function
returns the most probable branch (deterministic for Bell-basis ideal inputs).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cavity import IDEAL_PAIR, InteractionMode, ReflectionPair
from .errors import ArgumentError, DomainError
from .hilbert import (
    StateVector,
    measure_remove,
    nv_qubit,
    photon_qubit,
    states_allclose,
    swap_qubits,
    tensor,
)
from .optics import (
    apply_diagonal,
    apply_gate,
    arm_sigma_z_p,
    conditional_scatter,
    hwp_hadamard_p,
    in_arm,
    nv_hadamard,
    sigma_z_p,
)

SQRT_HALF = 1.0 / math.sqrt(2.0)

# NV measurement bases.
PHI_BASIS = ((SQRT_HALF, SQRT_HALF), (SQRT_HALF, -SQRT_HALF))  # {phi+, phi-}
SPIN_BASIS = ((1.0, 0.0), (0.0, 1.0))  # {+1, -1}

EVEN, ODD = "even", "odd"


@dataclass(frozen=True)
class QndOutcome:
    """Parity flags read off the NV spins; survival is the pre-measurement norm^2."""

    survival: float
    p_parity: str | None = None
    f_parity: str | None = None
    s_parity: str | None = None


@dataclass(frozen=True)
class SwapOutcome:
    nv_result: int  # +1 or -1
    corrections_applied: tuple[str, ...]
    survival: float


def attach_nv_plus(state: StateVector, unit: str) -> StateVector:
    """Append an NV spin prepared in (|+1> + |-1>)/sqrt2."""
    nv = StateVector((nv_qubit(unit),), np.array([SQRT_HALF, SQRT_HALF], dtype=np.complex128))
    return tensor(state, nv)


def _require_photons(state: StateVector, photons: tuple[str, ...], dofs: tuple[str, ...]) -> None:
    for photon in photons:
        for dof in dofs:
            if photon_qubit(photon, dof) not in state.register:
                raise ArgumentError(f"photon {photon} lacks a {dof} qubit")


# --- Polarization parity-check QND ---------------------------------------

def p_qnd_evolve(
    state: StateVector,
    photon1: str,
    photon2: str,
    unit: str,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> StateVector:
    """Optical evolution only: NV attached in (|+1>+|-1>)/sqrt2 and left unmeasured."""
    _require_photons(state, (photon1, photon2), ("P",))
    if state.norm2() <= 0:
        raise DomainError("zero-norm input state")
    st = attach_nv_plus(state, unit)
    gates = []
    for photon in (photon1, photon2):
        gates.append(conditional_scatter(photon, in_arm("P", "L"), unit, mode, refl))
        gates.append(sigma_z_p(photon))
    return apply_diagonal(st, gates)


def p_qnd_branches(
    state: StateVector,
    photon1: str,
    photon2: str,
    unit: str,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> list[tuple[QndOutcome, float, StateVector]]:
    """All measurement branches as (outcome, probability, post-state without the NV)."""
    st = p_qnd_evolve(state, photon1, photon2, unit, mode, refl)
    survival, branches = measure_remove(st, nv_qubit(unit), PHI_BASIS, (EVEN, ODD))
    return [(QndOutcome(survival=survival, p_parity=name), prob, post) for name, prob, post in branches]


def p_qnd(
    state: StateVector,
    photon1: str,
    photon2: str,
    unit: str,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> tuple[StateVector, QndOutcome]:
    """Most probable branch (the deterministic one for Bell-basis ideal inputs)."""
    branches = p_qnd_branches(state, photon1, photon2, unit, mode, refl)
    outcome, _, post = max(branches, key=lambda item: item[1])
    return post, outcome


# --- Spatial-mode parity-check QND ----------------------------------------

def s_qnd_evolve(
    state: StateVector,
    photon1: str,
    photon2: str,
    unit1: str,
    unit2: str,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> StateVector:
    _require_photons(state, (photon1, photon2), ("P", "F", "S"))
    if state.norm2() <= 0:
        raise DomainError("zero-norm input state")
    if unit1 == unit2:
        raise ArgumentError("the two NV units must be distinct")
    st = attach_nv_plus(state, unit1)
    st = attach_nv_plus(st, unit2)
    gates = []
    for photon in (photon1, photon2):
        gates.append(conditional_scatter(photon, in_arm("F", "l"), unit1, mode, refl))
        gates.append(arm_sigma_z_p(photon, in_arm("F", "l")))
        gates.append(conditional_scatter(photon, in_arm("S", "I"), unit2, mode, refl))
        gates.append(arm_sigma_z_p(photon, in_arm("S", "I")))
    return apply_diagonal(st, gates)


def s_qnd_branches(
    state: StateVector,
    photon1: str,
    photon2: str,
    unit1: str,
    unit2: str,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> list[tuple[QndOutcome, float, StateVector]]:
    st = s_qnd_evolve(state, photon1, photon2, unit1, unit2, mode, refl)
    survival, f_branches = measure_remove(st, nv_qubit(unit1), PHI_BASIS, (EVEN, ODD))
    results = []
    for f_name, f_prob, f_state in f_branches:
        _, s_branches = measure_remove(f_state, nv_qubit(unit2), PHI_BASIS, (EVEN, ODD))
        for s_name, s_prob, post in s_branches:
            outcome = QndOutcome(survival=survival, f_parity=f_name, s_parity=s_name)
            results.append((outcome, f_prob * s_prob, post))
    return results


def s_qnd(
    state: StateVector,
    photon1: str,
    photon2: str,
    unit1: str,
    unit2: str,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> tuple[StateVector, QndOutcome]:
    branches = s_qnd_branches(state, photon1, photon2, unit1, unit2, mode, refl)
    outcome, _, post = max(branches, key=lambda item: item[1])
    return post, outcome


# --- Polarization SWAP between two photons ---------------------------------

def pp_swap_evolve(
    state: StateVector,
    photon_x: str,
    photon_y: str,
    unit: str,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> StateVector:
    _require_photons(state, (photon_x, photon_y), ("P",))
    if state.norm2() <= 0:
        raise DomainError("zero-norm input state")
    st = attach_nv_plus(state, unit)
    st = apply_diagonal(
        st, [conditional_scatter(p, in_arm("P", "L"), unit, mode, refl) for p in (photon_x, photon_y)]
    )
    st = apply_gate(st, nv_hadamard(unit))
    for photon in (photon_x, photon_y):
        st = apply_gate(st, hwp_hadamard_p(photon))
    st = apply_diagonal(
        st, [conditional_scatter(p, in_arm("P", "R"), unit, mode, refl) for p in (photon_x, photon_y)]
    )
    for photon in (photon_x, photon_y):
        st = apply_gate(st, hwp_hadamard_p(photon))
    st = apply_gate(st, nv_hadamard(unit))
    return st


def pp_swap_branches(
    state: StateVector,
    photon_x: str,
    photon_y: str,
    unit: str,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> list[tuple[SwapOutcome, float, StateVector]]:
    """Both NV outcomes with feed-forward applied (+1 branch gets sigma_z^P on both photons)."""
    st = pp_swap_evolve(state, photon_x, photon_y, unit, mode, refl)
    survival, branches = measure_remove(st, nv_qubit(unit), SPIN_BASIS, ("+1", "-1"))
    results = []
    for name, prob, post in branches:
        corrections: tuple[str, ...] = ()
        if name == "+1":
            post = apply_gate(post, sigma_z_p(photon_x))
            post = apply_gate(post, sigma_z_p(photon_y))
            corrections = (f"sigma_z_p({photon_x})", f"sigma_z_p({photon_y})")
        outcome = SwapOutcome(nv_result=+1 if name == "+1" else -1,
                              corrections_applied=corrections, survival=survival)
        results.append((outcome, prob, post))
    return results


def pp_swap_apply(
    state: StateVector,
    photon_x: str,
    photon_y: str,
    unit: str,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> tuple[StateVector, SwapOutcome]:
    """SWAP within a joint state; ideal-mode branches agree after feed-forward (asserted)."""
    branches = pp_swap_branches(state, photon_x, photon_y, unit, mode, refl)
    if mode is InteractionMode.IDEAL and len(branches) == 2:
        assert states_allclose(branches[0][2], branches[1][2], atol=1e-10)
    outcome, _, post = max(branches, key=lambda item: item[1])
    return post, outcome


def _single_photon_of(state: StateVector) -> str:
    photons = {lbl.owner for lbl in state.register if lbl.kind == "photon"}
    if len(photons) != 1:
        raise ArgumentError("expected a state holding exactly one photon")
    return photons.pop()


def pp_swap(
    state_a: StateVector,
    state_a2: StateVector,
    unit: str,
    mode: InteractionMode,
    refl: ReflectionPair = IDEAL_PAIR,
) -> tuple[StateVector, SwapOutcome]:
    """SWAP the polarization states of two separately supplied photons."""
    photon_x = _single_photon_of(state_a)
    photon_y = _single_photon_of(state_a2)
    if photon_x == photon_y:
        raise ArgumentError("the two photons must be distinct")
    return pp_swap_apply(tensor(state_a, state_a2), photon_x, photon_y, unit, mode, refl)


# --- Single-photon SWAPs between polarization and a spatial DOF -------------

def _dof_swap(state: StateVector, photon: str, dof: str) -> StateVector:
    labels = (photon_qubit(photon, "P"), photon_qubit(photon, dof))
    for lbl in labels:
        if lbl not in state.register:
            raise ArgumentError(f"photon {photon} lacks a {lbl.dof} qubit")
    return swap_qubits(state, *labels)


def pf_swap(state: StateVector, photon: str) -> StateVector:
    """Exchange the polarization amplitudes with the first-momentum (r/l) amplitudes."""
    return _dof_swap(state, photon, "F")


def ps_swap(state: StateVector, photon: str) -> StateVector:
    """Exchange the polarization amplitudes with the second-momentum (E/I) amplitudes."""
    return _dof_swap(state, photon, "S")


def pt_swap(state: StateVector, photon: str) -> StateVector:
    """Exchange the polarization amplitudes with the third-momentum (u/d) amplitudes."""
    return _dof_swap(state, photon, "T")
