"""Labeled-qubit registers and dense complex state vectors.

Conventions (fixed across the package so circuit results are bit-exact):

* Bit value 0 encodes {R, r, E, u, +1} and bit value 1 encodes {L, l, I, d, -1}.
* Basis indices are little-endian over register order: bit k of the index is
  the k-th register label.
* Register order is canonical when photons come first (id order A, B, C, D,
  A', B', C', D'; DOFs ordered P, F, S, T within a photon) and NV spins last.
* States may be unnormalized; the squared norm is the survival probability of
  a lossy evolution.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, DomainError

PHOTON_ORDER = ("A", "B", "C", "D", "A'", "B'", "C'", "D'")
DOF_ORDER = ("P", "F", "S", "T")

# Basis symbols for bit values (0, 1), per DOF kind.
BIT_SYMBOLS = {
    "P": ("R", "L"),
    "F": ("r", "l"),
    "S": ("E", "I"),
    "T": ("u", "d"),
    "NV": ("+1", "-1"),
}

ATOL = 1e-12
SERIALIZE_CUTOFF = 1e-15

SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True, order=True)
class QubitLabel:
    """One qubit of the register: a photon DOF or an NV spin."""

    sort_key: tuple[int, str, str] = field(repr=False)
    kind: str = field(compare=False)  # "photon" | "nv"
    owner: str = field(compare=False)  # photon id or NV unit name
    dof: str = field(compare=False, default="")  # P/F/S/T for photons, "" for NV

    def symbols(self) -> tuple[str, str]:
        return BIT_SYMBOLS["NV"] if self.kind == "nv" else BIT_SYMBOLS[self.dof]

    def __str__(self) -> str:
        return f"{self.owner}.{self.dof}" if self.kind == "photon" else f"nv:{self.owner}"


def photon_qubit(photon: str, dof: str) -> QubitLabel:
    if photon not in PHOTON_ORDER:
        raise ArgumentError(f"unknown photon id {photon!r}")
    if dof not in DOF_ORDER:
        raise ArgumentError(f"unknown DOF {dof!r}")
    return QubitLabel(
        sort_key=(0, f"{PHOTON_ORDER.index(photon)}", f"{DOF_ORDER.index(dof)}"),
        kind="photon",
        owner=photon,
        dof=dof,
    )


def nv_qubit(unit: str) -> QubitLabel:
    # NV spins sort after all photons, lexicographically by unit name.
    return QubitLabel(sort_key=(1, str(unit), ""), kind="nv", owner=str(unit))


def photon_register(photons: Sequence[str], dofs: Sequence[str] = ("P", "F", "S")) -> tuple[QubitLabel, ...]:
    return tuple(photon_qubit(p, d) for p in photons for d in dofs)


@dataclass(frozen=True)
class StateVector:
    """Dense amplitudes over a labeled register (possibly unnormalized)."""

    register: tuple[QubitLabel, ...]
    amps: np.ndarray

    def __post_init__(self) -> None:
        if len(set(self.register)) != len(self.register):
            raise ArgumentError("register labels must be unique")
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (2 ** len(self.register),):
            raise ArgumentError(
                f"amplitude vector has length {amps.shape}, register needs {2 ** len(self.register)}"
            )
        object.__setattr__(self, "amps", amps)

    @property
    def n_qubits(self) -> int:
        return len(self.register)

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def position(self, label: QubitLabel) -> int:
        try:
            return self.register.index(label)
        except ValueError:
            raise ArgumentError(f"label {label} not in register") from None

    def normalized(self) -> "StateVector":
        n2 = self.norm2()
        if n2 <= 0:
            raise DomainError("cannot normalize a zero state")
        return StateVector(self.register, self.amps / math.sqrt(n2))


def product_state(parts: Sequence[tuple[QubitLabel, Sequence[complex]]]) -> StateVector:
    """Tensor product of single-qubit states, given as (label, (amp0, amp1)) pairs."""
    state = StateVector((), np.ones(1, dtype=np.complex128))
    for label, pair in parts:
        if len(pair) != 2:
            raise ArgumentError("each qubit needs exactly two amplitudes")
        state = tensor(state, StateVector((label,), np.asarray(pair, dtype=np.complex128)))
    return state


def basis_state(register: Sequence[QubitLabel], bits: Sequence[int]) -> StateVector:
    register = tuple(register)
    if len(bits) != len(register):
        raise ArgumentError("one bit per register label required")
    index = sum(int(b) << k for k, b in enumerate(bits))
    amps = np.zeros(2 ** len(register), dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(register, amps)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Combined state on register a + b (a's labels keep the low bit positions)."""
    if set(a.register) & set(b.register):
        raise ArgumentError("registers overlap")
    return StateVector(a.register + b.register, np.kron(b.amps, a.amps))


def reorder(state: StateVector, new_register: Sequence[QubitLabel]) -> StateVector:
    """Same state expressed over a permuted register."""
    new_register = tuple(new_register)
    if set(new_register) != set(state.register) or len(new_register) != len(state.register):
        raise ArgumentError("new register must be a permutation of the old one")
    if new_register == state.register:
        return state
    positions = [state.position(lbl) for lbl in new_register]
    idx = _indices(state.amps.size)
    old_index = np.zeros_like(idx)
    for new_bit, old_bit in enumerate(positions):
        old_index |= ((idx >> new_bit) & 1) << old_bit
    return StateVector(new_register, state.amps[old_index])


def canonical_register(labels: Iterable[QubitLabel]) -> tuple[QubitLabel, ...]:
    return tuple(sorted(labels))


def canonicalize(state: StateVector) -> StateVector:
    return reorder(state, canonical_register(state.register))


_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(size: int) -> np.ndarray:
    cached = _INDEX_CACHE.get(size)
    if cached is None:
        cached = np.arange(size)
        cached.setflags(write=False)
        _INDEX_CACHE[size] = cached
    return cached


def bit_values(state: StateVector, label: QubitLabel) -> np.ndarray:
    """Bit of `label` for every basis index (vector of 0/1)."""
    k = state.position(label)
    return (_indices(state.amps.size) >> k) & 1


def scale_amplitudes(state: StateVector, factors: np.ndarray) -> StateVector:
    """Diagonal operator: amplitude-wise multiplication (may be non-unitary)."""
    factors = np.asarray(factors)
    if factors.shape != state.amps.shape:
        raise ArgumentError("factor vector must match the amplitude vector")
    return StateVector(state.register, state.amps * factors)


def apply_single(state: StateVector, label: QubitLabel, matrix: np.ndarray) -> StateVector:
    """Apply a 2x2 operator to one qubit."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (2, 2):
        raise ArgumentError("single-qubit operator must be 2x2")
    k = state.position(label)
    n = state.n_qubits
    view = state.amps.reshape(2 ** (n - k - 1), 2, 2**k)
    new = np.einsum("ab,hbl->hal", matrix, view)
    return StateVector(state.register, np.ascontiguousarray(new).reshape(-1))


def swap_qubits(state: StateVector, label_a: QubitLabel, label_b: QubitLabel) -> StateVector:
    """Exchange the amplitudes of two qubits (exact permutation, lossless)."""
    ka, kb = state.position(label_a), state.position(label_b)
    if ka == kb:
        return state
    idx = _indices(state.amps.size)
    ba = (idx >> ka) & 1
    bb = (idx >> kb) & 1
    swapped = idx ^ ((ba ^ bb) << ka) ^ ((ba ^ bb) << kb)
    return StateVector(state.register, state.amps[swapped])


@dataclass(frozen=True)
class MeasurementBranch:
    outcome: str
    probability: float
    state: StateVector  # collapsed and renormalized, measured qubit still present


@dataclass(frozen=True)
class MeasureResult:
    survival: float  # squared norm of the pre-measurement state
    branches: tuple[MeasurementBranch, ...]


def measure(
    state: StateVector,
    label: QubitLabel,
    basis: Sequence[Sequence[complex]],
    outcome_names: Sequence[str] = ("0", "1"),
) -> MeasureResult:
    """Projective measurement of one qubit in an orthonormal basis.

    Branch probabilities are relative to the surviving population
    (branch norm^2 / state norm^2); the pre-measurement norm^2 is returned as
    `survival` so lossy evolutions stay accounted for.  Branches with zero
    probability are omitted (their collapsed state is undefined).
    """
    vecs = np.asarray(basis, dtype=np.complex128)
    if vecs.shape != (2, 2):
        raise ArgumentError("basis must be two 2-vectors")
    gram = vecs @ vecs.conj().T
    if not np.allclose(gram, np.eye(2), atol=1e-10):
        raise ArgumentError("measurement basis must be orthonormal")
    survival = state.norm2()
    if survival <= 0:
        raise DomainError("cannot measure a zero-norm state")

    k = state.position(label)
    n = state.n_qubits
    view = state.amps.reshape(2 ** (n - k - 1), 2, 2**k)
    branches = []
    for b in range(2):
        rest = np.tensordot(vecs[b].conj(), view, axes=([0], [1]))  # <v_b| on qubit k
        p = float(np.vdot(rest, rest).real) / survival
        if p < ATOL:
            continue
        collapsed = np.einsum("a,hl->hal", vecs[b], rest / math.sqrt(p * survival))
        branches.append(
            MeasurementBranch(
                outcome=str(outcome_names[b]),
                probability=p,
                state=StateVector(state.register, np.ascontiguousarray(collapsed).reshape(-1)),
            )
        )
    return MeasureResult(survival=survival, branches=tuple(branches))


def measure_remove(
    state: StateVector,
    label: QubitLabel,
    basis: Sequence[Sequence[complex]],
    outcome_names: Sequence[str] = ("0", "1"),
) -> tuple[float, list[tuple[str, float, "StateVector"]]]:
    """Like `measure`, but branch states are renormalized with the qubit removed."""
    vecs = np.asarray(basis, dtype=np.complex128)
    survival = state.norm2()
    if survival <= 0:
        raise DomainError("cannot measure a zero-norm state")
    k = state.position(label)
    n = state.n_qubits
    view = state.amps.reshape(2 ** (n - k - 1), 2, 2**k)
    register = state.register[:k] + state.register[k + 1 :]
    branches = []
    for b in range(2):
        rest = np.tensordot(vecs[b].conj(), view, axes=([0], [1]))
        p = float(np.vdot(rest, rest).real) / survival
        if p < ATOL:
            continue
        reduced = np.ascontiguousarray(rest).reshape(-1) / math.sqrt(p * survival)
        branches.append((str(outcome_names[b]), p, StateVector(register, reduced)))
    return survival, branches


def project_out(state: StateVector, label: QubitLabel, bra: Sequence[complex]) -> StateVector:
    """Contract one qubit with <bra| and drop it from the register."""
    vec = np.asarray(bra, dtype=np.complex128)
    if vec.shape != (2,):
        raise ArgumentError("bra must be a 2-vector")
    k = state.position(label)
    n = state.n_qubits
    view = state.amps.reshape(2 ** (n - k - 1), 2, 2**k)
    rest = np.tensordot(vec.conj(), view, axes=([0], [1]))
    register = state.register[:k] + state.register[k + 1 :]
    return StateVector(register, np.ascontiguousarray(rest).reshape(-1))


def fidelity(real: StateVector, ideal: StateVector) -> float:
    """|<real|ideal>|^2 with both states normalized internally."""
    if set(real.register) != set(ideal.register):
        raise ArgumentError("states must share one register")
    ideal = reorder(ideal, real.register)
    nr, ni = real.norm2(), ideal.norm2()
    if nr <= 0 or ni <= 0:
        raise DomainError("fidelity of a zero-norm state is undefined")
    overlap = np.vdot(real.amps, ideal.amps)
    return float(abs(overlap) ** 2 / (nr * ni))


def states_allclose(a: StateVector, b: StateVector, atol: float = ATOL) -> bool:
    """Amplitude-exact comparison (no phase slack) after register alignment."""
    if set(a.register) != set(b.register):
        return False
    b = reorder(b, a.register)
    return bool(np.max(np.abs(a.amps - b.amps)) <= atol)


# --- Bell structure -------------------------------------------------------

@dataclass(frozen=True)
class BellLabel:
    """One of the four two-qubit Bell states: parity phi/psi with sign +/-."""

    parity: str  # "phi" | "psi"
    sign: int  # +1 | -1

    def __post_init__(self) -> None:
        if self.parity not in ("phi", "psi") or self.sign not in (+1, -1):
            raise ArgumentError(f"invalid Bell label ({self.parity!r}, {self.sign!r})")

    def __str__(self) -> str:
        return f"{self.parity}{'+' if self.sign > 0 else '-'}"

    @classmethod
    def parse(cls, text: str) -> "BellLabel":
        text = text.strip().lower()
        if len(text) < 2 or text[-1] not in "+-" or text[:-1] not in ("phi", "psi"):
            raise ArgumentError(f"cannot parse Bell label {text!r}")
        return cls(parity=text[:-1], sign=+1 if text[-1] == "+" else -1)


PHI_PLUS = BellLabel("phi", +1)
PHI_MINUS = BellLabel("phi", -1)
PSI_PLUS = BellLabel("psi", +1)
PSI_MINUS = BellLabel("psi", -1)
ALL_BELL = (PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS)


def make_bell(label: BellLabel, qubit1: QubitLabel, qubit2: QubitLabel) -> StateVector:
    """Two-qubit Bell state; phi = even parity (00/11), psi = odd parity (01/10)."""
    amps = np.zeros(4, dtype=np.complex128)
    if label.parity == "phi":
        amps[0b00] = SQRT_HALF
        amps[0b11] = label.sign * SQRT_HALF
    else:
        amps[0b10] = SQRT_HALF  # qubit1 = 0, qubit2 = 1 carries the + amplitude
        amps[0b01] = label.sign * SQRT_HALF
    return StateVector((qubit1, qubit2), amps)


@dataclass(frozen=True)
class HyperBellSpec:
    """A Bell label per DOF; the product specifies one hyperentangled Bell state."""

    p: BellLabel
    f: BellLabel
    s: BellLabel
    t: BellLabel | None = None

    def dofs(self) -> tuple[str, ...]:
        return ("P", "F", "S") if self.t is None else ("P", "F", "S", "T")

    def label(self, dof: str) -> BellLabel:
        table = {"P": self.p, "F": self.f, "S": self.s, "T": self.t}
        value = table[dof]
        if value is None:
            raise ArgumentError(f"spec carries no {dof} label")
        return value

    def __str__(self) -> str:
        return "x".join(str(self.label(d)) for d in self.dofs())


def all_hyper_specs(signs: bool = True) -> tuple[HyperBellSpec, ...]:
    """The 64 three-DOF specs (or the 8 sign-positive ones with signs=False)."""
    pool = ALL_BELL if signs else (PHI_PLUS, PSI_PLUS)
    return tuple(HyperBellSpec(p, f, s) for p, f, s in itertools.product(pool, repeat=3))


def make_hyper_bell(spec: HyperBellSpec, photon_pair: tuple[str, str]) -> StateVector:
    """Product of one Bell state per DOF over a photon pair, on the canonical register."""
    a, b = photon_pair
    if a == b:
        raise ArgumentError("photon ids must differ")
    state = StateVector((), np.ones(1, dtype=np.complex128))
    for dof in spec.dofs():
        state = tensor(state, make_bell(spec.label(dof), photon_qubit(a, dof), photon_qubit(b, dof)))
    return canonicalize(state)


# --- Exact mixed ensembles ------------------------------------------------

@dataclass(frozen=True)
class MixedEnsemble:
    """Exact weighted list of hyperentangled Bell states (diagonal mixed state)."""

    terms: tuple[tuple[float, HyperBellSpec], ...]
    fidelities: tuple[float, float, float] | None = None

    def __post_init__(self) -> None:
        total = 0.0
        for weight, _ in self.terms:
            if weight < -ATOL:
                raise ArgumentError("ensemble weights must be >= 0")
            total += weight
        if abs(total - 1.0) > 1e-9:
            raise ArgumentError(f"ensemble weights must sum to 1 (got {total})")


def canonical_ensemble(f1: float, f2: float, f3: float) -> MixedEnsemble:
    """Bit-flip-error ensemble: per DOF, phi+ with probability F and psi+ with 1-F."""
    for f in (f1, f2, f3):
        if not (0.0 <= f <= 1.0):
            raise ArgumentError(f"fidelity parameters must lie in [0, 1], got {f}")
    terms = []
    for (wp, lp), (wf, lf), (ws, ls) in itertools.product(
        ((f1, PHI_PLUS), (1.0 - f1, PSI_PLUS)),
        ((f2, PHI_PLUS), (1.0 - f2, PSI_PLUS)),
        ((f3, PHI_PLUS), (1.0 - f3, PSI_PLUS)),
    ):
        terms.append((wp * wf * ws, HyperBellSpec(lp, lf, ls)))
    return MixedEnsemble(terms=tuple(terms), fidelities=(f1, f2, f3))


# --- Text snapshots -------------------------------------------------------

def serialize_amplitudes(state: StateVector) -> str:
    """One line per nonzero amplitude: `bitstring TAB re TAB im`.

    The bitstring lists bits in register order (leftmost character = first
    label); amplitudes with magnitude below 1e-15 are omitted.
    """
    n = state.n_qubits
    lines = []
    for index, amp in enumerate(state.amps):
        if abs(amp) < SERIALIZE_CUTOFF:
            continue
        bits = "".join(str((index >> k) & 1) for k in range(n))
        lines.append(f"{bits}\t{float(amp.real)!r}\t{float(amp.imag)!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def deserialize_amplitudes(text: str, register: Sequence[QubitLabel]) -> StateVector:
    register = tuple(register)
    amps = np.zeros(2 ** len(register), dtype=np.complex128)
    for line in text.splitlines():
        if not line.strip():
            continue
        bits, re_part, im_part = line.split("\t")
        if len(bits) != len(register):
            raise ArgumentError("bitstring length does not match register")
        index = sum(int(b) << k for k, b in enumerate(bits))
        amps[index] = float(re_part) + 1j * float(im_part)
    return StateVector(register, amps)
