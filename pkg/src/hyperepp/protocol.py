"""Two-step purification protocol over exact mixed ensembles.

Step 1: both parties run polarization and spatial parity checks on their
photon pairs (AC and BD), classify the joint outcome into eight cases by
which DOFs agree, undo odd parities with bit flips, rotate and detect the
CD photons, and feed a phase flip forward onto photon B for odd detection
parity.  Step 2 pairs the surviving mixed-benefit cases (3<->8, 4<->7,
5<->6) and shuttles the good Bell labels onto one pair with SWAP gates.

Everything is computed by exhaustive enumeration over the ensemble terms
(the mixed states are diagonal in the hyperentangled Bell basis), so all
reported probabilities are exact, with no sampling noise.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .cavity import IDEAL_PAIR, InteractionMode, ReflectionPair
from .circuits import EVEN, ODD, p_qnd_branches, pf_swap, pp_swap_apply, ps_swap, s_qnd_branches
from .errors import ArgumentError, DomainError
from .hilbert import (
    ALL_BELL,
    BellLabel,
    HyperBellSpec,
    MixedEnsemble,
    PHI_PLUS,
    PSI_PLUS,
    StateVector,
    all_hyper_specs,
    canonical_ensemble,
    make_hyper_bell,
    photon_qubit,
    tensor,
)
from .optics import apply_gate, dof_gate

SAME, DIFF = "same", "diff"
DOFS = ("P", "F", "S")

# Case id <-> (P, F, S) agreement pattern between the AC and BD parity readings.
CASE_PATTERNS: dict[int, tuple[str, str, str]] = {
    1: (SAME, SAME, SAME),
    2: (DIFF, DIFF, DIFF),
    3: (DIFF, SAME, SAME),
    4: (SAME, DIFF, SAME),
    5: (SAME, SAME, DIFF),
    6: (DIFF, DIFF, SAME),
    7: (DIFF, SAME, DIFF),
    8: (SAME, DIFF, DIFF),
}
_PATTERN_TO_CASE = {pattern: case for case, pattern in CASE_PATTERNS.items()}

# Step-2 partner pairing (an involution on cases 3..8) and SWAP sequences.
PARTNER = {3: 8, 4: 7, 5: 6, 6: 5, 7: 4, 8: 3}
SEQUENCES: dict[int, tuple[str, ...]] = {
    3: ("PP",),
    4: ("PF", "PP", "PF"),
    5: ("PS", "PP", "PS"),
    6: ("PP", "PF", "PP", "PF"),
    7: ("PP", "PS", "PP", "PS"),
    8: ("PF", "PP", "PF", "PS", "PP", "PS"),
}

# Which side's Bell label the kept pair ends up carrying, per DOF (P, F, S).
# Derived from the SWAP sequences; verified by simulation in the test suite.
STEP2_LABEL_SOURCES: dict[int, tuple[str, str, str]] = {
    3: ("partner", "own", "own"),
    4: ("own", "partner", "own"),
    5: ("own", "own", "partner"),
    6: ("partner", "partner", "own"),
    7: ("partner", "own", "partner"),
    8: ("own", "partner", "partner"),
}


def classify(ac: tuple[str, str, str], bd: tuple[str, str, str]) -> int:
    """Case id from the (P, F, S) parity readings of the AC and BD checks."""
    for reading in (ac, bd):
        if len(reading) != 3 or any(p not in (EVEN, ODD) for p in reading):
            raise ArgumentError(f"parity readings must be three of {EVEN}/{ODD}")
    pattern = tuple(SAME if a == b else DIFF for a, b in zip(ac, bd))
    return _PATTERN_TO_CASE[pattern]


@dataclass(frozen=True)
class Step2Plan:
    own_case: int
    partner_case: int
    sequence: tuple[str, ...]


def step2_plan(case: int) -> Step2Plan:
    if case == 1:
        raise DomainError("case 1 needs no second step")
    if case == 2:
        raise DomainError("case 2 is discarded")
    if case not in PARTNER:
        raise ArgumentError(f"unknown case {case}")
    return Step2Plan(own_case=case, partner_case=PARTNER[case], sequence=SEQUENCES[case])


# --- Step 1 ----------------------------------------------------------------

@dataclass(frozen=True)
class CaseResult:
    probability: float  # of this case among surviving rounds
    posterior: tuple[tuple[float, HyperBellSpec], ...]  # normalized AB ensemble
    discarded: bool

    def dof_marginal(self, dof: str, label: BellLabel) -> float:
        return sum(w for w, spec in self.posterior if spec.label(dof) == label)


@dataclass(frozen=True)
class Step1Result:
    cases: dict[int, CaseResult]
    # (dof, pattern, bell-label-str) -> joint probability; reproduces the
    # per-case outcome-probability table since a case fixes one pattern per DOF.
    dof_stats: dict[tuple[str, str, str], float]
    survival: float

    def case_probability(self, case: int) -> float:
        result = self.cases.get(case)
        return result.probability if result else 0.0


def _validate_canonical(ensemble: MixedEnsemble) -> None:
    for _, spec in ensemble.terms:
        if spec.t is not None:
            raise ArgumentError("step 1 handles three-DOF ensembles")
        for dof in DOFS:
            if spec.label(dof) not in (PHI_PLUS, PSI_PLUS):
                raise ArgumentError("ensemble must be diagonal in {phi+, psi+} per DOF")


_BELL_PROJECTOR: np.ndarray | None = None
_BELL_SPECS = all_hyper_specs()


def _bell_projector() -> np.ndarray:
    """Rows = the 64 hyperentangled Bell basis vectors of the AB pair (complete ONB)."""
    global _BELL_PROJECTOR
    if _BELL_PROJECTOR is None:
        _BELL_PROJECTOR = np.array(
            [make_hyper_bell(spec, ("A", "B")).amps for spec in _BELL_SPECS]
        ).conj()
    return _BELL_PROJECTOR


@functools.lru_cache(maxsize=None)
def _term_analysis(
    spec_ab: HyperBellSpec,
    spec_cd: HyperBellSpec,
    mode: InteractionMode,
    refl: ReflectionPair,
) -> tuple[tuple[float, float, int, tuple[str, str, str], tuple[float, ...]], ...]:
    """Run one joint pure term (AB spec x CD spec) through step 1.

    Returns branch rows (survival, probability, case id, AC-vs-BD pattern,
    posterior weights over the 64 Bell specs).  Weight-independent, so rounds
    and parameter sweeps reuse the cache.
    """
    state = tensor(make_hyper_bell(spec_ab, ("A", "B")), make_hyper_bell(spec_cd, ("C", "D")))
    rows = []
    for p_ac, prob_ac, st1 in p_qnd_branches(state, "A", "C", "nv1", mode, refl):
        for s_ac, prob_ac2, st2 in s_qnd_branches(st1, "A", "C", "nv2", "nv3", mode, refl):
            for p_bd, prob_bd, st3 in p_qnd_branches(st2, "B", "D", "nv1", mode, refl):
                for s_bd, prob_bd2, st4 in s_qnd_branches(st3, "B", "D", "nv2", "nv3", mode, refl):
                    ac = (p_ac.p_parity, s_ac.f_parity, s_ac.s_parity)
                    bd = (p_bd.p_parity, s_bd.f_parity, s_bd.s_parity)
                    survival = (p_ac.survival * s_ac.survival * p_bd.survival * s_bd.survival)
                    probability = prob_ac * prob_ac2 * prob_bd * prob_bd2
                    case = classify(ac, bd)
                    st = st4
                    for dof, parity_c, parity_d in zip(DOFS, ac, bd):
                        if parity_c == ODD:
                            st = apply_gate(st, dof_gate("C", dof, "sigma_x"))
                        if parity_d == ODD:
                            st = apply_gate(st, dof_gate("D", dof, "sigma_x"))
                    posterior = _detect_cd(st)
                    pattern = tuple(SAME if a == b else DIFF for a, b in zip(ac, bd))
                    rows.append((survival, probability, case, pattern, tuple(posterior)))
    return tuple(rows)


def _detect_cd(state: StateVector) -> np.ndarray:
    """Rotate C and D in all DOFs, detect them, feed sigma_z forward onto B.

    Returns the posterior weights of the AB pair over the 64 Bell specs,
    summed over the 64 detection outcomes (weights carry the outcome
    probabilities; they sum to 1 for a normalized input).
    """
    for photon in ("C", "D"):
        for dof in DOFS:
            state = apply_gate(state, dof_gate(photon, dof, "hadamard"))
    # Canonical register: bits 0..5 = A,B qubits, bits 6..11 = C,D qubits.
    expected = tuple(
        photon_qubit(p, d) for p in ("A", "B", "C", "D") for d in DOFS
    )
    assert state.register == expected
    rows = state.amps.reshape(64, 64)  # [cd outcome, ab amplitudes]

    cd = np.arange(64)
    c_bits = np.stack([(cd >> k) & 1 for k in range(3)])  # C.P, C.F, C.S
    d_bits = np.stack([(cd >> (k + 3)) & 1 for k in range(3)])
    ab = np.arange(64)
    b_bits = np.stack([(ab >> (k + 3)) & 1 for k in range(3)])  # B.P, B.F, B.S

    odd = (c_bits ^ d_bits).astype(bool)  # per DOF, per outcome
    signs = np.ones((64, 64))
    for k in range(3):
        flip = np.outer(odd[k], b_bits[k]).astype(bool)
        signs = np.where(flip, -signs, signs)
    corrected = rows * signs
    overlaps = corrected @ _bell_projector().T  # [outcome, spec]
    return np.sum(np.abs(overlaps) ** 2, axis=0)


def step1(
    ensemble_ab: MixedEnsemble,
    ensemble_cd: MixedEnsemble,
    mode: InteractionMode = InteractionMode.IDEAL,
    refl: ReflectionPair = IDEAL_PAIR,
) -> Step1Result:
    """Exact enumeration of the first step over the joint ensemble terms."""
    _validate_canonical(ensemble_ab)
    _validate_canonical(ensemble_cd)

    case_weight: dict[int, float] = {}
    case_posterior: dict[int, np.ndarray] = {}
    dof_stats: dict[tuple[str, str, str], float] = {}
    weight_total = 0.0

    for w_ab, spec_ab in ensemble_ab.terms:
        for w_cd, spec_cd in ensemble_cd.terms:
            weight = w_ab * w_cd
            if weight == 0.0:
                continue
            weight_total += weight
            for survival, probability, case, pattern, posterior in _term_analysis(
                spec_ab, spec_cd, mode, refl
            ):
                joint = weight * survival * probability
                posterior = np.asarray(posterior)
                case_weight[case] = case_weight.get(case, 0.0) + joint
                if case in case_posterior:
                    case_posterior[case] = case_posterior[case] + joint * posterior
                else:
                    case_posterior[case] = joint * posterior
                marginals = _dof_marginal(posterior)
                for k, (dof, pat) in enumerate(zip(DOFS, pattern)):
                    for label, value in marginals[k].items():
                        key = (dof, pat, label)
                        dof_stats[key] = dof_stats.get(key, 0.0) + joint * value

    total = sum(case_weight.values())
    if total <= 0:
        raise DomainError("no surviving probability mass")
    cases = {}
    for case, weight in sorted(case_weight.items()):
        posterior = case_posterior[case]
        norm = posterior.sum()
        entries = tuple(
            (float(value / norm), spec)
            for value, spec in zip(posterior, _BELL_SPECS)
            if value / norm > 1e-15
        )
        cases[case] = CaseResult(
            probability=float(weight / total),
            posterior=entries,
            discarded=(case == 2),
        )
    dof_stats = {key: float(value / total) for key, value in dof_stats.items()}
    return Step1Result(cases=cases, dof_stats=dof_stats, survival=float(total / weight_total))


@functools.lru_cache(maxsize=1)
def _dof_marginal_tables() -> tuple[dict[str, np.ndarray], ...]:
    tables = []
    for dof in DOFS:
        by_label: dict[str, np.ndarray] = {}
        for label in ALL_BELL:
            mask = np.array([spec.label(dof) == label for spec in _BELL_SPECS], dtype=float)
            by_label[str(label)] = mask
        tables.append(by_label)
    return tuple(tables)


def _dof_marginal(posterior: np.ndarray) -> list[dict[str, float]]:
    tables = _dof_marginal_tables()
    out = []
    for table in tables:
        out.append({label: float(mask @ posterior) for label, mask in table.items()})
    return out


# --- Step 2 ----------------------------------------------------------------

def step2_execute(
    plan: Step2Plan,
    state_ab: StateVector,
    state_a2b2: StateVector,
    mode: InteractionMode = InteractionMode.IDEAL,
    refl: ReflectionPair = IDEAL_PAIR,
) -> tuple[StateVector, StateVector, float]:
    """Run the plan's SWAP sequence on the AB and A'B' pairs.

    "PP" swaps the polarization Bell labels between the pairs (one NV-assisted
    gate per party); "PF"/"PS" swap polarization with a spatial DOF on every
    photon.  Returns the final pair states and the survival probability.  In
    ideal mode both gate branches coincide after feed-forward and the
    factorization into pair states is exact.
    """
    for state, photons in ((state_ab, ("A", "B")), (state_a2b2, ("A'", "B'"))):
        for photon in photons:
            for dof in DOFS:
                if photon_qubit(photon, dof) not in state.register:
                    raise ArgumentError(
                        f"pair state lacks the {photon}.{dof} qubit; "
                        "the kept pair carries photons A,B and the partner A',B'"
                    )
    joint = tensor(state_ab, state_a2b2)
    survival = 1.0
    for stage in plan.sequence:
        if stage == "PP":
            joint, out_a = pp_swap_apply(joint, "A", "A'", "nv_a", mode, refl)
            joint, out_b = pp_swap_apply(joint, "B", "B'", "nv_b", mode, refl)
            survival *= out_a.survival * out_b.survival
        elif stage == "PF":
            for photon in ("A", "B", "A'", "B'"):
                joint = pf_swap(joint, photon)
        elif stage == "PS":
            for photon in ("A", "B", "A'", "B'"):
                joint = ps_swap(joint, photon)
        else:
            raise ArgumentError(f"unknown stage {stage!r}")
    ab, a2b2 = split_pair_product(joint, state_ab.register, state_a2b2.register)
    return ab, a2b2, survival


def split_pair_product(
    joint: StateVector,
    register_ab,
    register_a2b2,
) -> tuple[StateVector, StateVector]:
    """Factor a product state of two pairs; leading factor under losses.

    The phase convention makes the largest-magnitude amplitude of the AB
    factor real and positive.
    """
    from .hilbert import reorder

    register_ab = tuple(register_ab)
    register_a2b2 = tuple(register_a2b2)
    joint = reorder(joint, register_ab + register_a2b2)
    n_ab = 2 ** len(register_ab)
    matrix = joint.amps.reshape(-1, n_ab)  # [a2b2, ab]
    u, s, vh = np.linalg.svd(matrix, full_matrices=False)
    ab = vh[0]
    a2b2 = u[:, 0] * s[0]
    k = int(np.argmax(np.abs(ab)))
    phase = ab[k] / abs(ab[k])
    ab = ab * phase.conjugate()
    a2b2 = a2b2 * phase
    return StateVector(register_ab, ab), StateVector(register_a2b2, a2b2)


# --- Fidelity iteration and efficiency accounting ---------------------------

def purify_map(f: float) -> float:
    """One-round update of a per-DOF fidelity: F -> F^2 / (F^2 + (1-F)^2)."""
    if not (0.0 <= f <= 1.0):
        raise ArgumentError(f"fidelity must lie in [0, 1], got {f}")
    return f * f / (f * f + (1.0 - f) * (1.0 - f))


def iterate_fidelity(f1: float, f2: float, f3: float, n: int) -> tuple[float, float, float, float]:
    """Apply the per-DOF update n times; returns (F1, F2, F3, product)."""
    if n < 0:
        raise ArgumentError("round count must be >= 0")
    fs = [f1, f2, f3]
    for f in fs:
        if not (0.0 <= f <= 1.0):
            raise ArgumentError(f"fidelity must lie in [0, 1], got {f}")
    for _ in range(n):
        fs = [purify_map(f) for f in fs]
    return fs[0], fs[1], fs[2], fs[0] * fs[1] * fs[2]


def _same(f: float) -> float:
    return f * f + (1.0 - f) * (1.0 - f)


def _diff(f: float) -> float:
    return 2.0 * f * (1.0 - f)


def efficiency_y1(f1: float, f2: float, f3: float) -> float:
    """Keep probability of the first step alone (all three DOFs agree)."""
    return _same(f1) * _same(f2) * _same(f3)


def efficiency_y2(f1: float, f2: float, f3: float) -> float:
    """First-round keep probability once the SWAP step recycles cases 3..8.

    Each of the three pairings contributes the smaller of the two partner-case
    probabilities (partners are consumed pairwise).
    """
    y = efficiency_y1(f1, f2, f3)
    y += min(_diff(f1) * _same(f2) * _same(f3), _same(f1) * _diff(f2) * _diff(f3))
    y += min(_same(f1) * _diff(f2) * _same(f3), _diff(f1) * _same(f2) * _diff(f3))
    y += min(_same(f1) * _same(f2) * _diff(f3), _diff(f1) * _diff(f2) * _same(f3))
    return y


def case_probability(case: int, f1: float, f2: float, f3: float) -> float:
    """First-principles probability of one classification case."""
    factors = {SAME: (_same(f1), _same(f2), _same(f3)), DIFF: (_diff(f1), _diff(f2), _diff(f3))}
    pattern = CASE_PATTERNS[case]
    return math.prod(factors[p][k] for k, p in enumerate(pattern))


# --- Full rounds ------------------------------------------------------------

@dataclass(frozen=True)
class RoundRecord:
    round_index: int
    input_fidelities: tuple[float, float, float]
    case_probabilities: dict[int, float]
    dof_stats: dict[tuple[str, str, str], float]
    f_prime: tuple[float, float, float]
    f_prime_product: float
    y1: float
    y2: float
    survival: float


@dataclass(frozen=True)
class EppReport:
    rounds: tuple[RoundRecord, ...]
    final_fidelities: tuple[float, float, float]
    final_fidelity: float

    @property
    def rounds_executed(self) -> int:
        return len(self.rounds)


def run_epp(
    f1: float,
    f2: float,
    f3: float,
    rounds: int = 1,
    mode: InteractionMode = InteractionMode.IDEAL,
    refl: ReflectionPair = IDEAL_PAIR,
) -> EppReport:
    """Enumerate full purification rounds; per round, step 1 classifies and
    step 2's pairings recycle cases 3..8 (case 2 is discarded).

    Per-DOF fidelities of kept pairs follow the purification map; the round's
    yield bookkeeping reports the step-1 keep probability and the two-step
    keep probability with pairwise partner consumption.
    """
    if rounds < 1:
        raise ArgumentError("at least one round required")
    records = []
    fs = (f1, f2, f3)
    for index in range(rounds):
        ensemble = canonical_ensemble(*fs)
        result = step1(ensemble, ensemble, mode, refl)
        case_probs = {case: result.case_probability(case) for case in range(1, 9)}

        kept = _kept_posterior(result)
        f_prime = tuple(kept[dof] for dof in DOFS)
        y1 = case_probs[1]
        y2 = y1 + sum(
            min(case_probs[case], case_probs[PARTNER[case]]) for case in (3, 4, 5)
        )
        records.append(
            RoundRecord(
                round_index=index + 1,
                input_fidelities=fs,
                case_probabilities=case_probs,
                dof_stats=result.dof_stats,
                f_prime=f_prime,
                f_prime_product=f_prime[0] * f_prime[1] * f_prime[2],
                y1=y1,
                y2=y2,
                survival=result.survival,
            )
        )
        fs = f_prime
    final = records[-1]
    return EppReport(
        rounds=tuple(records),
        final_fidelities=final.f_prime,
        final_fidelity=final.f_prime_product,
    )


def _kept_posterior(result: Step1Result) -> dict[str, float]:
    """phi+ marginals of the kept pairs, pooled over case 1 and the step-2 pairings.

    Every kept pair draws each DOF's label from a side whose parities agreed
    in that DOF, so all kept pools share the same per-DOF marginals; pooling
    keeps the bookkeeping honest if that ever fails to hold (lossy modes).
    """
    weights: dict[str, float] = {dof: 0.0 for dof in DOFS}
    total = 0.0

    def add(case_result: CaseResult, sources: tuple[str, str, str], partner: CaseResult, share: float) -> None:
        nonlocal total
        if share <= 0:
            return
        total += share
        for k, dof in enumerate(DOFS):
            side = case_result if sources[k] == "own" else partner
            weights[dof] += share * side.dof_marginal(dof, PHI_PLUS)

    case1 = result.cases.get(1)
    if case1 is not None:
        add(case1, ("own", "own", "own"), case1, case1.probability)
    for case in (3, 4, 5):
        own = result.cases.get(case)
        partner = result.cases.get(PARTNER[case])
        if own is None or partner is None:
            continue
        share = min(own.probability, partner.probability)
        add(own, STEP2_LABEL_SOURCES[case], partner, share)
    if total <= 0:
        raise DomainError("no pairs kept")
    return {dof: weights[dof] / total for dof in DOFS}


# --- Finite-inventory sanity check ------------------------------------------

def simulate_inventory(
    f1: float,
    f2: float,
    f3: float,
    attempts: int,
    seed: int = 0,
) -> dict[str, float]:
    """Greedy pairwise matching over a finite batch of step-1 attempts.

    Draws case counts multinomially (deterministic for a fixed seed), keeps
    case 1, matches cases 3..8 with their partners, and reports the realized
    yield next to the closed-form expectation.
    """
    if attempts < 1:
        raise ArgumentError("at least one attempt required")
    probs = [case_probability(case, f1, f2, f3) for case in range(1, 9)]
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(attempts, probs)
    kept = counts[0]
    for case in (3, 4, 5):
        kept += min(counts[case - 1], counts[PARTNER[case] - 1])
    return {
        "attempts": float(attempts),
        "kept": float(kept),
        "realized_yield": kept / attempts,
        "expected_yield": efficiency_y2(f1, f2, f3),
    }
