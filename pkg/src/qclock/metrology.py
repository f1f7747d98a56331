"""Quantum Fisher information and precision bounds.

Two independent QFI routes are provided: the generator-variance form
F = 4 Var(G) for families exp(-iG theta), and a numeric form from central
finite differences of the state family.  The closed-form precision
expressions for each probe family and for the measurement-triggered
comparison live here as plain functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .dynamics import apply_phase_generator
from .errors import FamilyError, ShapeError, UnidentifiableError
from .fock import (
    FockState,
    PhysicalParams,
    fidelity_global_phase,
    new_superposition,
    prepare_average_state,
    prepare_noon,
)

DEFAULT_STEP = 1e-5  # finite-difference step: O(h^2) truncation vs ~1e-11/h cancellation


@dataclass(frozen=True)
class PhaseFamily:
    """Differentiable pure-state family theta -> |Psi(theta)>.

    scale is the radians-per-theta rate s of the family's relative phase
    (2 omega n for a NOON probe, 2 omega n d for the average-offset probe);
    it is what converts a phase estimate back into a clock offset.
    """

    evaluator: Callable[[float], FockState]
    scale: float


@dataclass(frozen=True)
class PrecisionReport:
    qfi: float
    mu: int
    crb: float

    def __post_init__(self):
        expected = 1.0 / math.sqrt(self.mu * self.qfi)
        if abs(self.crb - expected) > 1e-12 * max(1.0, abs(expected)):
            raise ValueError("crb inconsistent with qfi and mu")


def qfi_pure_numeric(fam: PhaseFamily, theta: float, h: float = DEFAULT_STEP) -> float:
    """Numeric pure-state QFI 4[Re<dPsi|dPsi> - |<dPsi|Psi>|^2] at `theta`.

    The derivative state is built by central differences with step h.  For a
    normalized family <Psi|dPsi> is purely imaginary, which makes this form
    identical to the textbook one while staying robust to the tiny
    normalization drift finite differences introduce.
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    psi0 = fam.evaluator(theta)
    psip = fam.evaluator(theta + h)
    psim = fam.evaluator(theta - h)
    for psi in (psi0, psip, psim):
        if abs(psi.norm_sq() - 1.0) > 1e-8:
            raise FamilyError("evaluator returned a non-normalized state")
        if psi.caps != psi0.caps:
            raise FamilyError("evaluator changed capacities across theta")
    # continuity guard: a family varying faster than the step resolves would
    # silently underestimate the derivative
    if fidelity_global_phase(psip, psi0) < 1.0 - 1e-6:
        raise FamilyError(f"family varies too fast for step h={h}")

    support = sorted(set(psip.branches()) | set(psim.branches()))
    dpsi = {
        occ: (psip.amplitude(occ) - psim.amplitude(occ)) / (2.0 * h) for occ in support
    }
    dd = sum(abs(v) ** 2 for v in dpsi.values())
    d0 = sum(v.conjugate() * psi0.amplitude(occ) for occ, v in dpsi.items())
    return 4.0 * (dd - abs(d0) ** 2)


def qfi_generator(s: FockState, params: PhysicalParams, weights) -> float:
    """QFI 4 Var(G) for the diagonal generator G = 2 omega sum_k weights_k N_k.

    weights has one entry per node (node 0 included, normally weighted 0).
    """
    weights = tuple(float(w) for w in weights)
    if len(weights) != len(s.caps):
        raise ShapeError(f"need {len(s.caps)} weights, got {len(weights)}")
    mean = 0.0
    mean_sq = 0.0
    for occ, amp in s.terms:
        g = 2.0 * params.omega * sum(w * nk for w, nk in zip(weights, occ))
        p = abs(amp) ** 2
        mean += p * g
        mean_sq += p * g * g
    return 4.0 * (mean_sq - mean * mean)


def crb(qfi: float, mu: int) -> float:
    """Cramer-Rao bound 1/sqrt(mu * qfi) on the offset deviation."""
    if qfi <= 0:
        raise UnidentifiableError(f"qfi must be positive, got {qfi}")
    if mu < 1:
        raise ValueError(f"mu must be >= 1, got {mu}")
    return 1.0 / math.sqrt(mu * qfi)


def noon_qfi(n: int, params: PhysicalParams) -> float:
    """F_Q = 4 omega^2 n^2 for the NOON probe."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return 4.0 * (params.omega * n) ** 2


def average_qfi(d: int, n: int, params: PhysicalParams) -> float:
    """F_Q = (2 omega d n)^2 for the average-offset probe (parameter theta-bar)."""
    if d < 1 or n < 1:
        raise ValueError(f"need d >= 1 and n >= 1, got d={d}, n={n}")
    return (2.0 * params.omega * d * n) ** 2


def local_optimal_qfi(n_k: int, params: PhysicalParams) -> float:
    """Best per-node QFI n_k^2 omega^2 after a measurement trigger collapse."""
    if n_k < 1:
        raise ValueError(f"need n_k >= 1, got {n_k}")
    return (params.omega * n_k) ** 2


def mt_average_bound(d: int, N: int, params: PhysicalParams) -> float:
    """sqrt(d)/(N omega): unreachable floor for measurement-triggered averaging."""
    if d < 1 or N < d:
        raise ValueError(f"need d >= 1 and N >= d, got d={d}, N={N}")
    return math.sqrt(d) / (N * params.omega)


def ren2012_reference(d: int, N: int, params: PhysicalParams) -> float:
    """Reference precision (1/(2 omega sqrt(d))) * N/(N-1) of the pairwise scheme.

    Flat in N apart from the N/(N-1) factor, i.e. no 1/N resource scaling.
    """
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    if N < 2:
        raise ValueError(f"need N >= 2 (N=1 divides by zero), got {N}")
    return (1.0 / (2.0 * params.omega * math.sqrt(d))) * N / (N - 1)


def noon_family(n: int, params: PhysicalParams) -> PhaseFamily:
    """theta -> NOON final state; relative phase -2 omega n theta."""
    probe = prepare_noon(n)

    def evaluate(theta: float) -> FockState:
        return apply_phase_generator(probe, params, (theta,))

    return PhaseFamily(evaluate, 2.0 * params.omega * n)


def average_family(d: int, n: int, params: PhysicalParams) -> PhaseFamily:
    """theta-bar -> average-probe final state with all offsets equal.

    Equal offsets make the imprint exp(-2i omega n d theta-bar) on the
    distributed branch, the single-parameter reduction the probe is built for.
    """
    probe = prepare_average_state(d, n)

    def evaluate(theta: float) -> FockState:
        return apply_phase_generator(probe, params, (theta,) * d)

    return PhaseFamily(evaluate, 2.0 * params.omega * n * d)


def local_family(n_k: int, params: PhysicalParams) -> PhaseFamily:
    """theta -> (|0> + exp(-i n_k omega theta)|n_k>)/sqrt(2) at a single node.

    The post-collapse single-node family: only one trigger acts, so the phase
    rate is n_k omega, not 2 n_k omega.  Node 0 is kept as an empty spectator
    so the state fits the two-node minimum.
    """
    if n_k < 1:
        raise ValueError(f"need n_k >= 1, got {n_k}")
    caps = (0, n_k)

    def evaluate(theta: float) -> FockState:
        phase = complex(math.cos(n_k * params.omega * theta), -math.sin(n_k * params.omega * theta))
        return new_superposition(caps, [((0, 0), 1.0), ((0, n_k), phase)])

    return PhaseFamily(evaluate, params.omega * n_k)
