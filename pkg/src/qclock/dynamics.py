"""Diagonal dynamics on Fock states: free evolution, collective NOT, phase imprint.

Every operation here is either diagonal in the Fock basis or a permutation of
it, so all are computed branch-wise in closed form.  Global phase is never
canonicalized; compare states with fidelity_global_phase.
"""

from __future__ import annotations

import cmath

from .errors import BoundsError, ShapeError
from .fock import FockState, PhysicalParams

PhaseVector = tuple[float, ...]


def free_evolve(
    s: FockState,
    params: PhysicalParams,
    duration: float,
    active: set[int] | None = None,
) -> FockState:
    """Evolve under the free Hamiltonian for `duration` (E0 = 0 convention).

    Branch (N_0, ..., N_d) gains phase exp(-i omega duration sum_{k in active} N_k).
    `active` defaults to all nodes; masking exists for event-engine bookkeeping
    but never affects physics for energy eigenstates (the phase is then global).
    """
    if duration < 0:
        raise ValueError(f"duration must be nonnegative, got {duration}")
    nodes = range(len(s.caps)) if active is None else sorted(active)
    for k in nodes:
        if not 0 <= k < len(s.caps):
            raise BoundsError(f"node index {k} out of range for {len(s.caps)} nodes")
    w = params.omega * duration
    return s.map_amplitudes(lambda occ: cmath.exp(-1j * w * sum(occ[k] for k in nodes)))


def collective_not(s: FockState, node: int) -> FockState:
    """Flip every qubit at one node: N_node -> n_node - N_node on each branch.

    A pure relabeling of branches (amplitudes unchanged), hence an involution.
    """
    if not 0 <= node < len(s.caps):
        raise BoundsError(f"node index {node} out of range for {len(s.caps)} nodes")
    cap = s.caps[node]
    new = []
    for occ, amp in s.terms:
        flipped = occ[:node] + (cap - occ[node],) + occ[node + 1 :]
        new.append((flipped, amp))
    new.sort(key=lambda t: t[0])
    return FockState(s.caps, tuple(new))


def apply_phase_generator(
    s: FockState, params: PhysicalParams, thetas: PhaseVector
) -> FockState:
    """Imprint the clock offsets: branch gains exp(-2i omega sum_k N_k theta_k).

    `thetas` covers nodes 1..d (node 0 is the reference and gets no phase).
    This is the closed form of the full operation-triggered protocol.
    """
    d = len(s.caps) - 1
    if len(thetas) != d:
        raise ShapeError(f"need {d} offsets for {d + 1} nodes, got {len(thetas)}")
    two_w = 2.0 * params.omega

    def phase(occ):
        acc = 0.0
        for nk, th in zip(occ[1:], thetas):
            acc += nk * th
        return cmath.exp(-1j * two_w * acc)

    return s.map_amplitudes(phase)
