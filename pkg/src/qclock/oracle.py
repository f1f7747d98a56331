"""Dense qubit-level statevector oracle (<= 20 qubits).

Brute-force reference implementation used to cross-validate the sparse
Fock-level engine.  Favors obviousness over speed: amplitudes live in one
dense complex vector of length 2^m, basis index b encodes qubit q in bit
(m-1-q), i.e. |q0 q1 ... q_{m-1}> with qubit 0 leftmost.  Qubit-to-node
assignment is contiguous with node 0's qubits first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, CapacityError, SchedulingError, UnsupportedStateError
from .fock import FockState, PhysicalParams
from .protocols import ClockTopology

MAX_QUBITS = 20


@dataclass(frozen=True)
class QubitRegister:
    num_qubits: int
    amplitudes: np.ndarray  # complex, length 2**num_qubits
    node_map: tuple[int, ...]  # node index per qubit

    def __post_init__(self):
        if self.num_qubits > MAX_QUBITS:
            raise CapacityError(f"{self.num_qubits} qubits exceeds {MAX_QUBITS}")
        if self.num_qubits < 1:
            raise CapacityError("need at least 1 qubit")
        if len(self.node_map) != self.num_qubits:
            raise BoundsError("node_map length must equal num_qubits")
        if self.amplitudes.shape != (2**self.num_qubits,):
            raise BoundsError("amplitude vector length must be 2**num_qubits")
        n = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(n - 1.0) > 1e-10:
            raise ValueError(f"register norm^2 = {n} deviates from 1")


def _node_qubits(reg: QubitRegister, node: int) -> list[int]:
    qs = [q for q, nd in enumerate(reg.node_map) if nd == node]
    if not qs:
        raise BoundsError(f"node {node} has no assigned qubits")
    return qs


def oracle_prepare_w(num_qubits: int) -> QubitRegister:
    """Uniform superposition of the one-hot basis states, one qubit per node."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise CapacityError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
    amps = np.zeros(2**num_qubits, dtype=complex)
    for q in range(num_qubits):
        amps[1 << (num_qubits - 1 - q)] = 1.0
    amps /= math.sqrt(num_qubits)
    return QubitRegister(num_qubits, amps, tuple(range(num_qubits)))


def oracle_apply_not(reg: QubitRegister, node: int) -> QubitRegister:
    """sigma_x on every qubit assigned to `node`; an involution."""
    qs = _node_qubits(reg, node)
    t = reg.amplitudes.reshape([2] * reg.num_qubits)
    t = np.flip(t, axis=tuple(qs))
    return QubitRegister(reg.num_qubits, np.ascontiguousarray(t.reshape(-1)), reg.node_map)


def oracle_evolve(
    reg: QubitRegister, params: PhysicalParams, duration: float
) -> QubitRegister:
    """Free evolution: basis state with h excited qubits gains exp(-i omega h duration)."""
    if duration < 0:
        raise ValueError(f"duration must be nonnegative, got {duration}")
    idx = np.arange(2**reg.num_qubits, dtype=np.uint32)
    h = np.bitwise_count(idx).astype(float)
    amps = reg.amplitudes * np.exp(-1j * params.omega * duration * h)
    return QubitRegister(reg.num_qubits, amps, reg.node_map)


@dataclass(frozen=True)
class PmMeasurement:
    """Result of a +/- basis measurement on one qubit.

    A collapsed register is None when its branch has (numerically) zero
    probability.
    """

    p_plus: float
    collapsed_plus: QubitRegister | None
    collapsed_minus: QubitRegister | None


def oracle_measure_pm(reg: QubitRegister, qubit: int) -> PmMeasurement:
    """Measure one qubit in {|+>, |->}: Born probability and both collapses."""
    if not 0 <= qubit < reg.num_qubits:
        raise BoundsError(f"qubit {qubit} out of range")
    t = reg.amplitudes.reshape([2] * reg.num_qubits)
    a0 = np.take(t, 0, axis=qubit)
    a1 = np.take(t, 1, axis=qubit)
    up = (a0 + a1) / math.sqrt(2)
    um = (a0 - a1) / math.sqrt(2)
    p_plus = float(np.sum(np.abs(up) ** 2))

    def rebuild(u: np.ndarray, sign: float) -> QubitRegister | None:
        norm = float(np.linalg.norm(u.reshape(-1)))
        if norm < 1e-15:
            return None
        out = np.zeros([2] * reg.num_qubits, dtype=complex)
        sl0 = [slice(None)] * reg.num_qubits
        sl1 = [slice(None)] * reg.num_qubits
        sl0[qubit] = 0
        sl1[qubit] = 1
        # measured qubit left in (|0> + sign |1>)/sqrt(2)
        out[tuple(sl0)] = u / (math.sqrt(2) * norm)
        out[tuple(sl1)] = sign * u / (math.sqrt(2) * norm)
        return QubitRegister(reg.num_qubits, out.reshape(-1), reg.node_map)

    return PmMeasurement(p_plus, rebuild(up, 1.0), rebuild(um, -1.0))


def oracle_w_conditional(d: int, params: PhysicalParams, delta: float) -> float:
    """Full measurement-triggered pipeline, dense: P(node-1 sees + | node 0 saw +).

    Prepares W over d+1 qubits, measures qubit 0 in +/-, keeps the + branch,
    evolves the register for `delta`, and returns the exact + probability at
    qubit 1.
    """
    if d + 1 > MAX_QUBITS:
        raise CapacityError(f"d+1 = {d + 1} qubits exceeds {MAX_QUBITS}")
    reg = oracle_prepare_w(d + 1)
    branch = oracle_measure_pm(reg, 0).collapsed_plus
    assert branch is not None  # W state always has a + component at qubit 0
    evolved = oracle_evolve(branch, params, delta)
    return oracle_measure_pm(evolved, 1).p_plus


def _fock_to_dense(state: FockState) -> tuple[np.ndarray, tuple[int, ...]]:
    """Dense vector for a Fock state whose branches are all-or-nothing per node."""
    caps = state.caps
    m = sum(caps)
    if m > MAX_QUBITS:
        raise CapacityError(f"{m} qubits exceeds {MAX_QUBITS}")
    if m < 1:
        raise UnsupportedStateError("empty register")
    node_map = tuple(node for node, c in enumerate(caps) for _ in range(c))
    starts = [0]
    for c in caps:
        starts.append(starts[-1] + c)
    amps = np.zeros(2**m, dtype=complex)
    for occ, amp in state.terms:
        idx = 0
        for k, nk in enumerate(occ):
            if nk == 0:
                continue
            if nk != caps[k]:
                raise UnsupportedStateError(
                    f"branch {occ} is not all-up/all-down at node {k}; "
                    "general Dicke patterns are not representable here"
                )
            for q in range(starts[k], starts[k + 1]):
                idx |= 1 << (m - 1 - q)
        amps[idx] += amp
    return amps, node_map


def oracle_operation_protocol(
    top: ClockTopology, initial: FockState, concentrate_at: float | None = None
) -> QubitRegister:
    """Qubit-level run of the operation-triggered protocol.

    Mirrors run_operation_triggered event for event (same trigger times, same
    tie-breaking, same final flips) but on the dense register; the induced
    Fock amplitudes must agree with the sparse engine up to global phase.
    """
    if initial.caps != top.caps:
        raise UnsupportedStateError(
            f"probe capacities {initial.caps} != topology {top.caps}"
        )
    amps, node_map = _fock_to_dense(initial)
    reg = QubitRegister(len(node_map), amps, node_map)

    times = top.trigger_times()
    last_trigger = max(times)
    if concentrate_at is None:
        concentrate_at = last_trigger + 1.0
    if concentrate_at <= last_trigger:
        raise SchedulingError(
            f"concentrate_at={concentrate_at} must exceed last trigger {last_trigger}"
        )
    start = min(top.agreed_time, min(times))
    populated = set(node_map)
    now = start
    for t, node in sorted((t, node) for node, t in enumerate(times)):
        reg = oracle_evolve(reg, top.params, t - now)
        if node in populated:  # zero-capacity nodes flip nothing
            reg = oracle_apply_not(reg, node)
        now = t
    reg = oracle_evolve(reg, top.params, concentrate_at - now)
    for node in sorted(populated):
        reg = oracle_apply_not(reg, node)
    return reg


def oracle_fidelity_with_fock(reg: QubitRegister, state: FockState) -> float:
    """|<dense(state)|reg>| for an all-or-nothing Fock state; 1 means agreement."""
    amps, node_map = _fock_to_dense(state)
    if node_map != reg.node_map:
        raise UnsupportedStateError("register and state describe different layouts")
    return float(abs(np.vdot(amps, reg.amplitudes)))
