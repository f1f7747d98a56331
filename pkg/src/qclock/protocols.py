"""Event-driven clock-synchronization protocols.

Two variants are simulated:

* operation-triggered: every node applies a collective NOT to its qubits at
  its own clock's agreed reading; the phase the state accumulates between the
  (offset) triggers encodes the clock offsets.  The run is an exact
  piecewise-stationary event simulation: real trigger times are sorted and
  the state evolves by diagonal phases between consecutive events.
* measurement-triggered: the W-state protocol where node 0's local +/-
  measurement starts the evolution and the other nodes later measure locally.

Node 0 is the reference clock.  Node k's trigger fires theta_k after node 0's,
where theta_k = t_k - t_0 is the offset being estimated; node 0 may purposely
delay its own trigger by node0_delay without changing any result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import PhaseVector, apply_phase_generator, collective_not, free_evolve
from .errors import ProtocolPreconditionError, SchedulingError, ShapeError
from .fock import Caps, FockState, PhysicalParams, check_caps, is_energy_eigenstate

# node index used in transcript rows for events that involve every node
ALL_NODES = -1


@dataclass(frozen=True)
class ClockTopology:
    """d+1 clock nodes with capacities, physics, and true offsets.

    offsets[k-1] is theta_k = t_k - t_0 for nodes k = 1..d; agreed_time is the
    reading tau at which each clock fires its trigger, and node0_delay >= 0 is
    the deliberate extra wait of the reference node before its own trigger.
    """

    caps: Caps
    params: PhysicalParams
    offsets: PhaseVector
    agreed_time: float = 0.0
    node0_delay: float = 1.0

    def __post_init__(self):
        caps = check_caps(self.caps)
        object.__setattr__(self, "caps", caps)
        object.__setattr__(self, "offsets", tuple(float(t) for t in self.offsets))
        if len(self.offsets) != len(caps) - 1:
            raise ShapeError(
                f"need {len(caps) - 1} offsets for {len(caps)} nodes, "
                f"got {len(self.offsets)}"
            )
        if self.node0_delay < 0:
            raise ValueError(f"node0_delay must be >= 0, got {self.node0_delay}")

    @property
    def d(self) -> int:
        return len(self.caps) - 1

    def trigger_times(self) -> tuple[float, ...]:
        """Real trigger time per node, index 0 first.

        t_0 = agreed_time + node0_delay and t_k = t_0 + theta_k, so the
        defining relation theta_k = t_k - t_0 holds exactly for any delay.
        """
        t0 = self.agreed_time + self.node0_delay
        return (t0,) + tuple(t0 + th for th in self.offsets)


@dataclass(frozen=True)
class ProtocolTranscript:
    """Ordered protocol events plus the resulting state.

    Events are (real_time, kind, node, detail) with kind one of: prepare,
    distribute, trigger-flip, concentrate, final-flip.  node is ALL_NODES (-1)
    for events that are not tied to a single node.
    """

    events: tuple[tuple[float, str, int, str], ...]
    final_state: FockState

    def to_log(self) -> str:
        """Tab-separated log, one event per line, times at 9 significant digits."""
        lines = [
            f"{t:.9g}\t{kind}\t{node}\t{detail}"
            for t, kind, node, detail in self.events
        ]
        return "\n".join(lines) + "\n"


def closed_form_final(top: ClockTopology, initial: FockState) -> FockState:
    """The final state without simulation: phase imprint exp(-2i omega N_k theta_k)."""
    return apply_phase_generator(initial, top.params, top.offsets)


def run_operation_triggered(
    top: ClockTopology, initial: FockState, concentrate_at: float | None = None
) -> ProtocolTranscript:
    """Simulate the five-stage operation-triggered protocol in real-time order.

    Stages: prepare and distribute (no-ops for a stationary probe), one
    collective NOT per node at its real trigger time with free evolution in
    between, then concentration and a final NOT on every node.  The returned
    final state equals closed_form_final(top, initial) up to a global phase,
    for any concentrate_at and node0_delay.
    """
    if initial.caps != top.caps:
        raise ShapeError(f"probe capacities {initial.caps} != topology {top.caps}")
    if not is_energy_eigenstate(initial):
        raise ProtocolPreconditionError(
            "initial probe must be an energy eigenstate (equal branch sums); "
            "a non-stationary probe would dephase before the triggers"
        )
    times = top.trigger_times()
    last_trigger = max(times)
    if concentrate_at is None:
        concentrate_at = last_trigger + 1.0
    if concentrate_at <= last_trigger:
        raise SchedulingError(
            f"concentrate_at={concentrate_at} must exceed last trigger {last_trigger}"
        )

    # offsets may be negative, so triggers can precede the agreed reading
    start = min(top.agreed_time, min(times))
    events = [
        (start, "prepare", ALL_NODES, f"probe over caps={initial.caps}"),
        (start, "distribute", ALL_NODES, "ideal channels, stationary probe"),
    ]

    # ties broken by node index; NOTs at distinct nodes commute so the order
    # within a timestamp is observationally irrelevant
    schedule = sorted((t, node) for node, t in enumerate(times))
    state = initial
    now = start
    for t, node in schedule:
        state = free_evolve(state, top.params, t - now)
        state = collective_not(state, node)
        now = t
        events.append((t, "trigger-flip", node, f"collective NOT at node {node}"))

    state = free_evolve(state, top.params, concentrate_at - now)
    events.append((concentrate_at, "concentrate", ALL_NODES, "qubits returned to node 0"))
    for node in range(len(top.caps)):
        state = collective_not(state, node)
    events.append((concentrate_at, "final-flip", ALL_NODES, "collective NOT on all nodes"))

    return ProtocolTranscript(tuple(events), state)


def w_conditional_probability(
    d: int, params: PhysicalParams, delta: float
) -> tuple[float, float]:
    """Node-i +/- probabilities given node 0 measured |+>, for offset delta.

    P(+/-) = 1/2 +/- cos(omega delta)/(d+1).  Even in delta; the two entries
    sum to 1. Given a node-0 result of |->, the signs flip (see
    run_w_protocol_sampled).
    """
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    c = math.cos(params.omega * delta) / (d + 1)
    return (0.5 + c, 0.5 - c)


@dataclass(frozen=True)
class WProtocolCounts:
    """Sampled outcome counts of the measurement-triggered protocol.

    node0_plus of `shots` runs published |+> at node 0; plus_given_plus[i-1]
    of those saw |+> at node i, and plus_given_minus[i-1] counts |+> results
    at node i among the node0_minus runs that published |->.
    """

    shots: int
    node0_plus: int
    node0_minus: int
    plus_given_plus: tuple[int, ...]
    plus_given_minus: tuple[int, ...]


def run_w_protocol_sampled(
    d: int,
    params: PhysicalParams,
    offsets: PhaseVector,
    shots: int,
    seed: int,
) -> WProtocolCounts:
    """Sample the W-state protocol: node 0 measures +/-, the rest follow.

    Node 0's outcome is |+> with probability 1/2.  Conditioned on the
    published outcome, node i's marginal is w_conditional_probability with
    delta = theta_i (sign-flipped when node 0 saw |->).  Per-node counts are
    sampled from those marginals; cross-node correlations are out of scope.
    Deterministic for a fixed seed.
    """
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    if len(offsets) != d:
        raise ShapeError(f"need {d} offsets, got {len(offsets)}")
    if shots < 1:
        raise ValueError(f"need shots >= 1, got {shots}")
    rng = np.random.default_rng(seed)
    n_plus = int(rng.binomial(shots, 0.5))
    n_minus = shots - n_plus
    given_plus = []
    given_minus = []
    for th in offsets:
        p_plus, _ = w_conditional_probability(d, params, th)
        given_plus.append(int(rng.binomial(n_plus, p_plus)) if n_plus else 0)
        # |-> branch: sign-flipped conditional
        given_minus.append(int(rng.binomial(n_minus, 1.0 - p_plus)) if n_minus else 0)
    return WProtocolCounts(shots, n_plus, n_minus, tuple(given_plus), tuple(given_minus))
