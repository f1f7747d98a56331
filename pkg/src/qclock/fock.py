"""Multi-node Fock-basis states and the standard probe families.

A system of d+1 nodes, node k owning n_k identical two-level qubits, is
described in the Fock basis: a basis vector is the tuple of per-node
excitation counts (N_0, ..., N_d) with 0 <= N_k <= n_k.  States are sparse
complex superpositions over those tuples.  Units use hbar = 1 with ground
energy E0 = 0 and excited energy E1 = omega, so only omega enters any
observable phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import BoundsError, DegenerateStateError, ShapeError

Caps = tuple[int, ...]
Occupation = tuple[int, ...]

NORM_TOL = 1e-10   # accepted drift of sum |c|^2 from 1
PRUNE_TOL = 1e-12  # amplitudes below this magnitude are dropped


@dataclass(frozen=True)
class PhysicalParams:
    """Qubit energy scale: omega = e1 - e0, hbar = 1.

    The default convention e0 = 0, e1 = omega is what every phase formula
    in this package assumes; a nonzero e0 only ever contributes a global
    phase and is therefore never tracked.
    """

    omega: float
    e0: float = 0.0
    e1: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.e1 is None:
            object.__setattr__(self, "e1", self.e0 + self.omega)
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not math.isclose(self.e1 - self.e0, self.omega, rel_tol=1e-12):
            raise ValueError("energy levels must satisfy omega = e1 - e0")


def check_caps(caps: Caps) -> Caps:
    """Validate node capacities: d+1 >= 2 entries, nonnegative, N >= 1."""
    caps = tuple(int(c) for c in caps)
    if len(caps) < 2:
        raise ShapeError(f"need at least 2 nodes (d+1 >= 2), got {len(caps)}")
    if any(c < 0 for c in caps):
        raise BoundsError(f"capacities must be nonnegative: {caps}")
    if sum(caps) < 1:
        raise DegenerateStateError("total qubit count must be at least 1")
    return caps


def check_occupation(occ: Occupation, caps: Caps) -> Occupation:
    """Validate one occupation vector against capacities."""
    occ = tuple(int(x) for x in occ)
    if len(occ) != len(caps):
        raise ShapeError(f"occupation length {len(occ)} != node count {len(caps)}")
    for k, (x, c) in enumerate(zip(occ, caps)):
        if not 0 <= x <= c:
            raise BoundsError(f"occupation {x} out of [0, {c}] at node {k}")
    return occ


@dataclass(frozen=True)
class FockState:
    """Normalized sparse superposition over occupation vectors.

    ``terms`` is kept sorted lexicographically by occupation vector so that
    iteration, serialization and test output are deterministic.
    """

    caps: Caps
    terms: tuple[tuple[Occupation, complex], ...]

    def amplitude(self, occ: Occupation) -> complex:
        occ = tuple(occ)
        for o, c in self.terms:
            if o == occ:
                return c
        return 0j

    def branches(self) -> tuple[Occupation, ...]:
        return tuple(o for o, _ in self.terms)

    def norm_sq(self) -> float:
        return sum(abs(c) ** 2 for _, c in self.terms)

    def map_amplitudes(self, fn) -> "FockState":
        """Apply occ -> phase/amplitude factor fn(occ) to every term.

        Internal helper for diagonal operations; assumes |fn| = 1 so the
        result needs no renormalization, only re-pruning.
        """
        new = tuple((o, c * fn(o)) for o, c in self.terms)
        return FockState(self.caps, new)


def new_superposition(caps: Caps, terms) -> FockState:
    """Build a normalized FockState from (occupation, amplitude) pairs.

    Duplicate occupation vectors are merged by summing amplitudes before
    normalizing; amplitudes below the pruning threshold are dropped after.
    """
    caps = check_caps(caps)
    merged: dict[Occupation, complex] = {}
    got_any = False
    for occ, amp in terms:
        got_any = True
        occ = check_occupation(occ, caps)
        merged[occ] = merged.get(occ, 0j) + complex(amp)
    if not got_any:
        raise DegenerateStateError("no terms given")
    norm = math.sqrt(sum(abs(c) ** 2 for c in merged.values()))
    if norm < PRUNE_TOL:
        raise DegenerateStateError("terms sum to the zero state")
    out = tuple(
        (occ, merged[occ] / norm)
        for occ in sorted(merged)
        if abs(merged[occ]) / norm >= PRUNE_TOL
    )
    return FockState(caps, out)


def inner_product(a: FockState, b: FockState) -> complex:
    """<a|b> over the shared sparse support."""
    if a.caps != b.caps:
        raise ShapeError(f"capacity mismatch: {a.caps} vs {b.caps}")
    bmap = dict(b.terms)
    return sum(c.conjugate() * bmap[o] for o, c in a.terms if o in bmap)


def fidelity_global_phase(a: FockState, b: FockState) -> float:
    """|<a|b>|: equals 1 iff the states agree up to a global phase."""
    return abs(inner_product(a, b))


def is_energy_eigenstate(s: FockState) -> bool:
    """True iff every stored branch has the same total excitation count."""
    sums = {sum(o) for o in s.branches()}
    return len(sums) <= 1


def prepare_noon(n: int) -> FockState:
    """Two-node probe (|0 n> + |n 0>)/sqrt(2), node 0 first."""
    if n < 1:
        raise DegenerateStateError(f"NOON probe needs n >= 1, got {n}")
    return new_superposition((n, n), [((0, n), 1.0), ((n, 0), 1.0)])


def prepare_average_state(d: int, n: int) -> FockState:
    """Average-offset probe (|dn 0...0> + |0 n...n>)/sqrt(2) over d+1 nodes.

    Node 0 holds n_0 = dn qubits, nodes 1..d hold n each, so both branches
    carry dn excitations and the state is stationary before any trigger.
    """
    if d < 1 or n < 1:
        raise DegenerateStateError(f"need d >= 1 and n >= 1, got d={d}, n={n}")
    caps = (d * n,) + (n,) * d
    top = (d * n,) + (0,) * d
    bottom = (0,) + (n,) * d
    return new_superposition(caps, [(top, 1.0), (bottom, 1.0)])


def prepare_w(d: int) -> FockState:
    """Uniform single-excitation state over d+1 single-qubit nodes.

    All d+1 one-hot branches carry amplitude 1/sqrt(d+1); that prefactor is
    what unit norm requires for d+1 terms.
    """
    if d < 1:
        raise DegenerateStateError(f"W probe needs d >= 1, got {d}")
    caps = (1,) * (d + 1)
    terms = []
    for k in range(d + 1):
        occ = tuple(1 if j == k else 0 for j in range(d + 1))
        terms.append((occ, 1.0))
    return new_superposition(caps, terms)
