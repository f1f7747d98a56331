"""Measurement sampling and maximum-likelihood offset estimation.

The final protocol state for the NOON and average probes is a two-branch
superposition (|A> + e^{-i phi}|B>)/sqrt(2) with phi = s * theta.  We read it
out interferometrically with two settings, X: {(|A>+|B>)/sqrt(2), ...} with
P(+) = (1 + cos phi)/2, and Y: {(|A>-i|B>)/sqrt(2), ...} with
P(+) = (1 + sin phi)/2.  Using both settings resolves the +/-phi ambiguity a
single cosine would leave and the combined classical Fisher information is
one per shot in phi, so the maximum-likelihood estimate saturates the quantum
Cramer-Rao bound at large shot counts.

All randomness comes from numpy's seeded PCG64 generator; trial t of a run
with seed s uses its own stream seeded s + t, so serial and parallel
execution give identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import InsufficientDataError, UnidentifiableError, UnsupportedStateError
from .fock import FockState, Occupation, PhysicalParams, prepare_average_state, prepare_noon
from .metrology import average_qfi, noon_qfi
from .protocols import ClockTopology, closed_form_final

GRID_SIZE = 4096
REFINE_STEPS = 60
# grid over (-pi, pi]: first point one step above -pi, last point exactly pi
_PHI_GRID = -np.pi + 2.0 * np.pi * (np.arange(GRID_SIZE) + 1) / GRID_SIZE
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TwoBranchReadout:
    """Counts from a two-setting readout of a two-branch state.

    phase_scale is the rate s with phi = -s * theta (radians per unit offset).
    counts = (x_plus, x_minus, y_plus, y_minus); sampled data holds integers,
    but exact-probability (fractional) counts are accepted for
    infinite-statistics checks, so the sum constraints are checked within a
    small tolerance.
    """

    phase_scale: float
    shots_x: int
    shots_y: int
    counts: tuple[float, float, float, float]

    def __post_init__(self):
        xp, xm, yp, ym = self.counts
        if min(xp, xm, yp, ym) < 0:
            raise ValueError(f"counts must be nonnegative: {self.counts}")
        if not math.isclose(xp + xm, self.shots_x, rel_tol=0.0, abs_tol=1e-9):
            raise ValueError(f"x counts {xp}+{xm} != shots_x {self.shots_x}")
        if not math.isclose(yp + ym, self.shots_y, rel_tol=0.0, abs_tol=1e-9):
            raise ValueError(f"y counts {yp}+{ym} != shots_y {self.shots_y}")


@dataclass(frozen=True)
class MonteCarloResult:
    theta_true: float
    trials: int
    shots_per_trial: int
    estimates: tuple[float, ...]
    empirical_dev: float
    crb: float

    def to_json_dict(self) -> dict:
        return {
            "theta_true": self.theta_true,
            "trials": self.trials,
            "shots": self.shots_per_trial,
            "estimates": list(self.estimates),
            "empirical_dev": self.empirical_dev,
            "crb": self.crb,
        }


def readout_probabilities(phi: float) -> tuple[float, float]:
    """(P(+) in the X setting, P(+) in the Y setting) for relative phase phi."""
    return (1.0 + math.cos(phi)) / 2.0, (1.0 + math.sin(phi)) / 2.0


def _branch_phase_scale(branch_a: Occupation, branch_b: Occupation, omega: float) -> float:
    """Phase rate s with phi = -s*theta when all offsets equal theta.

    The imprint puts -2 omega sum_{k>=1} N_k theta on each branch, so the
    relative phase arg(c_b/c_a) moves at -2 omega (sum_b - sum_a) per unit
    theta.  Swapping a and b flips both the phase and this rate, leaving the
    estimate unchanged.
    """
    return 2.0 * omega * (sum(branch_b[1:]) - sum(branch_a[1:]))


def sample_readout(
    final: FockState,
    branch_a: Occupation,
    branch_b: Occupation,
    shots: int,
    seed: int,
    omega: float = 1.0,
) -> TwoBranchReadout:
    """Sample a two-setting readout of a state supported on exactly two branches.

    Shots are split evenly between the X and Y settings, odd remainder to X;
    each setting's + count is one binomial draw from a generator seeded with
    `seed` (X drawn first).  The stored phase_scale assumes the equal-offset
    parametrization (theta for NOON, theta-bar for the average probe) at the
    given omega.
    """
    if shots < 2:
        raise ValueError(f"need shots >= 2, got {shots}")
    branch_a = tuple(branch_a)
    branch_b = tuple(branch_b)
    support = set(final.branches())
    if support != {branch_a, branch_b}:
        raise UnsupportedStateError(
            f"state support {sorted(support)} is not the two readout branches"
        )
    ca = final.amplitude(branch_a)
    cb = final.amplitude(branch_b)
    phi = float(np.angle(cb / ca))
    px, py = readout_probabilities(phi)
    shots_y = shots // 2
    shots_x = shots - shots_y
    rng = np.random.default_rng(seed)
    x_plus = int(rng.binomial(shots_x, px))
    y_plus = int(rng.binomial(shots_y, py))
    return TwoBranchReadout(
        phase_scale=_branch_phase_scale(branch_a, branch_b, omega),
        shots_x=shots_x,
        shots_y=shots_y,
        counts=(x_plus, shots_x - x_plus, y_plus, shots_y - y_plus),
    )


def _log_likelihood(phi, counts):
    xp, xm, yp, ym = counts
    c = np.cos(phi)
    s = np.sin(phi)
    # xlogy(0, 0) = 0, so zero-probability settings with zero counts are fine
    return (
        xlogy(xp, (1.0 + c) / 2.0)
        + xlogy(xm, (1.0 - c) / 2.0)
        + xlogy(yp, (1.0 + s) / 2.0)
        + xlogy(ym, (1.0 - s) / 2.0)
    )


def mle_phase(r: TwoBranchReadout) -> float:
    """Maximum-likelihood phase in (-pi, pi] from a two-setting readout.

    Coarse pass: 4096-point uniform grid; argmax takes the first (smallest)
    maximizer, which pins down plateaus deterministically.  Fine pass: 60
    golden-section steps on the one-grid-step bracket around the coarse peak.
    """
    if r.shots_x + r.shots_y < 2:
        raise InsufficientDataError("need at least 2 total shots to estimate a phase")
    ll = _log_likelihood(_PHI_GRID, r.counts)
    best = int(np.argmax(ll))
    step = 2.0 * np.pi / GRID_SIZE
    lo = _PHI_GRID[best] - step
    hi = _PHI_GRID[best] + step
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1 = _log_likelihood(x1, r.counts)
    f2 = _log_likelihood(x2, r.counts)
    for _ in range(REFINE_STEPS):
        if f1 >= f2:  # ties move the bracket left, toward smaller phi
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = _log_likelihood(x1, r.counts)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = _log_likelihood(x2, r.counts)
    phi = (lo + hi) / 2.0
    # the bracket can poke past pi at the wrap-around point
    if phi > np.pi:
        phi -= 2.0 * np.pi
    elif phi <= -np.pi:
        phi += 2.0 * np.pi
    return float(phi)


def estimate_theta(r: TwoBranchReadout) -> float:
    """Offset estimate -mle_phase/s mapped into the window (-pi/|s|, pi/|s|].

    Offsets outside the window alias back into it (2 pi periodicity of the
    imprinted phase); that wrap-around is documented behavior, not an error.
    """
    s = r.phase_scale
    if s == 0:
        raise UnidentifiableError("phase_scale is zero; theta leaves no phase")
    theta = -mle_phase(r) / s
    w = math.pi / abs(s)
    theta = math.fmod(theta + w, 2.0 * w)
    if theta <= 0.0:
        theta += 2.0 * w
    return theta - w


def _probe_setup(probe, params: PhysicalParams):
    """(initial state, topology builder, branch_a, branch_b, per-copy QFI).

    probe is ("noon", n) or ("average", d, n); branch_a is the undistributed
    branch, branch_b the one that picks up the offset phase.
    """
    kind = probe[0]
    if kind == "noon":
        (_, n) = probe
        initial = prepare_noon(n)
        qfi = noon_qfi(n, params)
        branch_a: Occupation = (n, 0)
        branch_b: Occupation = (0, n)
        d = 1
    elif kind == "average":
        (_, d, n) = probe
        initial = prepare_average_state(d, n)
        qfi = average_qfi(d, n, params)
        branch_a = (d * n,) + (0,) * d
        branch_b = (0,) + (n,) * d
    else:
        raise ValueError(f"unknown probe kind {kind!r}; use 'noon' or 'average'")

    def topology(theta: float) -> ClockTopology:
        return ClockTopology(initial.caps, params, (theta,) * d)

    return initial, topology, branch_a, branch_b, qfi


def identifiability_window(probe, params: PhysicalParams) -> float:
    """Half-width pi/s of the unambiguous offset window for a probe."""
    _, _, branch_a, branch_b, _ = _probe_setup(probe, params)
    s = _branch_phase_scale(branch_a, branch_b, params.omega)
    return math.pi / abs(s)


def monte_carlo_deviation(
    probe,
    params: PhysicalParams,
    theta_true: float,
    shots: int,
    trials: int,
    seed: int,
) -> MonteCarloResult:
    """Repeated end-to-end estimation runs and their root-mean-square deviation.

    Each trial builds the closed-form final state at theta_true, samples a
    `shots`-shot readout with stream seed + trial index, and estimates the
    offset.  crb is 1/sqrt(shots * F_Q) with F_Q the per-copy QFI, the bound
    the deviation is expected to track for shots >~ 1000.
    """
    if trials < 50:
        raise ValueError(f"need trials >= 50 for a stable deviation, got {trials}")
    initial, topology, branch_a, branch_b, qfi = _probe_setup(probe, params)
    s = _branch_phase_scale(branch_a, branch_b, params.omega)
    if not abs(theta_true * s) < math.pi / 2:
        raise ValueError(
            f"theta_true={theta_true} is outside the safe half-window "
            f"|theta| < {math.pi / 2 / abs(s):.6g} for this probe"
        )
    final = closed_form_final(topology(theta_true), initial)
    estimates = []
    for t in range(trials):
        readout = sample_readout(
            final, branch_a, branch_b, shots, seed + t, omega=params.omega
        )
        estimates.append(estimate_theta(readout))
    dev = math.sqrt(sum((e - theta_true) ** 2 for e in estimates) / trials)
    return MonteCarloResult(
        theta_true=theta_true,
        trials=trials,
        shots_per_trial=shots,
        estimates=tuple(estimates),
        empirical_dev=dev,
        crb=1.0 / math.sqrt(shots * qfi),
    )
