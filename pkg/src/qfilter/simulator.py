"""Exact detection statistics and Monte-Carlo audit of a measurement design.

A single photon entering the network in state psi_i leaves through output
port j with probability ``|(U @ input_i)_j|^2``.  :func:`port_probabilities`
evaluates these exactly; :func:`sample` draws input states from the priors
and ports from the exact distributions, counting clicks per (state, port)
and auditing the zero-error property: the target state must never click on
the "not target" ports and vice versa.  Port 4 is the inconclusive
outcome, so the port-4 fraction estimates the average failure probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .designer import MeasurementDesign
from .errors import DomainError
from .filter_core import average_overlap_A
from .states import Ensemble, parallel_component_norm2

__all__ = [
    "SimulationReport",
    "port_probabilities",
    "sample",
    "von_neumann_baseline",
]

#: Exact probabilities below this are treated as hard zeros when sampling,
#: so floating dust can never produce a spurious forbidden-port click.
ZERO_PROB_TOL = 1e-14
#: Guard against absurd trial counts (memory/time overflow).
MAX_TRIALS = 10**9


@dataclass(frozen=True, eq=False)
class SimulationReport:
    """Outcome statistics of a Monte-Carlo run.

    Attributes
    ----------
    exact_probabilities:
        (3, 4) array; row i is the exact output-port distribution for
        input state i.
    counts:
        (3, 4) integer array of sampled clicks per (input state, port).
    trials:
        Total number of sampled photons; equals ``counts.sum()``.
    violations:
        Clicks observed at ports that certify the wrong answer: the
        target's certifying port hit by states 2 or 3, or a
        "not target" port hit by state 1.  Zero for every valid design.
    empirical_Q:
        Fraction of trials that ended on the failure port (port 4).
    seed:
        Seed the run can be replayed with.
    shards:
        Number of independent substreams the trials were split across;
        results are deterministic for fixed (seed, shards).
    """

    exact_probabilities: np.ndarray
    counts: np.ndarray
    trials: int
    violations: int
    empirical_Q: float
    seed: int
    shards: int


def port_probabilities(design: MeasurementDesign, i: int) -> np.ndarray:
    """Exact output-port distribution for input state `i` (0-based).

    The four probabilities are nonnegative, sum to 1 within 1e-12, and the
    port-4 entry equals the failure probability q_i of the realized
    optimum within 1e-10.
    """
    if i not in (0, 1, 2):
        raise DomainError(f"state index must be 0, 1 or 2, got {i!r}")
    amplitudes = design.unitary @ design.embedded_inputs[i]
    return np.abs(amplitudes) ** 2


def _shard_sizes(trials: int, shards: int) -> list[int]:
    base, extra = divmod(trials, shards)
    return [base + (1 if k < extra else 0) for k in range(shards)]


def sample(
    design: MeasurementDesign,
    e: Ensemble,
    trials: int,
    seed: int,
    *,
    shards: int = 1,
) -> SimulationReport:
    """Draw `trials` photons and tabulate clicks, failures, and violations.

    Each trial draws an input state from the priors and an output port
    from that state's exact port distribution.  Trials are split across
    `shards` independent substreams spawned from `seed`, so a run is
    reproducible for a fixed (seed, shards) pair regardless of how the
    shards are executed.  Probabilities below ``ZERO_PROB_TOL`` are
    clamped to exact zeros before sampling.
    """
    trials = int(trials)
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if trials > MAX_TRIALS:
        raise DomainError(f"trials must not exceed {MAX_TRIALS:g}, got {trials}")
    shards = int(shards)
    if shards < 1:
        raise DomainError(f"shards must be >= 1, got {shards}")
    for given, built in zip(e.states, design.embedded_inputs):
        if np.max(np.abs(given.padded(4) - built)) > 1e-9:
            raise DomainError(
                "the design was built for a different ensemble than the one "
                "being sampled"
            )
    exact = np.array([port_probabilities(design, i) for i in range(3)])
    clean = np.where(exact < ZERO_PROB_TOL, 0.0, exact)
    clean = clean / clean.sum(axis=1, keepdims=True)
    counts = np.zeros((3, 4), dtype=np.int64)
    children = np.random.SeedSequence(seed).spawn(shards)
    for child, n in zip(children, _shard_sizes(trials, shards)):
        if n == 0:
            continue
        rng = np.random.default_rng(child)
        per_state = rng.multinomial(n, e.priors)
        for i in range(3):
            if per_state[i]:
                counts[i] += rng.multinomial(per_state[i], clean[i])
    claim = design.state1_port - 1
    set_ports = [m - 1 for m in design.set_ports]
    violations = int(
        counts[0, set_ports[0]]
        + counts[0, set_ports[1]]
        + counts[1, claim]
        + counts[2, claim]
    )
    empirical_q = float(counts[:, 3].sum() / trials)
    return SimulationReport(
        exact_probabilities=exact,
        counts=counts,
        trials=trials,
        violations=violations,
        empirical_Q=empirical_q,
        seed=int(seed),
        shards=shards,
    )


def von_neumann_baseline(e: Ensemble) -> float:
    """Average failure probability of the projective comparison strategy.

    Two projective strategies bracket the generalized measurement: always
    failing on the target (q1 = 1, Q = eta1 + A) and projecting onto the
    complement of span{psi2, psi3} (q1 = w, Q = eta1*w + A/w, where w is
    the parallel-component squared norm).  The baseline reported is the
    one acting on the same side of the optimum as the instance itself:
    ``eta1 + A`` when A >= eta1 (where it is the true optimum), and the
    projection value ``eta1*w + A/w`` otherwise.  Orthogonal targets
    (A = 0) return 0.
    """
    A = average_overlap_A(e)
    if A == 0.0:
        return 0.0
    eta1 = float(e.priors[0])
    if A >= eta1:
        return eta1 + A
    w = parallel_component_norm2(e)
    if w <= 1e-12:
        # Unreachable for consistent instances (A > 0 forces w > 0); kept
        # as a defensive fallback for near-degenerate priors.
        return eta1 + A
    return eta1 * w + A / w
