"""Construction of an explicit measurement realizing the optimal filter.

The optimal failure probabilities from :mod:`qfilter.filter_core` are
turned into a concrete single-photon network: each input state (padded
into 4 modes) is mapped by a 4x4 unitary onto

    output_i = success_i + failure_i,

where ``failure_i = sqrt(q_i) * e^{i chi_i} * e4`` all point along mode 4
(a click there is the inconclusive outcome), the success part of state 1
occupies one dedicated mode, and the success parts of states 2 and 3 share
the remaining two modes.  A click on state 1's mode certifies "target", a
click on the shared modes certifies "not target"; zero-error operation is
built in because the forbidden amplitudes vanish exactly.

Such a unitary exists iff the Gram matrix is preserved, which pins all
inner products of the success vectors: they must reproduce the Hermitian
residual matrix L built in :func:`build_L`.  The remaining freedom — which
mode hosts state 1's success amplitude, and sign flips of individual
success vectors that leave L invariant — is a discrete gauge.
:func:`design` enumerates these gauges and keeps the one whose unitary
synthesizes into the simplest mesh: fewest beam-splitter layers first,
then the largest real trace of the upper-left 3x3 block (the most
"pass-through" network), with deterministic tie-breaks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    InconsistentSolutionError,
    InfeasibleError,
    NoUnitaryError,
)
from .filter_core import FilterSolution, solve
from .multiport import decompose
from .states import Ensemble, overlaps

__all__ = [
    "MeasurementDesign",
    "failure_phases",
    "failure_vectors",
    "build_L",
    "success_vectors",
    "embed_inputs",
    "complete_unitary",
    "design",
]

#: Total number of modes in the network (3 signal modes + 1 failure mode).
NETWORK_DIM = 4
#: Gram matrices of inputs and outputs must agree within this for a
#: connecting unitary to exist.
GRAM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class MeasurementDesign:
    """A complete, executable description of the optimal measurement.

    Attributes
    ----------
    success_vectors:
        Three 4-mode vectors carrying the conclusive-outcome amplitudes;
        vector 1 is orthogonal to vectors 2 and 3, and
        ``<v_i|v_i> = 1 - q_i``.
    failure_vectors:
        Three 4-mode vectors supported on mode 4 only, with amplitudes
        ``sqrt(q_i) * e^{i chi_i}``.
    unitary:
        4x4 unitary mapping each embedded input onto
        ``success_vectors[i] + failure_vectors[i]``.
    theta:
        Mixing angle of success vectors 2 and 3 on their shared mode pair.
    chi:
        Failure-amplitude phases (chi_1 = 0 by gauge choice).
    solution:
        The closed-form optimum the design realizes.
    embedded_inputs:
        The input states padded into the 4-mode network.
    state1_port:
        1-based mode whose click certifies the target state (1 for the
        standard placement, 2 when the swapped placement gives a simpler
        mesh).
    """

    success_vectors: tuple[np.ndarray, np.ndarray, np.ndarray]
    failure_vectors: tuple[np.ndarray, np.ndarray, np.ndarray]
    unitary: np.ndarray
    theta: float
    chi: tuple[float, float, float]
    solution: FilterSolution
    embedded_inputs: tuple[np.ndarray, np.ndarray, np.ndarray]
    state1_port: int

    @property
    def outputs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Full output vectors: success part plus failure part."""
        return tuple(
            s + f for s, f in zip(self.success_vectors, self.failure_vectors)
        )

    @property
    def set_ports(self) -> tuple[int, int]:
        """1-based modes whose click certifies "not the target"."""
        return tuple(m for m in (1, 2, 3) if m != self.state1_port)


def failure_phases(e: Ensemble) -> tuple[float, float, float]:
    """Phases chi of the failure amplitudes.

    The failure vectors are collinear along mode 4, so only their phases
    relative to state 1 are fixed by Gram preservation:
    ``chi_1 = 0`` (gauge), ``chi_j = arg(O1j)``.
    """
    ov = overlaps(e)
    return (0.0, float(np.angle(ov.O12)), float(np.angle(ov.O13)))


def failure_vectors(
    e: Ensemble, sol: FilterSolution
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mode-4 failure vectors ``sqrt(q_i) * e^{i chi_i} * e4``."""
    chi = failure_phases(e)
    out = []
    for q_i, chi_i in zip(sol.failure_probabilities, chi):
        v = np.zeros(NETWORK_DIM, dtype=complex)
        v[3] = np.sqrt(max(q_i, 0.0)) * np.exp(1j * chi_i)
        out.append(v)
    return tuple(out)


def build_L(e: Ensemble, sol: FilterSolution) -> np.ndarray:
    """Residual Gram matrix the success vectors must reproduce.

    ``L[i, j] = <psi_i|psi_j> - <failure_i|failure_j>``.  For a valid
    solution the first row and column off-diagonals vanish (that is what
    the unitarity constraints on q enforce) and L is positive
    semidefinite.

    Raises
    ------
    InconsistentSolutionError
        If L has an eigenvalue below -1e-8, i.e. the provided solution is
        not consistent with the ensemble.
    """
    ov = overlaps(e)
    q1, q2, q3 = sol.failure_probabilities
    chi2, chi3 = float(np.angle(ov.O12)), float(np.angle(ov.O13))
    mat = np.zeros((3, 3), dtype=complex)
    mat[0, 0] = 1.0 - q1
    mat[1, 1] = 1.0 - q2
    mat[2, 2] = 1.0 - q3
    mat[0, 1] = ov.O12 - np.sqrt(max(q1 * q2, 0.0)) * np.exp(1j * chi2)
    mat[0, 2] = ov.O13 - np.sqrt(max(q1 * q3, 0.0)) * np.exp(1j * chi3)
    mat[1, 2] = ov.O23 - np.sqrt(max(q2 * q3, 0.0)) * np.exp(1j * (chi3 - chi2))
    mat[1, 0] = np.conj(mat[0, 1])
    mat[2, 0] = np.conj(mat[0, 2])
    mat[2, 1] = np.conj(mat[1, 2])
    min_eig = float(np.linalg.eigvalsh(mat).min())
    if min_eig < -1e-8:
        raise InconsistentSolutionError(
            "residual Gram matrix has negative eigenvalue "
            f"{min_eig:.3e}; the failure probabilities are not consistent "
            "with this ensemble"
        )
    return mat


def _success_vectors(
    L: np.ndarray,
    q: tuple[float, float, float],
    swap: bool,
    signs: tuple[int, int, int],
) -> tuple[list[np.ndarray], float]:
    """Build success vectors for one gauge choice; returns (vectors, theta).

    Placement: state 1's success amplitude sits alone on one mode (mode 1,
    or mode 2 when ``swap``), states 2 and 3 share the remaining two of
    the first three modes as ``sqrt(p_i) * (cos theta, +/- sin theta)``.
    ``signs`` multiplies each vector by +/-1; flips of vector 1 alone and
    joint flips of vectors 2 and 3 always preserve L, while a lone flip of
    vector 2 or 3 is only admissible when L23 = 0.
    """
    p = [max(1.0 - q_i, 0.0) for q_i in q]
    l23 = complex(L[1, 2])
    p23 = p[1] * p[2]
    if p23 > 1e-24:
        bound = np.sqrt(p23)
        if abs(l23) > bound + 1e-10:
            raise InfeasibleError(
                f"|L23| = {abs(l23):.12g} exceeds sqrt(p2*p3) = {bound:.12g}; "
                "no pair of success vectors can realize this overlap"
            )
        if abs(l23.imag) <= 1e-12 * max(1.0, abs(l23)):
            cos2theta = min(max(l23.real / bound, -1.0), 1.0)
            phase3 = 1.0 + 0.0j
        else:
            # Complex overlap: carry its phase on vector 3 as a whole and
            # set the mixing angle from the magnitude.
            cos2theta = min(abs(l23) / bound, 1.0)
            phase3 = np.exp(1j * np.angle(l23))
    else:
        cos2theta, phase3 = 0.0, 1.0 + 0.0j
    theta = 0.5 * float(np.arccos(cos2theta))
    mode1, mode_a, mode_b = (1, 0, 2) if swap else (0, 1, 2)
    v1 = np.zeros(NETWORK_DIM, dtype=complex)
    v2 = np.zeros(NETWORK_DIM, dtype=complex)
    v3 = np.zeros(NETWORK_DIM, dtype=complex)
    v1[mode1] = signs[0] * np.sqrt(p[0])
    v2[mode_a] = signs[1] * np.sqrt(p[1]) * np.cos(theta)
    v2[mode_b] = signs[1] * np.sqrt(p[1]) * np.sin(theta)
    v3[mode_a] = signs[2] * np.sqrt(p[2]) * np.cos(theta) * phase3
    v3[mode_b] = -signs[2] * np.sqrt(p[2]) * np.sin(theta) * phase3
    return [v1, v2, v3], theta


def success_vectors(
    L: np.ndarray,
    sol: FilterSolution,
    *,
    swap: bool = False,
    signs: tuple[int, int, int] = (1, 1, 1),
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Success vectors for one explicit gauge choice.

    By default uses the standard placement (state 1 on mode 1, states 2
    and 3 mixed on modes 2 and 3 with angle
    ``theta = arccos(L23 / sqrt(p2*p3)) / 2``) and no sign flips.  When
    q1 = 1 the first vector is the zero vector: the target never produces
    a conclusive click, which is the correct boundary design.

    Raises
    ------
    InfeasibleError
        If |L23| exceeds sqrt(p2*p3) beyond 1e-10 (impossible for a
        solution that passed :func:`build_L`).
    """
    q = (sol.q1, sol.q2, sol.q3)
    vecs, _ = _success_vectors(L, q, swap, signs)
    return tuple(vecs)


def embed_inputs(e: Ensemble) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pad the ensemble's states into the 4-mode network.

    The states may use at most 3 dimensions; mode 4 is reserved as the
    failure direction and must start unoccupied.
    """
    if e.dim > NETWORK_DIM - 1:
        raise DomainError(
            f"designs use {NETWORK_DIM} modes with mode {NETWORK_DIM} reserved "
            f"for failure; states of dimension {e.dim} do not fit"
        )
    return tuple(s.padded(NETWORK_DIM) for s in e.states)


def _project_out(vec: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    """Residual of `vec` orthogonal to `basis`, with one refinement pass.

    The second pass removes the components reintroduced by rounding in
    the first, keeping the residual orthogonal to working precision even
    when heavy cancellation occurs.
    """
    w = np.asarray(vec, dtype=complex).copy()
    for _ in range(2):
        for b in basis:
            w -= np.vdot(b, w) * b
    return w


def _orthonormal_basis(
    vectors: list[np.ndarray],
    against: list[np.ndarray] | None = None,
    *,
    pivot: bool = False,
) -> tuple[list[np.ndarray], list[int]]:
    """Gram-Schmidt; returns (new basis vectors, kept source indices).

    With ``pivot=False`` the input order is preserved and near-dependent
    vectors are dropped; this keeps the kept-index pattern meaningful for
    mirroring onto a second vector set with the same Gram matrix.  With
    ``pivot=True`` the largest residual is taken first, which is the
    numerically safe choice when any spanning set will do (completing a
    basis from coordinate directions).
    """
    basis: list[np.ndarray] = [] if against is None else list(against)
    start = len(basis)
    kept: list[int] = []
    remaining = list(range(len(vectors)))
    while remaining:
        if pivot:
            residuals = {
                k: _project_out(vectors[k], basis) for k in remaining
            }
            k = max(
                remaining, key=lambda idx: float(np.linalg.norm(residuals[idx]))
            )
            w = residuals[k]
        else:
            k = remaining[0]
            w = _project_out(vectors[k], basis)
        norm = float(np.linalg.norm(w))
        if norm > 1e-10:
            basis.append(w / norm)
            kept.append(k)
            remaining.remove(k)
        elif pivot:
            break  # the largest residual is negligible; nothing spans more
        else:
            remaining.remove(k)
    return basis[start:], kept


def complete_unitary(e: Ensemble, outputs) -> np.ndarray:
    """The 4x4 unitary mapping each embedded input to the given output.

    A linear isometry between the two triples exists iff their Gram
    matrices agree; it is extended to all 4 modes by mapping the
    orthogonal complement of the input span onto the orthogonal complement
    of the output span.  Each completion column's free phase is fixed by
    making its largest-magnitude entry real and positive, so the result is
    deterministic.

    Raises
    ------
    NoUnitaryError
        If the Gram matrices differ beyond 1e-8; the message names the
        worst-offending state pair.
    """
    ins = [np.asarray(v, dtype=complex) for v in embed_inputs(e)]
    outs = [np.asarray(v, dtype=complex) for v in outputs]
    if len(outs) != 3 or any(v.shape != (NETWORK_DIM,) for v in outs):
        raise DomainError("outputs must be three 4-mode vectors")
    gram_in = np.array([[np.vdot(a, b) for b in ins] for a in ins])
    gram_out = np.array([[np.vdot(a, b) for b in outs] for a in outs])
    diff = np.abs(gram_in - gram_out)
    worst = float(diff.max())
    if worst > GRAM_TOL:
        i, j = np.unravel_index(int(diff.argmax()), diff.shape)
        raise NoUnitaryError(
            "no unitary maps these inputs to these outputs: inner products "
            f"of pair ({i + 1}, {j + 1}) differ by {worst:.3e} "
            f"(tolerance {GRAM_TOL:g})"
        )
    in_basis, kept = _orthonormal_basis(ins)
    out_basis: list[np.ndarray] = []
    for k in kept:
        w = _project_out(outs[k], out_basis)
        out_basis.append(w / np.linalg.norm(w))
    mat = np.zeros((NETWORK_DIM, NETWORK_DIM), dtype=complex)
    for u, v in zip(in_basis, out_basis):
        mat += np.outer(v, np.conj(u))
    identity_cols = [np.eye(NETWORK_DIM, dtype=complex)[:, i] for i in range(NETWORK_DIM)]
    comp_in, _ = _orthonormal_basis(identity_cols, against=in_basis, pivot=True)
    comp_out, _ = _orthonormal_basis(identity_cols, against=out_basis, pivot=True)
    for z, w in zip(comp_in, comp_out):
        pivot = int(np.argmax(np.abs(w)))
        w = w / (w[pivot] / abs(w[pivot]))
        mat += np.outer(w, np.conj(z))
    return mat


def _sign_options(l23_free: bool) -> list[tuple[int, int, int]]:
    if l23_free:
        return [
            (1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1),
            (-1, 1, 1), (-1, 1, -1), (-1, -1, 1), (-1, -1, -1),
        ]
    return [(1, 1, 1), (1, -1, -1), (-1, 1, 1), (-1, -1, -1)]


def design(e: Ensemble, sol: FilterSolution | None = None) -> MeasurementDesign:
    """Build the full measurement design for an ensemble.

    Solves for the optimal failure probabilities (unless a solution is
    supplied), constructs failure and success vectors, and completes the
    4x4 unitary.  Among the discrete gauge choices that all realize the
    same optimum — placement of state 1's success mode, and sign flips
    that leave the residual Gram matrix invariant — the design whose
    unitary factors into the fewest beam-splitter layers is selected;
    remaining ties prefer the unitary acting most nearly as a pass-through
    on the three signal modes (largest real trace of the upper-left 3x3
    block), then the standard placement and unflipped signs.
    """
    if sol is None:
        sol = solve(e)
    q = (sol.q1, sol.q2, sol.q3)
    fail_vecs = failure_vectors(e, sol)
    chi = failure_phases(e)
    residual_gram = build_L(e, sol)
    inputs = embed_inputs(e)
    sign_opts = _sign_options(abs(residual_gram[1, 2]) <= 1e-12)
    best_key = None
    best = None
    for swap in (False, True):
        for sign_index, signs in enumerate(sign_opts):
            succ, theta = _success_vectors(residual_gram, q, swap, signs)
            outs = [s + f for s, f in zip(succ, fail_vecs)]
            unitary = complete_unitary(e, outs)
            program = decompose(unitary)
            trace3 = sum(unitary[i, i].real for i in range(3))
            key = (len(program.layers), round(-trace3, 9), int(swap), sign_index)
            if best_key is None or key < best_key:
                best_key = key
                best = (succ, unitary, theta, swap)
    succ, unitary, theta, swap = best
    return MeasurementDesign(
        success_vectors=tuple(succ),
        failure_vectors=fail_vecs,
        unitary=unitary,
        theta=float(theta),
        chi=chi,
        solution=sol,
        embedded_inputs=inputs,
        state1_port=2 if swap else 1,
    )
