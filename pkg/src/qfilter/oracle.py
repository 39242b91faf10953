"""Independent numeric verification of the closed-form optimum.

Nothing in this module reuses the closed-form branch logic: the optimum is
re-derived by exhaustive grid search over the one free parameter q1 (with
q2, q3 eliminated through the zero-error constraints and feasibility
checked via the residual operator's smallest eigenvalue), so agreement
with :func:`qfilter.filter_core.solve` is genuine cross-validation.

The module also evaluates the stationarity identities that characterize an
interior optimum (:func:`appendix_residuals`), and two comparison
quantities: the optimal failure probability of *fully identifying* which
of the three states was sent (:func:`three_state_Q`, a 2-D grid search on
the determinant constraint), and the two-state bound |O12|
(:func:`two_state_Q`).  Filtering asks strictly less than identification,
so its failure probability should never exceed either.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError
from .filter_core import FilterSolution, solve
from .states import Ensemble, gram_matrix, overlaps

__all__ = [
    "OracleResult",
    "ComparisonRecord",
    "brute_force_filter",
    "appendix_residuals",
    "three_state_Q",
    "two_state_Q",
    "compare",
]

#: Feasibility slack on the smallest eigenvalue of the residual operator.
PSD_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Outcome of the brute-force search.

    Attributes
    ----------
    q1_star:
        Grid minimizer of the average failure probability.
    Q_star:
        Average failure at the minimizer; no feasible grid point beats it.
    grid_resolution:
        Coarse-scan step the search was run at.
    residuals:
        Absolute values of the stationarity identities evaluated at the
        minimizer (see :func:`appendix_residuals`).
    """

    q1_star: float
    Q_star: float
    grid_resolution: float
    residuals: dict[str, float]


@dataclass(frozen=True)
class ComparisonRecord:
    """Filtering vs. identification failure probabilities for one instance."""

    Q: float
    Q_prime: float
    Q_double_prime: float
    ratio: float
    resolution: float


def _check_resolution(resolution: float) -> float:
    resolution = float(resolution)
    if not 0.0 < resolution <= 1e-2:
        raise DomainError(
            f"resolution must lie in (0, 1e-2], got {resolution!r}"
        )
    return resolution


def brute_force_filter(e: Ensemble, resolution: float = 1e-4) -> OracleResult:
    """Minimize the average failure probability by exhaustive search.

    Scans q1 from the parallel-component lower bound up to 1 in steps of
    `resolution`, derives q2 and q3 from the zero-error constraints, keeps
    the points where the residual operator is positive semidefinite
    (smallest eigenvalue >= -1e-10, computed in closed form for the
    arrow-shaped 3x3 matrix), and refines once around the incumbent at 1%
    of the step.  The returned Q_star matches the closed-form optimum to
    roughly the resolution.

    Raises
    ------
    DomainError
        If `resolution` is outside (0, 1e-2].
    InfeasibleError
        If no grid point is feasible (impossible for a valid ensemble,
        since q1 = 1 always is; signals an upstream bug).
    """
    resolution = _check_resolution(resolution)
    ov = overlaps(e)
    a12, a13 = abs(ov.O12) ** 2, abs(ov.O13) ** 2
    eta1, eta2, eta3 = (float(x) for x in e.priors)
    try:
        from .states import parallel_component_norm2

        lower = max(parallel_component_norm2(e), a12, a13)
    except Exception:
        lower = max(a12, a13)

    def scan(lo: float, hi: float, step: float):
        grid = np.arange(lo, hi, step)
        grid = np.append(grid, hi)
        grid = grid[(grid > 0.0) & (grid <= 1.0)]
        if a12 == 0.0 and a13 == 0.0:
            grid = np.append(0.0, grid)
        q2 = np.divide(a12, grid, out=np.zeros_like(grid), where=grid > 0)
        q3 = np.divide(a13, grid, out=np.zeros_like(grid), where=grid > 0)
        m11 = 1.0 - grid
        m22, m33 = 1.0 - q2, 1.0 - q3
        m23 = ov.O23 - np.divide(
            np.conj(ov.O12) * ov.O13,
            grid,
            out=np.zeros_like(grid, dtype=complex),
            where=grid > 0,
        )
        # Smallest eigenvalue of the arrow matrix diag(m11) (+) 2x2 block.
        trace = m22 + m33
        disc = np.sqrt(np.maximum((m22 - m33) ** 2 + 4.0 * np.abs(m23) ** 2, 0.0))
        min_eig = np.minimum(m11, 0.5 * (trace - disc))
        feasible = min_eig >= -PSD_SLACK
        if not np.any(feasible):
            return None, None
        q_avg = eta1 * grid + eta2 * q2 + eta3 * q3
        q_avg = np.where(feasible, q_avg, np.inf)
        idx = int(np.argmin(q_avg))
        return float(grid[idx]), float(q_avg[idx])

    q1_coarse, q_coarse = scan(min(lower, 1.0), 1.0, resolution)
    if q1_coarse is None:
        raise InfeasibleError(
            "no feasible failure probability found; q1 = 1 should always be "
            "feasible, so the instance or search is inconsistent"
        )
    q1_star, q_star = q1_coarse, q_coarse
    fine = scan(
        max(q1_coarse - resolution, 0.0),
        min(q1_coarse + resolution, 1.0),
        resolution / 100.0,
    )
    if fine[1] is not None and fine[1] < q_star:
        q1_star, q_star = fine
    q2_star = a12 / q1_star if q1_star > 0 else 0.0
    q3_star = a13 / q1_star if q1_star > 0 else 0.0
    residuals = _identity_residuals(e, (q1_star, q2_star, q3_star))
    return OracleResult(q1_star, q_star, resolution, residuals)


def _identity_residuals(
    e: Ensemble, q: tuple[float, float, float]
) -> dict[str, float]:
    ov = overlaps(e)
    mag12, mag13 = abs(ov.O12), abs(ov.O13)
    q1, q2, q3 = q
    d12 = q1 * q2 - mag12**2
    d13 = q1 * q3 - mag13**2
    if q1 > 0.0:
        # Determinant of the failure Gram matrix at the stationary phase,
        # with the off-diagonal magnitude r pinned by r*q1 = |O12||O13|.
        r = mag12 * mag13 / q1
        delta = (
            q1 * q2 * q3
            - r * r * q1
            - mag13**2 * q2
            - mag12**2 * q3
            + 2.0 * mag12 * mag13 * r
        )
    else:
        delta = 0.0
    stationarity = (
        e.priors[0] * q1 * q1 - e.priors[1] * mag12**2 - e.priors[2] * mag13**2
    )
    eta23 = float(e.priors[1] * e.priors[2])
    if eta23 > 0.0:
        inv_lambda = np.sqrt(max(d12, 0.0) * max(d13, 0.0) / eta23)
    else:
        inv_lambda = 0.0
    return {
        "delta": float(abs(delta)),
        "delta_12": float(abs(d12)),
        "delta_13": float(abs(d13)),
        "stationarity": float(abs(stationarity)),
        "inv_lambda": float(abs(inv_lambda)),
    }


def appendix_residuals(e: Ensemble, sol: FilterSolution) -> dict[str, float]:
    """Stationarity identities evaluated at a closed-form solution.

    Returns absolute residuals of:

    * ``delta`` — the 3x3 determinant of the failure Gram matrix at the
      optimal relative phase, which must vanish at any zero-error optimum;
    * ``delta_12``, ``delta_13`` — the zero-error constraints
      ``q1*q2 - |O12|^2`` and ``q1*q3 - |O13|^2``;
    * ``stationarity`` — ``eta1*q1^2 - eta2*|O12|^2 - eta3*|O13|^2``,
      which vanishes only at an interior (POVM-regime) optimum and is
      reported nonzero at the boundary optima;
    * ``inv_lambda`` — ``sqrt(delta_12 * delta_13 / (eta2*eta3))``, the
      finite reciprocal of the constraint multiplier, zero at the optimum.
    """
    return _identity_residuals(e, sol.failure_probabilities)


def three_state_Q(e: Ensemble, resolution: float = 1e-3) -> float:
    """Optimal failure probability for fully identifying the state.

    Unambiguous three-way identification requires linearly independent
    states and failure probabilities (q1, q2, q3) making the matrix with
    diagonal q and off-diagonal overlaps singular and its 2x2 principal
    minors nonnegative.  This scans (q1, q2) on a grid of the given step,
    eliminates q3 through the determinant condition, and refines once
    around the incumbent.  Orthogonal triples return exactly 0.

    Raises
    ------
    DomainError
        If the resolution is outside (0, 1e-2] or the states are linearly
        dependent (Gram eigenvalue <= 1e-8): identification is impossible.
    """
    resolution = _check_resolution(resolution)
    gram = gram_matrix(e.states)
    min_eig = float(np.linalg.eigvalsh(gram).min())
    if min_eig <= 1e-8:
        raise DomainError(
            "states are linearly dependent (Gram matrix eigenvalue "
            f"{min_eig:.3e}); exact identification of all three is impossible"
        )
    ov = overlaps(e)
    a12, a13, a23 = abs(ov.O12) ** 2, abs(ov.O13) ** 2, abs(ov.O23) ** 2
    if max(a12, a13, a23) < 1e-28:
        return 0.0
    cross = 2.0 * (ov.O12 * ov.O23 * np.conj(ov.O13)).real
    eta = [float(x) for x in e.priors]

    def scan(lo1, hi1, lo2, hi2, step):
        g1 = np.arange(max(lo1, step), min(hi1, 1.0) + step / 2.0, step)
        g2 = np.arange(max(lo2, step), min(hi2, 1.0) + step / 2.0, step)
        if g1.size == 0 or g2.size == 0:
            return None
        mesh1, mesh2 = np.meshgrid(g1, g2, indexing="ij")
        den = mesh1 * mesh2 - a12
        with np.errstate(divide="ignore", invalid="ignore"):
            mesh3 = (mesh1 * a23 + mesh2 * a13 - cross) / den
        ok = (den > 1e-15) & np.isfinite(mesh3) & (mesh3 >= 0.0) & (mesh3 <= 1.0)
        # With the determinant pinned to zero and nonnegative diagonal, the
        # matrix is PSD iff the sum of principal 2x2 minors is nonnegative.
        minor_sum = den + (mesh1 * mesh3 - a13) + (mesh2 * mesh3 - a23)
        ok &= minor_sum >= -1e-9
        if not np.any(ok):
            return None
        avg = eta[0] * mesh1 + eta[1] * mesh2 + eta[2] * mesh3
        avg = np.where(ok, avg, np.inf)
        i, j = np.unravel_index(int(np.argmin(avg)), avg.shape)
        return float(g1[i]), float(g2[j]), float(avg[i, j])

    coarse = scan(0.0, 1.0, 0.0, 1.0, resolution)
    if coarse is None:
        raise InfeasibleError(
            "no feasible identification point found on the grid; the "
            "instance or search is inconsistent"
        )
    q1, q2, best = coarse
    fine = scan(
        q1 - resolution, q1 + resolution, q2 - resolution, q2 + resolution,
        resolution / 50.0,
    )
    if fine is not None and fine[2] < best:
        best = fine[2]
    return best


def two_state_Q(e: Ensemble) -> float:
    """Optimal two-state discrimination failure probability |O12|.

    The equal-prior bound for unambiguously telling psi1 from psi2 alone;
    used as the second comparison baseline.
    """
    return float(abs(overlaps(e).O12))


def compare(e: Ensemble, resolution: float = 1e-3) -> ComparisonRecord:
    """Filtering vs. identification vs. pairwise discrimination.

    Returns the filtering optimum Q, the three-way identification optimum
    Q' (numeric, at the given resolution), the two-state bound Q'', and
    the ratio Q/Q'.  Filtering is never harder than identification, so the
    ratio is at most 1 up to grid slack; for a perfectly distinguishable
    (orthogonal) triple all quantities vanish and the ratio is defined
    as 1.
    """
    resolution = _check_resolution(resolution)
    q_filter = solve(e).Q
    q_identify = three_state_Q(e, resolution)
    q_pairwise = two_state_Q(e)
    if q_identify <= 1e-12:
        ratio = 1.0
    else:
        ratio = q_filter / q_identify
    return ComparisonRecord(
        Q=float(q_filter),
        Q_prime=float(q_identify),
        Q_double_prime=float(q_pairwise),
        ratio=float(ratio),
        resolution=resolution,
    )
