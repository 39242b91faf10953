"""Brute-force cross-validation and comparison baselines."""

import math

import numpy as np
import pytest

from qfilter import (
    DomainError,
    Ensemble,
    InfeasibleError,
    Regime,
    appendix_residuals,
    brute_force_filter,
    compare,
    ensemble_from_overlaps,
    solve,
    three_state_Q,
    two_state_Q,
)

from conftest import (
    EQUAL_PRIORS,
    fifty_fifty_ensemble,
    orthogonal_ensemble,
    random_ensemble,
    symmetric_ensemble,
)

RT2 = math.sqrt(2.0)


class TestBruteForce:
    def test_agrees_with_closed_form_on_the_symmetric_family(self):
        for s in (0.2, 0.5, 0.8):
            e = symmetric_ensemble(s)
            sol = solve(e)
            result = brute_force_filter(e, resolution=1e-4)
            assert abs(result.Q_star - sol.Q) <= 2e-4
            assert abs(result.q1_star - sol.q1) <= 2e-3
            assert result.grid_resolution == 1e-4

    def test_fifty_fifty_instance(self):
        result = brute_force_filter(fifty_fifty_ensemble(), resolution=1e-4)
        assert result.Q_star == pytest.approx(4.0 / 9.0, abs=1e-4)

    def test_orthogonal_triple_is_free(self):
        result = brute_force_filter(orthogonal_ensemble(), resolution=1e-3)
        assert result.Q_star == pytest.approx(0.0, abs=1e-12)
        assert result.q1_star == pytest.approx(0.0, abs=1e-12)

    def test_never_finds_anything_below_the_closed_form(self):
        rng = np.random.default_rng(51)
        for _ in range(10):
            e = random_ensemble(rng)
            sol = solve(e)
            result = brute_force_filter(e, resolution=1e-3)
            # Grid points are feasible, so they can only do worse.
            assert result.Q_star >= sol.Q - 1e-9

    def test_resolution_is_validated(self):
        e = fifty_fifty_ensemble()
        with pytest.raises(DomainError):
            brute_force_filter(e, resolution=0.0)
        with pytest.raises(DomainError):
            brute_force_filter(e, resolution=0.5)
        with pytest.raises(DomainError):
            brute_force_filter(e, resolution=-1e-4)


class TestStationarityResiduals:
    KEYS = {"delta", "delta_12", "delta_13", "stationarity", "inv_lambda"}

    def test_interior_optimum_satisfies_all_identities(self):
        e = symmetric_ensemble(0.5)
        sol = solve(e)
        assert sol.regime is Regime.POVM
        res = appendix_residuals(e, sol)
        assert set(res) == self.KEYS
        for key in self.KEYS:
            assert res[key] <= 1e-10, key

    def test_boundary_optimum_reports_nonzero_stationarity(self):
        e = symmetric_ensemble(0.9)
        sol = solve(e)
        assert sol.regime is Regime.VN_LARGE_OVERLAP
        res = appendix_residuals(e, sol)
        assert res["delta"] <= 1e-10
        assert res["delta_12"] <= 1e-10
        assert res["delta_13"] <= 1e-10
        expected_gap = abs(1.0 - 2.0 * 0.81) / 3.0
        assert res["stationarity"] == pytest.approx(expected_gap, abs=1e-10)

    def test_orthogonal_triple_has_zero_residuals(self):
        e = orthogonal_ensemble()
        res = appendix_residuals(e, solve(e))
        for value in res.values():
            assert value == 0.0

    def test_brute_force_reports_residuals_at_its_minimizer(self):
        result = brute_force_filter(fifty_fifty_ensemble(), resolution=1e-3)
        assert set(result.residuals) == self.KEYS
        # At grid accuracy the identities hold only approximately.
        assert result.residuals["delta_12"] <= 1e-6
        assert result.residuals["stationarity"] <= 1e-2


class TestThreeStateIdentification:
    def test_symmetric_family_optimum_is_the_overlap(self):
        value = three_state_Q(symmetric_ensemble(0.5), resolution=1e-3)
        assert value == pytest.approx(0.5, abs=2e-3)

    def test_two_overlap_family_closed_form(self):
        s1, s2 = RT2 / 5.0, 4.0 / 5.0
        e = ensemble_from_overlaps(s1, s1, s2)
        value = three_state_Q(e, resolution=1e-3)
        expected = (s1 * s1 / s2 + 2.0 * s2) / 3.0
        assert value == pytest.approx(expected, abs=2e-3)

    def test_orthogonal_triple_is_exactly_zero(self):
        assert three_state_Q(orthogonal_ensemble(), resolution=1e-3) == 0.0

    def test_nearly_orthogonal_triple_is_nearly_zero(self):
        e = ensemble_from_overlaps(1e-6, 1e-6, 1e-6)
        assert three_state_Q(e, resolution=1e-3) <= 5e-3

    def test_linearly_dependent_states_are_rejected(self):
        psi2 = np.array([1.0, 0.0, 0.0], dtype=complex)
        psi3 = np.array([0.6, 0.8, 0.0], dtype=complex)
        psi1 = (psi2 + psi3) / np.linalg.norm(psi2 + psi3)
        e = Ensemble((psi1, psi2, psi3), EQUAL_PRIORS)
        with pytest.raises(DomainError):
            three_state_Q(e, resolution=1e-3)

    def test_filtering_never_does_worse_than_identifying(self):
        rng = np.random.default_rng(52)
        checked = 0
        while checked < 8:
            e = random_ensemble(rng)
            try:
                q_prime = three_state_Q(e, resolution=2e-3)
            except DomainError:
                continue
            assert solve(e).Q <= q_prime + 2e-3
            checked += 1


class TestPairwiseBaseline:
    def test_known_values(self):
        assert two_state_Q(symmetric_ensemble(0.5)) == pytest.approx(
            0.5, abs=1e-12
        )
        assert two_state_Q(fifty_fifty_ensemble()) == pytest.approx(
            RT2 / 3.0, abs=1e-12
        )
        assert two_state_Q(orthogonal_ensemble()) == 0.0


class TestCompare:
    def test_two_overlap_benchmark_ratio(self):
        s1, s2 = RT2 / 5.0, 4.0 / 5.0
        e = ensemble_from_overlaps(s1, s1, s2)
        record = compare(e, resolution=1e-3)
        assert record.Q == pytest.approx(4.0 / 15.0, abs=1e-12)
        assert record.Q_prime == pytest.approx(17.0 / 30.0, abs=2e-3)
        assert record.ratio == pytest.approx(8.0 / 17.0, abs=5e-3)
        assert record.Q_double_prime == pytest.approx(s1, abs=1e-12)

    def test_symmetric_family_ratio_is_constant(self):
        for s in (0.2, 0.4, 0.6):
            record = compare(symmetric_ensemble(s), resolution=1e-3)
            assert record.ratio == pytest.approx(2.0 * RT2 / 3.0, abs=5e-3)

    def test_orthogonal_triple_ratio_convention(self):
        record = compare(orthogonal_ensemble(), resolution=1e-3)
        assert record.Q == record.Q_prime == record.Q_double_prime == 0.0
        assert record.ratio == 1.0
