"""Criterion values plus the spectral-equivalence and interpretation checks."""

import numpy as np
import pytest

from wdesign import (
    DesignSpec,
    EstimableSystem,
    a_opt_interpretation_check,
    certify_theorem1,
    certify_theorem2,
    certify_theorem3,
    certify_theorem4,
    criterion_value,
    e_opt_interpretation_check,
    eig_sym,
    info_matrix_for_system,
    information_matrix,
    make_weight_matrix,
    phi_for_system,
    phi_weighted,
    value_from_positive_spectrum,
    weight_matrix_from_system,
    weighted_info_matrix,
    weighted_variance,
)
from wdesign.errors import DomainError, RankError, SingularWeightError
from wdesign.instances import random_instance
from wdesign.linalg import SymMatrix


class TestCriterionValue:
    def test_scaled_identity(self):
        for name in "DAE":
            cv = criterion_value(SymMatrix(2.0 * np.eye(2)), name)
            assert cv.value == pytest.approx(2.0)
            assert cv.rank_used == 2

    def test_diagonal_formulas(self):
        m = SymMatrix(np.diag([4.0, 1.0]))
        assert criterion_value(m, "D").value == pytest.approx(2.0)
        assert criterion_value(m, "A").value == pytest.approx(8.0 / 5.0)
        assert criterion_value(m, "E").value == pytest.approx(1.0)

    def test_singular_convention(self):
        m = SymMatrix(np.diag([1.0, 0.0]))
        e = criterion_value(m, "E")
        assert e.value == 0.0 and e.rank_used == 1 and e.dim == 2
        assert criterion_value(m, "D").value == pytest.approx(1.0)
        assert criterion_value(m, "A").value == pytest.approx(1.0)
        assert e.positive_value == pytest.approx(1.0)

    def test_rejects_unknown_and_indefinite(self):
        with pytest.raises(DomainError):
            criterion_value(SymMatrix(np.eye(2)), "T")
        with pytest.raises(DomainError):
            criterion_value(SymMatrix(np.diag([1.0, -1.0])), "D")

    def test_positive_spectrum_helper(self):
        assert value_from_positive_spectrum("D", [4.0, 1.0]) == pytest.approx(2.0)
        assert value_from_positive_spectrum("E", []) == 0.0


class TestPhi:
    def test_identity_system_equals_information_criterion(self):
        rng = np.random.default_rng(30)
        spec = DesignSpec(3, (1, 1, 2, 2, 3, 3), "explicit", L=rng.standard_normal((6, 1)))
        c = information_matrix(spec)
        system = EstimableSystem(np.eye(3))
        for name in "DAE":
            assert phi_for_system(spec, system, name).value == pytest.approx(
                criterion_value(c, name).value, rel=1e-9
            )

    def test_single_contrast_all_criteria_coincide(self, balanced_design, q1):
        values = {name: phi_for_system(balanced_design, EstimableSystem(q1), name).value
                  for name in "DAE"}
        assert values["D"] == pytest.approx(2.0, rel=1e-12)
        assert values["A"] == values["D"] == values["E"]

    def test_weighted_fixture(self, balanced_design, contrasts3):
        w = make_weight_matrix(np.eye(3) - np.ones((3, 3)) / 3, contrasts3)
        for name in "DAE":
            assert phi_weighted(balanced_design, w, name).value == pytest.approx(2.0)

    def test_matched_weight_gives_unit_criteria(self, balanced_design, contrasts3):
        w = make_weight_matrix(information_matrix(balanced_design), contrasts3)
        for name in "DAE":
            assert phi_weighted(balanced_design, w, name).value == pytest.approx(1.0, abs=1e-9)


class TestTheorem1:
    def test_control_fixture(self, balanced_design, control_system, contrasts3):
        report = certify_theorem1(balanced_design, control_system, contrasts3)
        assert report.passed and report.deviation <= 1e-10

    def test_scaled_fixture(self, balanced_design, control_system, contrasts3):
        scaled = EstimableSystem(control_system.Q, [1.0, 2.0])
        assert certify_theorem1(balanced_design, scaled, contrasts3).passed

    def test_rank_deficient_redirects(self, balanced_design, q1, contrasts3):
        with pytest.raises(RankError, match="theorem3"):
            certify_theorem1(balanced_design, EstimableSystem(q1), contrasts3)

    def test_randomized(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            spec, space, system = random_instance(rng, "theorem1")
            assert certify_theorem1(spec, system, space).passed


class TestTheorem2:
    def test_identity_weight(self, balanced_design, contrasts3):
        report = certify_theorem2(balanced_design, SymMatrix(np.eye(3)), contrasts3)
        assert report.passed
        c_spectrum = eig_sym(information_matrix(balanced_design)).eigenvalues
        np.testing.assert_allclose(report.spectrum_weighted, c_spectrum, atol=1e-9)

    def test_regularized_gram_reduces_to_theorem1(self, balanced_design, control_system,
                                                  contrasts3):
        w = np.eye(3) - contrasts3.projector.entries + control_system.Q @ control_system.Q.T
        report2 = certify_theorem2(balanced_design, SymMatrix(w), contrasts3)
        report1 = certify_theorem1(balanced_design, control_system, contrasts3)
        assert report2.passed
        np.testing.assert_allclose(
            np.sort(report2.spectrum_weighted)[::-1][: contrasts3.dim],
            report1.spectrum_system,
            atol=1e-8,
        )

    def test_singular_rejected(self, balanced_design, contrasts3):
        with pytest.raises(SingularWeightError, match="theorem4"):
            certify_theorem2(
                balanced_design, SymMatrix(np.eye(3) - np.ones((3, 3)) / 3), contrasts3
            )

    def test_randomized(self):
        rng = np.random.default_rng(32)
        for _ in range(20):
            spec, space, w = random_instance(rng, "theorem2")
            assert certify_theorem2(spec, w, space).passed


class TestTheorem3:
    def test_single_contrast(self, balanced_design, q1, contrasts3):
        report = certify_theorem3(balanced_design, EstimableSystem(q1), contrasts3)
        assert report.passed
        np.testing.assert_allclose(report.spectrum_system, [2.0], atol=1e-12)

    def test_duplicated_columns(self, balanced_design, q1, contrasts3):
        system = EstimableSystem(np.column_stack([q1, q1]))
        n = info_matrix_for_system(balanced_design, system)
        assert eig_sym(n).numeric_rank == 1  # one extra zero for s > r
        assert certify_theorem3(balanced_design, system, contrasts3).passed

    def test_randomized(self):
        rng = np.random.default_rng(33)
        for _ in range(20):
            spec, space, system = random_instance(rng, "theorem3")
            assert certify_theorem3(spec, system, space).passed


class TestTheorem4:
    def test_projector_weight(self, balanced_design, contrasts3):
        w = make_weight_matrix(np.eye(3) - np.ones((3, 3)) / 3, contrasts3)
        assert certify_theorem4(balanced_design, w).passed

    def test_control_gram_fixture(self, balanced_design, control_system, contrasts3):
        w = weight_matrix_from_system(control_system, contrasts3)
        assert certify_theorem4(balanced_design, w).passed

    def test_randomized(self):
        rng = np.random.default_rng(34)
        for _ in range(20):
            spec, space, w = random_instance(rng, "theorem4")
            assert certify_theorem4(spec, w).passed


class TestCriterionLevelEquivalence:
    def test_positive_spectrum_criteria_agree_between_routes(self):
        rng = np.random.default_rng(35)
        for _ in range(15):
            spec, space, system = random_instance(rng, "theorem3")
            n = info_matrix_for_system(spec, system)
            w = weight_matrix_from_system(system, space)
            cw = weighted_info_matrix(spec, w)
            for name in "DAE":
                a = value_from_positive_spectrum(name, eig_sym(n).positive())
                b = value_from_positive_spectrum(name, eig_sym(cw).eigenvalues)
                assert a == pytest.approx(b, rel=1e-8, abs=1e-10)

    def test_full_spectrum_e_is_flagged_zero_for_deficient_systems(self, balanced_design,
                                                                   q1, contrasts3):
        system = EstimableSystem(np.column_stack([q1, q1]))
        cv = phi_for_system(balanced_design, system, "E")
        assert cv.value == 0.0 and cv.rank_used == 1 and cv.dim == 2
        assert cv.positive_value > 0.0


class TestInterpretationChecks:
    def test_aopt_on_fixture(self, balanced_design, control_system, contrasts3):
        w = weight_matrix_from_system(control_system, contrasts3)
        report = a_opt_interpretation_check(balanced_design, w, seed=0)
        assert report.passed and "w_orthogonal" in report.deviations

    def test_eopt_on_centering_fixture(self, balanced_design, contrasts3):
        w = make_weight_matrix(np.eye(3) - np.ones((3, 3)) / 3, contrasts3)
        report = e_opt_interpretation_check(balanced_design, w)
        assert report.passed
        # C_W = 2 I here, so the largest weighted variance is 1/2
        assert 1.0 / phi_weighted(balanced_design, w, "E").value == pytest.approx(0.5)

    def test_eopt_rank_one(self, balanced_design, q1, contrasts3):
        w = weight_matrix_from_system(EstimableSystem(q1), contrasts3)
        assert e_opt_interpretation_check(balanced_design, w).passed

    def test_randomized(self):
        rng = np.random.default_rng(36)
        for i in range(15):
            spec, space, w = random_instance(rng, "aopt")
            assert a_opt_interpretation_check(spec, w, seed=i).passed
            assert e_opt_interpretation_check(spec, w).passed

    def test_eopt_bounds_sampled_weighted_variances(self, contrasts3, control_system):
        rng = np.random.default_rng(37)
        spec = DesignSpec.from_replications(3, [3, 2, 1])
        w = weight_matrix_from_system(control_system, contrasts3)
        c = information_matrix(spec)
        bound = 1.0 / phi_weighted(spec, w, "E").value
        samples = []
        for _ in range(1000):
            q = w.K @ rng.standard_normal(w.d)
            samples.append(weighted_variance(c, w, q))
        assert max(samples) <= bound * (1 + 1e-9)
        assert max(samples) >= 0.9 * bound
