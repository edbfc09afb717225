import math

import numpy as np
import pytest

import exponents
import measures
import states
from errors import DegenerateGlobal, DomainError, HypothesisNotMet, BadParameter
from exponents import Case, Relation, ThresholdKind
from measures import MeasureKind, MeasureVector
from roof import RestartBudget

SMALL = RestartBudget(restarts=4)


def synthetic(pairs, global_value=0.9, kind=MeasureKind.CONCURRENCE):
    return MeasureVector(global_value=global_value, pairs=tuple(pairs), measure_kind=kind)


@pytest.fixture
def w3_c(w3):
    return measures.measure_vector(w3, kind=MeasureKind.CONCURRENCE)


@pytest.fixture
def w3_e(w3):
    return measures.measure_vector(w3, kind=MeasureKind.EOF)


def bell_with_spectator():
    amps = np.kron(states.bell_state("phi+").amplitudes, [1.0, 0.0])
    return states.PureState(n_qubits=3, amplitudes=amps)


# ─────────────────────────────────────────────
# f and g
# ─────────────────────────────────────────────
def test_f_of_alpha_w3(w3_c):
    assert exponents.f_of_alpha(w3_c, 0.0) == 2.0
    assert exponents.f_of_alpha(w3_c, 2.0) == pytest.approx(8 / 9, abs=1e-12)


def test_f_of_alpha_example2(example2):
    mv = measures.measure_vector(example2)
    assert exponents.f_of_alpha(mv, 0.783586) == pytest.approx(1.0, abs=1e-5)


def test_f_skips_zero_pairs():
    assert exponents.f_of_alpha(synthetic([0.5, 0.0]), 0.0) == 1.0


def test_g_of_alpha(w3_c, w3_e):
    assert exponents.g_of_alpha(w3_c, 2.0) == pytest.approx(0.0, abs=1e-12)
    assert exponents.g_of_alpha(w3_e, 1.35244) == pytest.approx(0.0, abs=1e-4)
    with pytest.raises(DegenerateGlobal):
        exponents.g_of_alpha(synthetic([0.5, 0.5], global_value=0.0), 1.0)


def test_power_conventions():
    assert exponents.power(0.0, 0.0) == 1.0
    assert exponents.power(0.0, 2.0) == 0.0
    assert exponents.power(0.0, -1.0) == math.inf
    assert exponents.power(0.25, 0.5) == 0.5


def test_alpha_grid():
    np.testing.assert_allclose(exponents.alpha_grid(0.0, 1.0, 0.3), [0.0, 0.3, 0.6, 0.9, 1.0])
    np.testing.assert_allclose(exponents.alpha_grid(0.0, 1.0, 0.25), [0.0, 0.25, 0.5, 0.75, 1.0])
    assert len(exponents.alpha_grid(0.0, 2.0, n=20)) == 20
    with pytest.raises(BadParameter):
        exponents.alpha_grid(0.0, 1.0, 0.0)


# ─────────────────────────────────────────────
# Thresholds
# ─────────────────────────────────────────────
def test_alpha0_w3(w3_c):
    result = exponents.find_alpha0(w3_c)
    assert result.kind is ThresholdKind.ALPHA0_C
    assert result.threshold == pytest.approx(1.70951, abs=1e-4)
    assert result.residual <= 1e-10
    assert result.bracket[0] <= result.threshold <= result.bracket[1]


def test_alpha0_example2(example2):
    result = exponents.find_alpha0(measures.measure_vector(example2))
    assert result.threshold == pytest.approx(0.783586, abs=1e-5)


def test_alpha0_half_pairs_is_one():
    assert exponents.find_alpha0(synthetic([0.5, 0.5])).threshold == 1.0


def test_alpha0_needs_two_pairs():
    with pytest.raises(HypothesisNotMet):
        exponents.find_alpha0(synthetic([0.5, 0.0]))


def test_alpha0_saturates_on_unit_pair():
    result = exponents.find_alpha0(synthetic([1.0, 0.5], global_value=1.0))
    assert result.saturated
    assert result.threshold == 2.0


def test_alpha0_eof_w3(w3_e):
    result = exponents.find_alpha0(w3_e)
    assert result.kind is ThresholdKind.ALPHA0_E
    assert result.threshold == pytest.approx(1.15959, abs=1e-4)
    assert 0 < result.threshold <= math.sqrt(2)


def test_alpha1_eof_w3(w3_e):
    result = exponents.find_alpha1(w3_e)
    assert result.threshold == pytest.approx(1.35244, abs=1e-4)
    assert result.sign_changes == 1
    assert abs(exponents.g_of_alpha(w3_e, result.threshold)) <= 1e-8


def test_alpha1_concurrence_w3(w3_c):
    result = exponents.find_alpha1(w3_c)
    assert result.threshold == pytest.approx(2.0, abs=1e-3)
    assert result.kind is ThresholdKind.ALPHA1_C


def test_alpha1_coarse_grid_override(w3_e):
    result = exponents.find_alpha1(w3_e, step=0.05)
    assert result.threshold == pytest.approx(1.35244, abs=1e-4)


def test_beta0(w3_c, w3_e, w3):
    assist = measures.measure_vector(w3, kind=MeasureKind.COA)
    beta = exponents.find_beta0(w3_c, assist)
    assert beta.kind is ThresholdKind.BETA0
    assert beta.threshold == pytest.approx(1.70951, abs=1e-4)
    assert beta.certified
    assert exponents.find_beta0(w3_e).threshold == pytest.approx(1.15959, abs=1e-4)
    assert exponents.find_beta0(synthetic([0.5, 0.5])).threshold == 1.0


def test_closed_form_example1(w3):
    assert exponents.alpha0_closed_form_example1(1.0) == pytest.approx(1.70951, abs=1e-4)
    for t in (0.8, 0.9, 0.95):
        mv = measures.measure_vector(states.isotropic_mixture(t, w3), pairs_only=True)
        assert exponents.find_alpha0(mv).threshold == pytest.approx(
            exponents.alpha0_closed_form_example1(t), abs=1e-6)
    with pytest.raises(DomainError):
        exponents.alpha0_closed_form_example1(0.7)


def test_entanglement_threshold(w3):
    t_star = exponents.entanglement_threshold_t(w3)
    assert t_star == pytest.approx(0.783612, abs=1e-5)
    assert 7 * t_star ** 2 + 6 * t_star - 9 == pytest.approx(0.0, abs=1e-8)

    def pair_c(t):
        return measures.concurrence_mixed(states.partial_trace(states.isotropic_mixture(t, w3), [0, 1]))

    assert pair_c(t_star + 1e-4) > 0
    assert pair_c(t_star - 1e-4) == 0.0


# ─────────────────────────────────────────────
# Classification and regions
# ─────────────────────────────────────────────
def test_classify(w3_c):
    assert exponents.classify(w3_c).case is Case.ALL_PAIRS
    one = measures.measure_vector(bell_with_spectator())
    assert exponents.classify(one).case is Case.ONE_PAIR
    assert exponents.classify(one).entangled_pairs == (0,)
    none = measures.measure_vector(states.product_state([0, 0, 0]))
    assert exponents.classify(none).case is Case.NO_ENTANGLED_PAIR
    assert exponents.classify(synthetic([0.5, 0.5, 0.0])).case is Case.TWO_OR_MORE_PAIRS


def test_classify_respects_tolerance():
    mv = synthetic([0.5, 1e-6])
    assert exponents.classify(mv).case is Case.ALL_PAIRS
    assert exponents.classify(mv, tol=1e-5).case is Case.ONE_PAIR


def test_polygamy_region_w3(w3_c):
    grid = exponents.alpha_grid(0.0, 1.70951, n=20)
    report = exponents.verify_region(w3_c, grid, Relation.POLYGAMY_LE)
    assert report.passed and report.failures == 0
    assert len(report.points) == 20


def test_monogamy_region_w3_eof(w3_e):
    grid = exponents.alpha_grid(math.sqrt(2), 4.0, n=20)
    assert exponents.verify_region(w3_e, grid, Relation.MONOGAMY_GE).passed


def test_polygamy_fails_beyond_two(w3_c):
    report = exponents.verify_region(w3_c, [2.5, 3.0], Relation.POLYGAMY_LE)
    assert not report.passed
    assert report.failures == 2


def test_negative_exponents_strict(w3_c):
    assert exponents.verify_region(w3_c, [-2.0, -1.0, -0.5], Relation.POLYGAMY_LT).passed


def test_one_pair_relation():
    mv = measures.measure_vector(bell_with_spectator())
    report = exponents.one_pair_relation(mv, [-1.0, 0.0, 1.0, 2.0])
    assert report.passed
    assert report.points[0].relation is Relation.POLYGAMY_LE
    assert report.points[-1].relation is Relation.MONOGAMY_GE


def test_one_pair_relation_rejects_w3(w3_c):
    with pytest.raises(HypothesisNotMet):
        exponents.one_pair_relation(w3_c, [1.0])


def test_coa_polygamy(w3):
    report = exponents.verify_coa_polygamy(w3)
    assert report.lhs_squared == pytest.approx(8 / 9, abs=1e-9)
    assert report.rhs_squared == pytest.approx(8 / 9, abs=1e-9)
    assert report.passed
    assert report.beta0 == pytest.approx(1.70951, abs=1e-4)

    product = exponents.verify_coa_polygamy(states.product_state([0, 0, 0]))
    assert product.passed and product.beta0 is None


def test_coa_polygamy_random_states():
    for i in range(20):
        assert exponents.verify_coa_polygamy(states.haar_random_pure(3, [42, i])).passed


def test_weighted_comparison_w3(w3):
    at_one = exponents.compare_weighted_polygamy(w3, beta=1.0, budget=SMALL)
    assert at_one.plain_rhs == pytest.approx(at_one.weighted_rhs, abs=1e-12)

    at_zero = exponents.compare_weighted_polygamy(w3, beta=0.0, budget=SMALL)
    assert at_zero.lhs == 1.0
    assert at_zero.plain_rhs == 2.0
    assert at_zero.plain_holds

    above_one = exponents.compare_weighted_polygamy(w3, beta=1.1, budget=SMALL)
    assert above_one.plain_holds
    assert above_one.beta_in_range
    assert above_one.condition_met
    assert not above_one.weighted_applicable


# ─────────────────────────────────────────────
# Properties over seeded random states
# ─────────────────────────────────────────────
@pytest.mark.parametrize("n_qubits", [3, 4])
def test_sandwich_and_monotonicity(n_qubits):
    for i in range(15):
        psi = states.haar_random_pure(n_qubits, [7, n_qubits, i])
        for kind in (MeasureKind.CONCURRENCE, MeasureKind.EOF):
            mv = measures.measure_vector(psi, kind=kind)
            if not exponents.has_two_entangled_pairs(mv):
                continue
            cap = exponents.cap_for(kind)
            alpha0 = exponents.find_alpha0(mv).threshold
            assert exponents.f_of_alpha(mv, alpha0) == pytest.approx(1.0, abs=1e-10)
            grid = np.linspace(0.0, cap, 101)
            values = np.array([exponents.f_of_alpha(mv, a) for a in grid])
            assert np.all(np.diff(values) <= 1e-12)
            assert np.all(values[grid <= alpha0] >= 1.0 - 1e-10)
            assert np.all(values[grid >= alpha0] <= 1.0 + 1e-10)

            alpha1 = exponents.find_alpha1(mv)
            assert alpha0 - 1e-12 <= alpha1.threshold <= cap + 1e-12
            assert abs(exponents.g_of_alpha(mv, alpha1.threshold)) <= 1e-8


def test_monogamy_ckw_random_states():
    for i in range(20):
        mv = measures.measure_vector(states.haar_random_pure(3, [8, i]))
        assert exponents.verify_region(mv, [2.0], Relation.MONOGAMY_GE).passed


def test_call_time_tolerance_defaults(monkeypatch):
    import config
    mv = synthetic([0.5, 1e-6])
    monkeypatch.setattr(config, "ENTANGLED_TOL", 1e-5)
    assert exponents.classify(mv).case is Case.ONE_PAIR
