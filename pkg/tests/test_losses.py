import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warpattack.losses import (
    LossKind,
    ProbVector,
    Targeted,
    Untargeted,
    cw_loss,
    evaluate_loss,
    flicker_loss,
    is_success,
    targeted_ce,
    untargeted_ce,
)


def pv(*probs):
    return ProbVector(np.array(probs))


@st.composite
def prob_vectors(draw, k_min=2, k_max=6):
    k = draw(st.integers(k_min, k_max))
    raw = draw(st.lists(st.floats(1e-3, 1.0), min_size=k, max_size=k))
    arr = np.array(raw)
    return ProbVector(arr / arr.sum())


class TestProbVector:
    def test_simplex_enforced(self):
        with pytest.raises(ValueError):
            ProbVector(np.array([0.9, 0.4]))
        with pytest.raises(ValueError):
            ProbVector(np.array([1.2, -0.2]))

    def test_needs_two_classes(self):
        with pytest.raises(ValueError):
            ProbVector(np.array([1.0]))


class TestFlicker:
    def test_confident_clean_point(self):
        assert flicker_loss(pv(0.9, 0.05, 0.05), 0, m=0.05) == pytest.approx(0.9)

    def test_succeeded_with_margin_hinges_to_zero(self):
        assert flicker_loss(pv(0.1, 0.8, 0.1), 0, m=0.05) == 0.0

    def test_quadratic_branch_near_boundary(self):
        assert flicker_loss(pv(0.5, 0.48, 0.02), 0, m=0.05) == pytest.approx(0.07)

    def test_zero_iff_margin_reached(self):
        # p_y' >= p_y + m exactly at the hinge (binary-exact values)
        assert flicker_loss(pv(0.25, 0.5, 0.25), 0, m=0.25) == 0.0
        assert flicker_loss(pv(0.3125, 0.5, 0.1875), 0, m=0.25) > 0.0

    def test_margin_must_be_positive(self):
        with pytest.raises(ValueError):
            flicker_loss(pv(0.5, 0.5), 0, m=0.0)

    @given(p=prob_vectors(), m=st.floats(0.01, 0.2))
    @settings(max_examples=100, deadline=None)
    def test_nonnegative_finite(self, p, m):
        val = flicker_loss(p, 0, m)
        assert val >= 0.0 and math.isfinite(val)


class TestCW:
    def test_hand_value(self):
        assert cw_loss(pv(0.7, 0.2, 0.1), 0) == pytest.approx(0.5)

    def test_hinge_when_overtaken(self):
        assert cw_loss(pv(0.2, 0.7, 0.1), 0) == 0.0

    def test_uniform_tie_is_zero(self):
        assert cw_loss(pv(0.25, 0.25, 0.25, 0.25), 0) == 0.0

    def test_zero_implies_success_or_tie(self):
        p = pv(0.3, 0.4, 0.3)
        assert cw_loss(p, 0) == 0.0
        assert is_success(p, Untargeted(0)) or p.probs[0] == max(p.probs)


class TestCrossEntropies:
    def test_untargeted_endpoints(self):
        assert untargeted_ce(pv(0.0, 1.0), 0) == 0.0
        assert untargeted_ce(pv(0.5, 0.5), 0) == pytest.approx(math.log(2))
        assert untargeted_ce(pv(1.0, 0.0), 0) == pytest.approx(-math.log(1e-12))

    def test_targeted_endpoints(self):
        assert targeted_ce(pv(0.0, 1.0), 1) == 0.0
        assert targeted_ce(pv(0.75, 0.25), 1) == pytest.approx(math.log(4))
        assert targeted_ce(pv(1.0, 0.0), 1) == pytest.approx(-math.log(1e-12))

    @given(p=prob_vectors())
    @settings(max_examples=50, deadline=None)
    def test_all_losses_nonnegative_finite(self, p):
        for y in range(p.k):
            for val in (flicker_loss(p, y), cw_loss(p, y),
                        untargeted_ce(p, y), targeted_ce(p, y)):
                assert val >= 0.0 and math.isfinite(val)


class TestPermutationInvariance:
    def test_flicker_cw_ignore_non_referenced_order(self):
        a = pv(0.4, 0.3, 0.2, 0.1)
        b = pv(0.4, 0.3, 0.1, 0.2)  # classes 2 and 3 swapped; max-of-rest equal
        assert flicker_loss(a, 0) == flicker_loss(b, 0)
        assert cw_loss(a, 0) == cw_loss(b, 0)


class TestIsSuccess:
    def test_untargeted(self):
        assert not is_success(pv(0.6, 0.4), Untargeted(0))
        assert is_success(pv(0.4, 0.6), Untargeted(0))

    def test_targeted(self):
        assert is_success(pv(0.4, 0.6), Targeted(1))
        assert not is_success(pv(0.6, 0.4), Targeted(1))

    def test_tie_breaks_to_lowest_index(self):
        # y holds the lower index of an exact tie, so y still wins
        assert not is_success(pv(0.5, 0.5), Untargeted(0))
        assert is_success(pv(0.5, 0.5), Untargeted(1))

    def test_label_validation(self):
        with pytest.raises(ValueError):
            is_success(pv(0.5, 0.5), Untargeted(7))


class TestEvaluateLoss:
    def test_goal_compatibility(self):
        with pytest.raises(ValueError):
            evaluate_loss(LossKind.TARGETED_CE, pv(0.5, 0.5), Untargeted(0))
        with pytest.raises(ValueError):
            evaluate_loss(LossKind.FLICKER, pv(0.5, 0.5), Targeted(0))

    def test_dispatch(self):
        p = pv(0.7, 0.2, 0.1)
        assert evaluate_loss(LossKind.CW, p, Untargeted(0)) == cw_loss(p, 0)
        assert evaluate_loss(LossKind.TARGETED_CE, p, Targeted(2)) == targeted_ce(p, 2)

    def test_from_string(self):
        assert LossKind.from_string("flicker") is LossKind.FLICKER
        assert LossKind.from_string("targeted-ce") is LossKind.TARGETED_CE
        with pytest.raises(ValueError):
            LossKind.from_string("mse")
