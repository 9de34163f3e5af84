"""
Tests for graftlab.traintracks

Covers:
- Track construction and validation, including the interval exchange tracks
- Switch conditions and solving for determined branches
- Integral approximation: balance, deviation bound, optimality, idempotence
- Multiloop decomposition and induced weights
- Weight transfer across Rauzy moves
"""

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from graftlab.errors import InfeasibleRoundingError, InputFormatError, SwitchConditionError
from graftlab.traintracks import (
    SplitStep,
    Switch,
    TrainTrack,
    WeightVector,
    check_switch,
    induced_weights,
    integral_approximation,
    rauzy_permutation_step,
    scale_to_2pi_units,
    shipped_tracks,
    track_from_json,
    transfer_weights,
    weights_to_multiloop,
)


def _letter_vector(track: TrainTrack, widths: dict[str, int]) -> list:
    values = [None] * track.branch_count
    for letter, v in widths.items():
        values[track.branch(letter)] = v
    # switches of an interval exchange track are listed with outgoing branches known first
    for s in track.switches:
        values[s.incoming] = values[s.outgoing[0]] + values[s.outgoing[1]]
    return values


def _exhaustive_min_deviation(track: TrainTrack, w: WeightVector) -> Fraction:
    bound = track.branch_count
    ranges = []
    for letter in track.letters:
        centre = w[track.branch(letter)]
        ranges.append(range(max(1, math.floor(centre - bound)), math.ceil(centre + bound) + 1))
    best = None
    for combo in itertools.product(*ranges):
        n = _letter_vector(track, dict(zip(track.letters, combo, strict=True)))
        if min(n) < 1:
            continue
        deviation = max(abs(a - b) for a, b in zip(n, w, strict=True))
        if deviation <= bound and (best is None or deviation < best):
            best = deviation
    return best


class TestTrainTrack:
    def test_shipped_branch_counts(self, tracks):
        assert tracks["annulus"].branch_count == 1
        assert tracks["six-branch"].branch_count == 6
        assert tracks["nine-branch"].branch_count == 9

    def test_permutation_track_switch_count(self, six_branch):
        assert len(six_branch.switches) == 4
        assert six_branch.labels[:3] == ("A", "B", "C")

    def test_branch_with_one_end_rejected(self):
        with pytest.raises(InputFormatError):
            TrainTrack(3, (Switch(0, (1, 2)),))

    def test_bad_permutation_rejected(self):
        with pytest.raises(InputFormatError):
            TrainTrack.from_permutation("ABC", "ABD")

    def test_json_round_trip(self, six_branch):
        again = track_from_json(six_branch.to_json())
        assert again.switches == six_branch.switches
        assert again.labels == six_branch.labels

    def test_free_branch_dimension(self, six_branch, nine_branch):
        assert len(six_branch.free_branches) == 3
        assert len(nine_branch.free_branches) == 4

    def test_extend_from_letters(self, six_branch):
        w = six_branch.extend_letters({"A": 1, "B": 2, "C": 4})
        assert w[six_branch.branch("I")] == 7
        assert check_switch(six_branch, w)

    def test_extend_underdetermined(self, six_branch):
        with pytest.raises(SwitchConditionError):
            six_branch.extend({0: 1})

    def test_extend_inconsistent(self, six_branch):
        with pytest.raises(SwitchConditionError):
            six_branch.extend({i: 1 for i in range(6)})


class TestCheckSwitch:
    def test_annulus_always_balanced(self, annulus):
        assert check_switch(annulus, WeightVector.of([Fraction(37, 10)]))

    def test_zero_vector(self, six_branch):
        assert check_switch(six_branch, WeightVector.of([0] * 6))

    def test_violated_switch(self, six_branch):
        w = list(six_branch.extend_letters({"A": 1, "B": 2, "C": 4}))
        w[six_branch.branch("top2")] += Fraction(1, 10)
        assert not check_switch(six_branch, WeightVector.of(w))

    def test_length_mismatch(self, six_branch):
        with pytest.raises(SwitchConditionError):
            check_switch(six_branch, WeightVector.of([1, 2]))


class TestIntegralApproximation:
    def test_annulus_rounds(self, annulus):
        result = integral_approximation(annulus, WeightVector.of(["3.7"]))
        assert result.weights.as_ints() == [4]
        assert result.deviation == Fraction(3, 10)
        assert result.bound == 1

    def test_integral_input_is_fixed(self, six_branch):
        w = six_branch.extend_letters({"A": 2, "B": 3, "C": 5})
        result = integral_approximation(six_branch, w)
        assert result.weights == w
        assert result.deviation == 0

    def test_unbalanced_input_rejected(self, six_branch):
        with pytest.raises(SwitchConditionError):
            integral_approximation(six_branch, WeightVector.of([2] * 6))

    def test_small_weight_rejected(self, six_branch):
        w = six_branch.extend_letters({"A": Fraction(1, 3), "B": 2, "C": 5})
        with pytest.raises(InfeasibleRoundingError):
            integral_approximation(six_branch, w)

    def test_repair_needed(self, six_branch):
        # every letter rounds down while the total rounds up
        w = six_branch.extend_letters({"A": Fraction(12, 5), "B": Fraction(12, 5), "C": Fraction(12, 5)})
        result = integral_approximation(six_branch, w)
        assert check_switch(six_branch, result.weights)
        assert result.weights.is_integral()
        assert result.deviation == _exhaustive_min_deviation(six_branch, w)

    @pytest.mark.parametrize("name", ["annulus", "six-branch", "nine-branch"])
    def test_random_vectors(self, tracks, name):
        track = tracks[name]
        rng = random.Random(7)
        for _ in range(200):
            w = track.random_weights(rng)
            result = integral_approximation(track, w)
            assert check_switch(track, result.weights)
            assert all(v >= 1 for v in result.weights)
            assert result.deviation <= track.branch_count
            assert integral_approximation(track, result.weights).weights == result.weights

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["annulus", "six-branch", "nine-branch"])
    def test_thousand_random_vectors(self, tracks, name):
        track = tracks[name]
        rng = random.Random(11)
        worst = Fraction(0)
        for _ in range(1000):
            w = track.random_weights(rng)
            result = integral_approximation(track, w)
            assert check_switch(track, result.weights)
            worst = max(worst, result.deviation)
        assert worst <= track.branch_count

    def test_matches_exhaustive_search(self, six_branch):
        rng = random.Random(3)
        for _ in range(50):
            w = six_branch.random_weights(rng, high=9)
            result = integral_approximation(six_branch, w)
            assert result.deviation == _exhaustive_min_deviation(six_branch, w)


class TestMultiloop:
    def test_annulus_core_loop(self, annulus):
        multiloop = weights_to_multiloop(annulus, WeightVector.of([4]))
        assert multiloop.loops == (((0,), 4),)

    def test_induced_weights_recover_input(self, six_branch):
        n = six_branch.extend_letters({"A": 2, "B": 3, "C": 1})
        multiloop = weights_to_multiloop(six_branch, n)
        assert induced_weights(six_branch, multiloop) == n

    def test_sum_of_vectors(self, nine_branch):
        n1 = nine_branch.extend_letters({"A": 1, "B": 1, "C": 2, "D": 1})
        n2 = nine_branch.extend_letters({"A": 3, "B": 1, "C": 1, "D": 2})
        multiloop = weights_to_multiloop(nine_branch, n1 + n2)
        assert induced_weights(nine_branch, multiloop) == n1 + n2

    def test_random_integral_vectors(self, tracks):
        rng = random.Random(5)
        for track in tracks.values():
            for _ in range(20):
                n = track.random_weights(rng, denominator=1)
                assert induced_weights(track, weights_to_multiloop(track, n)) == n

    def test_loops_use_legal_turns(self, six_branch):
        n = six_branch.extend_letters({"A": 2, "B": 3, "C": 1})
        legal = set()
        for s in six_branch.switches:
            for b in s.outgoing:
                legal |= {(s.incoming, b), (b, s.incoming)}
        for loop, _ in weights_to_multiloop(six_branch, n).loops:
            for a, b in zip(loop, loop[1:] + loop[:1], strict=True):
                assert (a, b) in legal

    def test_unbalanced_rejected(self, six_branch):
        with pytest.raises(SwitchConditionError):
            weights_to_multiloop(six_branch, WeightVector.of([1] * 6))


class TestTransferWeights:
    def test_identity_split(self, six_branch):
        w = six_branch.extend_letters({"A": 2, "B": 3, "C": 1})
        assert transfer_weights(SplitStep.identity(six_branch), w) == w

    def test_bottom_wins(self, six_branch):
        w = six_branch.extend_letters({"A": 5, "B": 2, "C": 3})
        top, bottom, move = rauzy_permutation_step("ABC", "CBA", top_wins=False)
        assert top == ("A", "C", "B")
        assert move.winner == "A" and move.loser == "C"
        step = SplitStep(six_branch, TrainTrack.from_permutation(top, bottom), (move,))
        new = transfer_weights(step, w)
        assert check_switch(step.target, new)
        old_widths = np.array([w[six_branch.branch(a)] for a in "ABC"], dtype=object)
        new_widths = np.array([new[step.target.branch(a)] for a in "ABC"], dtype=object)
        assert list(step.rauzy_matrix().astype(object) @ new_widths) == list(old_widths)

    def test_integral_stays_integral(self, six_branch):
        w = six_branch.extend_letters({"A": 1, "B": 2, "C": 3})
        top, bottom, move = rauzy_permutation_step("ABC", "CBA", top_wins=True)
        step = SplitStep(six_branch, TrainTrack.from_permutation(top, bottom), (move,))
        assert transfer_weights(step, w).is_integral()

    def test_unbalanced_rejected(self, six_branch):
        with pytest.raises(SwitchConditionError):
            transfer_weights(SplitStep.identity(six_branch), WeightVector.of([1] * 6))


class TestScaling:
    def test_two_pi_units(self):
        w = scale_to_2pi_units([4 * math.pi, math.pi])
        assert w.values == (Fraction(2), Fraction(1, 2))

    def test_shipped_tracks_are_fresh(self):
        assert shipped_tracks()["six-branch"] == shipped_tracks()["six-branch"]
