"""Measured trivalent train tracks.

A switch has one incoming branch on its large side and two outgoing branches
on its small side; a weight vector balances when ``w[in] == w[out1] + w[out2]``
at every switch. Weights are kept as ``Fraction`` (or exact quadratic
irrationals for foliations in irrational directions) so balancing is exact.
"""

import math
import random
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import networkx as nx
import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from graftlab.errors import InfeasibleRoundingError, InputFormatError, SwitchConditionError
from graftlab.logging import logger
from graftlab.quadratic import QuadraticIrrational

__all__ = [
    "ApproximationResult",
    "RauzyMove",
    "SplitStep",
    "Switch",
    "TrainTrack",
    "WeightVector",
    "WeightedMultiloop",
    "check_switch",
    "induced_weights",
    "integral_approximation",
    "rauzy_permutation_step",
    "scale_to_2pi_units",
    "shipped_tracks",
    "track_from_json",
    "transfer_weights",
    "weights_to_multiloop",
]

TWO_PI = 2 * math.pi

Exact = Fraction | QuadraticIrrational


def _exact(v) -> Exact:
    return v if isinstance(v, QuadraticIrrational) else Fraction(v)


@dataclass(frozen=True)
class Switch:
    incoming: int
    outgoing: tuple[int, int]

    @property
    def slots(self) -> tuple[int, int, int]:
        return (self.incoming, *self.outgoing)


@dataclass(frozen=True)
class WeightVector:
    values: tuple[Exact, ...]

    @classmethod
    def of(cls, values: Iterable) -> "WeightVector":
        return cls(tuple(_exact(v) for v in values))

    @classmethod
    def from_floats(cls, values: Iterable[float], max_denominator: int = 10**6) -> "WeightVector":
        return cls(tuple(Fraction(v).limit_denominator(max_denominator) for v in values))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    def __add__(self, other: "WeightVector") -> "WeightVector":
        if len(self) != len(other):
            raise SwitchConditionError("cannot add weight vectors of different length")
        return WeightVector(tuple(a + b for a, b in zip(self, other, strict=True)))

    def scaled(self, factor) -> "WeightVector":
        return WeightVector(tuple(v * Fraction(factor) for v in self.values))

    def is_integral(self) -> bool:
        return all(getattr(v, "denominator", None) == 1 for v in self.values)

    def as_ints(self) -> list[int]:
        if not self.is_integral():
            raise SwitchConditionError("weight vector is not integral")
        return [int(v) for v in self.values]

    def as_floats(self) -> list[float]:
        return [float(v) for v in self.values]

    def max_deviation(self, other: "WeightVector") -> Fraction:
        return max((abs(a - b) for a, b in zip(self, other, strict=True)), default=Fraction(0))


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals."""
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r], strict=True)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


@dataclass(frozen=True)
class TrainTrack:
    """Trivalent train track.

    A branch listed in no switch is a closed loop on its own; every other
    branch has its two ends in exactly two switch slots.
    """

    branch_count: int
    switches: tuple[Switch, ...]
    labels: tuple[str, ...] = ()
    permutation: tuple[tuple[str, ...], tuple[str, ...]] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.branch_count < 1:
            raise InputFormatError("a train track needs at least one branch")
        ends = Counter(b for s in self.switches for b in s.slots)
        issues = [f"branch {b} does not exist" for b in ends if not 0 <= b < self.branch_count]
        issues += [f"branch {b} has {n} ends at switches" for b, n in sorted(ends.items()) if n != 2]
        if self.labels and len(self.labels) != self.branch_count:
            issues.append("one label per branch required")
        if issues:
            raise InputFormatError("; ".join(issues))

    @classmethod
    def annulus(cls) -> "TrainTrack":
        return cls(1, (), ("core",))

    @classmethod
    def from_permutation(cls, top: Sequence[str], bottom: Sequence[str]) -> "TrainTrack":
        """Track of an interval exchange: one branch per rectangle plus two chains.

        The top chain sums the rectangles in top order, the bottom chain in
        bottom order, and both end in the shared branch ``I`` for the whole
        interval.
        """
        top, bottom = tuple(top), tuple(bottom)
        if sorted(top) != sorted(bottom) or len(set(top)) != len(top) or len(top) < 2:
            raise InputFormatError(f"not a permutation pair: {top} / {bottom}")
        letters = sorted(top)
        labels = list(letters)
        switches = []
        d = len(top)
        for side, order in (("top", top), ("bot", bottom)):
            previous = labels.index(order[0])
            for k in range(1, d):
                if k == d - 1:
                    if "I" not in labels:
                        labels.append("I")
                    current = labels.index("I")
                else:
                    labels.append(f"{side}{k + 1}")
                    current = len(labels) - 1
                switches.append(Switch(current, (previous, labels.index(order[k]))))
                previous = current
        return cls(len(labels), tuple(switches), tuple(labels), (top, bottom))

    @property
    def letters(self) -> tuple[str, ...]:
        if self.permutation is None:
            return ()
        return tuple(sorted(self.permutation[0]))

    def branch(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputFormatError(f"no branch labelled {label!r}") from None

    def switch_matrix(self) -> list[list[Fraction]]:
        rows = []
        for s in self.switches:
            row = [Fraction(0)] * self.branch_count
            row[s.incoming] += 1
            for b in s.outgoing:
                row[b] -= 1
            rows.append(row)
        return rows

    @cached_property
    def free_branches(self) -> tuple[int, ...]:
        """Branches whose weights determine a balanced vector."""
        _, pivots = _rref(self.switch_matrix(), self.branch_count)
        return tuple(b for b in range(self.branch_count) if b not in pivots)

    def extend(self, known: Mapping[int, object]) -> WeightVector:
        """Solve the switch conditions for every branch not in ``known``."""
        unknown = [b for b in range(self.branch_count) if b not in known]
        fixed = {b: _exact(v) for b, v in known.items()}
        rows = []
        for row in self.switch_matrix():
            rhs = -sum((row[b] * v for b, v in fixed.items()), Fraction(0))
            rows.append([row[b] for b in unknown] + [rhs])
        reduced, pivots = _rref(rows, len(unknown))
        if len(pivots) < len(unknown):
            raise SwitchConditionError("known weights do not determine the remaining branches")
        # fully pivoted rows reduce to the solution; leftover rows must be zero
        _, all_pivots = _rref(rows, len(unknown) + 1)
        if len(unknown) in all_pivots:
            raise SwitchConditionError("known weights violate a switch condition")
        values = dict(fixed)
        for r, c in enumerate(pivots):
            values[unknown[c]] = reduced[r][-1]
        return WeightVector(tuple(values[b] for b in range(self.branch_count)))

    def extend_letters(self, widths: Mapping[str, object]) -> WeightVector:
        return self.extend({self.branch(letter): v for letter, v in widths.items()})

    def random_weights(self, rng: random.Random, low: int = 2, high: int = 20, denominator: int = 7) -> WeightVector:
        """Random balanced vector with every entry above one."""
        free = [self.branch(a) for a in self.letters] if self.permutation else self.free_branches
        for _ in range(1000):
            known = {b: Fraction(rng.randint(low * denominator, high * denominator), denominator) for b in free}
            try:
                w = self.extend(known)
            except SwitchConditionError:
                continue
            if all(v > 1 for v in w):
                return w
        raise SwitchConditionError("could not sample a positive balanced vector")

    def to_json(self) -> dict:
        raw: dict = {
            "branches": self.branch_count,
            "switches": [{"in": s.incoming, "out": list(s.outgoing)} for s in self.switches],
        }
        if self.labels:
            raw["labels"] = list(self.labels)
        return raw


def track_from_json(raw: Mapping) -> TrainTrack:
    from graftlab.models.inputs import TrackSpec

    spec = TrackSpec.model_validate(raw)
    switches = tuple(Switch(s.incoming, (s.outgoing[0], s.outgoing[1])) for s in spec.switches)
    return TrainTrack(spec.branches, switches, tuple(spec.labels or ()))


def shipped_tracks() -> dict[str, TrainTrack]:
    return {
        "annulus": TrainTrack.annulus(),
        "six-branch": TrainTrack.from_permutation("ABC", "CBA"),
        "nine-branch": TrainTrack.from_permutation("ABCD", "DCBA"),
    }


def check_switch(t: TrainTrack, w: WeightVector) -> bool:
    if len(w) != t.branch_count:
        raise SwitchConditionError(f"weight vector has {len(w)} entries, track has {t.branch_count} branches")
    return all(w[s.incoming] == w[s.outgoing[0]] + w[s.outgoing[1]] for s in t.switches)


class ApproximationResult(NamedTuple):
    weights: WeightVector
    deviation: Fraction
    bound: int


def _solve_rounding(t: TrainTrack, target: np.ndarray, bound: int) -> np.ndarray | None:
    """Integer flow repair: nearest balanced integer vector in the max norm.

    Stage one minimizes the largest deviation, stage two the total deviation
    among vectors reaching it.
    """
    nb = t.branch_count
    a = np.array([[float(v) for v in row] for row in t.switch_matrix()]).reshape(len(t.switches), nb)
    eye = np.eye(nb)
    lower = np.maximum(1.0, np.floor(target - bound))
    upper = np.ceil(target + bound)

    ones = np.ones((nb, 1))
    constraints = [
        LinearConstraint(np.hstack([eye, -ones]), -np.inf, target),
        LinearConstraint(np.hstack([eye, ones]), target, np.inf),
    ]
    if len(t.switches):
        constraints.append(LinearConstraint(np.hstack([a, np.zeros((len(t.switches), 1))]), 0, 0))
    first = milp(
        c=np.r_[np.zeros(nb), 1.0],
        constraints=constraints,
        integrality=np.r_[np.ones(nb), 0],
        bounds=Bounds(np.r_[lower, 0.0], np.r_[upper, float(bound)]),
    )
    if first.status != 0:
        return None
    best = first.x[-1]

    constraints = [
        LinearConstraint(np.hstack([eye, -eye]), -np.inf, target),
        LinearConstraint(np.hstack([eye, eye]), target, np.inf),
    ]
    if len(t.switches):
        constraints.append(LinearConstraint(np.hstack([a, np.zeros_like(a)]), 0, 0))
    second = milp(
        c=np.r_[np.zeros(nb), np.ones(nb)],
        constraints=constraints,
        integrality=np.r_[np.ones(nb), np.zeros(nb)],
        bounds=Bounds(np.r_[lower, np.zeros(nb)], np.r_[upper, np.full(nb, best + 1e-7)]),
    )
    x = second.x if second.status == 0 else first.x
    return np.rint(x[:nb]).astype(int)


def integral_approximation(t: TrainTrack, w: WeightVector) -> ApproximationResult:
    """Positive integral balanced vector within ``B`` of ``w`` on every branch."""
    if not check_switch(t, w):
        raise SwitchConditionError("input weights do not satisfy the switch conditions")
    bound = t.branch_count
    rounded = WeightVector(tuple(Fraction(round(v)) for v in w))
    if any(v < 1 for v in rounded):
        raise InfeasibleRoundingError(
            "rounding forces a zero weight; scale the weights first (see scale_to_2pi_units) so every entry exceeds one"
        )
    if check_switch(t, rounded):
        return ApproximationResult(rounded, rounded.max_deviation(w), bound)

    logger.debug("rounding unbalanced, repairing", branches=t.branch_count)
    solution = _solve_rounding(t, np.array(w.as_floats()), bound)
    if solution is None:
        raise InfeasibleRoundingError(f"no positive balanced integer vector within {bound} of the input; scale the weights first")
    n = WeightVector.of(int(v) for v in solution)
    if not check_switch(t, n):
        raise InfeasibleRoundingError("integer repair did not balance exactly")
    deviation = n.max_deviation(w)
    if deviation > bound:
        raise InfeasibleRoundingError(f"deviation {deviation} exceeds bound {bound}")
    return ApproximationResult(n, deviation, bound)


@dataclass(frozen=True)
class WeightedMultiloop:
    loops: tuple[tuple[tuple[int, ...], int], ...]

    @property
    def total_weight(self) -> int:
        return sum(weight for _, weight in self.loops)


def _canonical_loop(seq: Sequence[int]) -> tuple[int, ...]:
    candidates = []
    for s in (list(seq), list(reversed(seq))):
        for k in range(len(s)):
            candidates.append(tuple(s[k:] + s[:k]))
    return min(candidates)


def _strand_graph(t: TrainTrack, n: Sequence[int]) -> nx.MultiGraph:
    """Graph on strands ``(branch, k)``; edges join strands across a switch.

    Incoming strand ``k`` continues on the first outgoing branch when
    ``k < n[out1]`` and on strand ``k - n[out1]`` of the second otherwise.
    """
    g = nx.MultiGraph()
    for b in range(t.branch_count):
        g.add_nodes_from((b, k) for k in range(n[b]))
    for s in t.switches:
        first, second = s.outgoing
        for k in range(n[s.incoming]):
            target = (first, k) if k < n[first] else (second, k - n[first])
            g.add_edge((s.incoming, k), target)
    attached = {b for s in t.switches for b in s.slots}
    for b in range(t.branch_count):
        if b not in attached:
            for k in range(n[b]):
                g.add_edge((b, k), (b, k))
    return g


def weights_to_multiloop(t: TrainTrack, n: WeightVector) -> WeightedMultiloop:
    """Decompose a positive balanced integral vector into carried loops."""
    if not check_switch(t, n):
        raise SwitchConditionError("weights do not satisfy the switch conditions")
    counts = n.as_ints()
    if any(c < 0 for c in counts):
        raise SwitchConditionError("weights must be nonnegative")
    g = _strand_graph(t, counts)
    loops: Counter = Counter()
    for component in nx.connected_components(g):
        sub = g.subgraph(component)
        start = min(component)
        walk = [u for u, _, _ in nx.eulerian_circuit(sub, source=start, keys=True)]
        loops[_canonical_loop([b for b, _ in walk])] += 1
    logger.debug("multiloop decomposition", loops=len(loops), strands=sum(counts))
    return WeightedMultiloop(tuple(sorted(loops.items())))


def induced_weights(t: TrainTrack, multiloop: WeightedMultiloop) -> WeightVector:
    totals = [0] * t.branch_count
    for loop, weight in multiloop.loops:
        for b in loop:
            totals[b] += weight
    return WeightVector.of(totals)


@dataclass(frozen=True)
class RauzyMove:
    """One Rauzy-Veech move: ``winner`` loses the width of ``loser``."""

    winner: str
    loser: str
    top_wins: bool


def rauzy_permutation_step(
    top: Sequence[str], bottom: Sequence[str], top_wins: bool
) -> tuple[tuple[str, ...], tuple[str, ...], RauzyMove]:
    top, bottom = list(top), list(bottom)
    alpha, beta = top[-1], bottom[-1]
    if top_wins:
        bottom.pop()
        bottom.insert(bottom.index(alpha) + 1, beta)
        move = RauzyMove(alpha, beta, True)
    else:
        top.pop()
        top.insert(top.index(beta) + 1, alpha)
        move = RauzyMove(beta, alpha, False)
    return tuple(top), tuple(bottom), move


@dataclass(frozen=True)
class SplitStep:
    source: TrainTrack
    target: TrainTrack
    moves: tuple[RauzyMove, ...]

    @classmethod
    def identity(cls, track: TrainTrack) -> "SplitStep":
        return cls(track, track, ())

    def rauzy_matrix(self) -> np.ndarray:
        """Integer matrix ``V`` with old widths equal to ``V`` times new widths."""
        letters = self.source.letters
        index = {a: i for i, a in enumerate(letters)}
        v = np.eye(len(letters), dtype=np.int64)
        for move in self.moves:
            e = np.eye(len(letters), dtype=np.int64)
            e[index[move.winner], index[move.loser]] = 1
            v = v @ e
        return v


def transfer_weights(step: SplitStep, w: WeightVector) -> WeightVector:
    """Carry a balanced vector across a split by the inverse Rauzy moves."""
    if not check_switch(step.source, w):
        raise SwitchConditionError("weights do not balance on the source track")
    if not step.moves:
        return w
    widths = {a: w[step.source.branch(a)] for a in step.source.letters}
    for move in step.moves:
        widths[move.winner] -= widths[move.loser]
    if any(v < 0 for v in widths.values()):
        raise SwitchConditionError("weights are not carried by the split track")
    return step.target.extend_letters(widths)


def scale_to_2pi_units(values: Iterable[float], max_denominator: int = 10**6) -> WeightVector:
    """Express real weights as rationals in units of 2*pi."""
    return WeightVector(tuple(Fraction(v / TWO_PI).limit_denominator(max_denominator) for v in values))
