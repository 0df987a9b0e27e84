"""Von Mises collectives: outcome sequences, place selection, homogeneity.

A place-selection rule decides, for every position ``n``, whether that
element goes into the subsequence.  Rules never see ``values[n]``: they are
handed a :class:`RedactedView` that only exposes the position, the strictly
earlier values, and the side-channel labels (including the one at ``n``).
History rules may look at earlier side-channel labels as well.
"""
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _rng
from .epr import EPRScenario, joint_probability
from .errors import SequenceTooShortError
from .observables import label_array, probabilities

MIN_COUNT = 30
DEGENERACY_THRESHOLD = 0.999


@dataclass(frozen=True, eq=False)
class OutcomeSequence:
    """Measurement results in order, with optional per-element side labels."""

    values: np.ndarray
    side_channel: np.ndarray = None

    def __post_init__(self):
        values = np.asarray(self.values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.side_channel is not None:
            side = np.asarray(self.side_channel)
            if len(side) != len(values):
                raise ValueError("side_channel must have the same length as values")
            side.setflags(write=False)
            object.__setattr__(self, "side_channel", side)

    def __len__(self):
        return len(self.values)

    def frequencies(self, outcomes=None):
        outcomes = np.unique(self.values) if outcomes is None else outcomes
        n = max(len(self), 1)
        return {o: float(np.count_nonzero(self.values == o)) / n for o in outcomes}


class RedactedView:
    """What a selection rule may look at: everything except the current value."""

    __slots__ = ("_values", "_side", "length")

    def __init__(self, seq):
        self._values = seq.values
        self._side = seq.side_channel
        self.length = len(seq)

    @property
    def side_channel(self):
        return self._side

    def history(self, n):
        """Values strictly before position ``n``."""
        return self._values[:n]

    def side_history(self, n):
        return None if self._side is None else self._side[: n + 1]


class SelectionRule:
    """Base class; subclasses implement ``mask(view) -> bool array``."""

    name = "rule"

    def mask(self, view):
        raise NotImplementedError

    def __repr__(self):
        return self.name


class EveryKth(SelectionRule):
    """Positions ``offset, offset + k, offset + 2k, ...``."""

    def __init__(self, k, offset=0):
        if k < 1 or offset < 0:
            raise ValueError("k must be >= 1 and offset >= 0")
        self.k, self.offset = int(k), int(offset)
        self.name = f"every_{self.k}_from_{self.offset}"

    def mask(self, view):
        idx = np.arange(view.length)
        return (idx >= self.offset) & ((idx - self.offset) % self.k == 0)


class SideLabel(SelectionRule):
    """Positions whose side-channel label equals ``label``."""

    def __init__(self, label):
        self.label = label
        self.name = f"side=={label}"

    def mask(self, view):
        if view.side_channel is None:
            raise ValueError("side-channel rule applied to a sequence without side channel")
        return np.asarray(view.side_channel == self.label, dtype=bool)


class PreviousValue(SelectionRule):
    """Positions right after an occurrence of ``value``."""

    def __init__(self, value):
        self.value = value
        self.name = f"prev=={value}"

    def mask(self, view):
        m = np.zeros(view.length, dtype=bool)
        if view.length > 1:
            m[1:] = np.asarray(view.history(view.length - 1) == self.value, dtype=bool)
        return m


class HistoryRule(SelectionRule):
    """Arbitrary predicate ``fn(n, history, side_history) -> bool``.

    ``history`` holds ``values[:n]``; ``side_history`` holds
    ``side_channel[:n + 1]`` (or ``None``).
    """

    def __init__(self, fn, name="history"):
        self.fn = fn
        self.name = name

    def mask(self, view):
        return np.array([bool(self.fn(n, view.history(n), view.side_history(n)))
                         for n in range(view.length)], dtype=bool)


def _rule_uses_side(rule):
    return isinstance(rule, SideLabel)


def select(seq, rule):
    """Subsequence picked by ``rule``, in original order, side channel carried along."""
    m = np.asarray(rule.mask(RedactedView(seq)), dtype=bool)
    if m.shape != (len(seq),):
        raise ValueError(f"rule {rule!r} returned a mask of shape {m.shape}")
    side = None if seq.side_channel is None else seq.side_channel[m]
    return OutcomeSequence(seq.values[m], side)


def cramers_v(x, y):
    """Association between two label sequences (1 = functional dependence)."""
    xs, xi = np.unique(x, return_inverse=True)
    ys, yi = np.unique(y, return_inverse=True)
    if len(xs) < 2 or len(ys) < 2:
        return 0.0
    table = np.zeros((len(xs), len(ys)))
    np.add.at(table, (xi, yi), 1)
    chi2 = stats.chi2_contingency(table, correction=False)[0]
    return float(np.sqrt(chi2 / (table.sum() * (min(table.shape) - 1))))


@dataclass(frozen=True)
class HomogeneityRow:
    rule: str
    outcome: object
    freq_full: float
    freq_sub: float
    z: float
    n_sub: int
    inhomogeneous: bool
    degenerate: bool = False

    @property
    def verdict(self):
        if self.degenerate:
            return "degenerate"
        return "inhomogeneous" if self.inhomogeneous else "homogeneous"


@dataclass(frozen=True)
class HomogeneityReport:
    rows: list
    alpha: float
    critical_z: float

    @property
    def inhomogeneous(self):
        return any(r.inhomogeneous and not r.degenerate for r in self.rows)

    def by_rule(self):
        out = {}
        for r in self.rows:
            out.setdefault(r.rule, []).append(r)
        return out


def homogeneity_test(seq, rules, alpha=0.01):
    """Two-proportion z-tests: selected subsequence vs. the remaining elements.

    One test per (rule, outcome), Bonferroni-corrected over rules times
    ``K - 1`` outcomes: the ``K`` frequencies of one rule sum to one, so
    only ``K - 1`` of the z-scores carry independent information.
    A side-channel rule whose labels are (empirically) a function of the
    values is reported as degenerate and left out of the verdict, since
    selecting on it amounts to selecting on the value itself.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    outcomes, counts = np.unique(seq.values, return_counts=True)
    if len(seq) == 0 or counts.min() < MIN_COUNT:
        raise SequenceTooShortError(
            f"every outcome needs at least {MIN_COUNT} occurrences, got {counts.min(initial=0)}")
    rules = list(rules)
    n_tests = max(len(rules) * max(len(outcomes) - 1, 1), 1)
    crit = float(stats.norm.isf(alpha / (2 * n_tests)))
    n = len(seq)
    rows = []
    for rule in rules:
        m = np.asarray(rule.mask(RedactedView(seq)), dtype=bool)
        n_sub, n_rest = int(m.sum()), int(n - m.sum())
        degenerate = _rule_uses_side(rule) and \
            cramers_v(seq.values, seq.side_channel) > DEGENERACY_THRESHOLD
        for o, c in zip(outcomes, counts):
            hit = seq.values == o
            p_full = c / n
            p_sub = np.count_nonzero(hit & m) / n_sub if n_sub else float("nan")
            z = 0.0
            if n_sub and n_rest:
                p_rest = np.count_nonzero(hit & ~m) / n_rest
                se = np.sqrt(p_full * (1 - p_full) * (1 / n_sub + 1 / n_rest))
                z = float((p_sub - p_rest) / se) if se > 0 else 0.0
            rows.append(HomogeneityRow(rule.name, o.item() if hasattr(o, "item") else o,
                                       float(p_full), float(p_sub), z, n_sub,
                                       abs(z) > crit, degenerate))
    return HomogeneityReport(rows, alpha, crit)


def generate_epr_sequences(state, pvm1, pvm2, n, seed, stream="collectives.epr"):
    """Coincidence measurements of ``pvm1 (x) pvm2`` on ``n`` copies of ``state``.

    Returns ``(seq1, seq2)``; each carries the partner's outcomes as its
    side channel.
    """
    grid = joint_probability(EPRScenario(state, pvm1, pvm2))
    idx = _rng_indices(grid.reshape(-1), n, seed, stream)
    i, j = np.divmod(idx, grid.shape[1])
    v1, v2 = label_array(pvm1.labels)[i], label_array(pvm2.labels)[j]
    return OutcomeSequence(v1, v2), OutcomeSequence(v2, v1)


def generate_proper_mixture(preparations, weights, povm, n, seed, stream="collectives.mixture"):
    """Sequence from a proper mixture: each trial picks preparation ``j`` then measures.

    The side channel carries the preparation label ``j``.
    """
    weights = np.asarray(weights, dtype=float)
    weights = weights / weights.sum()
    joint = np.array([w * probabilities(rho, povm) for w, rho in zip(weights, preparations)])
    idx = _rng_indices(joint.reshape(-1), n, seed, stream)
    j, k = np.divmod(idx, joint.shape[1])
    return OutcomeSequence(label_array(povm.labels)[k], j)


def _rng_indices(p, n, seed, stream):
    from .observables import sample_indices

    return sample_indices(np.asarray(p, float), n, seed, stream)


def iid_sequence(p, n, seed, labels=None, stream="collectives.iid"):
    """I.i.d. draws from ``p`` with an independent uniform binary side channel."""
    p = np.asarray(p, float)
    labels = label_array(range(len(p)) if labels is None else labels)
    values = labels[_rng_indices(p, n, seed, stream)]
    side = _rng.derive_rng(seed, stream + ".side").integers(0, 2, n)
    return OutcomeSequence(values, side)
