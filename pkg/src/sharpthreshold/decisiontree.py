"""Query algorithms over boolean functions: stopping times, revealments, OSSS.

An algorithm is a deterministic first query plus a decision rule mapping the
transcript so far (queried indices and their revealed bits) to the next fresh
index.  Running it on omega yields a stopping time tau: the first t at which
f is constant over every completion of the revealed prefix.  The stopping
time is at least 1 by definition, so the first coordinate always has
revealment 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .boolfn import BooleanFunctionTable, InputError, ProductMeasure, influences, variance
from .rng import stream

OSSS_SLACK = 1e-12
EXACT_OSSS_MAX_BITS = 16
EXACT_REVEALMENT_MAX_BITS = 20


class DecisionTreeContractError(RuntimeError):
    """The decision rule returned a stale or invalid index."""


Rule = Callable[[tuple[int, ...], tuple[int, ...]], int]


class DecisionTree:
    """Deterministic first index plus an adaptive next-query rule."""

    __slots__ = ("n", "first", "rule", "label", "order")

    def __init__(self, n: int, first: int, rule: Rule | None, label: str = ""):
        if not 1 <= first <= n:
            raise InputError(f"first index {first} outside [1, {n}]")
        self.n = n
        self.first = first
        self.rule = rule
        self.label = label or f"tree(n={n})"
        self.order: tuple[int, ...] | None = None

    @classmethod
    def fixed_order(cls, order: Sequence[int], label: str = "") -> "DecisionTree":
        order = tuple(int(i) for i in order)
        n = len(order)
        if sorted(order) != list(range(1, n + 1)):
            raise InputError("order must be a permutation of [1..n]")

        def rule(indices: tuple[int, ...], bits: tuple[int, ...]) -> int:
            return order[len(indices)]

        tree = cls(n, order[0], rule, label or f"fixed{list(order)}")
        tree.order = order
        return tree

    def next_index(self, indices: tuple[int, ...], bits: tuple[int, ...]) -> int:
        if not indices:
            return self.first
        if self.rule is None:
            raise DecisionTreeContractError("tree has no rule beyond the first query")
        i = int(self.rule(indices, bits))
        if not 1 <= i <= self.n or i in indices:
            raise DecisionTreeContractError(
                f"rule returned {i} after transcript {indices}; must be a fresh index"
            )
        return i

    def to_json(self) -> str:
        """Fixed-order trees serialize as their query order; adaptive rules are code-level only."""
        if self.order is None:
            raise InputError("only fixed-order trees serialize to JSON")
        return json.dumps({"type": "fixed_order", "n": self.n, "order": list(self.order)})

    @classmethod
    def from_json(cls, text: str) -> "DecisionTree":
        doc = json.loads(text)
        if doc.get("type") != "fixed_order":
            raise InputError("only fixed-order trees load from JSON")
        return cls.fixed_order(doc["order"])


@dataclass(frozen=True)
class RunTranscript:
    order: tuple[int, ...]
    bits: tuple[int, ...]
    tau: int
    value: int
    n: int

    def __post_init__(self):
        if self.tau != len(self.order) or self.tau > self.n:
            raise InputError("transcript length must equal tau <= n")


@dataclass(frozen=True)
class RevealmentVector:
    """delta_i per index; exact or sampled (then stderrs are present)."""

    delta: np.ndarray
    p: float | None
    exact: bool
    stderrs: np.ndarray | None = None

    def __getitem__(self, i: int) -> float:
        return float(self.delta[i - 1])


# ---------------------------------------------------------------------------
# determination
# ---------------------------------------------------------------------------


def _determined(f: BooleanFunctionTable, mask: int, base: int) -> bool:
    """Is f constant on the subcube fixing the bits in ``mask`` to ``base``?"""
    free = ((1 << f.n) - 1) ^ mask
    if f.monotone:
        return f.values[base] == f.values[base | free]
    first = f.values[base]
    sub = free
    while sub:
        if f.values[base | sub] != first:
            return False
        sub = (sub - 1) & free
    return True


def run(tree: DecisionTree, f: BooleanFunctionTable, omega: int, replay: bool = False) -> RunTranscript:
    """Run the algorithm on omega, stopping at tau.

    With ``replay=True`` the transcript is re-derived and compared, guarding
    against impure decision rules.
    """
    if tree.n != f.n:
        raise InputError("tree and table sizes differ")
    if not 0 <= omega < (1 << f.n):
        raise InputError(f"omega={omega} outside range")
    indices: tuple[int, ...] = ()
    bits: tuple[int, ...] = ()
    mask = 0
    base = 0
    while True:
        i = tree.next_index(indices, bits)
        b = (omega >> (i - 1)) & 1
        indices += (i,)
        bits += (b,)
        mask |= 1 << (i - 1)
        base |= b << (i - 1)
        if _determined(f, mask, base):
            break
    transcript = RunTranscript(indices, bits, len(indices), int(f.values[omega]), f.n)
    if replay:
        again = run(tree, f, omega, replay=False)
        if again != transcript:
            raise DecisionTreeContractError("decision rule is not a pure function of the transcript")
    return transcript


def run_full(tree: DecisionTree, f: BooleanFunctionTable, omega: int) -> tuple[tuple[int, ...], int]:
    """Full query order i_1..i_n on omega plus the stopping time tau."""
    indices: tuple[int, ...] = ()
    bits: tuple[int, ...] = ()
    mask = 0
    base = 0
    tau = 0
    while len(indices) < tree.n:
        i = tree.next_index(indices, bits)
        b = (omega >> (i - 1)) & 1
        indices += (i,)
        bits += (b,)
        mask |= 1 << (i - 1)
        base |= b << (i - 1)
        if tau == 0 and _determined(f, mask, base):
            tau = len(indices)
    return indices, tau


# ---------------------------------------------------------------------------
# transcript tree (exact enumeration without looping over all omega)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    indices: tuple[int, ...]
    bits: tuple[int, ...]
    value: int
    mask: int
    base: int


def transcript_leaves(tree: DecisionTree, f: BooleanFunctionTable) -> list[Leaf]:
    """All maximal transcripts; the leaf subcubes partition {0,1}^n."""
    if tree.n != f.n:
        raise InputError("tree and table sizes differ")
    leaves: list[Leaf] = []

    def descend(indices: tuple[int, ...], bits: tuple[int, ...], mask: int, base: int) -> None:
        if indices and _determined(f, mask, base):
            leaves.append(Leaf(indices, bits, int(f.values[base]), mask, base))
            return
        i = tree.next_index(indices, bits)
        bit = 1 << (i - 1)
        descend(indices + (i,), bits + (0,), mask | bit, base)
        descend(indices + (i,), bits + (1,), mask | bit, base | bit)

    descend((), (), 0, 0)
    return leaves


def _leaf_probability_product(leaf: Leaf, p: float) -> float:
    ones = sum(leaf.bits)
    return (p**ones) * ((1.0 - p) ** (len(leaf.bits) - ones))


def _leaf_probability_weights(leaf: Leaf, f_n: int, weights: np.ndarray) -> float:
    free = ((1 << f_n) - 1) ^ leaf.mask
    total = weights[leaf.base]
    sub = free
    while sub:
        total += weights[leaf.base | sub]
        sub = (sub - 1) & free
    return float(total)


def revealment_exact(
    tree: DecisionTree,
    f: BooleanFunctionTable,
    measure: ProductMeasure | np.ndarray,
) -> RevealmentVector:
    """delta_i = P[i queried at or before tau], exactly.

    ``measure`` is either a ProductMeasure or an explicit probability vector
    over the 2^n configurations (used for monotonic measures).
    """
    if f.n > EXACT_REVEALMENT_MAX_BITS:
        raise InputError(f"exact revealments capped at n = {EXACT_REVEALMENT_MAX_BITS}")
    delta = np.zeros(f.n)
    if isinstance(measure, ProductMeasure):
        if measure.n != f.n:
            raise InputError("measure size mismatch")
        for leaf in transcript_leaves(tree, f):
            prob = _leaf_probability_product(leaf, measure.p)
            for i in leaf.indices:
                delta[i - 1] += prob
        return RevealmentVector(delta, measure.p, True)
    weights = np.asarray(measure, dtype=np.float64)
    if weights.shape != (1 << f.n,):
        raise InputError("weight vector must cover all configurations")
    for leaf in transcript_leaves(tree, f):
        prob = _leaf_probability_weights(leaf, f.n, weights)
        for i in leaf.indices:
            delta[i - 1] += prob
    return RevealmentVector(delta, None, True)


@dataclass(frozen=True)
class OSSSResult:
    variance: float
    rhs: float
    holds: bool
    delta: np.ndarray
    influence_values: np.ndarray


def osss_check(f: BooleanFunctionTable, tree: DecisionTree, mu: ProductMeasure) -> OSSSResult:
    """Var_p(f) <= p(1-p) sum_i delta_i Inf_i, both sides exact.

    The theorem is stated for increasing f; non-monotone tables are accepted
    and reported, but only monotone input carries the guarantee.
    """
    if f.n > EXACT_OSSS_MAX_BITS:
        raise InputError(f"exact OSSS check capped at n = {EXACT_OSSS_MAX_BITS}")
    var = variance(f, mu)
    delta = revealment_exact(tree, f, mu).delta
    infl = influences(f, mu).values
    rhs = mu.p * (1.0 - mu.p) * float(np.dot(delta, infl))
    return OSSSResult(var, rhs, var <= rhs + OSSS_SLACK, delta, infl)


# ---------------------------------------------------------------------------
# the two-sequence coupling from the OSSS proof, as a sampling oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CouplingResult:
    lhs_estimate: float
    lhs_stderr: float
    step_terms: np.ndarray
    step_stderrs: np.ndarray
    samples: int

    @property
    def total_steps(self) -> float:
        return float(self.step_terms.sum())


def coupling_oracle(
    f: BooleanFunctionTable,
    tree: DecisionTree,
    mu: ProductMeasure,
    samples: int,
    seed: int,
) -> CouplingResult:
    """Simulate the hybrid sequence omega^t of the OSSS proof.

    omega^t takes the tilde values on the first t queried coordinates and on
    every coordinate queried after tau, and the original values in between;
    consequently omega^0 agrees with omega on the first tau queries and
    omega^t equals omega-tilde from t = tau on.  Estimates of
    E|f(omega^0) - f(omega^n)| and of each step term E|f(omega^t) - f(omega^{t-1})|
    witness the telescoping chain statistically.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    if tree.n != f.n or mu.n != f.n:
        raise InputError("size mismatch")
    rng = stream(seed, 0)
    n = f.n
    lhs_acc = 0.0
    lhs_sq = 0.0
    step_acc = np.zeros(n)
    step_sq = np.zeros(n)
    values = f.values
    shifts = np.arange(n, dtype=np.uint64)
    for _ in range(samples):
        omega = int(np.sum((rng.random(n) < mu.p).astype(np.uint64) << shifts))
        tilde = int(np.sum((rng.random(n) < mu.p).astype(np.uint64) << shifts))
        order, tau = run_full(tree, f, omega)
        x = omega
        for t in range(tau, n):
            bit = 1 << (order[t] - 1)
            x = (x & ~bit) | (tilde & bit)
        f_start = values[x]
        if f_start != values[omega]:
            raise AssertionError("hybrid start must evaluate like omega")
        prev = f_start
        for t in range(tau):
            bit = 1 << (order[t] - 1)
            x = (x & ~bit) | (tilde & bit)
            cur = values[x]
            d = abs(int(cur) - int(prev))
            step_acc[t] += d
            step_sq[t] += d * d
            prev = cur
        if x != tilde:
            raise AssertionError("hybrid end must equal omega-tilde")
        d0 = abs(int(f_start) - int(values[tilde]))
        lhs_acc += d0
        lhs_sq += d0 * d0
    mean = lhs_acc / samples
    lhs_se = math.sqrt(max(lhs_sq / samples - mean * mean, 0.0) / samples)
    terms = step_acc / samples
    term_var = np.maximum(step_sq / samples - terms**2, 0.0)
    return CouplingResult(mean, lhs_se, terms, np.sqrt(term_var / samples), samples)


# ---------------------------------------------------------------------------
# the fixed tree suite used by the exact verification sweeps
# ---------------------------------------------------------------------------


def standard_tree_suite(n: int, count: int = 20, seed: int = 20170712) -> list[DecisionTree]:
    """Deterministic mix of fixed query orders and adaptive rules."""
    trees: list[DecisionTree] = [
        DecisionTree.fixed_order(range(1, n + 1), label="ascending"),
        DecisionTree.fixed_order(range(n, 0, -1), label="descending"),
    ]
    rng = stream(seed, n)
    while len(trees) < max(count - 4, 2):
        order = rng.permutation(n) + 1
        trees.append(DecisionTree.fixed_order(order, label=f"shuffled{len(trees)}"))

    def low_high(indices: tuple[int, ...], bits: tuple[int, ...]) -> int:
        remaining = sorted(set(range(1, n + 1)) - set(indices))
        return remaining[0] if bits[-1] == 1 else remaining[-1]

    def follow_ones(indices: tuple[int, ...], bits: tuple[int, ...]) -> int:
        remaining = sorted(set(range(1, n + 1)) - set(indices))
        shift = sum(bits) % len(remaining)
        return remaining[shift]

    def zigzag(indices: tuple[int, ...], bits: tuple[int, ...]) -> int:
        remaining = sorted(set(range(1, n + 1)) - set(indices))
        return remaining[0] if len(indices) % 2 else remaining[-1]

    def parity_walk(indices: tuple[int, ...], bits: tuple[int, ...]) -> int:
        remaining = sorted(set(range(1, n + 1)) - set(indices))
        return remaining[(indices[-1] + bits[-1]) % len(remaining)]

    trees.append(DecisionTree(n, 1, low_high, label="low-high"))
    trees.append(DecisionTree(n, max(1, n // 2), follow_ones, label="follow-ones"))
    trees.append(DecisionTree(n, 1, zigzag, label="zigzag"))
    trees.append(DecisionTree(n, n, parity_walk, label="parity-walk"))
    return trees[:count]
