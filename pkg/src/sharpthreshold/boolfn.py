"""Exact analysis of boolean functions f: {0,1}^n -> {0,1} under product measures.

Configurations are encoded as integers, little-endian: integer bit ``i`` holds
coordinate ``omega_{i+1}``, so coordinate 1 is the least significant bit.  All
coordinate indices in the public API are 1-based, matching the usual [n]
convention.  Truth tables are capped at n = 24; anything larger must go
through an evaluation callback and Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .rng import stream

MAX_TABLE_BITS = 24
_MAGIC = b"BFN1"


class InputError(ValueError):
    """Raised for arguments outside an operation's documented domain."""


@lru_cache(maxsize=8)
def popcounts(n: int) -> np.ndarray:
    """|omega| for every configuration of n bits, as uint8."""
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint32)).astype(np.uint8)


@dataclass(frozen=True)
class ProductMeasure:
    """The product Bernoulli law P_p restricted to n coordinates."""

    p: float
    n: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise InputError(f"p={self.p} outside [0, 1]")
        if self.n < 1:
            raise InputError("n must be >= 1")

    def level_weights(self) -> np.ndarray:
        """p^k (1-p)^(n-k) for k = 0..n."""
        k = np.arange(self.n + 1)
        return np.power(self.p, k) * np.power(1.0 - self.p, self.n - k)

    def config_weights(self) -> np.ndarray:
        """Probability of each of the 2^n configurations."""
        return self.level_weights()[popcounts(self.n)]


class BooleanFunctionTable:
    """Explicit truth table over n bits (n <= 24).

    ``values[omega]`` is f at the configuration encoded by the integer
    ``omega``.  If ``monotone=True`` the table is verified to be increasing at
    construction time.
    """

    __slots__ = ("n", "values", "monotone")

    def __init__(self, n: int, values, monotone: bool = False):
        if not 1 <= n <= MAX_TABLE_BITS:
            raise InputError(f"n={n} outside [1, {MAX_TABLE_BITS}]")
        arr = np.asarray(values, dtype=np.uint8)
        if arr.shape != (1 << n,):
            raise InputError(f"values must have length 2^{n}")
        if not np.all(arr <= 1):
            raise InputError("values must be bits")
        self.n = n
        self.values = arr
        self.values.setflags(write=False)
        if monotone and not _is_monotone(n, arr):
            raise InputError("table is not monotone but monotone=True was claimed")
        self.monotone = bool(monotone)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BooleanFunctionTable)
            and self.n == other.n
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.n, self.values.tobytes()))

    # -- serialization: magic "BFN1", n as u8, then packed bits, LSB-first --

    def to_bytes(self) -> bytes:
        packed = np.packbits(self.values, bitorder="little")
        return _MAGIC + bytes([self.n]) + packed.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes, monotone: bool = False) -> "BooleanFunctionTable":
        if blob[:4] != _MAGIC:
            raise InputError("bad magic; not a BFN1 truth table")
        n = blob[4]
        if not 1 <= n <= MAX_TABLE_BITS:
            raise InputError(f"stored n={n} outside [1, {MAX_TABLE_BITS}]")
        need = ((1 << n) + 7) // 8
        payload = np.frombuffer(blob[5:], dtype=np.uint8)
        if payload.size != need:
            raise InputError(f"expected {need} payload bytes, got {payload.size}")
        bits = np.unpackbits(payload, bitorder="little")[: 1 << n]
        return cls(n, bits, monotone=monotone)


def _is_monotone(n: int, values: np.ndarray) -> bool:
    idx = np.arange(1 << n)
    for i in range(n):
        bit = 1 << i
        if np.any(values > values[idx | bit]):
            return False
    return True


def is_monotone(f: BooleanFunctionTable) -> bool:
    return _is_monotone(f.n, f.values)


@dataclass(frozen=True)
class InfluenceVector:
    """Per-coordinate influences Inf_i, i in [n], at a fixed p."""

    values: np.ndarray
    p: float

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if np.any(v < -1e-15) or np.any(v > 1 + 1e-15):
            raise InputError("influences must lie in [0, 1]")

    def __getitem__(self, i: int) -> float:
        return float(self.values[i - 1])

    def total(self) -> float:
        return float(self.values.sum())


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def evaluate(f: BooleanFunctionTable, omega: int) -> int:
    """f at the configuration encoded by the integer omega."""
    if not 0 <= omega < (1 << f.n):
        raise InputError(f"omega={omega} outside [0, 2^{f.n})")
    return int(f.values[omega])


def _check_sizes(f: BooleanFunctionTable, mu: ProductMeasure) -> None:
    if f.n != mu.n:
        raise InputError(f"size mismatch: table has n={f.n}, measure has n={mu.n}")


def expectation(f: BooleanFunctionTable, mu: ProductMeasure, method: str = "bucket") -> float:
    """E_p[f], exact.

    ``bucket`` groups configurations by |omega| (cheap: n+1 terms after one
    bincount); ``direct`` sums the full 2^n-term weighted series.  Both must
    agree to 1e-12.
    """
    _check_sizes(f, mu)
    if method == "bucket":
        pc = popcounts(f.n)
        counts = np.bincount(pc[f.values.astype(bool)], minlength=f.n + 1)
        return float(np.dot(counts, mu.level_weights()))
    if method == "direct":
        return float(np.dot(f.values.astype(np.float64), mu.config_weights()))
    raise InputError(f"unknown method {method!r}")


def variance(f: BooleanFunctionTable, mu: ProductMeasure) -> float:
    """Var_p(f) = f(p)(1 - f(p)) for bit-valued f."""
    m = expectation(f, mu)
    return m * (1.0 - m)


def influence(f: BooleanFunctionTable, i: int, mu: ProductMeasure) -> float:
    """Inf_i[f] = E_p |f(omega) - f(Flip_i omega)|, exact."""
    _check_sizes(f, mu)
    if not 1 <= i <= f.n:
        raise InputError(f"i={i} outside [1, {f.n}]")
    bit = 1 << (i - 1)
    idx = np.arange(1 << f.n)
    diff = (f.values != f.values[idx ^ bit]).astype(np.float64)
    return float(np.dot(diff, mu.config_weights()))


def influences(f: BooleanFunctionTable, mu: ProductMeasure) -> InfluenceVector:
    """All n influences at once."""
    _check_sizes(f, mu)
    w = mu.config_weights()
    idx = np.arange(1 << f.n)
    vals = np.empty(f.n)
    for i in range(f.n):
        diff = (f.values != f.values[idx ^ (1 << i)]).astype(np.float64)
        vals[i] = np.dot(diff, w)
    return InfluenceVector(vals, mu.p)


def pivotal_set(f: BooleanFunctionTable, omega: int) -> set[int]:
    """Indices i whose flip changes f at omega."""
    if not 0 <= omega < (1 << f.n):
        raise InputError(f"omega={omega} outside [0, 2^{f.n})")
    out = set()
    for i in range(1, f.n + 1):
        if f.values[omega] != f.values[omega ^ (1 << (i - 1))]:
            out.add(i)
    return out


def monte_carlo_expectation(
    oracle: BooleanFunctionTable | Callable[[int], int],
    mu: ProductMeasure,
    samples: int,
    seed: int,
) -> tuple[float, float]:
    """Sample mean of the oracle under P_p, with binomial standard error.

    Deterministic for a fixed seed; replica streams are (seed, 0).
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    rng = stream(seed, 0)
    n = mu.n
    weights = (2.0 ** np.arange(n)).astype(np.float64)
    total = 0.0
    remaining = samples
    lookup = oracle.values if isinstance(oracle, BooleanFunctionTable) else None
    if lookup is not None and oracle.n != n:
        raise InputError("oracle table size does not match measure")
    while remaining > 0:
        chunk = min(remaining, 1 << 16)
        configs = ((rng.random((chunk, n)) < mu.p).astype(np.float64) @ weights).astype(np.int64)
        if lookup is not None:
            total += float(lookup[configs].sum())
        else:
            total += float(sum(oracle(int(c)) for c in configs))
        remaining -= chunk
    mean = total / samples
    se = float(np.sqrt(max(mean * (1.0 - mean), 0.0) / samples))
    return mean, se


# ---------------------------------------------------------------------------
# named function families
# ---------------------------------------------------------------------------


def _table_from_predicate(n: int, pred: Callable[[np.ndarray], np.ndarray], monotone: bool):
    pc = popcounts(n)
    return BooleanFunctionTable(n, pred(pc), monotone=monotone)


def dictator(n: int, i: int = 1) -> BooleanFunctionTable:
    """f(omega) = omega_i."""
    if not 1 <= i <= n:
        raise InputError(f"i={i} outside [1, {n}]")
    idx = np.arange(1 << n)
    return BooleanFunctionTable(n, (idx >> (i - 1)) & 1, monotone=True)


def majority(n: int) -> BooleanFunctionTable:
    if n % 2 == 0:
        raise InputError("majority needs odd n")
    return _table_from_predicate(n, lambda pc: (pc > n // 2).astype(np.uint8), True)


def parity(n: int) -> BooleanFunctionTable:
    return _table_from_predicate(n, lambda pc: (pc & 1).astype(np.uint8), False)


def conjunction(n: int) -> BooleanFunctionTable:
    """AND of all n bits."""
    return _table_from_predicate(n, lambda pc: (pc == n).astype(np.uint8), True)


def disjunction(n: int) -> BooleanFunctionTable:
    """OR of all n bits."""
    return _table_from_predicate(n, lambda pc: (pc > 0).astype(np.uint8), True)


def constant(n: int, value: int) -> BooleanFunctionTable:
    return BooleanFunctionTable(n, np.full(1 << n, value, dtype=np.uint8), monotone=True)


def threshold_function(n: int, k: int) -> BooleanFunctionTable:
    """1 iff at least k bits are set."""
    return _table_from_predicate(n, lambda pc: (pc >= k).astype(np.uint8), True)


def tribes(width: int, count: int) -> BooleanFunctionTable:
    """OR of ``count`` disjoint ANDs of ``width`` bits each."""
    n = width * count
    if n > MAX_TABLE_BITS:
        raise InputError("tribes function too large for a table")
    idx = np.arange(1 << n)
    tribe_mask = (1 << width) - 1
    out = np.zeros(1 << n, dtype=np.uint8)
    for t in range(count):
        mask = tribe_mask << (t * width)
        out |= ((idx & mask) == mask).astype(np.uint8)
    return BooleanFunctionTable(n, out, monotone=True)


def random_function(n: int, rng: np.random.Generator) -> BooleanFunctionTable:
    return BooleanFunctionTable(n, rng.integers(0, 2, size=1 << n, dtype=np.uint8))


def random_monotone(n: int, rng: np.random.Generator, clauses: int | None = None) -> BooleanFunctionTable:
    """Random monotone DNF: the upward closure of a few random minterms."""
    if clauses is None:
        clauses = int(rng.integers(1, n + 2))
    idx = np.arange(1 << n)
    out = np.zeros(1 << n, dtype=np.uint8)
    for _ in range(clauses):
        width = int(rng.integers(1, n + 1))
        members = rng.choice(n, size=width, replace=False)
        mask = int(np.sum(1 << members))
        out |= ((idx & mask) == mask).astype(np.uint8)
    return BooleanFunctionTable(n, out, monotone=True)


@lru_cache(maxsize=2)
def all_monotone_functions(n: int) -> tuple[BooleanFunctionTable, ...]:
    """Every monotone function on n bits (Dedekind enumeration); n <= 4."""
    if n > 4:
        raise InputError("exhaustive monotone enumeration is capped at n = 4")
    size = 1 << n
    out = []
    for code in range(1 << size):
        vals = np.array([(code >> w) & 1 for w in range(size)], dtype=np.uint8)
        if _is_monotone(n, vals):
            out.append(BooleanFunctionTable(n, vals, monotone=True))
    return tuple(out)
