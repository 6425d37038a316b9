"""The sharp-threshold toolbox.

Margulis-Russo differentiation, the Talagrand influence bound at p = 1/2,
the symmetric (transitive group) bound, log-odds window integration, and the
sum-of-curves critical-point estimator.  All logarithms are natural.

Constants left unspecified in the underlying theorems are never assumed:
inequalities carrying an unknown constant are reported as realized ratios,
and only the constant-free p = 1/2 chain is asserted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .boolfn import BooleanFunctionTable, InputError, ProductMeasure, influences, variance
from .curves import CurveFamily, SweepCurve


class DomainError(ValueError):
    pass


class SymmetryError(ValueError):
    """The claimed group action fails; carries a witness."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class LevelNotReachedError(ValueError):
    def __init__(self, level: float):
        super().__init__(f"curve never reaches level {level}")
        self.level = level


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------


def _require_interior(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise DomainError(f"p={p} must lie strictly inside (0, 1)")


def russo_derivative(f: BooleanFunctionTable, mu: ProductMeasure) -> float:
    """f'(p) = sum_i Inf_i[f] for increasing f."""
    _require_interior(mu.p)
    if not f.monotone:
        raise InputError("Margulis-Russo requires a monotone table")
    return influences(f, mu).total()


def correlation_derivative(f: BooleanFunctionTable, mu: ProductMeasure) -> float:
    """f'(p) = (1/p(1-p)) sum_i E_p[f (omega_i - p)], valid for any f."""
    _require_interior(mu.p)
    p = mu.p
    w = mu.config_weights()
    fv = f.values.astype(np.float64)
    idx = np.arange(1 << f.n)
    total = 0.0
    for i in range(f.n):
        bits = ((idx >> i) & 1).astype(np.float64)
        total += float(np.dot(fv * (bits - p), w))
    return total / (p * (1.0 - p))


def finite_difference_derivative(f: BooleanFunctionTable, p: float, h: float) -> float:
    """Central difference of the exact polynomial f(p); test helper."""
    from .boolfn import expectation

    hi = expectation(f, ProductMeasure(p + h, f.n))
    lo = expectation(f, ProductMeasure(p - h, f.n))
    return (hi - lo) / (2.0 * h)


# ---------------------------------------------------------------------------
# Talagrand / symmetric bounds
# ---------------------------------------------------------------------------


def _influence_entropy_sum(vals: np.ndarray) -> float:
    """sum_i Inf_i / log(1/Inf_i); terms at 0 give 0, at >= 1 give +inf."""
    total = 0.0
    for v in vals:
        if v <= 0.0:
            continue
        if v >= 1.0:
            return math.inf
        total += v / math.log(1.0 / v)
    return total


@dataclass(frozen=True)
class TalagrandReport:
    variance: float
    bound_sum: float
    ratio: float


def talagrand_bound(f: BooleanFunctionTable, mu: ProductMeasure) -> TalagrandReport:
    """Var_p(f) against sum_i Inf_i / log(1/Inf_i).

    At p = 1/2 the chain of the theorem holds with constant 1, so a violation
    there is a bug and raises.
    """
    _require_interior(mu.p)
    var = variance(f, mu)
    bound = _influence_entropy_sum(influences(f, mu).values)
    ratio = 0.0 if var == 0.0 else var / bound
    if mu.p == 0.5 and var > bound + 1e-12:
        raise AssertionError(
            f"Talagrand bound with constant 1 violated at p=1/2: Var={var} > {bound}"
        )
    return TalagrandReport(var, bound, ratio)


def _permute_configuration(omega_indices: np.ndarray, sigma: tuple[int, ...]) -> np.ndarray:
    """Index map for the action (sigma omega)_{sigma(i)} = omega_i."""
    n = len(sigma)
    out = np.zeros_like(omega_indices)
    for i in range(n):
        out |= ((omega_indices >> i) & 1) << (sigma[i] - 1)
    return out


def _orbit_of_one(n: int, generators: list[tuple[int, ...]]) -> set[int]:
    seen = {1}
    frontier = [1]
    while frontier:
        i = frontier.pop()
        for sigma in generators:
            j = sigma[i - 1]
            if j not in seen:
                seen.add(j)
                frontier.append(j)
    return seen


@dataclass(frozen=True)
class SymmetricReport:
    derivative: float
    rhs_factor: float
    ratio: float
    influences: np.ndarray


def symmetric_bound_report(
    f: BooleanFunctionTable,
    mu: ProductMeasure,
    generators: list[tuple[int, ...]],
) -> SymmetricReport:
    """f'(p) against log(n) Var_p(f) for f symmetric under a transitive group.

    Generators are permutations of [n] as 1-based tuples.  Symmetry of f under
    each generator and transitivity of the generated action are verified; on
    transitive-symmetric input all influences must agree.  The constant in the
    theorem is unspecified, so only the realized ratio is reported.
    """
    _require_interior(mu.p)
    n = f.n
    idx = np.arange(1 << n)
    for sigma in generators:
        if sorted(sigma) != list(range(1, n + 1)):
            raise InputError(f"{sigma} is not a permutation of [1..{n}]")
        permuted = _permute_configuration(idx, tuple(sigma))
        mismatch = np.nonzero(f.values != f.values[permuted])[0]
        if mismatch.size:
            omega = int(mismatch[0])
            raise SymmetryError(
                f"f is not invariant under {sigma}: differs at omega={omega:#0{n + 2}b}",
                witness=(omega, tuple(sigma)),
            )
    orbit = _orbit_of_one(n, [tuple(s) for s in generators])
    if orbit != set(range(1, n + 1)):
        missing = sorted(set(range(1, n + 1)) - orbit)
        raise SymmetryError(
            f"group action is not transitive on [n]: orbit of 1 misses {missing}",
            witness=missing,
        )
    infl = influences(f, mu).values
    if float(np.ptp(infl)) > 1e-12:
        raise AssertionError("transitive symmetry must equalize all influences")
    deriv = correlation_derivative(f, mu)
    rhs = math.log(n) * variance(f, mu)
    ratio = math.inf if rhs == 0.0 else deriv / rhs
    return SymmetricReport(deriv, rhs, ratio, infl)


# ---------------------------------------------------------------------------
# threshold windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdWindow:
    """Where a monotone curve passes epsilon and 1 - epsilon."""

    epsilon: float
    p_low: float
    p_high: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise InputError("epsilon must lie in (0, 1/2)")
        if self.p_low > self.p_high:
            raise InputError("p_low must not exceed p_high")

    @property
    def width(self) -> float:
        return self.p_high - self.p_low

    def to_json(self) -> str:
        return json.dumps(
            {
                "epsilon": self.epsilon,
                "p_low": self.p_low,
                "p_high": self.p_high,
                "width": self.width,
            }
        )


def _first_crossing(ps: np.ndarray, values: np.ndarray, level: float) -> float:
    above = np.nonzero(values >= level)[0]
    if above.size == 0:
        raise LevelNotReachedError(level)
    j = int(above[0])
    if j == 0:
        return float(ps[0])
    v0, v1 = values[j - 1], values[j]
    if v1 == v0:
        return float(ps[j])
    frac = (level - v0) / (v1 - v0)
    return float(ps[j - 1] + frac * (ps[j] - ps[j - 1]))


def window_from_curve(curve: SweepCurve, epsilon: float) -> ThresholdWindow:
    """Linear interpolation of the epsilon and 1-epsilon crossings."""
    if not 0.0 < epsilon < 0.5:
        raise InputError("epsilon must lie in (0, 1/2)")
    p_low = _first_crossing(curve.ps, curve.estimates, epsilon)
    p_high = _first_crossing(curve.ps, curve.estimates, 1.0 - epsilon)
    return ThresholdWindow(epsilon, p_low, p_high)


def log_odds_window(C: float, delta: float) -> tuple[float, float]:
    """Integrate f'/f(1-f) >= C around the half-point: bounds at p -+ delta."""
    if C <= 0 or delta <= 0:
        raise DomainError("C and delta must be positive")
    return math.exp(-C * delta), 1.0 - math.exp(-C * delta)


def log_odds_window_size(C: float, epsilon: float) -> float:
    """Smallest delta with f(p-delta) <= eps and f(p+delta) >= 1-eps."""
    if C <= 0 or not 0.0 < epsilon < 1.0:
        raise DomainError("need C > 0 and epsilon in (0, 1)")
    return math.log(1.0 / epsilon) / C


# ---------------------------------------------------------------------------
# critical-point estimator from a curve family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CriticalEstimate:
    x_hat: float
    censored: bool
    threshold_ratio: float
    ratio_curves: dict[int, np.ndarray]
    terms_summed: int


def critical_estimator(family: CurveFamily, threshold_ratio: float = 1.0) -> CriticalEstimate:
    """Estimate the growth change-point of Sigma_n(x) = sum_{k<n} f_k(x).

    Only the available sizes are summed (no interpolation in n), and the "n"
    in log Sigma_n / log n is the count of summed terms.  The decision uses
    the largest available size; ratio curves for every size are reported so
    convergence can be judged.  If the criterion is never met on the grid the
    upper grid end is returned, flagged right-censored.
    """
    sizes = family.sizes
    if len(sizes) < 3:
        raise InputError("need at least 3 distinct sizes")
    xs = family.xs
    ratio_curves: dict[int, np.ndarray] = {}
    with np.errstate(divide="ignore"):
        for pos in range(1, len(sizes)):
            n = sizes[pos]
            sigma = np.sum([family.values(k) for k in sizes[:pos]], axis=0)
            count = pos
            if count < 2:
                continue
            ratio_curves[n] = np.log(sigma) / math.log(count)
    n_top = sizes[-1]
    ratios = ratio_curves[n_top]
    met = np.nonzero(ratios >= threshold_ratio - 1e-12)[0]
    if met.size == 0:
        return CriticalEstimate(float(xs[-1]), True, threshold_ratio, ratio_curves, len(sizes) - 1)
    j = int(met[0])
    if j == 0 or not np.isfinite(ratios[j - 1]):
        x_hat = float(xs[j])
    else:
        r0, r1 = ratios[j - 1], ratios[j]
        frac = 0.0 if r1 == r0 else (threshold_ratio - r0) / (r1 - r0)
        x_hat = float(xs[j - 1] + frac * (xs[j] - xs[j - 1]))
    return CriticalEstimate(x_hat, False, threshold_ratio, ratio_curves, len(sizes) - 1)
