"""Margulis-Russo, Talagrand, windows, and the critical estimator."""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from sharpthreshold import boolfn as bf, threshold as th
from sharpthreshold.boolfn import InputError, ProductMeasure
from sharpthreshold.curves import CurveError, CurveFamily, SweepCurve
from sharpthreshold.rng import stream


from conftest import monotone_families


def test_russo_examples():
    assert th.russo_derivative(bf.dictator(4), ProductMeasure(0.37, 4)) == pytest.approx(1.0)
    # d/dp (3p^2 - 2p^3) = 6p - 6p^2 = 1.5 at p = 1/2
    assert th.russo_derivative(bf.majority(3), ProductMeasure(0.5, 3)) == pytest.approx(1.5)
    assert th.russo_derivative(bf.conjunction(2), ProductMeasure(0.5, 2)) == pytest.approx(1.0)
    with pytest.raises(th.DomainError):
        th.russo_derivative(bf.dictator(2), ProductMeasure(0.0, 2))
    with pytest.raises(InputError):
        th.russo_derivative(bf.parity(3), ProductMeasure(0.5, 3))


def test_margulis_russo_equals_correlation_formula():
    for f in monotone_families():
        for p in (0.2, 0.5, 0.8):
            mu = ProductMeasure(p, f.n)
            assert abs(th.russo_derivative(f, mu) - th.correlation_derivative(f, mu)) <= 1e-9


def test_finite_difference_consistency():
    # central-difference error is O(h^2): shrinking h tenfold divides it by ~100
    f = bf.majority(5)
    p = 0.3
    exact = th.russo_derivative(f, ProductMeasure(p, 5))
    err3 = abs(th.finite_difference_derivative(f, p, 1e-3) - exact)
    err4 = abs(th.finite_difference_derivative(f, p, 1e-4) - exact)
    assert err3 / err4 == pytest.approx(100.0, rel=0.2)


def test_talagrand_examples():
    rep = th.talagrand_bound(bf.dictator(3), ProductMeasure(0.5, 3))
    assert math.isinf(rep.bound_sum)
    rep = th.talagrand_bound(bf.majority(3), ProductMeasure(0.5, 3))
    assert rep.variance == pytest.approx(0.25)
    assert rep.bound_sum == pytest.approx(3 * 0.5 / math.log(2.0), abs=1e-12)
    assert rep.variance <= rep.bound_sum
    rep = th.talagrand_bound(bf.tribes(2, 2), ProductMeasure(0.5, 4))
    assert rep.variance <= rep.bound_sum


def test_talagrand_constant_one_sweep():
    rng = stream(31, 0)
    mu_cache = {}
    for f in monotone_families():
        mu = mu_cache.setdefault(f.n, ProductMeasure(0.5, f.n))
        th.talagrand_bound(f, mu)  # raises on a p=1/2 violation
    for _ in range(500):
        n = int(rng.integers(2, 9))
        f = bf.random_monotone(n, rng)
        th.talagrand_bound(f, mu_cache.setdefault(n, ProductMeasure(0.5, n)))


def test_symmetric_bound_report():
    rep = th.symmetric_bound_report(bf.majority(3), ProductMeasure(0.5, 3), [(2, 3, 1)])
    np.testing.assert_allclose(rep.influences, [0.5, 0.5, 0.5], atol=1e-12)
    assert rep.ratio > 0
    # parity is symmetric under the full symmetric group (generators suffice)
    rep = th.symmetric_bound_report(
        bf.parity(4), ProductMeasure(0.3, 4), [(2, 1, 3, 4), (2, 3, 4, 1)]
    )
    assert float(np.ptp(rep.influences)) <= 1e-12


def test_symmetric_bound_rejections():
    # the trivial group fixes index 2: not transitive
    with pytest.raises(th.SymmetryError) as exc:
        th.symmetric_bound_report(bf.dictator(3), ProductMeasure(0.5, 3), [(1, 2, 3)])
    assert exc.value.witness
    # dictator is not invariant under the swap (1 2): witness returned
    with pytest.raises(th.SymmetryError) as exc:
        th.symmetric_bound_report(bf.dictator(3), ProductMeasure(0.5, 3), [(2, 1, 3)])
    omega, sigma = exc.value.witness
    assert sigma == (2, 1, 3)
    d = bf.dictator(3)
    permuted = th._permute_configuration(np.array([omega]), sigma)[0]
    assert d.values[omega] != d.values[permuted]


def test_window_from_curve_examples():
    ps = np.linspace(0.0, 1.0, 2001)
    exact = SweepCurve(ps, ps, np.zeros_like(ps), 0, 0)
    w = th.window_from_curve(exact, 0.1)
    assert w.p_low == pytest.approx(0.1, abs=1e-9)
    assert w.p_high == pytest.approx(0.9, abs=1e-9)
    assert w.width == pytest.approx(0.8, abs=1e-9)

    cubic = 3 * ps**2 - 2 * ps**3
    w = th.window_from_curve(SweepCurve(ps, cubic, np.zeros_like(ps), 0, 0), 0.1)
    lo = brentq(lambda p: 3 * p**2 - 2 * p**3 - 0.1, 0, 1)
    hi = brentq(lambda p: 3 * p**2 - 2 * p**3 - 0.9, 0, 1)
    assert w.p_low == pytest.approx(lo, abs=1e-3)
    assert w.p_high == pytest.approx(hi, abs=1e-3)

    step = SweepCurve(ps, (ps > 0.5).astype(float), np.zeros_like(ps), 0, 0)
    w = th.window_from_curve(step, 0.1)
    assert w.width <= (ps[1] - ps[0]) + 1e-12


def test_window_level_not_reached():
    ps = np.linspace(0, 1, 11)
    curve = SweepCurve(ps, np.full(11, 0.4), np.zeros(11), 0, 0)
    with pytest.raises(th.LevelNotReachedError) as exc:
        th.window_from_curve(curve, 0.1)
    assert exc.value.level == pytest.approx(0.9)


def test_log_odds_window():
    lo, hi = th.log_odds_window(10.0, 0.3)
    assert lo == pytest.approx(math.exp(-3.0))
    assert hi == pytest.approx(1.0 - math.exp(-3.0))
    # epsilon-window size: delta = log(1/eps)/C
    delta = th.log_odds_window_size(math.log(10**4), 0.05)
    assert delta == pytest.approx(math.log(20) / math.log(10**4), abs=1e-12)
    assert delta == pytest.approx(0.3253, abs=1e-3)
    big = th.log_odds_window(1e9, 0.3)
    assert big[0] < 1e-300 and big[1] == 1.0
    with pytest.raises(th.DomainError):
        th.log_odds_window(-1.0, 0.1)


def _family(xs, fns, sizes, noise=0.0):
    entries = {}
    for n in sizes:
        vals = np.array([fns(n, x) for x in xs])
        entries[n] = (vals, np.full(len(xs), noise))
    return CurveFamily(xs, entries)


def test_critical_estimator_linear_family():
    xs = np.linspace(0.0, 1.0, 101)
    fam = _family(xs, lambda n, x: min(1.0, max(0.0, x)), [10, 20, 40])
    est = th.critical_estimator(fam)
    # Sigma_N(x) = (terms) * x meets the ratio-1 criterion only at x = 1
    assert est.x_hat == pytest.approx(1.0, abs=1e-9)


def test_critical_estimator_step_family():
    xs = np.linspace(0.0, 1.0, 21)
    fam = _family(xs, lambda n, x: 1.0 if x > 0.5 else 0.0, [5, 10, 20, 40])
    est = th.critical_estimator(fam)
    assert not est.censored
    assert abs(est.x_hat - 0.5) <= (xs[1] - xs[0]) + 1e-12


def test_critical_estimator_exponential_family():
    xs = np.linspace(0.0, 1.0, 41)
    fam = _family(
        xs,
        lambda n, x: 1.0 if x >= 0.5 else math.exp(-n * (0.5 - x)),
        [5, 10, 20, 40, 80],
    )
    est = th.critical_estimator(fam)
    assert abs(est.x_hat - 0.5) <= (xs[1] - xs[0]) + 1e-12


def test_critical_estimator_censoring_and_reports():
    xs = np.linspace(0.0, 1.0, 11)
    fam = _family(xs, lambda n, x: 0.01, [4, 8, 16])
    est = th.critical_estimator(fam)
    assert est.censored and est.x_hat == xs[-1]
    # a ratio curve for every size with >= 2 predecessors (log 1 = 0 otherwise)
    assert set(est.ratio_curves) == {16}
    with pytest.raises(InputError):
        th.critical_estimator(_family(xs, lambda n, x: x, [4, 8]))


def test_critical_estimator_monotone_in_family():
    xs = np.linspace(0.0, 1.0, 41)
    rng = stream(32, 0)
    for _ in range(10):
        centers = sorted(rng.uniform(0.2, 0.8, size=1).tolist() * 4)
        sizes = [5, 10, 20, 40]
        base = {
            n: (np.clip((xs - c) * n, 0, 1), np.zeros(len(xs)))
            for n, c in zip(sizes, centers * 1)
        }
        fam = CurveFamily(xs, base)
        bumped = CurveFamily(
            xs, {n: (np.clip(v + 0.05, 0, 1), s) for n, (v, s) in base.items()}
        )
        a = th.critical_estimator(fam, 0.9)
        b = th.critical_estimator(bumped, 0.9)
        assert b.x_hat <= a.x_hat + 1e-12


def test_curve_family_validation_and_csv():
    xs = np.linspace(0, 1, 5)
    good = CurveFamily(xs, {2: (xs.copy(), np.zeros(5)), 4: (xs**2, np.zeros(5))})
    text = good.to_csv({"seed": 1})
    back = CurveFamily.from_csv(text)
    assert back.sizes == [2, 4]
    np.testing.assert_allclose(back.values(4), xs**2)
    with pytest.raises(CurveError):
        CurveFamily(xs, {2: (np.array([0.5, 0.4, 0.6, 0.7, 0.8]), np.zeros(5))})
    # decreases within 3 sigma survive
    CurveFamily(xs, {2: (np.array([0.5, 0.49, 0.6, 0.7, 0.8]), np.full(5, 0.01))})


def test_threshold_window_json():
    w = th.ThresholdWindow(0.1, 0.2, 0.7)
    doc = __import__("json").loads(w.to_json())
    assert set(doc) == {"epsilon", "p_low", "p_high", "width"}
    assert doc["epsilon"] == 0.1 and doc["p_low"] == 0.2 and doc["p_high"] == 0.7
    assert doc["width"] == pytest.approx(0.5)
