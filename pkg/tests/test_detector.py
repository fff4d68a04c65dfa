import math

import numpy as np
import pytest

from eprphase import analytics as A
from eprphase import bell, fock, kernels
from eprphase import detector as D
from eprphase.errors import TruncationError
from eprphase.fock import JointCountDistribution

POINT = JointCountDistribution.point_mass(cutoff=4)


@pytest.fixture(scope="module")
def undisplaced_r1():
    return fock.displaced_joint_distribution(1.0, 0, 0)


def test_detector_model_outcomes():
    m = np.array([0, 1, 2, 0, 3])
    n = np.array([0, 0, 1, 2, 3])
    np.testing.assert_array_equal(D.DetectorModel.NUMBER_RESOLVING.outcome(m, n), [1, -1, -1, 1, 1])
    a, b = D.DetectorModel.BINARY_NO_COUNT.outcome(m, n)
    np.testing.assert_array_equal(a, [1, 0, 0, 1, 0])
    np.testing.assert_array_equal(b, [1, 1, 0, 0, 0])
    assert D.DetectorModel("binary") is D.DetectorModel.BINARY_NO_COUNT


def test_point_mass():
    m, n = D.sample_outcomes(POINT, 1000, 3)
    assert not m.any() and not n.any()
    est = D.estimate_parity_correlation(POINT, 1000, 3)
    assert (est.value, est.std_error, est.n_trials, est.seed) == (1.0, 0.0, 1000, 3)
    assert [e.value for e in D.estimate_nocount(POINT, 1000, 3)] == [1.0, 1.0, 1.0]


def test_stream_determinism(undisplaced_r1):
    m1, n1 = D.sample_outcomes(undisplaced_r1, 300_000, 99)
    m2, n2 = D.sample_outcomes(undisplaced_r1, 300_000, 99)
    np.testing.assert_array_equal(m1, m2)
    np.testing.assert_array_equal(n1, n2)
    m3, _ = D.sample_outcomes(undisplaced_r1, 300_000, 100)
    assert not np.array_equal(m1, m3)
    m4, _ = D.sample_outcomes(undisplaced_r1, 300_000, 99, stream=1)
    assert not np.array_equal(m1, m4)


def test_prefix_property(undisplaced_r1):
    # chunked streams: a shorter run is a prefix of a longer one
    m1, _ = D.sample_outcomes(undisplaced_r1, 1000, 5)
    m2, _ = D.sample_outcomes(undisplaced_r1, 600_000, 5)
    np.testing.assert_array_equal(m1, m2[:1000])


def test_workers_do_not_change_results(undisplaced_r1):
    n = 3 * D.CHUNK + 17
    c1 = D.cell_counts(undisplaced_r1, n, 8, workers=1)
    c4 = D.cell_counts(undisplaced_r1, n, 8, workers=4)
    np.testing.assert_array_equal(c1, c4)
    m, k = D.sample_outcomes(undisplaced_r1, n, 8, workers=3)
    hist = np.bincount(m * (undisplaced_r1.cutoff + 1) + k, minlength=c1.size).reshape(c1.shape)
    np.testing.assert_array_equal(hist, c1)


def test_number_state_frequencies(undisplaced_r1):
    n_trials = 10**6
    m, n = D.sample_outcomes(undisplaced_r1, n_trials, 2024)
    assert np.all(m == n)
    for k in range(6):
        p = math.tanh(1) ** (2 * k) / math.cosh(1) ** 2
        freq = np.mean(m == k)
        assert abs(freq - p) < 4 * math.sqrt(p * (1 - p) / n_trials)


def test_parity_estimates():
    dist = fock.displaced_joint_distribution(1.0, 0.2, -0.2)
    est = D.estimate_parity_correlation(dist, 10**6, 7)
    assert abs(est.value - A.parity_correlation(1.0, 0.2, -0.2)) < 4 * est.std_error
    dist = fock.displaced_joint_distribution(0.0, math.sqrt(0.5), 0)
    est = D.estimate_parity_correlation(dist, 10**6, 8)
    assert abs(est.value - math.exp(-1)) < 4 * est.std_error


@pytest.mark.parametrize("r, a, b, seed", [(1.0, 0, 0, 42), (0.8, 0.5, -0.5, 9)])
def test_nocount_estimates(r, a, b, seed):
    dist = fock.displaced_joint_distribution(r, a, b)
    pab, pa, pb = D.estimate_nocount(dist, 10**6, seed)
    assert abs(pab.value - A.nocount_joint(r, a, b)) < 4 * pab.std_error
    assert abs(pa.value - A.nocount_single_a(r, a)) < 4 * pa.std_error
    assert abs(pb.value - A.nocount_single_b(r, b)) < 4 * pb.std_error
    # same stream: the joint event is contained in each single event
    assert pab.value <= min(pa.value, pb.value)


def test_std_error_scaling():
    dist = fock.displaced_joint_distribution(0.8, 0.5, -0.5)
    for est in (D.estimate_parity_correlation, lambda *a: D.estimate_nocount(*a)[0]):
        small = est(dist, 250_000, 1)
        large = est(dist, 10**6, 1)
        assert small.std_error / large.std_error == pytest.approx(2.0, rel=0.2)


def test_std_error_is_sample_std():
    dist = fock.displaced_joint_distribution(1.0, 0.2, -0.2)
    m, n = D.sample_outcomes(dist, 20_000, 4)
    x = D.DetectorModel.NUMBER_RESOLVING.outcome(m, n)
    est = D.estimate_parity_correlation(dist, 20_000, 4)
    assert est.value == pytest.approx(x.mean(), abs=1e-15)
    assert est.std_error == pytest.approx(x.std(ddof=1) / math.sqrt(x.size), rel=1e-12)


def test_detector_models_are_distinct():
    r, a, b = 1.0, 0.2, -0.2
    dist = fock.displaced_joint_distribution(r, a, b)
    E = D.estimate_parity_correlation(dist, 10**6, 11)
    pab = D.estimate_nocount(dist, 10**6, 11)[0]
    assert abs(E.value - math.pi**2 / 4 * A.wigner(r, a, b)) < 4 * E.std_error
    assert abs(pab.value - math.pi**2 * A.qfunc(r, a, b)) < 4 * pab.std_error
    # swapping the targets must fail decisively
    assert abs(E.value - math.pi**2 * A.qfunc(r, a, b)) > 20 * E.std_error
    assert abs(pab.value - math.pi**2 / 4 * A.wigner(r, a, b)) > 20 * pab.std_error


def test_rejects_bad_input():
    dist = fock.displaced_joint_distribution(1.0, 1.0, 1.0, cutoff=40, tol=1e-3)
    assert dist.deficit > 1e-10
    with pytest.raises(TruncationError):
        D.sample_outcomes(dist, 10, 1)
    with pytest.raises(ValueError):
        D.estimate_parity_correlation(POINT, 0, 1)
    with pytest.raises(ValueError):
        D.cell_counts(POINT, 10, -1)


# ------------------------------------------------------------------ Bell combinations


def test_mc_bell_vacuum_origin():
    est = D.mc_bell(0.0, bell.BellSettings(), "chsh", 10_000, 1)
    assert (est.value, est.std_error) == (2.0, 0.0)


def test_mc_bell_chsh_r1():
    rep = bell.chsh_optimize(1.0)
    est = D.mc_bell(1.0, rep.settings, "chsh", 10**6, 21)
    assert abs(est.value - rep.value) < 4 * est.std_error
    assert est.n_trials == 10**6


def test_mc_bell_ch_r05():
    s = bell.BellSettings.restricted(0.1975)
    est = D.mc_bell(0.5, s, "ch", 10**7, 5)
    target = A.ch_closed_form(0.5, 0.1975)
    assert target == pytest.approx(0.063, abs=5e-4)
    assert abs(est.value - target) < 4 * est.std_error
    assert est.value > 0


def test_mc_bell_ch_general_settings():
    s = bell.BellSettings(0.4 - 0.1j, 0.1 + 0.2j, -0.3 + 0.05j, 0.2j)
    est = D.mc_bell(0.7, s, "ch", 10**6, 17)
    assert abs(est.value - bell.ch_combination_general(0.7, s)) < 4 * est.std_error


def test_mc_bell_deterministic_and_checks_name():
    s = bell.BellSettings.restricted(0.05)
    assert D.mc_bell(1.0, s, "chsh", 50_000, 3) == D.mc_bell(1.0, s, "chsh", 50_000, 3, workers=2)
    with pytest.raises(ValueError):
        D.mc_bell(1.0, s, "bogus", 10, 3)


@pytest.mark.parametrize("size", [1, 7, 400])
def test_tally_kernels_agree(size):
    rng = np.random.default_rng(size)
    cdf = np.cumsum(rng.random(size))
    cdf /= cdf[-1]
    u = np.concatenate([rng.random(50_000), cdf[:-1], [0.0]])  # exact CDF values go to the next cell
    expected = np.bincount(np.minimum(np.searchsorted(cdf, u, side="right"), size - 1), minlength=size)
    np.testing.assert_array_equal(kernels.tally_cells_numba(cdf, u), expected)
    np.testing.assert_array_equal(kernels.tally_cells_numpy(cdf, u), expected)
