import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gazeaffect.core import Fixation, ImageRecord, TrialSet
from gazeaffect.features import (
    CenterBiasModel,
    ContractViolation,
    DensityEntropy,
    EmptyFixationSet,
    EventHistogram,
    FeatureChannel,
    FeatureParams,
    FixationDensityMap,
    InsufficientData,
    MeanStd,
    build_channel,
    density_entropy,
    fit_center_bias,
    fixation_density_map,
    histogram_rep,
    iovc,
    roc_auc,
    summary_rep,
)

from oracles import dense_mixture_grid, entropy_direct, histogram_scan, roc_auc_pairs


# -- density maps ------------------------------------------------------------

@pytest.mark.parametrize("size", [(1024, 768), (800, 600)])
def test_centre_fixation_argmax(size):
    dm = fixation_density_map([(size[0] / 2, size[1] / 2)], size)
    r, c = np.unravel_index(np.argmax(dm.values), dm.shape)
    assert (c, r) == (10, 7)
    assert dm.values.sum() == pytest.approx(1.0, abs=1e-12)
    assert dm.vector().shape == (300,)


@pytest.mark.parametrize("size", [(800, 600), (400, 300)])
def test_mirror_symmetry(size, rng):
    w, h = size
    x, y = rng.uniform(0, w - 1), rng.uniform(0, h - 1)
    dm = fixation_density_map([(x, y), (w - 1 - x, y)], size, kernel_sigma=25.0)
    np.testing.assert_allclose(dm.values, dm.values[:, ::-1], atol=1e-9)
    dm = fixation_density_map([(x, y), (x, h - 1 - y)], size, kernel_sigma=25.0)
    np.testing.assert_allclose(dm.values, dm.values[::-1, :], atol=1e-9)


def test_density_matches_dense_oracle(rng):
    for _ in range(10):
        w, h = int(rng.integers(100, 400)), int(rng.integers(80, 300))
        pts = rng.uniform([0, 0], [w, h], (int(rng.integers(1, 12)), 2))
        sigma = float(rng.uniform(2.0, 40.0))
        got = fixation_density_map(pts, (w, h), sigma).values
        np.testing.assert_allclose(got, dense_mixture_grid(pts, w, h, sigma), rtol=1e-9, atol=1e-15)


def test_empty_and_bad_sigma():
    with pytest.raises(EmptyFixationSet):
        fixation_density_map(np.empty((0, 2)), (100, 100))
    with pytest.raises(ValueError):
        fixation_density_map([(1, 1)], (100, 100), kernel_sigma=0)


def test_tiny_sigma_falls_back_to_binning():
    dm = fixation_density_map([(5000.5, 10.5)], (100, 100), kernel_sigma=1e-3)
    assert dm.values.sum() == pytest.approx(1.0)
    assert dm.values[1, 19] == 1.0


@given(st.lists(st.tuples(st.floats(-50, 1100), st.floats(-50, 800)), min_size=1, max_size=15),
       st.floats(1.0, 80.0))
def test_density_is_normalized_and_non_negative(pts, sigma):
    dm = fixation_density_map(pts, (1024, 768), sigma)
    assert np.all(dm.values >= 0)
    assert abs(dm.values.sum() - 1.0) <= 1e-9


def test_density_transformers():
    X = [np.array([[100.0, 100.0]]), np.array([[500.0, 300.0], [510.0, 310.0]])]
    fdm = FixationDensityMap().fit(X)
    assert fdm.transform(X).shape == (2, 300)
    ent = DensityEntropy().fit(X).transform(X)
    assert ent.shape == (2, 1) and np.all(ent > 0)


# -- entropy -------------------------------------------------------------------

def test_entropy_examples():
    assert density_entropy(np.full(300, 1 / 300)) == pytest.approx(math.log2(300), abs=1e-12)
    one = np.zeros(300)
    one[17] = 1.0
    assert density_entropy(one) == 0.0
    with pytest.raises(ContractViolation):
        density_entropy(np.full(300, 1 / 299))
    with pytest.raises(ContractViolation):
        density_entropy(np.array([1.5, -0.5]))


@given(st.lists(st.floats(0, 1), min_size=300, max_size=300).filter(lambda v: sum(v) > 0),
       st.randoms(use_true_random=False))
def test_entropy_bounds_permutation_and_oracle(v, r):
    p = np.asarray(v) / np.sum(v)
    h = density_entropy(p)
    assert -1e-12 <= h <= math.log2(300) + 1e-12
    assert abs(h - entropy_direct(p)) <= 1e-12
    perm = list(range(300))
    r.shuffle(perm)
    assert density_entropy(p[perm]) == pytest.approx(h, abs=1e-12)


# -- summary and histograms -------------------------------------------------------

def test_summary_rep_examples():
    np.testing.assert_array_equal(summary_rep([5, 5, 5]), [5, 0])
    m, s = summary_rep([1, 2, 3, 4])
    assert m == 2.5 and s == pytest.approx(math.sqrt(5 / 3))
    np.testing.assert_array_equal(summary_rep([7]), [7, 0])
    with pytest.raises(ValueError):
        summary_rep([])
    assert MeanStd().fit_transform([[1, 3], [2]]).tolist() == [[2, math.sqrt(2)], [2, 0]]


@pytest.mark.parametrize("kind,n", [("fix_duration", 60), ("sac_slope", 30), ("sac_length", 50)])
def test_empty_histogram(kind, n):
    h = histogram_rep([], kind, upper=1280.0 if kind == "sac_length" else None)
    assert h.shape == (n,) and not h.any()


def test_slope_bins():
    h = histogram_rep([0.0, 6.0, 179.0], "sac_slope")
    assert np.flatnonzero(h).tolist() == [0, 1, 29] and h.sum() == 3
    with pytest.raises(ContractViolation):
        histogram_rep([180.0], "sac_slope")
    with pytest.raises(ContractViolation):
        histogram_rep([-1.0], "fix_duration")


def test_overflow_goes_to_last_bin():
    h = histogram_rep([2000.0, 5000.0, 1999.9], "fix_duration")
    assert h[-1] == 3
    assert histogram_rep([1e6], "sac_length", upper=1280.0)[-1] == 1


@given(st.lists(st.floats(0, 2500), max_size=200))
def test_duration_histogram_matches_scan(v):
    np.testing.assert_array_equal(histogram_rep(v, "fix_duration"), histogram_scan(v, 0.0, 2000.0, 60))


@given(st.lists(st.floats(0, 179.99999), max_size=200), st.floats(0, 179.99))
def test_slope_histogram_matches_scan_and_increments(v, extra):
    h = histogram_rep(v, "sac_slope")
    np.testing.assert_array_equal(h, histogram_scan(v, 0.0, 180.0, 30))
    assert h.sum() == len(v)
    diff = histogram_rep(v + [extra], "sac_slope") - h
    assert diff.sum() == 1 and diff.max() == 1 and diff.min() == 0


def test_histogram_normalize_and_dataset_mode():
    assert histogram_rep([1.0, 2.0], "fix_duration", normalize=True).sum() == pytest.approx(1.0)
    enc = EventHistogram("fix_duration", "dataset").fit([[100.0, 300.0], [200.0]])
    assert enc.edges_[0] == 100 and enc.edges_[-1] == 300
    out = enc.transform([[100.0, 300.0, 50.0]])
    assert out[0, 0] == 2 and out[0, -1] == 1
    with pytest.raises(ValueError):
        EventHistogram(range_mode="weird").fit([[1.0]])


# -- ROC / IOVC ---------------------------------------------------------------

@given(st.lists(st.tuples(st.integers(0, 6), st.booleans()), min_size=2, max_size=60))
def test_auc_matches_pairwise_oracle(rows):
    s = np.array([r[0] for r in rows], dtype=float)
    p = np.array([r[1] for r in rows])
    if p.all() or not p.any():
        assert math.isnan(roc_auc(s, p))
    else:
        assert roc_auc(s, p) == pytest.approx(roc_auc_pairs(s, p), abs=1e-12)


@given(st.integers(0, 10_000))
def test_auc_invariant_under_monotone_transform(seed):
    r = np.random.default_rng(seed)
    s = r.random(300) ** 3
    p = r.random(300) < 0.2
    if p.any() and not p.all():
        assert roc_auc(np.sqrt(s) * 7 + 1, p) == pytest.approx(roc_auc(s, p), abs=1e-12)
        assert roc_auc(np.log(s + 1e-9), p) == pytest.approx(roc_auc(s, p), abs=1e-12)


def test_iovc_identical_fixations():
    score = iovc({"a": [(300.0, 200.0)], "b": [(300.0, 200.0)]}, (1024, 768))
    assert score.mean_auc == 1.0 and score.std_auc == 0.0
    assert score.vector().shape == (2,)


def test_iovc_needs_two_observers():
    with pytest.raises(InsufficientData):
        iovc({"a": [(1.0, 1.0)]}, (100, 100))
    with pytest.raises(InsufficientData):
        iovc({"a": [(1.0, 1.0)], "b": np.empty((0, 2))}, (100, 100))


def test_iovc_uniform_small_monte_carlo(rng):
    aucs = []
    for _ in range(100):
        groups = [rng.uniform([0, 0], [1024, 768], (8, 2)) for _ in range(3)]
        aucs.append(iovc(groups, (1024, 768), kernel_sigma=60.0).mean_auc)
    assert abs(np.mean(aucs) - 0.5) < 0.05


# -- center bias -----------------------------------------------------------------

def test_center_bias_degenerate():
    m = fit_center_bias([(512, 384)] * 5, (1024, 768))
    assert m.mu == (0.0, 0.0) and m.sigma == (0.0, 0.0) and m.degenerate
    with pytest.raises(InsufficientData):
        fit_center_bias([(1, 1)], (10, 10))


@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.integers(0, 1000))
def test_center_bias_equivariance(dx, dy, seed):
    z = np.random.default_rng(seed).normal(0, 0.3, (50, 2))
    a = fit_center_bias(z, normalized=True)
    b = fit_center_bias(z + [dx, dy], normalized=True)
    assert b.mu[0] == pytest.approx(a.mu[0] + dx, abs=1e-12)
    assert b.mu[1] == pytest.approx(a.mu[1] + dy, abs=1e-12)
    assert b.sigma == pytest.approx(a.sigma, abs=1e-12)


def test_center_bias_uses_per_point_sizes():
    pts = np.array([[0.0, 0.0], [800.0, 600.0], [1024.0, 768.0], [0.0, 0.0]])
    sizes = np.array([[800, 600], [800, 600], [1024, 768], [1024, 768]])
    m = fit_center_bias(pts, sizes)
    assert m.mu == pytest.approx((0.0, 0.0))


# -- channels ----------------------------------------------------------------------

def _trials():
    images = [ImageRecord("a", 2.0), ImageRecord("b", 5.0), ImageRecord("c", 8.0)]
    fx = []
    for o in ("o1", "o2"):
        for k in range(4):
            fx.append(Fixation(o, "a", 100 + 50 * k, 100 + (o == "o2") * 30, 300 * k, 150 + 10 * k))
        fx.append(Fixation(o, "b", 500, 400, 0, 200))
    return TrialSet.build(images, fx)


def test_build_channel_dimensions_and_missing():
    ts = _trials()
    fdm = build_channel(ts, "fdm")
    assert fdm.X.shape == (2, 300) and fdm.missing == ("c",)
    assert build_channel(ts, "iovc").dimension == 2
    assert build_channel(ts, "fdm_entropy").dimension == 1
    assert build_channel(ts, "sac_slope_hist").dimension == 30
    sl = build_channel(ts, "sac_length_hist")
    assert sl.image_ids == ("a",) and sl.X.sum() == 6
    with pytest.raises(ValueError):
        build_channel(ts, "pupil")


def test_meanstd_channel_matches_summary_rep():
    ts = _trials()
    ch = build_channel(ts, "fix_duration_meanstd")
    for iid, row in zip(ch.image_ids, ch.X):
        durs = [f.duration for f in ts.fixations if f.image_id == iid]
        np.testing.assert_allclose(row, summary_rep(durs))


def test_channel_subset_and_file_round_trip():
    ts = _trials()
    ch = build_channel(ts, "fdm", FeatureParams(kernel_sigma_fraction=0.05), observers=["o1"])
    back = FeatureChannel.from_file(ch.to_file(), source="gaze")
    np.testing.assert_array_equal(back.X, ch.X)
    assert ch.restrict(["b"]).X.shape == (1, 300)
