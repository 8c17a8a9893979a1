"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
happen; they are also repeated in the terminal summary. Criterion 8 needs
the released recordings and runs only when ``GAZEAFFECT_DATASET`` points to
a data directory (layout as described in the README).
"""

from __future__ import annotations

import os
import time
from pathlib import Path

import numpy as np
import pytest

from gazeaffect.cli import cmd_eval, cmd_synth, load_scenario
from gazeaffect.config import load_config
from gazeaffect.core import dataset_summary, fixation_array
from gazeaffect.features import (
    CenterBiasModel,
    build_channel,
    density_entropy,
    fit_center_bias,
    fixation_density_map,
    histogram_rep,
    iovc,
)
from gazeaffect.features.density import default_sigma
from gazeaffect.ingest import load_trialset
from gazeaffect.learn import CVProtocol, run_protocol
from gazeaffect.stats import one_way_anova
from gazeaffect.synth import ClassParams, SyntheticScenario, generate

from oracles import (
    anova_direct,
    cell_centre_mixture,
    dense_mixture_grid,
    entropy_direct,
    f_sf_quad,
    histogram_scan,
)

REPO = Path(__file__).resolve().parents[1]
RESULTS: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def rel_l1(a, b) -> float:
    return float(np.abs(a - b).sum() / np.abs(b).sum())


# -- 1: feature oracles ----------------------------------------------------------

def test_criterion_1_feature_oracles():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst_dense = worst_centre = worst_entropy = 0.0
    for _ in range(100):
        w, h = int(rng.integers(160, 481)), int(rng.integers(120, 361))
        pts = rng.uniform([0, 0], [w, h], (int(rng.integers(1, 16)), 2))
        sigma = default_sigma(w)
        dm = fixation_density_map(pts, (w, h), sigma).values
        worst_dense = max(worst_dense, rel_l1(dm, dense_mixture_grid(pts, w, h, sigma)))
        # point evaluation at cell centres is a coarser reading of the same
        # map; it is reported for reference and not gated
        wide = 0.1 * w
        worst_centre = max(worst_centre, rel_l1(fixation_density_map(pts, (w, h), wide).values,
                                                cell_centre_mixture(pts, w, h, wide)))
        worst_entropy = max(worst_entropy, abs(density_entropy(dm) - entropy_direct(dm)))
    values = rng.uniform(0, 2500, 10_000)
    slopes = rng.uniform(0, 180, 10_000)
    exact = (np.array_equal(histogram_rep(values, "fix_duration"), histogram_scan(values, 0.0, 2000.0, 60))
             and np.array_equal(histogram_rep(slopes, "sac_slope"), histogram_scan(slopes, 0.0, 180.0, 30)))
    elapsed = time.perf_counter() - t0
    ok = worst_dense < 0.02 and worst_entropy <= 1e-12 and exact and elapsed < 30
    record(1, ok, f"FDM rel L1 dense={worst_dense:.2e} (cell-centre reading at sigma=0.1W: {worst_centre:.2e}); "
                  f"entropy err={worst_entropy:.1e}; histograms exact={exact}; {elapsed:.1f}s")


# -- 2: IOVC calibration ---------------------------------------------------------

def test_criterion_2_iovc_calibration():
    rng = np.random.default_rng(7)
    size = (1024, 768)
    aucs = [iovc([rng.uniform([0, 0], size, (10, 2)) for _ in range(5)], size).mean_auc for _ in range(1000)]
    mean = float(np.mean(aucs))
    same = iovc({"a": [(300.0, 200.0)], "b": [(300.0, 200.0)]}, size).mean_auc
    record(2, abs(mean - 0.5) <= 0.05 and same == 1.0,
           f"uniform mean AUC={mean:.4f} over 1000 images; identical pair AUC={same}")


# -- 3: center-bias recovery -----------------------------------------------------

def test_criterion_3_center_bias_recovery():
    mu, sigma = (0.1, -0.2), (0.2, 0.3)
    scen = SyntheticScenario(n_images=(0, 100, 0), n_observers=100,
                             classes=(ClassParams(bias=CenterBiasModel(mu, sigma), fixations_per_trial=10.0),) * 3,
                             seed=31)
    trials, _ = generate(scen)
    arr = fixation_array(trials.fixations)
    sizes = np.array([trials.images[f.image_id].size for f in trials.fixations])
    m = fit_center_bias(arr[:, :2], sizes)
    err = max(max(abs(a - b) for a, b in zip(m.mu, mu)), max(abs(a - b) for a, b in zip(m.sigma, sigma)))
    record(3, err <= 0.01 and arr.shape[0] >= 90_000,
           f"n={arr.shape[0]} mu={tuple(round(v, 4) for v in m.mu)} sigma={tuple(round(v, 4) for v in m.sigma)} "
           f"max err={err:.4f}")


# -- 4: statistics -----------------------------------------------------------------

def test_criterion_4_anova():
    rng = np.random.default_rng(99)
    worst_f = worst_p = 0.0
    for _ in range(100):
        k = int(rng.integers(2, 6))
        groups = [rng.normal(rng.normal(0, 0.7), rng.uniform(0.5, 2), int(rng.integers(2, 40))) for _ in range(k)]
        res = one_way_anova(groups)
        worst_f = max(worst_f, abs(res.F - anova_direct([list(g) for g in groups])) / max(1.0, res.F))
        worst_p = max(worst_p, abs(res.p - f_sf_quad(res.F, res.df_between, res.df_within)))
    same = one_way_anova([[1.0, 2.0, 3.0]] * 3)
    record(4, worst_f <= 1e-10 and worst_p <= 1e-6 and (same.F, same.p) == (0.0, 1.0),
           f"F err={worst_f:.1e} p err={worst_p:.1e}; identical groups F={same.F} p={same.p}")


# -- 5: null calibration -------------------------------------------------------------

@pytest.mark.slow
def test_criterion_5_null_calibration():
    hits, lines = 0, []
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        X = rng.normal(size=(600, 10))
        y = rng.integers(0, 3, 600)
        r = run_protocol(X, y, CVProtocol(seed=seed))
        good = 30.0 <= r.mean_accuracy <= 37.0 and r.mcnemar_p > 0.05
        hits += good
        lines.append(f"{r.mean_accuracy:.1f}/{r.mcnemar_p:.2f}")
    record(5, hits >= 18, f"{hits}/20 seeds with mA in [30,37] and p>0.05 (mA/p: {' '.join(lines)})")


# -- 6: power --------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_6_power():
    t0 = time.perf_counter()
    trials, _ = generate(load_scenario(REPO / "scenarios" / "power.ini"))
    ch = build_channel(trials, "sac_length_hist")
    r = run_protocol(ch, trials.labels(), CVProtocol())
    rng = np.random.default_rng(5)
    X = np.vstack([c + rng.normal(0, 0.1, (30, 3)) for c in np.eye(3)])
    sep = run_protocol(X, np.repeat([0, 1, 2], 30), CVProtocol())
    elapsed = time.perf_counter() - t0
    record(6, r.mean_accuracy >= 60 and r.mcnemar_p < 1e-3 and sep.mean_accuracy >= 95 and elapsed < 300,
           f"planted lengths mA={r.mean_accuracy:.1f}% p={r.mcnemar_p:.2g}; "
           f"separable mA={sep.mean_accuracy:.1f}%; {elapsed:.1f}s")


# -- 7: determinism ----------------------------------------------------------------------

def test_criterion_7_determinism(tmp_path):
    cmd_synth(REPO / "scenarios" / "power.ini", tmp_path / "data")
    cfg = load_config(None, [f"paths.data_dir={tmp_path / 'data'}", f"paths.output_dir={tmp_path / 'out'}",
                             "protocol.repetitions=5", "run.seed=11"])
    first = {p: p.read_bytes() for p in cmd_eval(cfg, ["fdm", "sac_length_hist"])}
    second = {p: p.read_bytes() for p in cmd_eval(cfg, ["fdm", "sac_length_hist"])}
    record(7, first == second and len(first) == 4,
           f"{len(first)} report files byte-identical across two runs: {first == second}")


# -- 8: released data (conditional) --------------------------------------------------------

def _within(value, target, tol):
    return abs(value - target) <= tol


@pytest.mark.slow
@pytest.mark.skipif(not os.environ.get("GAZEAFFECT_DATASET"), reason="set GAZEAFFECT_DATASET to the released data")
def test_criterion_8_released_dataset():
    trials = load_trialset(Path(os.environ["GAZEAFFECT_DATASET"]))
    s = dataset_summary(trials)
    split = tuple(s["images_per_class"][n] for n in ("unpleasant", "neutral", "pleasant"))
    io = build_channel(trials, "iovc").X[:, 0].mean() * 100
    arr = fixation_array(trials.fixations)
    sizes = np.array([trials.images[f.image_id].size for f in trials.fixations])
    cb = fit_center_bias(arr[:, :2], sizes)
    s296, s382 = trials.scenario("s296"), trials.scenario("s382")
    fdm = run_protocol(build_channel(s296, "fdm"), s296.labels(), CVProtocol()).mean_accuracy
    slope = run_protocol(build_channel(s382, "sac_slope_hist"), s382.labels(), CVProtocol()).mean_accuracy
    checks = {
        "split": split == (134, 84, 164),
        "fixations": s["total_fixations"] == 120219,
        "iovc": _within(io, 95.34, 1.9),
        "bias_mu": all(_within(a, b, 0.02) for a, b in zip(cb.mu, (0.006, -0.046))),
        "bias_sigma": all(_within(a, b, 0.03) for a, b in zip(cb.sigma, (0.23, 0.26))),
        "fdm_s296": _within(fdm, 37.8, 3.0),
        "slope_s382": _within(slope, 37.3, 3.0),
    }
    record(8, all(checks.values()),
           f"split={split} fixations={s['total_fixations']} iovc={io:.2f} mu={cb.mu} sigma={cb.sigma} "
           f"fdm={fdm:.1f} slope={slope:.1f} failing={[k for k, v in checks.items() if not v]}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
