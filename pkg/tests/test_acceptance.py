"""Acceptance suite: one test (or test group) per exit criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.  Budgets are wall-clock seconds and generous for the
pure-python kernel backend.

Two checks are expected to fail and are left failing deliberately; the
assertion messages state the measured truth:

* criterion 7c: the Gaussian (CLT) approximation of the GLRT error has a
  true gap of 0.0102 +- 0.0001 to the Monte Carlo value at eps_act = 0.5
  on the d=20 grid, just over the 0.01 tolerance;
* criterion 8 (convergence half): at (eps_des/sigma)^2 = 25 and k = 1 the
  predicted-error ratio GLRT/minimax is ~3.5, not within 10% of one, and
  the ratio grows with SNR; only the error exponents converge.
"""

import math
import time

import numpy as np
import pytest

import glrtlab as g
import glrtlab.cli as cli
from csvread import read_rows
from glrtlab.backend import kernels as _k

SEED = 20260810


def report(cid, message):
    print(f"ACCEPTANCE {cid}: PASS - {message}", flush=True)


def fail(cid, message):
    pytest.fail(f"ACCEPTANCE {cid}: FAIL - {message}")


def joint_ci_width(e1, e2):
    """95% CI half-width of the difference of two estimates."""
    se1 = e1.ci_half_width / 1.959963984540054
    se2 = e2.ci_half_width / 1.959963984540054
    return 1.959963984540054 * math.hypot(se1, se2)


# ---------------------------------------------------------------- C1

def test_criterion_1_kernel_identities(rng):
    start = time.perf_counter()
    n, d = 10_000, 8
    x = rng.normal(size=(n, d)) * 3
    mu = rng.normal(size=(n, d))
    eps = rng.uniform(0, 2, size=(n, 1))
    thresholded = np.sign(x) * np.maximum(np.abs(x) - eps, 0.0)
    clamped = x - thresholded
    assert np.array_equal(thresholded + clamped, x), \
        "shrink + clamp must reproduce the input exactly"
    resid = x - mu
    cost_direct = (np.sign(resid)
                   * np.maximum(np.abs(resid) - eps, 0.0)) ** 2
    cost_direct = cost_direct.sum(axis=1)
    e_hat = resid - np.sign(resid) * np.maximum(np.abs(resid) - eps, 0.0)
    plug_in = ((resid - e_hat) ** 2).sum(axis=1)
    worst = np.max(np.abs(cost_direct - plug_in))
    assert worst < 1e-10, f"joint-estimation vs plug-in cost gap {worst:.2e}"
    # same identity through the public API on a sample of rows
    for i in range(0, n, 500):
        c = g.glrt_costs(x[i], [mu[i]], float(eps[i, 0]))[0]
        assert abs(c - plug_in[i]) < 1e-10
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    report("C1", f"identities hold on {n} random cases to 1e-10 "
                 f"({elapsed:.2f}s)")


# ---------------------------------------------------------------- C2

def test_criterion_2_perturbation_estimate_is_optimal(rng):
    start = time.perf_counter()
    n_random = 100_000
    for _ in range(100):
        d = 5
        x = rng.normal(size=d) * 2.5
        mu = rng.normal(size=d)
        eps = float(rng.uniform(0.2, 1.5))
        e_hat = g.estimate_perturbation(x, mu, eps)
        assert g.validate_attack(e_hat, eps)
        best = float(np.sum((x - mu - e_hat) ** 2))
        rand = rng.uniform(-eps, eps, size=(n_random, d))
        costs = np.sum((x - mu - rand) ** 2, axis=1)
        assert best <= costs.min(), \
            "a random feasible perturbation beat the projection"
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    report("C2", f"projection beat {n_random} random feasible vectors on "
                 f"100 instances ({elapsed:.1f}s)")


# ---------------------------------------------------------------- C3

def test_criterion_3_bound_variable_closed_forms():
    start = time.perf_counter()
    n = 10 ** 7
    block = 1 << 20
    z = np.concatenate([_k.standard_normals(SEED, i, min(block, n - i * block))
                        for i in range((n + block - 1) // block)])
    for t in (-3.0, -1.0, 0.0, 1.0, 3.0):
        for sigma in (0.5, 1.0, 2.0):
            noise = sigma * z
            shifted = t + noise
            y = np.where(noise >= -t, shifted * shifted, 0.0) - noise * noise
            closed = g.bound_variable_moments(t, sigma)
            mean = y.mean()
            var = y.var()
            se_mean = math.sqrt(closed.variance / n)
            m4 = np.mean((y - mean) ** 4)
            se_var = math.sqrt((m4 - closed.variance ** 2) / n)
            assert abs(mean - closed.mean) <= 3 * se_mean, \
                f"mean off at t={t}, sigma={sigma}: {mean} vs {closed.mean}"
            assert abs(var - closed.variance) <= 3 * se_var, \
                f"variance off at t={t}, sigma={sigma}"
    for sigma in (0.5, 1.0, 2.0):
        t = 8.0 * sigma
        high = g.bound_variable_moments(t, sigma)
        assert high.mean == pytest.approx(t * t, rel=0.01)
        assert high.variance == pytest.approx(4 * t * t * sigma * sigma,
                                              rel=0.01)
        low = g.bound_variable_moments(-t, sigma)
        assert low.mean == pytest.approx(-sigma ** 2, rel=0.01)
        assert low.variance == pytest.approx(2 * sigma ** 4, rel=0.01)
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    report("C3", f"closed-form moments match 1e7-draw Monte Carlo within "
                 f"3 SE on 15 (t, sigma) pairs; asymptotes within 1% "
                 f"({elapsed:.1f}s)")


# ---------------------------------------------------------------- C4

def test_criterion_4_pointwise_bound():
    # where the bound is tight (N < 0) the two sides are equal in exact
    # arithmetic and differ by rounding ulps in floats; violations are
    # counted beyond an absolute representation slack
    start = time.perf_counter()
    n = 10 ** 6
    slack = 1e-9
    combos = [(abs_mu, eps, sigma)
              for abs_mu in (0.3, 0.9, 1.1, 2.0)
              for eps in (0.5, 1.0)
              for sigma in (0.5, 1.0, 2.0)]
    for abs_mu, eps, sigma in combos:
        for c, y in g.sample_coordinate_costs(abs_mu, eps, eps, sigma, n,
                                              SEED):
            bad = np.count_nonzero(c < y - slack)
            assert bad == 0, (f"{bad} bound violations at "
                              f"(|mu|={abs_mu}, eps={eps}, sigma={sigma})")
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    report("C4", f"cost difference dominated its bound on {n} shared draws "
                 f"x {len(combos)} parameter points ({elapsed:.1f}s)")


# ---------------------------------------------------------------- C5

def test_criterion_5_oracle_chain(fig3_template):
    start = time.perf_counter()
    n = 10 ** 6
    inst = g.BinaryInstance(mu=np.ones(4), sigma=1.0, eps_des=1.0)
    est = g.run_trials(inst, g.AttackSpec("none"), "clean", n, SEED)
    oracle = g.q_function(2.0)
    assert est.ci_low <= oracle <= est.ci_high, \
        f"matched filter: CI [{est.ci_low}, {est.ci_high}] misses {oracle}"
    mid = time.perf_counter()
    assert mid - start < 30.0

    mu = g.build_two_level_template(fig3_template)
    inst = g.BinaryInstance(mu=mu, sigma=1.0, eps_des=1.0)
    est2 = g.run_trials(inst, g.AttackSpec("worst_case", eps_act=1.0),
                        "minimax", n, SEED)
    snr = g.minimax_snr(20, 0.3, 1.1, 1.0, 1.0, 1.0)
    assert snr == pytest.approx(0.06, rel=1e-12)
    oracle2 = g.q_function(math.sqrt(snr))  # 0.40325 (frozen in unit tests)
    assert est2.ci_low <= oracle2 <= est2.ci_high, \
        f"minimax: CI [{est2.ci_low}, {est2.ci_high}] misses {oracle2}"
    elapsed = time.perf_counter() - mid
    assert elapsed < 30.0
    report("C5", f"clean matches Q(||mu||/sigma)={oracle:.5f} and minimax "
                 f"matches Q(sqrt(0.06))={oracle2:.5f} within 95% CI at n=1e6")


# ---------------------------------------------------------------- C6

def test_criterion_6_vulnerability_threshold(fig2_instance):
    n = 10 ** 5
    thr = g.vulnerability_threshold(fig2_instance.mu)
    eps = 1.05 * thr
    assert eps <= fig2_instance.eps_des  # stays under the design budget here
    est = g.run_trials(fig2_instance, g.AttackSpec("worst_case", eps_act=eps),
                       "clean", n, SEED)
    floor = 0.5 - 3 * math.sqrt(0.25 / n)
    assert est.p_hat >= floor, \
        f"clean detector only failed at rate {est.p_hat} < {floor}"
    report("C6", f"clean detector beyond threshold {thr:.4f}: error rate "
                 f"{est.p_hat:.4f} >= {floor:.4f}")


# ---------------------------------------------------------------- C7

@pytest.fixture(scope="module")
def fig2_sweep(tmp_path_factory):
    cfg = cli.load_packaged_config("fig2")
    out = tmp_path_factory.mktemp("fig2") / "fig2.csv"
    start = time.perf_counter()
    from glrtlab.sweep import run_experiment
    run_experiment(cfg, out=str(out))
    elapsed = time.perf_counter() - start
    _, rows = read_rows(out)
    # one extra paired point at eps_act = 0.25 (the canned grid steps by 0.1)
    inst = cfg.instance(1.0)
    extra = g.run_trials_multi(inst, g.AttackSpec("worst_case", eps_act=0.25),
                               ["glrt", "minimax"], cfg.n_trials,
                               cfg.master_seed)
    return rows, extra, elapsed


def _by_detector(rows, eps_act):
    out = {}
    for row in rows:
        if abs(float(row["eps_act"]) - eps_act) < 1e-12:
            out[row["detector"]] = row
    return out


def test_criterion_7a_glrt_wins_weak_attacks(fig2_sweep):
    rows, extra, _ = fig2_sweep
    margins = []
    for eps_act in (0.0, 0.5):
        pair = _by_detector(rows, eps_act)
        pg, pm = float(pair["glrt"]["pe_mc"]), float(pair["minimax"]["pe_mc"])
        hw_g = (float(pair["glrt"]["ci_high"])
                - float(pair["glrt"]["ci_low"])) / 2.0
        hw_m = (float(pair["minimax"]["ci_high"])
                - float(pair["minimax"]["ci_low"])) / 2.0
        # CI half-width of the difference, treating the paired estimates
        # as independent (conservative)
        width = math.hypot(hw_g, hw_m)
        assert pm - pg > width, \
            f"no clear GLRT advantage at eps_act={eps_act}"
        margins.append(pm - pg)
    eg, em = extra
    assert em.p_hat - eg.p_hat > joint_ci_width(eg, em), \
        "no clear GLRT advantage at eps_act=0.25"
    report("C7a", f"GLRT beats minimax at eps_act in (0, 0.25, 0.5); "
                  f"margins {margins[0]:.4f}/{em.p_hat - eg.p_hat:.4f}/"
                  f"{margins[1]:.4f}")


def test_criterion_7b_minimax_optimal_at_design_point(fig2_sweep):
    rows, _, _ = fig2_sweep
    pair = _by_detector(rows, 1.0)
    pg, pm = float(pair["glrt"]["pe_mc"]), float(pair["minimax"]["pe_mc"])
    hw_g = (float(pair["glrt"]["ci_high"])
            - float(pair["glrt"]["ci_low"])) / 2.0
    hw_m = (float(pair["minimax"]["ci_high"])
            - float(pair["minimax"]["ci_low"])) / 2.0
    width = math.hypot(hw_g, hw_m)
    assert pg >= pm - 2 * width, \
        "GLRT beat the minimax rule at the design attack"
    report("C7b", f"at the design point GLRT {pg:.4f} >= minimax {pm:.4f} "
                  f"- 2 CI widths")


def test_criterion_7c_clt_accuracy_across_grid(fig2_sweep):
    rows, _, elapsed = fig2_sweep
    assert elapsed < 300.0, f"full sweep took {elapsed:.0f}s"
    worst_gap = 0.0
    worst_eps = None
    for row in rows:
        if row["detector"] != "glrt":
            continue
        gap = abs(float(row["pe_clt"]) - float(row["pe_mc"]))
        if gap > worst_gap:
            worst_gap, worst_eps = gap, float(row["eps_act"])
    assert worst_gap <= 0.01, (
        f"ACCEPTANCE C7c: FAIL - largest CLT-vs-Monte-Carlo gap "
        f"{worst_gap:.4f} at eps_act={worst_eps} exceeds 0.01; the true "
        f"approximation error of the Gaussian limit at d=20 is "
        f"0.0102 +- 0.0001 at eps_act=0.5 (pinned with 2e7 trials), so "
        f"the 0.01 tolerance is unattainable regardless of seed")
    report("C7c", f"CLT within 0.01 of Monte Carlo on the whole grid "
                  f"(worst {worst_gap:.4f})")


# ---------------------------------------------------------------- C8

@pytest.fixture(scope="module")
def fig3_rows(tmp_path_factory):
    cfg = cli.load_packaged_config("fig3")
    out = tmp_path_factory.mktemp("fig3") / "fig3.csv"
    start = time.perf_counter()
    from glrtlab.sweep import predict
    predict(cfg, out=str(out))
    elapsed = time.perf_counter() - start
    _, rows = read_rows(out)
    return cfg, rows, elapsed


def test_criterion_8_weak_attack_ordering(fig3_rows):
    cfg, rows, elapsed = fig3_rows
    assert elapsed < 60.0
    checked = 0
    for row in rows:
        if row["detector"] != "glrt":
            continue
        k = float(row["eps_act"]) / cfg.eps_des
        snr2 = (cfg.eps_des / float(row["sigma"])) ** 2
        if k > 0.5 + 1e-9 or snr2 > 2.0 + 1e-9:
            continue
        mate = [r for r in rows
                if r["detector"] == "minimax"
                and r["sigma"] == row["sigma"]
                and r["eps_act"] == row["eps_act"]][0]
        assert float(row["pe_clt"]) < float(mate["pe_clt"]), \
            f"ordering violated at k={k}, (eps/sigma)^2={snr2}"
        checked += 1
    assert checked >= 10
    report("C8-ordering", f"GLRT prediction below minimax at all {checked} "
                          f"high-noise weak-attack grid points")


def test_criterion_8_high_snr_convergence(fig3_rows):
    cfg, rows, _ = fig3_rows
    sigma_25 = cfg.eps_des / math.sqrt(25.0)
    pair = {}
    for row in rows:
        if (abs(float(row["sigma"]) - sigma_25) < 1e-12
                and abs(float(row["eps_act"]) - cfg.eps_des) < 1e-12):
            pair[row["detector"]] = float(row["pe_clt"])
    ratio = pair["glrt"] / pair["minimax"]
    assert 0.9 <= ratio <= 1.1, (
        f"ACCEPTANCE C8-convergence: FAIL - predicted-error ratio "
        f"GLRT/minimax = {ratio:.2f} at (eps_des/sigma)^2 = 25, k = 1 "
        f"(GLRT {pair['glrt']:.4f}, minimax {pair['minimax']:.4f}). "
        f"The weak-coordinate noise term shifts the Gaussian argument by "
        f"a Theta(1) amount in the exponent scale, so the probability "
        f"ratio grows with SNR; only the error exponents converge.")
    report("C8-convergence", f"prediction ratio {ratio:.3f} within 10% "
                             f"at (eps_des/sigma)^2 = 25")


# ---------------------------------------------------------------- C9

def test_criterion_9_low_noise_limit(fig2_instance):
    inst = g.BinaryInstance(mu=fig2_instance.mu, sigma=1e-6, eps_des=1.0)
    assert np.abs(inst.mu).max() > inst.eps_des
    est = g.run_trials(inst, g.AttackSpec("worst_case", eps_act=1.0), "glrt",
                       10 ** 5, SEED)
    assert est.errors == 0, f"{est.errors} errors in the low-noise limit"
    report("C9", "GLRT made 0 errors in 1e5 trials at sigma=1e-6 under the "
                 "full-budget attack")


# ---------------------------------------------------------------- C10

def test_criterion_10_reproducibility(tmp_path):
    cfg_text = (
        "experiment_id = repro\n"
        "d = 20\np = 0.1\na = 1.1\nb = 0.9\neps_des = 1.0\n"
        "sigma_grid = 1.0\nk_grid = 0.0, 1.0\n"
        "detectors = glrt, minimax\nn_trials = 150000\n"
        "master_seed = 424242\n")
    cfg_path = tmp_path / "repro.cfg"
    cfg_path.write_text(cfg_text)
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert cli.main(["run", str(cfg_path), "--out", str(a),
                     "--threads", "1"]) == 0
    assert cli.main(["run", str(cfg_path), "--out", str(b),
                     "--threads", "8"]) == 0
    assert a.read_bytes() == b.read_bytes(), \
        "worker count changed the output bytes"
    report("C10", "identical CSV bytes at 1 and 8 workers")
