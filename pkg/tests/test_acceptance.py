"""Acceptance suite: one test per criterion, each printing a PASS line.

The two expensive criteria (engine/oracle equivalence on 200 workloads,
qualitative behavior on a 5000-job heavy-tailed trace with 100 error draws
per point) fan out over a process pool; everything else is sequential.
Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS lines.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

from fluidsched import cli, errmodel, metrics, trace
from fluidsched.engine import run, run_discretized
from fluidsched.errmodel import ErrorModel, estimate
from fluidsched.schedulers import SCHEDULER_NAMES
from fluidsched.trace import CalibrationConfig, HeavyTail, JobSpec, calibrate, size_jobs

from helpers import completions, random_workloads, wl, with_errors

WORKERS = max(1, os.cpu_count() or 1)


def _ok(message: str) -> None:
    print(f"ACCEPTANCE PASS: {message}")


def mean_sojourn(result) -> float:
    return sum(j.sojourn for j in result.jobs) / len(result.jobs)


# ---------------------------------------------------------------------------
# hand-traced fixed workloads


def test_c01_hand_traced_policy_oracles():
    two_jobs = wl((0.0, 10.0, "A"), (2.0, 3.0, "B"))
    expected = {
        "FIFO": (10.0, 13.0),
        "PS": (13.0, 8.0),
        "SRPT": (13.0, 5.0),
        "FSP+FIFO": (13.0, 5.0),
        "FSP+PS": (13.0, 5.0),
    }
    for name, (t_a, t_b) in expected.items():
        done = completions(run(two_jobs, name))
        assert done["A"] == pytest.approx(t_a, abs=1e-9), name
        assert done["B"] == pytest.approx(t_b, abs=1e-9), name
    done = completions(run(wl((0.0, 3.0, "A"), (2.0, 3.0, "B")), "LAS"))
    assert done["A"] == pytest.approx(6.0, abs=1e-9)
    assert done["B"] == pytest.approx(6.0, abs=1e-9)
    _ok("hand-traced completions exact for all six policies")


# ---------------------------------------------------------------------------
# engine versus fixed-step oracle

_C02_CORPUS: list = []


def _c02_corpus():
    # up to 50 heavy-tailed jobs; sizes >= 1 keep the oracle's step count sane
    rng = np.random.default_rng(20260809)
    out = []
    for _ in range(200):
        n = 3 + int(47 * rng.random() ** 2)
        sizes = 1.0 + rng.pareto(2.0, n)
        rate = n / (1.1 * float(sizes.sum()))
        times = np.cumsum(rng.exponential(1.0 / rate, n))
        out.append(
            [
                errmodel.EstimatedJob(float(t), float(s), float(s), f"j{i}")
                for i, (t, s) in enumerate(zip(times, sizes))
            ]
        )
    return out


def _c02_check(index: int) -> float:
    worst = 0.0
    workload = _C02_CORPUS[index]
    for sigma in (0.0, 0.5):
        jobs = with_errors(workload, sigma, seed=5000 + index) if sigma else workload
        dt = 1e-3 * min(j.true_size for j in jobs)
        for name in SCHEDULER_NAMES:
            exact = completions(run(jobs, name))
            stepped = completions(run_discretized(jobs, name, dt))
            for label, t in exact.items():
                deviation = abs(stepped[label] - t)
                assert deviation <= 2 * dt, (index, name, label, deviation / dt)
                worst = max(worst, deviation / dt)
    return worst


def test_c02_engine_oracle_equivalence():
    global _C02_CORPUS
    _C02_CORPUS = _c02_corpus()
    sizes_seen = max(len(w) for w in _C02_CORPUS)
    assert sizes_seen <= 50
    if WORKERS > 1:
        with ProcessPoolExecutor(max_workers=WORKERS) as pool:
            worst = max(pool.map(_c02_check, range(200), chunksize=8))
    else:
        worst = max(map(_c02_check, range(200)))
    _ok(
        "run and run_discretized agree within 2*dt on 200 workloads, "
        f"every policy, sigma in {{0, 0.5}} (worst deviation {worst:.3g}*dt)"
    )


# ---------------------------------------------------------------------------
# sigma = 0 guarantees on a shared 500-workload corpus


@pytest.fixture(scope="module")
def corpus500():
    return random_workloads(500, max_jobs=30, seed=7071, shape=1.9)


@pytest.fixture(scope="module")
def results500(corpus500):
    return [
        {name: run(workload, name) for name in SCHEDULER_NAMES}
        for workload in corpus500
    ]


def test_c03_srpt_minimality(results500):
    for by_policy in results500:
        best = mean_sojourn(by_policy["SRPT"])
        for name, result in by_policy.items():
            assert best <= mean_sojourn(result) + 1e-9, name
    _ok("SRPT mean sojourn minimal across all policies on 500 workloads")


def test_c04_fsp_fairness_and_no_lateness(results500):
    for by_policy in results500:
        ps_done = completions(by_policy["PS"])
        for variant in ("FSP+FIFO", "FSP+PS"):
            for job in by_policy[variant].jobs:
                assert job.completed_at <= ps_done[job.label] + 1e-9
                assert job.became_late_at is None
    _ok("error-free FSP completes every job no later than PS, none late")


def test_c05_fsp_variant_equivalence(results500):
    for by_policy in results500:
        fifo_jobs = by_policy["FSP+FIFO"].jobs
        ps_jobs = by_policy["FSP+PS"].jobs
        for a, b in zip(fifo_jobs, ps_jobs):
            assert abs(a.completed_at - b.completed_at) <= 1e-9
    _ok("error-free FSP+FIFO and FSP+PS results identical on 500 workloads")


def test_c06_late_policy_divergence():
    workload = wl((0.0, 10.0, 1.0, "A"), (0.0, 10.0, 1.0, "B"))
    fifo_done = completions(run(workload, "FSP+FIFO"))
    ps_done = completions(run(workload, "FSP+PS"))
    assert fifo_done["A"] == pytest.approx(10.0, abs=1e-9)
    assert fifo_done["B"] == pytest.approx(20.0, abs=1e-9)
    assert ps_done["A"] == pytest.approx(18.0, abs=1e-9)
    assert ps_done["B"] == pytest.approx(20.0, abs=1e-9)
    _ok("under-estimated twins: FSP+FIFO (10, 20) versus FSP+PS (18, 20)")


# ---------------------------------------------------------------------------
# error model and calibration


def test_c07_error_model_statistics():
    jobs = [trace.SizedJob(float(i), 1.0, f"j{i}") for i in range(100_000)]
    out = estimate(jobs, ErrorModel(sigma=0.5, seed=42))
    log_ratios = np.log([j.est_size / j.true_size for j in out])
    std = float(log_ratios.std(ddof=1))
    med = float(math.exp(np.median(log_ratios)))
    assert 0.49 <= std <= 0.51
    assert 0.97 <= med <= 1.03
    exact = estimate(jobs[:1000], ErrorModel(sigma=0.0, seed=42))
    assert all(j.est_size == j.true_size for j in exact)
    _ok(f"1e5 draws at sigma=0.5: std(ln ratio)={std:.4f}, median={med:.4f}; "
        "sigma=0 exact")


def test_c08_calibration():
    fixture = [JobSpec(0.0, 1.0, 1.0, 1.0, "a"), JobSpec(100.0, 1.0, 1.0, 1.0, "b")]
    cal = calibrate(fixture, CalibrationConfig(load=0.9, dn_ratio=4.0))
    assert cal.d == pytest.approx(20.0, rel=1e-12)
    assert cal.n == pytest.approx(5.0, rel=1e-12)

    rng = np.random.default_rng(99)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        specs = [
            JobSpec(
                float(t),
                float(rng.uniform(0, 1e9)),
                float(rng.uniform(0, 1e9)),
                float(rng.uniform(0, 1e9)),
                f"j{i}",
            )
            for i, t in enumerate(np.sort(rng.uniform(0, 1e5, n)))
        ]
        load = float(rng.uniform(0.05, 3.0))
        ratio = float(rng.uniform(0.1, 50.0))
        cal = calibrate(specs, CalibrationConfig(load, ratio))
        assert cal.d / cal.n == pytest.approx(ratio, rel=1e-12)
        total = sum(j.true_size for j in size_jobs(specs, cal))
        assert total / (cal.te - cal.t0) == pytest.approx(load, rel=1e-9)
    _ok("calibration solves (d, n) = (20, 5) exactly and random traces "
        "meet the load and ratio identities")


# ---------------------------------------------------------------------------
# qualitative reproduction on a desk-scale heavy-tailed trace


@pytest.fixture(scope="module")
def heavy_sweep():
    """5000 Pareto(1.5) jobs at load 0.9, d/n 4; 100 error draws per point."""
    sized = trace.gen_synthetic(5000, 1.0, HeavyTail(1.5, 1.0), seed=37)
    source = cli.WorkloadSource(kind="sized", sized=tuple(sized))
    reference = cli.ExperimentConfig(
        source=source,
        schedulers=("FIFO", "PS"),
        sigma_grid=(0.0,),
        load_grid=(0.9,),
        dn_grid=(4.0,),
        runs_per_point=1,
        base_seed=42,
        parallelism=WORKERS,
    )
    noisy = cli.ExperimentConfig(
        source=source,
        schedulers=("FSP+FIFO", "FSP+PS"),
        sigma_grid=(0.5, 1.0),
        load_grid=(0.9,),
        dn_grid=(4.0,),
        runs_per_point=100,
        base_seed=42,
        parallelism=WORKERS,
    )
    return cli.sweep_sigma(reference) + cli.sweep_sigma(noisy)


def _sojourns(summaries, scheduler, sigma):
    return [
        s.mean_sojourn
        for s in summaries
        if s.scheduler_name == scheduler and s.sigma == sigma
    ]


def test_c09_qualitative_reproduction(heavy_sweep):
    (fifo,) = _sojourns(heavy_sweep, "FIFO", 0.0)
    (ps,) = _sojourns(heavy_sweep, "PS", 0.0)
    fsp_ps_05 = _sojourns(heavy_sweep, "FSP+PS", 0.5)
    fsp_ps_10 = _sojourns(heavy_sweep, "FSP+PS", 1.0)
    fsp_fifo_10 = _sojourns(heavy_sweep, "FSP+FIFO", 1.0)
    assert len(fsp_ps_05) == len(fsp_ps_10) == len(fsp_fifo_10) == 100

    assert fifo >= 10 * ps
    assert float(np.median(fsp_ps_05)) < ps
    assert float(np.median(fsp_ps_10)) < ps
    assert max(fsp_fifo_10) >= max(fsp_ps_10)
    _ok(
        "heavy-tailed trace: FIFO/PS ratio "
        f"{fifo / ps:.0f}; median FSP+PS at sigma 0.5/1.0 = "
        f"{np.median(fsp_ps_05):.2f}/{np.median(fsp_ps_10):.2f} < PS {ps:.2f}; "
        f"worst FSP+FIFO run {max(fsp_fifo_10):.1f} >= worst FSP+PS run "
        f"{max(fsp_ps_10):.2f} at sigma 1.0"
    )


# ---------------------------------------------------------------------------
# determinism of the experiment CLI


def test_c10_sweep_determinism(tmp_path):
    argv = [
        "sweep-sigma",
        "--synthetic", "pareto:n=40,rate=1,shape=1.5,scale=1,seed=6",
        "--sigmas", "0,0.5",
        "--runs", "5",
        "--schedulers", "SRPT,FSP+PS,LAS",
    ]
    blobs = []
    for name, jobs in (("a.csv", "1"), ("b.csv", "1"), ("c.csv", "2")):
        out = tmp_path / name
        assert cli.main(argv + ["--jobs", jobs, "--out", str(out)]) == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]
    _ok("identical sweep configs give byte-identical CSV, sequential and parallel")


def test_c11_simulator_has_no_plotting_dependency():
    import fluidsched

    package_dir = os.path.dirname(fluidsched.__file__)
    for name in os.listdir(package_dir):
        if name.endswith(".py"):
            with open(os.path.join(package_dir, name), encoding="utf-8") as handle:
                text = handle.read()
            assert "matplotlib" not in text, name
    _ok("simulator package is free of plotting imports")
