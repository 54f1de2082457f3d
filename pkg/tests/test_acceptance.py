"""Acceptance suite: one test per release criterion.

Each test prints a single PASS line with the measured figures (run with
``pytest tests/test_acceptance.py -v -s``) and enforces both the stated
tolerance and the wall-clock budget.
"""

import time

import numpy as np
import pytest

import plcap
from plcap.capacity import capacity, capacity_p2_oracle, path_capacity_closed_form
from plcap.checks import (
    GRADE_CERTIFIED,
    GRADE_VIOLATED,
    LevelProfile,
    MonotoneProfile,
    capacity_levels_check,
    hardy_check,
    interval_capacity_identity,
    layer_cake_check,
    sweep,
    two_sided_bound_check,
)
from plcap.cli import main
from plcap.geometry_io import gen_model, mesh_disk, mesh_to_graph
from plcap.seeding import spawn_rng
from plcap.spectral import sobolev_constant
from plcap.capacity import truncation_invariance_check

from conftest import path_graph, random_connected_graph


def report(name, elapsed, budget, detail):
    print(f"ACCEPTANCE {name}: PASS in {elapsed:.1f}s (budget {budget}s) -- {detail}")


def test_01_capacity_optimizer_matches_linear_oracle():
    budget, t0 = 30.0, time.time()
    rng = spawn_rng(42, "accept", 1)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(5, 51))
        g = random_connected_graph(rng, n)
        pick = rng.choice(n, size=4, replace=False)
        a, b = tuple(int(v) for v in pick[:2]), tuple(int(v) for v in pick[2:])
        opt = capacity(g, a, b, 2, method="optimizer").value
        lin = capacity_p2_oracle(g, a, b).value
        worst = max(worst, abs(opt - lin) / lin)
    elapsed = time.time() - t0
    assert worst < 1e-6
    assert elapsed < budget
    report("01 capacity-oracle-agreement", elapsed, budget, f"50 graphs, worst rel {worst:.2e}")


def test_02_series_law_on_paths():
    budget, t0 = 30.0, time.time()
    rng = spawn_rng(42, "accept", 2)
    worst = 0.0
    for _ in range(50):
        ne = int(rng.integers(2, 21))
        w = rng.uniform(0.3, 3.0, size=ne)
        g = path_graph(w)
        for p in (1.5, 2.0, 3.0, 4.0):
            got = capacity(g, [0], [ne], p, method="optimizer").value
            want = path_capacity_closed_form(w, p)
            worst = max(worst, abs(got - want) / want)
    elapsed = time.time() - t0
    assert worst < 1e-6
    assert elapsed < budget
    report("02 series-law", elapsed, budget, f"50 paths x 4 exponents, worst rel {worst:.2e}")


def test_03_interval_capacity_identity():
    budget, t0 = 10.0, time.time()
    densities = [lambda t: 1.0, lambda t: t + 0.1, lambda t: 4.0, lambda t: float(np.exp(t))]
    worst = 0.0
    for g in densities:
        for p in (1.5, 2.0, 3.0):
            worst = max(worst, interval_capacity_identity(g, p, 1000).gap)
    elapsed = time.time() - t0
    assert worst < 1e-3
    assert elapsed < budget
    report("03 interval-identity", elapsed, budget, f"4 densities x 3 exponents at N=1000, worst gap {worst:.2e}")


def test_04_truncation_invariance():
    budget, t0 = 60.0, time.time()
    rng = spawn_rng(42, "accept", 4)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(4, 16))
        g = random_connected_graph(rng, n, extra=0.25)
        p = float(rng.choice([1.5, 2.0, 2.5, 3.0, 4.0]))
        pick = rng.choice(n, size=4, replace=False)
        rep = truncation_invariance_check(g, pick[:2], pick[2:], p)
        worst = max(worst, rep.rel_gap)
    elapsed = time.time() - t0
    assert worst < 1e-6
    assert elapsed < budget
    report("04 truncation-invariance", elapsed, budget, f"50 instances, worst rel gap {worst:.2e}")


def test_05_capacity_level_integral_bound():
    budget, t0 = 300.0, time.time()
    rng = spawn_rng(42, "accept", 5)
    worst_ratio = 0.0
    violations = 0
    for _ in range(100):
        n = int(rng.integers(3, 13))
        g = random_connected_graph(rng, n)
        u = rng.standard_normal(n)
        for p in (1.5, 2.0, 3.0):
            rep = capacity_levels_check(g, u, p)
            worst_ratio = max(worst_ratio, rep.ratio)
            violations += 0 if rep.ok else 1
    elapsed = time.time() - t0
    assert violations == 0
    assert elapsed < budget
    report("05 capacity-level-integral", elapsed, budget,
           f"100 draws x 3 exponents, 0 violations, max ratio {worst_ratio:.4f}")


def _random_level_profile(rng):
    m = int(rng.integers(1, 6))
    t = np.sort(rng.uniform(0.05, 3.0, size=m)) + 0.01 * np.arange(m)
    a = np.sort(rng.uniform(0.0, 2.0, size=m))[::-1]
    return LevelProfile(t, a)


def _random_monotone_profile(rng):
    m = int(rng.integers(2, 7))
    grid = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 2.0, size=m)) + 0.01 * np.arange(1, m + 1)])
    vals = np.concatenate([[0.0], np.cumsum(rng.uniform(0.0, 1.0, size=m))])
    return MonotoneProfile(grid, vals)


def test_06_layer_cake_and_hardy_property_suites():
    budget, t0 = 30.0, time.time()
    rng = spawn_rng(42, "accept", 6)
    lc_viol = hardy_viol = 0
    for _ in range(500):
        prof = _random_level_profile(rng)
        p = float(rng.choice([1.5, 2.0, 3.0]))
        alpha = float(rng.choice([1.0, 1.5, 2.0]))
        lc_viol += 0 if layer_cake_check(prof, p, alpha).ok else 1
    for _ in range(500):
        prof = _random_monotone_profile(rng)
        p = float(rng.choice([1.5, 2.0, 3.0]))
        hardy_viol += 0 if hardy_check(prof, p).ok else 1
    eq_worst = 0.0
    for p in (1.5, 2.0, 3.0):
        for alpha in (1.0, 1.5, 2.0):
            for t1 in (0.5, 1.0, 2.0):
                rep = layer_cake_check(LevelProfile([t1], [1.3]), p, alpha)
                eq_worst = max(eq_worst, abs(rep.lhs - rep.rhs))
    elapsed = time.time() - t0
    assert lc_viol == 0 and hardy_viol == 0
    assert eq_worst < 1e-12
    assert elapsed < budget
    report("06 layer-cake+hardy", elapsed, budget,
           f"500+500 profiles, 0 violations, constant-profile equality {eq_worst:.1e}")


def test_07_quadratic_two_sided_bounds_certified():
    budget, t0 = 600.0, time.time()
    rng = spawn_rng(42, "accept", 7)
    violated = not_certified = 0
    for _ in range(100):
        n = int(rng.integers(3, 9))
        g = random_connected_graph(rng, n, boundary_size=int(rng.integers(2, min(6, n + 1))))
        for mode in ("steklov", "neumann"):
            rep = two_sided_bound_check(g, 2.0, 1.0, mode)
            if GRADE_VIOLATED in (rep.lower_ok, rep.upper_ok):
                violated += 1
            if (rep.lower_ok, rep.upper_ok) != (GRADE_CERTIFIED, GRADE_CERTIFIED):
                not_certified += 1
    tight_worst = 0.0
    for g in (gen_model("edge"), gen_model("path", n=3)):
        rep = two_sided_bound_check(g, 2.0, 1.0, "steklov")
        tight_worst = max(tight_worst, abs(rep.slack_upper))
    elapsed = time.time() - t0
    assert violated == 0 and not_certified == 0
    assert tight_worst < 1e-10
    assert elapsed < budget
    report("07 quadratic-bounds-harness", elapsed, budget,
           f"100 graphs x 2 modes all certified, tight-upper slack {tight_worst:.1e}")


def test_08_general_exponent_two_sided_bounds():
    budget, t0 = 900.0, time.time()
    rng = spawn_rng(42, "accept", 8)
    instances = [gen_model("edge"), gen_model("path", n=3), gen_model("path", n=4),
                 gen_model("cycle", n=4), gen_model("star", n=4)]
    for _ in range(5):
        n = int(rng.integers(4, 7))
        instances.append(random_connected_graph(rng, n, boundary_size=int(rng.integers(2, 5))))
    rows = upper_not_certified = lower_below_consistent = violated = 0
    for g in instances:
        for mode in ("steklov", "neumann"):
            for cell in sweep(g, [1.5, 3.0], [1.0, 2.0], mode, seed=8):
                assert cell.error is None, cell.error
                rep = cell.report
                rows += 1
                if rep.gamma_mode == "exact-enumeration" and rep.upper_ok != GRADE_CERTIFIED:
                    upper_not_certified += 1
                if rep.lower_ok == GRADE_VIOLATED:
                    lower_below_consistent += 1
                if GRADE_VIOLATED in (rep.lower_ok, rep.upper_ok):
                    violated += 1
    elapsed = time.time() - t0
    assert upper_not_certified == 0
    assert lower_below_consistent == 0
    assert violated == 0
    assert elapsed < budget
    report("08 general-exponent-harness", elapsed, budget,
           f"{rows} cells: all upper certified (exact gamma), lower >= consistent, 0 violated")


def test_09_descent_matches_exact_eigenvalues():
    budget, t0 = 300.0, time.time()
    rng = spawn_rng(42, "accept", 9)
    worst = 0.0
    for k in range(30):
        n = int(rng.integers(4, 31))
        g = random_connected_graph(rng, n, boundary_size=max(2, int(rng.integers(2, n // 2 + 1))))
        mode = "steklov" if k % 2 == 0 else "neumann"
        exact = sobolev_constant(g, 2, 1, mode).value
        desc = sobolev_constant(g, 2, 1, mode, method="descent", starts=8, seed=900 + k).value
        worst = max(worst, abs(desc - exact) / exact)
    elapsed = time.time() - t0
    assert worst < 1e-4
    assert elapsed < budget
    report("09 spectral-oracle-agreement", elapsed, budget, f"30 graphs, worst rel {worst:.2e}")


def test_10_disk_mesh_steklov_converges_to_one():
    budget, t0 = 120.0, time.time()
    sigmas = []
    for level in (1, 2, 3):
        g = mesh_to_graph(mesh_disk(level))
        sigmas.append(sobolev_constant(g, 2, 1, "steklov").value)
    errors = [abs(s - 1.0) for s in sigmas]
    elapsed = time.time() - t0
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.05
    assert elapsed < budget
    report("10 disk-continuum-crosscheck", elapsed, budget,
           f"sigma by level {['%.4f' % s for s in sigmas]}, level-3 error {errors[2]:.2%}")


def test_11_cli_byte_determinism(tmp_path):
    t0 = time.time()
    commands = {
        "gen": ["gen", "--gen", "random_gnp:10,0.4", "--seed", "11"],
        "cap": ["cap", "--gen", "path:5", "--p", "3", "--a", "0", "--b", "4"],
        "eig": ["eig", "--gen", "cycle:5", "--p", "3", "--mode", "neumann", "--seed", "11"],
        "isocap": ["isocap", "--gen", "path:4", "--p", "2", "--mode", "neumann"],
        "verify": ["verify", "--gen", "path:4", "--p", "1.5", "--alpha", "2",
                   "--mode", "steklov", "--seed", "11"],
        "sweep": ["sweep", "--gen", "cycle:5", "--p", "1.5,2,3", "--alpha", "1",
                  "--mode", "neumann", "--seed", "11"],
        "lemma": ["lemma", "--seed", "11", "--grid", "50", "--trials", "10"],
    }
    for name, args in commands.items():
        outputs = []
        for run_idx in range(3):
            out = tmp_path / f"{name}-{run_idx}.out"
            assert main(args + ["--out", str(out)]) == 0, name
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2], f"{name} output not byte-identical"
    elapsed = time.time() - t0
    report("11 cli-determinism", elapsed, 600.0, "7 commands x 3 runs byte-identical")


def test_cli_sweep_example_grid():
    # 3x3 grid sweep: 3 rows, no violations, deterministic bytes
    budget, t0 = 600.0, time.time()
    g = gen_model("grid2d", rows=3, cols=3)
    cells = sweep(g, [1.5, 2.0, 3.0], [1.0], "neumann", seed=1)
    assert len(cells) == 3
    for cell in cells:
        assert cell.error is None
        assert GRADE_VIOLATED not in (cell.report.lower_ok, cell.report.upper_ok)
    elapsed = time.time() - t0
    assert elapsed < budget
    report("cli-example grid sweep", elapsed, budget, "3 rows, no violations")
