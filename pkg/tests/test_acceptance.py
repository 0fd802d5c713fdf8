"""Exit criteria, one test per criterion, each at its pinned tolerance and time budget."""

import math
import time

import numpy as np
import pytest

from phononcool import oracle, reduced, sweep
from phononcool.model import ModelParams, dress
from phononcool.statistics import phonon_stats

from conftest import random_density_matrix

FIXTURE = ModelParams(omega_ph=2.0, delta=0.0, rabi=1.0, g=0.3, gamma=0.05, gamma_c=0.01, kappa=0.5, nbar=1.0)
MODES = (("secular", True), ("beyond_secular", False))


def moderate_sweep(**kw):
    base = dict(params=FIXTURE, sweep_axis="delta", sweep_lo=-3.0, sweep_hi=3.0, sweep_points=121)
    base.update(kw)
    return sweep.RunConfig(**base)


def test_1_thermal_fixed_point(report):
    t0 = time.perf_counter()
    p = FIXTURE.with_(g=0.0, nbar=1.0)
    err_n = err_g2 = 0.0
    for _, secular in MODES:
        st = phonon_stats(reduced.solve_adaptive(dress(p, secular), p, tail_tol=1e-12, n_start=8).populations)
        err_n = max(err_n, abs(st.mean_n - 1.0))
        err_g2 = max(err_g2, abs(st.g2 - 2.0))
    elapsed = time.perf_counter() - t0
    ok = err_n < 1e-9 and err_g2 < 1e-8 and elapsed < 1.0
    report("1 thermal fixed point", ok, f"|<n>-1|={err_n:.1e} |g2-2|={err_g2:.1e} in {elapsed:.2f}s")
    assert ok


def test_2_oracle_equivalence(report):
    t0 = time.perf_counter()
    n_max = 20
    guard = n_max + oracle.GUARD_BAND
    worst = worst_same = 0.0
    for delta in np.linspace(-2.0, 2.0, 5):
        p = FIXTURE.with_(delta=float(delta))
        for _, secular in MODES:
            d = dress(p, secular)
            ss = reduced.solve_steady(reduced.assemble(d, p, n_max), d)
            ref = oracle.steady_state_null(oracle.build_dressed_liouvillian(d, p, guard)).phonon_populations()
            worst = max(worst, float(np.max(np.abs(ss.populations - ref[: n_max + 1]))))
            same = oracle.steady_state_null(oracle.build_dressed_liouvillian(d, p, n_max)).phonon_populations()
            worst_same = max(worst_same, float(np.max(np.abs(ss.populations - same))))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 30.0
    report(
        "2 oracle equivalence (n_max=20 vs oracle 25)",
        ok,
        f"max |dP_n|={worst:.2e} (tol 1e-8); at equal truncation {worst_same:.1e}; {elapsed:.1f}s",
    )
    assert ok


def test_3_closure(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(12345)
    n_max = 6
    m = n_max + 1
    fock = np.arange(2 * m) % m
    worst_diag = worst_full = 0.0
    p = FIXTURE.with_(delta=1.0, g=0.1)
    for _, secular in MODES:
        d = dress(p, secular)
        gen = reduced.assemble(d, p, n_max)
        liouv = oracle.build_dressed_liouvillian(d, p, n_max)
        for _ in range(100):
            rho = random_density_matrix(rng, liouv.dim)
            diag = np.where(fock[:, None] == fock[None, :], rho, 0)
            diag /= np.trace(diag).real
            for state, tag in ((diag, "diag"), (rho, "full")):
                lhs = oracle.six_variables(liouv.apply(state), n_max)
                rhs = gen.apply(oracle.six_variables(state, n_max))
                err = float(np.max(np.abs(lhs - rhs)))
                if tag == "diag":
                    worst_diag = max(worst_diag, err)
                else:
                    worst_full = max(worst_full, err)
    elapsed = time.perf_counter() - t0
    ok = worst_diag < 1e-10 and worst_full < 1e-10 and elapsed < 30.0
    report("3 closure / projection identity", ok, f"Fock-diagonal {worst_diag:.1e}, general {worst_full:.1e}; {elapsed:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def cooling_sweep():
    result = sweep.run(moderate_sweep())
    return result, sweep.compare_modes(result, FIXTURE.nbar)


def test_4a_cooling_for_positive_detuning(report, cooling_sweep):
    result, _ = cooling_sweep
    x = result.column("secular", "sweep_value")
    mins = {m: float(np.min(result.column(m, "mean_n")[x > 0])) for m, _ in MODES}
    ok = all(v < FIXTURE.nbar for v in mins.values())
    report("4a min_{D>0} <n> < nbar", ok, ", ".join(f"{m}={v:.6f}" for m, v in mins.items()))
    assert ok


def test_4b_heating_for_negative_detuning(report, cooling_sweep):
    result, _ = cooling_sweep
    x = result.column("secular", "sweep_value")
    maxes = {m: float(np.max(result.column(m, "mean_n")[x < 0])) for m, _ in MODES}
    ok = all(v > FIXTURE.nbar for v in maxes.values())
    report("4b some <n> > nbar for D<0", ok, ", ".join(f"{m}={v:.6f}" for m, v in maxes.items()))
    assert ok


def test_4c_argmin_shift(report, cooling_sweep):
    result, rep = cooling_sweep
    x = result.column("secular", "sweep_value")
    spacing = float(x[1] - x[0])
    shift = abs(rep.argmin_shift)
    # exceed the spacing by more than float noise in the grid values
    ok = shift > spacing * (1 + 1e-9)
    report(
        "4c argmin shift > grid spacing",
        ok,
        f"secular {rep.secular.argmin:.3f}, beyond {rep.beyond_secular.argmin:.3f}, shift {shift:.3f} vs spacing {spacing:.3f}",
    )
    assert ok


def test_4d_super_poissonian_while_cooling(report, cooling_sweep):
    _, rep = cooling_sweep
    vals = {"secular": rep.secular.max_g2_cooling, "beyond_secular": rep.beyond_secular.max_g2_cooling}
    ok = all(v is not None and v > 2.0 for v in vals.values())
    report("4d g2(0) > 2 in cooling region", ok, ", ".join(f"{m}={v:.6f}" for m, v in vals.items()))
    assert ok


def test_5_secular_limit_scaling(report):
    t0 = time.perf_counter()
    p0 = FIXTURE.with_(delta=1.0)
    omega_bar = math.sqrt(p0.rabi**2 + (p0.delta / 2) ** 2)
    ratios = np.array([1e-3, 1e-2])
    diffs = []
    for r in ratios:
        p = p0.with_(g=float(r * omega_bar))
        n = {}
        for name, secular in MODES:
            d = dress(p, secular)
            n[name] = phonon_stats(reduced.solve_steady(reduced.assemble(d, p, 64), d).populations).mean_n
        diffs.append(abs(n["beyond_secular"] - n["secular"]))
    slope = float(np.polyfit(np.log(ratios), np.log(diffs), 1)[0])
    elapsed = time.perf_counter() - t0
    ok = abs(slope - 2.0) <= 0.2 and elapsed < 10.0
    report("5 secular-limit slope 2 +- 0.2", ok, f"slope={slope:.3f} (diffs {diffs[0]:.2e}, {diffs[1]:.2e}); {elapsed:.2f}s")
    assert ok


def test_6_two_method_oracle(report):
    t0 = time.perf_counter()
    p = FIXTURE.with_(delta=1.4)
    n_max = 10
    liouv = oracle.build_dressed_liouvillian(dress(p, False), p, n_max)
    ns = oracle.steady_state_null(liouv)
    traj = oracle.propagate(liouv, oracle.thermal_state(n_max, p.nbar), 25.0 / ns.gap, 0.1 / oracle.max_rate(liouv))
    n_prop = phonon_stats(oracle.phonon_populations(traj.final, n_max)).mean_n
    n_null = ns.stats().mean_n
    elapsed = time.perf_counter() - t0
    ok = abs(n_prop - n_null) < 1e-6 and elapsed < 60.0
    report("6 null space vs propagation", ok, f"|d<n>|={abs(n_prop - n_null):.1e}; {elapsed:.1f}s")
    assert ok


def test_7_determinism(report, tmp_path):
    t0 = time.perf_counter()
    config = moderate_sweep()
    paths = [tmp_path / f"{tag}.csv" for tag in ("serial1", "serial2", "parallel")]
    sweep.run(config, output=paths[0], workers=1)
    sweep.run(config, output=paths[1], workers=1)
    sweep.run(config, output=paths[2], workers=4)
    blobs = [p.read_bytes() for p in paths]
    elapsed = time.perf_counter() - t0
    ok = blobs[0] == blobs[1] == blobs[2] and len(blobs[0].splitlines()) == 243 and elapsed < 60.0
    report("7 byte-identical sweep output", ok, f"{len(blobs[0])} bytes x3; {elapsed:.1f}s")
    assert ok
