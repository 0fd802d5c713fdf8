"""Quick oracle-equivalence and thermal-fixed-point checks for ``phononcool selftest``."""

from __future__ import annotations

import numpy as np

from . import oracle, reduced
from .model import ModelParams, dress
from .statistics import phonon_stats

FIXTURE = ModelParams(omega_ph=2.0, delta=0.0, rabi=1.0, g=0.3, gamma=0.05, gamma_c=0.01, kappa=0.5, nbar=1.0)


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def check_thermal(nbar: float = 1.0, tail_tol: float = 1e-12):
    p = FIXTURE.with_(g=0.0, nbar=nbar)
    worst = 0.0
    for secular in (True, False):
        d = dress(p, secular)
        st = phonon_stats(reduced.solve_adaptive(d, p, tail_tol, 4).populations)
        worst = max(worst, abs(st.mean_n - nbar), abs(st.g2 - 2.0))
    return worst < 1e-8, f"max |<n>-nbar|, |g2-2| = {worst:.2e}"


def check_projection(seed: int, samples: int = 20, n_max: int = 6):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for secular in (True, False):
        p = FIXTURE.with_(delta=1.0, g=0.1)
        d = dress(p, secular)
        gen = reduced.assemble(d, p, n_max)
        liouv = oracle.build_dressed_liouvillian(d, p, n_max)
        for _ in range(samples):
            rho = random_density_matrix(rng, liouv.dim)
            lhs = oracle.six_variables(liouv.apply(rho), n_max)
            rhs = gen.apply(oracle.six_variables(rho, n_max))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst < 1e-10, f"max projection mismatch = {worst:.2e}"


def check_null_space(n_max: int = 20):
    worst = 0.0
    for delta in np.linspace(-2.0, 2.0, 5):
        p = FIXTURE.with_(delta=float(delta))
        for secular in (True, False):
            d = dress(p, secular)
            ss = reduced.solve_steady(reduced.assemble(d, p, n_max), d)
            ref = oracle.steady_state_null(oracle.build_dressed_liouvillian(d, p, n_max))
            worst = max(worst, float(np.max(np.abs(ss.populations - ref.phonon_populations()))))
    return worst < 1e-8, f"max |P_n - P_n(oracle)| at equal truncation = {worst:.2e}"


def run_selftest(seed: int = 0) -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in (
        ("thermal fixed point", check_thermal),
        ("projection identity", lambda: check_projection(seed)),
        ("oracle null space", check_null_space),
    ):
        ok, detail = fn()
        out.append((name, ok, detail))
    return out
