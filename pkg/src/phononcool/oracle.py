"""Brute-force references on the full dot x phonon Hilbert space.

Hilbert index convention: dot index major, phonon index minor, i.e. state
``|i, n>`` sits at ``i * (n_max + 1) + n``. In the dressed basis ``i = 0`` is
``|+>`` and ``i = 1`` is ``|->``; in the bare (lab-frame) basis ``i = 0`` is
``|e>`` and ``i = 1`` is ``|g>``.

Superoperators act on row-major vectorized density matrices,
``vec(rho) = rho.reshape(-1)``, for which ``vec(A rho B) = (A kron B^T) vec(rho)``.
They are stored sparse; "dense" refers to the full, unreduced state space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import DressedParams, ModelParams
from .statistics import PhononStats, phonon_stats

DENSE_N_CAP = 64
GUARD_BAND = 5
GAP_TOL = 1e-10


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class DenseLiouvillian:
    matrix: sp.csr_matrix
    n_max: int
    basis: str

    @property
    def dim(self) -> int:
        """Hilbert-space dimension; the superoperator is ``dim**2`` square."""
        return 2 * (self.n_max + 1)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ rho.reshape(-1)).reshape(self.dim, self.dim)


@dataclass(frozen=True)
class NullSteadyState:
    rho: np.ndarray
    residual: float
    gap: float
    n_max: int

    def phonon_populations(self) -> np.ndarray:
        return phonon_populations(self.rho, self.n_max)

    def stats(self) -> PhononStats:
        return phonon_stats(self.phonon_populations())


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: list
    trace_drift: float

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def ladder(n_max: int) -> sp.csr_matrix:
    """Truncated annihilation operator on ``n_max + 1`` Fock levels."""
    return sp.diags(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1, format="csr")


def _check_n_max(n_max: int) -> int:
    if int(n_max) != n_max or n_max < 2:
        raise ValueError(f"n_max must be an integer >= 2, got {n_max!r}")
    if n_max > DENSE_N_CAP:
        raise OracleError(f"oracle refuses n_max={n_max} > {DENSE_N_CAP}")
    return int(n_max)


def _spre(a):
    return sp.kron(a, sp.identity(a.shape[0]), format="csr")


def _spost(a):
    return sp.kron(sp.identity(a.shape[0]), a.T, format="csr")


def lindblad_superoperator(hamiltonian, dissipators) -> sp.csr_matrix:
    """Generator of ``-i[H, rho] + sum_k rate_k L(O_k)`` with ``L(O) = 2 O rho O^+ - O^+O rho - rho O^+O``."""
    hamiltonian = sp.csr_matrix(hamiltonian, dtype=complex)
    out = -1j * (_spre(hamiltonian) - _spost(hamiltonian))
    for rate, op in dissipators:
        if rate == 0:
            continue
        op = sp.csr_matrix(op, dtype=complex)
        opd = op.conj().T.tocsr()
        ndo = opd @ op
        out = out + rate * (2.0 * sp.kron(op, opd.T) - _spre(ndo) - _spost(ndo))
    return out.tocsr()


def _dot_ops(n_max: int):
    eye = sp.identity(n_max + 1, format="csr")
    b = sp.kron(sp.identity(2), ladder(n_max), format="csr")

    def dot(m):
        return sp.kron(sp.csr_matrix(np.asarray(m, dtype=complex)), eye, format="csr")

    return b, dot


def build_dressed_liouvillian(dressed: DressedParams, params: ModelParams, n_max: int) -> DenseLiouvillian:
    """Full superoperator of the dressed-state master equation."""
    n_max = _check_n_max(n_max)
    b, dot = _dot_ops(n_max)
    bd = b.conj().T.tocsr()
    num = bd @ b
    r_up = dot([[0, 1], [0, 0]])  # |+><-|
    r_dn = dot([[0, 0], [1, 0]])  # |-><+|
    r_z = dot([[1, 0], [0, -1]])
    h = (
        dressed.effective_detuning * num
        - dressed.delta_bar * r_z
        + dressed.beta * (num @ r_z)
        - dressed.coupling * (bd @ r_dn + r_up @ b)
    )
    diss = [
        (params.kappa * (1.0 + params.nbar), b),
        (params.kappa * params.nbar, bd),
        (dressed.gamma_plus, r_dn),
        (dressed.gamma_minus, r_up),
        (dressed.gamma_0, r_z),
    ]
    return DenseLiouvillian(lindblad_superoperator(h, diss), n_max, basis="dressed(+,-) x fock")


def build_labframe_rotating_liouvillian(params: ModelParams, n_max: int) -> DenseLiouvillian:
    """Undressed model in the frame rotating at the laser frequency.

    ``H = Delta S_z + omega_ph b^+b + Omega (S+ + S-) + g S+S- (b^+ + b)`` with
    ``gamma L(S-) + gamma_c L(S_z)`` and the thermal phonon damping. Only the
    dot is transformed to the rotating frame, so the phonon operators keep
    their lab form. No secular approximation is made anywhere.
    """
    n_max = _check_n_max(n_max)
    b, dot = _dot_ops(n_max)
    bd = b.conj().T.tocsr()
    s_up = dot([[0, 1], [0, 0]])  # |e><g|
    s_dn = dot([[0, 0], [1, 0]])
    s_z = dot([[0.5, 0], [0, -0.5]])
    excited = dot([[1, 0], [0, 0]])
    h = (
        params.delta * s_z
        + params.omega_ph * (bd @ b)
        + params.rabi * (s_up + s_dn)
        + params.g * (excited @ (bd + b))
    )
    diss = [
        (params.kappa * (1.0 + params.nbar), b),
        (params.kappa * params.nbar, bd),
        (params.gamma, s_dn),
        (params.gamma_c, s_z),
    ]
    return DenseLiouvillian(lindblad_superoperator(h, diss), n_max, basis="bare(e,g) x fock")


def phonon_populations(rho: np.ndarray, n_max: int) -> np.ndarray:
    """Diagonal of the phonon reduced density matrix."""
    d = np.real(np.diag(rho)).reshape(2, n_max + 1)
    return d.sum(axis=0)


def six_variables(rho: np.ndarray, n_max: int) -> np.ndarray:
    """Fock diagonals of the six dressed-block combinations, shape ``(6, n_max+1)``.

    Computed with explicit operator products on the full matrix so that it
    shares no index bookkeeping with the reduced generator.
    """
    m = n_max + 1
    b = ladder(n_max).toarray()
    bd = b.T
    pp, pm = rho[:m, :m], rho[:m, m:]
    mp, mm = rho[m:, :m], rho[m:, m:]
    combos = [
        pp + mm,
        pp - mm,
        bd @ pm - mp @ b,
        bd @ pm + mp @ b,
        pm @ bd - b @ mp,
        pm @ bd + b @ mp,
    ]
    return np.array([np.diag(c) for c in combos])


def _trace_row(dim: int) -> np.ndarray:
    row = np.zeros(dim * dim)
    row[:: dim + 1] = 1.0
    return row


def steady_state_null(liouv: DenseLiouvillian, gap_tol: float = GAP_TOL) -> NullSteadyState:
    """Unit-trace null vector of the full Liouvillian.

    The first diagonal row is replaced by the trace functional and the system
    solved by sparse LU. The spectral gap is the magnitude of the second
    eigenvalue closest to zero, from shift-invert Arnoldi.
    """
    dim = liouv.dim
    a = liouv.matrix.tolil()
    a[0, :] = _trace_row(dim)
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    try:
        x = spla.splu(a.tocsc()).solve(rhs)
    except RuntimeError as exc:
        raise OracleError(f"Liouvillian null space not isolated: {exc}") from exc
    rho = x.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    residual = float(np.max(np.abs(liouv.matrix @ rho.reshape(-1))))

    scale = max(1.0, float(abs(liouv.matrix).max()))
    vals = spla.eigs(liouv.matrix.tocsc(), k=3, sigma=-1e-3 * scale, which="LM", return_eigenvectors=False)
    mags = np.sort(np.abs(vals))
    gap = float(mags[1])
    if gap < gap_tol:
        raise OracleError(f"degenerate null space: gap {gap:.3g} < {gap_tol:g}")
    return NullSteadyState(rho=rho, residual=residual, gap=gap, n_max=liouv.n_max)


def max_rate(liouv: DenseLiouvillian) -> float:
    """Gershgorin-type bound on the Liouvillian spectral radius."""
    return float(abs(liouv.matrix).sum(axis=1).max())


def propagate(
    liouv: DenseLiouvillian,
    rho0: np.ndarray,
    t_final: float,
    dt: float,
    store_every: int = 0,
    max_trace_drift: float = 1e-6,
) -> Trajectory:
    """Fixed-step classical RK4 integration of ``drho/dt = L rho``.

    ``store_every=0`` keeps only the initial and final states.
    """
    if dt <= 0 or t_final < 0:
        raise ValueError("dt must be positive and t_final non-negative")
    steps = int(np.ceil(t_final / dt - 1e-12))
    h = t_final / steps if steps else 0.0
    a = liouv.matrix
    y = np.asarray(rho0, dtype=complex).reshape(-1).copy()
    diag = slice(None, None, liouv.dim + 1)
    tr0 = y[diag].sum()
    times, states = [0.0], [y.reshape(liouv.dim, liouv.dim).copy()]
    drift = 0.0
    for step in range(1, steps + 1):
        k1 = a @ y
        k2 = a @ (y + 0.5 * h * k1)
        k3 = a @ (y + 0.5 * h * k2)
        k4 = a @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = abs(y[diag].sum() - tr0)
        if drift > max_trace_drift or not np.isfinite(drift):
            raise OracleError(
                f"trace drift {drift:.3g} at t={step * h:.6g}; reduce dt below {0.1 / max_rate(liouv):.3g}"
            )
        if step == steps or (store_every and step % store_every == 0):
            times.append(step * h)
            states.append(y.reshape(liouv.dim, liouv.dim).copy())
    return Trajectory(times=np.array(times), states=states, trace_drift=float(drift))


def thermal_state(liouv_n_max: int, nbar: float, dot_state=((0.0, 0.0), (0.0, 1.0))) -> np.ndarray:
    """Product of a dot density matrix and the thermal phonon state."""
    n = np.arange(liouv_n_max + 1)
    p = nbar**n / (1.0 + nbar) ** (n + 1) if nbar > 0 else (n == 0).astype(float)
    p = p / p.sum()
    return np.kron(np.asarray(dot_state, dtype=complex), np.diag(p))


def dressed_stats(dressed: DressedParams, params: ModelParams, n_max: int) -> PhononStats:
    """Phonon statistics from the dressed-Liouvillian null space."""
    return steady_state_null(build_dressed_liouvillian(dressed, params, n_max)).stats()


def labframe_stats(params: ModelParams, n_max: int) -> PhononStats:
    """Phonon statistics from the lab-frame (rotating at the laser) null space."""
    return steady_state_null(build_labframe_rotating_liouvillian(params, n_max)).stats()
