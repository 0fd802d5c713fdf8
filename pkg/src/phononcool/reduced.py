"""Reduced steady-state solver on the six projected variables.

The dressed master equation (Hamiltonian in the frame rotating at
``omega_ph - 2 Omega_bar``, hbar = 1)::

    H = d b^dag b - delta_bar R_z + beta b^dag b R_z - G (b^dag R- + R+ b)
    d = omega_ph - 2 Omega_bar,   G = g sin(2 theta) / 2

    drho/dt = -i[H, rho] + kappa (1 + nbar) L(b) + kappa nbar L(b^dag)
              + gamma_+ L(R-) + gamma_- L(R+) + gamma_0 L(R_z)
    L(O) = 2 O rho O^dag - O^dag O rho - rho O^dag O

is projected onto the dot blocks ``rho_ij = <i|rho|j>`` and recombined into

    rho1 = rho_++ + rho_--            rho2 = rho_++ - rho_--
    rho3 = b^dag rho_+- - rho_-+ b    rho4 = b^dag rho_+- + rho_-+ b
    rho5 = rho_+- b^dag - b rho_-+    rho6 = rho_+- b^dag + b rho_-+

Taking Fock diagonals ``P_n^(i) = <n|rho_i|n>`` gives, with
``kd = kappa (1 + nbar)``, ``ku = kappa nbar`` and the population damping
``D_n[x] = 2 kd (n+1) x_{n+1} - 2 kd n x_n + 2 ku n x_{n-1} - 2 ku (n+1) x_n``::

    dP1_n = -iG (P5_n - P3_n) + D_n[P1]
    dP2_n = -iG (P5_n + P3_n) - 2 (gp - gm) P1_n - 2 (gp + gm) P2_n + D_n[P2]
    dP5_k = -i w_k P6_k - Gam P5_k + iG (k+1)(P1_{k+1} - P2_{k+1} - P1_k - P2_k)
            + 2 kd (k+1) P5_{k+1} + 2 ku (k+1) P5_{k-1}
            - [kd (2k+1) + ku (2k+3)] P5_k
    dP6_k = -i w_k P5_k - Gam P6_k + (same phonon damping on P6)
    w_k = beta (2k+1) - d - 2 delta_bar,   Gam = gp + gm + 4 g0

and ``P3_n = P5_{n-1}``, ``P4_n = P6_{n-1}`` (``P3_0 = P4_0 = 0``), because
both sides are ``sqrt(n) <n-1|rho_+-|n>`` and its ``rho_-+`` partner. The
P3/P4 rows are the P5/P6 rows shifted by one Fock level. In the P1/P2 rows
``P5_n`` is written as ``P3_{n+1}`` so the population rows telescope and
conserve probability column by column.

The excitation number ``b^dag b + R_++`` is conserved by H and the
dissipators are phase covariant, so the steady state lives entirely in the
sector these variables span and the diagonal projection loses nothing.

All coefficients use the truncated ladder operators of an ``n_max + 1``
level phonon space, so the reduced generator reproduces a Liouvillian
truncated at the same ``n_max`` exactly, boundary rows included.
"""

from __future__ import annotations

import logging
import warnings as _warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import DressedParams, ModelParams
from .statistics import moments

log = logging.getLogger(__name__)

NVAR = 6
TAIL_WARN = 1e-6
DEFAULT_N_CAP = 4096


class SingularGeneratorError(RuntimeError):
    """Steady-state system is singular beyond the expected rank-one deficiency."""

    def __init__(self, message: str, condition: Optional[float] = None):
        super().__init__(message if condition is None else f"{message} (cond ~ {condition:.3g})")
        self.condition = condition


class TruncationError(RuntimeError):
    """Adaptive truncation reached its cap without converging."""


def index(i: int, n: int) -> int:
    """Flat index of ``P_n^(i)``, ``i`` in 1..6. Fock-major, so the matrix is banded."""
    return NVAR * n + (i - 1)


@dataclass(frozen=True)
class ReducedGenerator:
    matrix: sp.csr_matrix
    n_max: int

    @property
    def dim(self) -> int:
        return NVAR * (self.n_max + 1)

    @staticmethod
    def index(i: int, n: int) -> int:
        return index(i, n)

    def pack(self, p: np.ndarray) -> np.ndarray:
        """Flatten a ``(6, n_max+1)`` array of variables into generator order."""
        return np.asarray(p).T.reshape(-1)

    def unpack(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x).reshape(self.n_max + 1, NVAR).T

    def apply(self, p: np.ndarray) -> np.ndarray:
        """Time derivative of the variables ``p`` (shape ``(6, n_max+1)``)."""
        return self.unpack(self.matrix @ self.pack(p))


@dataclass(frozen=True)
class SteadyState:
    p: np.ndarray
    residual: float
    tail_mass: float
    dressed: DressedParams
    n_max: int
    warnings: tuple[str, ...] = field(default=())

    @property
    def populations(self) -> np.ndarray:
        """``P_n^(1)``, the phonon number distribution."""
        return self.p[0].real.copy()


def assemble(dressed: DressedParams, params: ModelParams, n_max: int) -> ReducedGenerator:
    """Build the sparse generator of the projected variables."""
    if int(n_max) != n_max or n_max < 2:
        raise ValueError(f"n_max must be an integer >= 2, got {n_max!r}")
    n_max = int(n_max)
    top = n_max

    kd = params.kappa * (1.0 + params.nbar)
    ku = params.kappa * params.nbar
    G = dressed.coupling
    gp, gm = dressed.gamma_plus, dressed.gamma_minus
    gam = dressed.coherence_decay
    detuning = dressed.effective_detuning
    beta, delta_bar = dressed.beta, dressed.delta_bar
    # keeps the identically-zero boundary coherences (P3_0, P4_0, P5_top, P6_top) decaying
    pinned = -(gam + params.kappa)

    rows, cols, vals = [], [], []

    def put(i, n, j, m, value):
        if value != 0:
            rows.append(index(i, n))
            cols.append(index(j, m))
            vals.append(value)

    def population_damping(i, n):
        up = n + 1 if n < top else 0
        put(i, n, i, n, -2.0 * kd * n - 2.0 * ku * up)
        if n < top:
            put(i, n, i, n + 1, 2.0 * kd * (n + 1))
        if n > 0:
            put(i, n, i, n - 1, 2.0 * ku * n)

    def coherence_rows(re, im, shift, k):
        # P5/P6 at Fock index k, or P3/P4 at k + 1 when shift == 1
        n = k + shift
        w = beta * (2 * k + 1) - detuning - 2.0 * delta_bar
        upper = k + 2 if k + 1 < top else 0
        diag = -gam - kd * (2 * k + 1) - ku * (k + 1 + upper)
        for a, b in ((re, im), (im, re)):
            put(a, n, b, n, -1j * w)
            put(a, n, a, n, diag)
            if k + 1 <= top - 1:
                put(a, n, a, n + 1, 2.0 * kd * (k + 1))
            if k >= 1:
                put(a, n, a, n - 1, 2.0 * ku * (k + 1))
        f = 1j * G * (k + 1)
        put(re, n, 1, k + 1, f)
        put(re, n, 2, k + 1, -f)
        put(re, n, 1, k, -f)
        put(re, n, 2, k, -f)

    for n in range(n_max + 1):
        population_damping(1, n)
        population_damping(2, n)
        put(2, n, 1, n, 2.0 * (gm - gp))
        put(2, n, 2, n, -2.0 * (gp + gm))
        if n < top:
            put(1, n, 3, n + 1, -1j * G)
            put(2, n, 3, n + 1, -1j * G)
        if n > 0:
            put(1, n, 3, n, 1j * G)
            put(2, n, 3, n, -1j * G)

    for k in range(n_max):
        coherence_rows(3, 4, 1, k)
        coherence_rows(5, 6, 0, k)
    for i, n in ((3, 0), (4, 0), (5, top), (6, top)):
        put(i, n, i, n, pinned)

    dim = NVAR * (n_max + 1)
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=complex).tocsr()
    matrix.sum_duplicates()
    return ReducedGenerator(matrix=matrix, n_max=n_max)


def _condition_estimate(matrix) -> Optional[float]:
    if matrix.shape[0] > 3000:
        return None
    with np.errstate(all="ignore"):
        return float(np.linalg.cond(matrix.toarray()))


def solve_steady(
    gen: ReducedGenerator,
    dressed: DressedParams,
    constraint_row: int = 0,
    tail_warn: float = TAIL_WARN,
) -> SteadyState:
    """Normalized null vector of ``gen``.

    The population row ``P_{constraint_row}^(1)`` is redundant (the population
    rows sum to zero) and is replaced by ``sum_n P_n^(1) = 1``.
    """
    n_max = gen.n_max
    if not 0 <= constraint_row <= n_max:
        raise ValueError("constraint_row must be a Fock index in 0..n_max")
    a = gen.matrix.tolil()
    r = index(1, constraint_row)
    a.rows[r] = [index(1, n) for n in range(n_max + 1)]
    a.data[r] = [1.0] * (n_max + 1)
    a = a.tocsc()
    rhs = np.zeros(gen.dim, dtype=complex)
    rhs[r] = 1.0

    try:
        lu = spla.splu(a)
    except RuntimeError as exc:
        raise SingularGeneratorError(f"steady-state system singular: {exc}", _condition_estimate(a)) from exc
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SingularGeneratorError("steady-state solve produced non-finite values", _condition_estimate(a))

    p = gen.unpack(x).copy()
    residual = float(np.max(np.abs(gen.matrix @ x)))
    tail = float(p[0, -1].real)
    notes = list(dressed.warnings)
    if tail > tail_warn:
        notes.append(f"truncation tail P_n_max = {tail:.3g} exceeds {tail_warn:g}")
    return SteadyState(p=p, residual=residual, tail_mass=tail, dressed=dressed, n_max=n_max, warnings=tuple(notes))


def solve_adaptive(
    dressed: DressedParams,
    params: ModelParams,
    tail_tol: float = 1e-10,
    n_start: int = 8,
    n_cap: int = DEFAULT_N_CAP,
) -> SteadyState:
    """Double ``n_max`` from ``n_start`` until the tail and ``<n>`` have converged.

    Converged means ``P_n_max < tail_tol`` and ``<n>`` moved by less than
    ``tail_tol * (1 + <n>)`` since the previous (half-size) truncation.
    """
    if not 0 < tail_tol < 1:
        raise ValueError("tail_tol must lie in (0, 1)")
    if n_start < 2:
        raise ValueError("n_start must be >= 2")
    n_max = int(n_start)
    previous = None
    while True:
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore", spla.MatrixRankWarning)
            ss = solve_steady(assemble(dressed, params, n_max), dressed, tail_warn=tail_tol)
        mean_n = moments(ss.populations)[0]
        if (
            previous is not None
            and ss.tail_mass < tail_tol
            and abs(mean_n - previous) < tail_tol * (1.0 + mean_n)
        ):
            return ss
        log.debug("n_max=%d tail=%.3g <n>=%.12g", n_max, ss.tail_mass, mean_n)
        previous = mean_n
        if 2 * n_max > n_cap:
            raise TruncationError(
                f"no convergence up to n_max={n_max} (cap {n_cap}); tail={ss.tail_mass:.3g}, "
                f"<n>={mean_n:.6g}: heating or divergent regime"
            )
        n_max *= 2
