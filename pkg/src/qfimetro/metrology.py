"""Precision bounds on phase estimation and a Monte Carlo estimation harness.

All bounds are on the single-shot error ``Δθ`` and use the square root of
the Fisher information returned by :mod:`qfimetro.qfi`.
"""
import enum
import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg
from .correlations import p_measure, p_measure_b, q_measure, q_measure_b
from .errors import DegenerateLikelihood, DimensionMismatch, NotSymmetric, OutOfRangeParameter, ZeroInformation
from .qfi import evolve, qfi_spectral, sld
from .qstate import DensityMatrix, as_matrix, permute_sites

ZERO_INFO_TOL = 1e-12
SYMMETRY_TOL = 1e-9
MLE_GRID_POINTS = 2001
MLE_HALF_WIDTH = math.pi / 2
LIKELIHOOD_TIE = 1.0


class Provenance(str, enum.Enum):
    SINGLE_SHOT_QCR = "single_shot_qcr"
    LOCAL = "local"
    GLOBAL = "global"
    NPARTY = "nparty"


@dataclass(frozen=True)
class PrecisionInterval:
    """``lower_bound_error <= Δθ <= upper_bound_error``; the upper end may be ``inf``."""

    lower_bound_error: float
    upper_bound_error: float
    provenance: Provenance

    def __post_init__(self):
        if not self.lower_bound_error > 0:
            raise ValueError("lower bound must be positive")
        if self.upper_bound_error < self.lower_bound_error:
            raise ValueError("interval endpoints are out of order")


@dataclass(frozen=True)
class EstimationRun:
    theta_true: float
    n_shots: int
    estimates: np.ndarray
    empirical_std: float
    qcr_floor: float
    std_error: float
    fisher: float
    degenerate_runs: int = 0

    @property
    def runs(self) -> int:
        return len(self.estimates)

    @property
    def ratio(self) -> float:
        return self.empirical_std / self.qcr_floor

    @property
    def sld_floor(self) -> float:
        """``1/√(shots · Tr(ρL²))``, the floor reachable by the SLD-basis measurement.

        ``Tr(ρL²) = 4F²``, so this sits at half of ``qcr_floor``.
        """
        return 0.5 * self.qcr_floor


def _inverse_root(f2: float) -> float:
    return math.inf if f2 <= ZERO_INFO_TOL else 1.0 / math.sqrt(f2)


def qcr_bound(rho, h) -> float:
    """Single-shot bound ``Δθ >= 1/F(ρ, H)``."""
    f2 = qfi_spectral(rho, h)
    if f2 <= ZERO_INFO_TOL:
        raise ZeroInformation(f"Fisher information {f2:.3e} is zero; the probe is useless")
    return 1.0 / math.sqrt(f2)


def precision_interval_local(rho: DensityMatrix) -> PrecisionInterval:
    """``1/P_A <= Δθ <= 1/Q_A`` for phases imprinted on the qubit party A.

    The upper end is ``inf`` when ``Q_A = 0`` (classical-quantum states).
    """
    p2 = p_measure(rho).value
    if p2 <= ZERO_INFO_TOL:
        raise ZeroInformation("no local Hamiltonian on A imprints any information")
    q2 = q_measure(rho).value
    return PrecisionInterval(1.0 / math.sqrt(p2), _inverse_root(q2), Provenance.LOCAL)


def precision_interval_global(rho: DensityMatrix) -> PrecisionInterval:
    """``1/(P_A + P_B) <= Δθ <= 1/|Q_A - Q_B|`` for two-qubit states.

    Symmetric states (``Q_A = Q_B``) get an infinite upper end.
    """
    if tuple(rho.dims) != (2, 2):
        raise DimensionMismatch(f"global interval needs a two-qubit state, got dims {rho.dims}")
    pa = math.sqrt(p_measure(rho).value)
    pb = math.sqrt(p_measure_b(rho).value)
    if (pa + pb) ** 2 <= ZERO_INFO_TOL:
        raise ZeroInformation("no local Hamiltonians imprint any information")
    qa = math.sqrt(q_measure(rho).value)
    qb = math.sqrt(q_measure_b(rho).value)
    return PrecisionInterval(1.0 / (pa + pb), _inverse_root((qa - qb) ** 2), Provenance.GLOBAL)


def check_site_symmetric(rho_n: DensityMatrix, tol: float = SYMMETRY_TOL) -> None:
    n = len(rho_n.dims)
    for i, j in itertools.combinations(range(n), 2):
        order = list(range(n))
        order[i], order[j] = j, i
        swapped = permute_sites(rho_n, order)
        if swapped.dims != rho_n.dims or linalg.frobenius_norm(swapped.matrix - rho_n.matrix) > tol:
            raise NotSymmetric(f"state changes under exchange of sites {i} and {j}")


def nparty_bound(rho_n: DensityMatrix) -> float:
    """``Δθ >= 1/(N P)`` for a site-symmetric N-qubit probe.

    ``P`` is the maximal local Fisher information of site 0 against the rest;
    symmetry makes the choice of site irrelevant.
    """
    if any(d != 2 for d in rho_n.dims):
        raise DimensionMismatch(f"every site must be a qubit, got dims {rho_n.dims}")
    check_site_symmetric(rho_n)
    p2 = p_measure(rho_n).value
    if p2 <= ZERO_INFO_TOL:
        raise ZeroInformation("single-site information vanishes")
    return 1.0 / (len(rho_n.dims) * math.sqrt(p2))


# ---------------------------------------------------------------------------
# Monte Carlo phase estimation

def _run_rng(seed: int, run: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox((int(seed) + run) & (2**64 - 1)))


def _likelihood_table(rho: np.ndarray, h: np.ndarray, povm: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """``P[g, k] = <e_k| e^{-iθ_g H} ρ e^{iθ_g H} |e_k>`` for the grid angles."""
    eig = linalg.hermitian_eig(h)
    w, energies = eig.vectors, eig.eigenvalues
    rho_h = w.conj().T @ rho @ w
    e_h = w.conj().T @ povm
    gaps = energies[:, None] - energies[None, :]
    phases = np.exp(-1j * grid[:, None, None] * gaps[None, :, :])
    probs = np.einsum("ak,gab,bk->gk", e_h.conj(), phases * rho_h[None], e_h).real
    return np.clip(probs, 0.0, 1.0)


def _refine(loglik: np.ndarray, grid: np.ndarray, i: int):
    """Parabolic vertex through grid point ``i`` and its neighbours."""
    if 0 < i < len(grid) - 1 and np.all(np.isfinite(loglik[i - 1:i + 2])):
        y0, y1, y2 = loglik[i - 1:i + 2]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            offset = float(np.clip(0.5 * (y0 - y2) / denom, -1.0, 1.0))
            peak = y1 - 0.25 * (y0 - y2) * offset
            return grid[i] + offset * (grid[1] - grid[0]), peak
    return grid[i], loglik[i]


def _mle(loglik: np.ndarray, grid: np.ndarray, reference: float) -> float:
    """Maximum-likelihood angle on the grid.

    Periodic encodings produce mirror-image peaks of equal height, so every
    local maximum is refined and those within ``LIKELIHOOD_TIE`` of the best
    are treated as tied; the tie goes to the peak nearest ``reference``.
    """
    padded = np.concatenate([[-np.inf], loglik, [-np.inf]])
    peaks = np.flatnonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:]) & np.isfinite(loglik))
    refined = [_refine(loglik, grid, int(i)) for i in peaks]
    best = max(v for _, v in refined)
    tied = [x for x, v in refined if v >= best - LIKELIHOOD_TIE]
    return float(min(tied, key=lambda x: abs(x - reference)))


def mc_estimate(rho, h, theta_true: float, shots_per_run: int, runs: int, seed: int) -> EstimationRun:
    """Simulate repeated maximum-likelihood estimation of an encoded phase.

    The probe ``e^{-iθH} ρ e^{iθH}`` is measured projectively in the
    eigenbasis of its SLD at ``θ = theta_true``; each run draws
    ``shots_per_run`` outcomes (run ``r`` uses seed ``seed + r``) and
    maximizes the likelihood over a 2001-point grid on ``(-π/2, π/2)`` with
    parabolic refinement. ``qcr_floor`` is ``1/(√shots · F)``.

    Runs whose likelihood is flat are counted in ``degenerate_runs`` and
    reported through a :class:`DegenerateLikelihood` warning.
    """
    m = as_matrix(rho)
    h = np.asarray(h, dtype=complex)
    if not -MLE_HALF_WIDTH < theta_true < MLE_HALF_WIDTH:
        raise OutOfRangeParameter(f"theta_true={theta_true} outside (-pi/2, pi/2)")
    if shots_per_run < 1 or runs < 2:
        raise ValueError("need at least one shot per run and two runs")
    f2 = qfi_spectral(m, h)
    if f2 <= ZERO_INFO_TOL:
        raise ZeroInformation(f"Fisher information {f2:.3e} is zero; nothing to estimate")

    rho_true = evolve(m, h, theta_true)
    povm = linalg.hermitian_eig(sld(rho_true, h)).vectors
    grid = np.linspace(-MLE_HALF_WIDTH, MLE_HALF_WIDTH, MLE_GRID_POINTS)
    table = _likelihood_table(m, h, povm, grid)
    p_true = np.clip(np.einsum("ak,ab,bk->k", povm.conj(), rho_true, povm).real, 0.0, None)
    p_true /= p_true.sum()
    with np.errstate(divide="ignore"):
        log_table = np.log(table)

    estimates = np.empty(runs)
    degenerate = 0
    for r in range(runs):
        counts = _run_rng(seed, r).multinomial(shots_per_run, p_true)
        used = counts > 0
        loglik = log_table[:, used] @ counts[used]
        finite = loglik[np.isfinite(loglik)]
        if finite.size == 0 or np.ptp(finite) <= 1e-12 * max(abs(finite.max()), 1.0):
            degenerate += 1
            estimates[r] = theta_true
            continue
        estimates[r] = _mle(loglik, grid, theta_true)
    if degenerate:
        warnings.warn(f"{degenerate} of {runs} runs had a flat likelihood", DegenerateLikelihood, stacklevel=2)

    std = float(np.std(estimates, ddof=1))
    return EstimationRun(
        theta_true=float(theta_true),
        n_shots=int(shots_per_run),
        estimates=estimates,
        empirical_std=std,
        qcr_floor=1.0 / (math.sqrt(shots_per_run) * math.sqrt(f2)),
        std_error=std / math.sqrt(2.0 * (runs - 1)),
        fisher=float(f2),
        degenerate_runs=degenerate,
    )
