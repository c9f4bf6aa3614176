"""Correlation measures built on local phase encoding of a qubit party.

For a ``2 x N`` state and a unit Bloch Hamiltonian ``H_A = (r·σ) ⊗ I`` the
local Fisher information is the quadratic form ``1 - rᵀ W r``, so its minimum
(``q_measure``) and maximum (``p_measure``) over directions are set by the
extreme eigenvalues of the 3x3 matrix ``W``. The Hilbert-Schmidt and
Hellinger discords are minima of analogous forms with different spectral
kernels.
"""
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np

from . import linalg
from .errors import ANotQubit, DimensionMismatch
from .qfi import gram, spectrum
from .qstate import DensityMatrix, pauli, swap_parties

CLASSICALITY_TOL = 1e-8
SCHMIDT_RANK_TOL = 1e-10


class Extremum(NamedTuple):
    value: float
    bloch: np.ndarray


class OperatorSchmidt(NamedTuple):
    coefficients: np.ndarray
    a_operators: np.ndarray
    b_operators: np.ndarray


@dataclass(frozen=True)
class CorrelationReport:
    q_squared: float
    p_squared: float
    d_hs_squared: float
    d_h_squared: float
    minimizing_bloch: np.ndarray
    maximizing_bloch: np.ndarray
    classical_quantum: bool
    classicality_tol: float


def _qubit_a(rho: DensityMatrix) -> DensityMatrix:
    if rho.dims[0] != 2:
        raise ANotQubit(f"party A must be a qubit, got dims {rho.dims}")
    if len(rho.dims) == 1:
        return DensityMatrix(rho.matrix, (2, 1))
    return rho.bipartition()


def _local_paulis(rho: DensityMatrix) -> List[np.ndarray]:
    eye = np.eye(rho.dims[1])
    return [np.kron(pauli(a), eye) for a in "xyz"]


def _bloch_form(rho: DensityMatrix, kind: str) -> np.ndarray:
    rho = _qubit_a(rho)
    return gram(spectrum(rho), _local_paulis(rho), kind)


def _canonical(vec: np.ndarray) -> np.ndarray:
    # Fix the sign so the first non-negligible component is positive.
    vec = np.asarray(vec, dtype=float)
    idx = np.flatnonzero(np.abs(vec) > 1e-12)
    if idx.size and vec[idx[0]] < 0:
        vec = -vec
    return vec / np.linalg.norm(vec)


def w_matrix(rho: DensityMatrix) -> np.ndarray:
    """``W_ij = Σ_{m,n} 2λ_mλ_n/(λ_m+λ_n) Re(<m|σ_i⊗I|n><n|σ_j⊗I|m>)``.

    The sum runs over every pair with ``λ_m + λ_n > 0``, diagonal included;
    that is what makes ``F²(ρ, (r·σ)⊗I) = 1 - rᵀWr`` hold for every state.
    """
    return _bloch_form(rho, "w")


def q_measure(rho: DensityMatrix) -> Extremum:
    """Minimal local Fisher information over unit Bloch Hamiltonians on A."""
    eig = linalg.real_symmetric_eig(w_matrix(rho))
    q2 = min(max(1.0 - eig.eigenvalues[-1], 0.0), 1.0)
    return Extremum(float(q2), _canonical(eig.vectors[:, -1]))


def p_measure(rho: DensityMatrix) -> Extremum:
    """Maximal local Fisher information over unit Bloch Hamiltonians on A."""
    eig = linalg.real_symmetric_eig(w_matrix(rho))
    p2 = min(max(1.0 - eig.eigenvalues[0], 0.0), 1.0)
    return Extremum(float(p2), _canonical(eig.vectors[:, 0]))


def q_measure_b(rho: DensityMatrix) -> Extremum:
    """Same measure with the roles of the two parties exchanged."""
    return q_measure(swap_parties(rho.bipartition()))


def p_measure_b(rho: DensityMatrix) -> Extremum:
    return p_measure(swap_parties(rho.bipartition()))


def hs_discord(rho: DensityMatrix) -> float:
    """Minimum over directions of ``½ Σ (λ_m - λ_n)² |<m|H_A|n>|²``."""
    eig = linalg.real_symmetric_eig(_bloch_form(rho, "hs"))
    return max(float(eig.eigenvalues[0]), 0.0)


def hellinger_discord(rho: DensityMatrix) -> float:
    """Minimum over directions of ``½ Σ (√λ_m - √λ_n)² |<m|H_A|n>|²``."""
    eig = linalg.real_symmetric_eig(_bloch_form(rho, "hellinger"))
    return max(float(eig.eigenvalues[0]), 0.0)


# ---------------------------------------------------------------------------
# operator-Schmidt decomposition

def hermitian_basis(d: int) -> np.ndarray:
    """Trace-orthonormal Hermitian basis of ``d x d`` matrices.

    Ordered as ``I/√d``, then symmetric and antisymmetric off-diagonal
    generators pair by pair, then the traceless diagonal ones. For ``d = 2``
    this is ``(I, σ_x, σ_y, σ_z)/√2``.
    """
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            anti = np.zeros((d, d), dtype=complex)
            anti[j, k] = -1j / np.sqrt(2)
            anti[k, j] = 1j / np.sqrt(2)
            basis += [sym, anti]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        basis.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return np.stack(basis)


def correlation_matrix(rho: DensityMatrix) -> np.ndarray:
    """Real ``M² x N²`` matrix ``Γ_mn = Tr(ρ A_m ⊗ B_n)`` over :func:`hermitian_basis`."""
    if len(rho.dims) != 2:
        raise DimensionMismatch(f"bipartite dims required, got {rho.dims}")
    da, db = rho.dims
    a = hermitian_basis(da)
    b = hermitian_basis(db)
    t = rho.matrix.reshape(da, db, da, db)
    # Tr(ρ A⊗B) = Σ ρ_{(ik),(jl)} A_{ji} B_{lk}
    return np.einsum("ikjl,mji,nlk->mn", t, a, b).real


def operator_schmidt(rho: DensityMatrix) -> OperatorSchmidt:
    """``ρ = Σ_k c_k S_k ⊗ R_k`` from the SVD of the correlation matrix.

    ``S_k`` and ``R_k`` are Hermitian and trace-orthonormal on each side.
    All ``min(M², N²)`` terms are returned with coefficients descending.
    """
    gamma = correlation_matrix(rho)
    u, k, v = linalg.svd_real(gamma)
    da, db = rho.dims
    s_ops = np.einsum("mk,mij->kij", u, hermitian_basis(da))
    r_ops = np.einsum("nk,nij->kij", v, hermitian_basis(db))
    return OperatorSchmidt(k, s_ops, r_ops)


def schmidt_rank(decomp: OperatorSchmidt) -> int:
    k = decomp.coefficients
    if not k.size or k[0] == 0:
        return 0
    return int(np.sum(k > SCHMIDT_RANK_TOL * k[0]))


def max_a_commutator(rho: DensityMatrix) -> float:
    """Largest ``|[S_m, S_n]|_F`` over the A-side Schmidt operators in use."""
    decomp = operator_schmidt(rho)
    s = decomp.a_operators[: schmidt_rank(decomp)]
    worst = 0.0
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            worst = max(worst, linalg.frobenius_norm(s[i] @ s[j] - s[j] @ s[i]))
    return worst


def classicality_check(rho: DensityMatrix, tol: float = CLASSICALITY_TOL) -> bool:
    """True when the A-side Schmidt operators pairwise commute (a CQ state)."""
    return max_a_commutator(rho.bipartition()) <= tol * linalg.frobenius_norm(rho.matrix)


def correlation_report(rho: DensityMatrix, tol: float = CLASSICALITY_TOL) -> CorrelationReport:
    w = linalg.real_symmetric_eig(w_matrix(rho))
    q2 = min(max(1.0 - w.eigenvalues[-1], 0.0), 1.0)
    p2 = min(max(1.0 - w.eigenvalues[0], 0.0), 1.0)
    return CorrelationReport(
        q_squared=float(q2),
        p_squared=float(p2),
        d_hs_squared=hs_discord(rho),
        d_h_squared=hellinger_discord(rho),
        minimizing_bloch=_canonical(w.vectors[:, -1]),
        maximizing_bloch=_canonical(w.vectors[:, 0]),
        classical_quantum=classicality_check(rho, tol),
        classicality_tol=tol,
    )


def bloch_extrema(rho: DensityMatrix, kind: str = "qfi") -> Tuple[float, float]:
    """(min, max) over unit directions of the ``kind`` form, straight from its matrix."""
    eig = linalg.real_symmetric_eig(_bloch_form(rho, kind))
    return float(eig.eigenvalues[0]), float(eig.eigenvalues[-1])
