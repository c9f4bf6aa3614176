"""Quantum Fisher information under unitary phase encoding.

Normalization: for ``ρ = Σ λ_m |m><m|``

    F²(ρ, H) = ½ Σ_{m≠n} (λ_m - λ_n)² / (λ_m + λ_n) |<m|H|n>|²

which reduces to the variance ``<H²> - <H>²`` on pure states. Pairs with
``λ_m + λ_n <= EPS_DEN`` are excluded from every spectral sum.
"""
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NonHermitianInput
from .qstate import DensityMatrix, as_matrix, embed_local

EPS_DEN = 1e-12
SUPPORT_TOL = 1e-14


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    vectors: np.ndarray


class SpeedCheck(NamedTuple):
    lhs: float
    rhs: float


def spectrum(rho) -> Spectrum:
    eig = linalg.hermitian_eig(as_matrix(rho))
    return Spectrum(eig.eigenvalues, eig.vectors)


def _pair_mask(lam: np.ndarray) -> np.ndarray:
    return (lam[:, None] + lam[None, :]) > EPS_DEN


def kernel(lam: np.ndarray, kind: str = "qfi") -> np.ndarray:
    """Pair weights ``K_mn`` so that a quadratic form reads ``Σ K_mn |H_mn|²``.

    ``kind`` is one of ``"qfi"`` (Bures), ``"hs"`` (Hilbert-Schmidt),
    ``"hellinger"`` or ``"w"`` (the ``2 λ_m λ_n / (λ_m + λ_n)`` weight).
    """
    lam = np.asarray(lam, dtype=float)
    mask = _pair_mask(lam)
    lm = lam[:, None]
    ln = lam[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "qfi":
            k = 0.5 * (lm - ln) ** 2 / (lm + ln)
        elif kind == "w":
            lp = np.clip(lam, 0.0, None)
            k = 2.0 * lp[:, None] * lp[None, :] / (lm + ln)
        elif kind == "hs":
            k = 0.5 * (lm - ln) ** 2
        elif kind == "hellinger":
            # Round-off eigenvalues off the support would add ~1e-9 via the sqrt.
            r = np.sqrt(np.where(lam > SUPPORT_TOL, lam, 0.0))
            k = 0.5 * (r[:, None] - r[None, :]) ** 2
        else:
            raise ValueError(f"unknown kernel {kind!r}")
    return np.where(mask, k, 0.0)


def _check_hermitian(h: np.ndarray, dim: int, name: str = "H") -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.shape != (dim, dim):
        raise DimensionMismatch(f"{name} has shape {h.shape}, state has dimension {dim}")
    norm = linalg.frobenius_norm(h)
    if linalg.frobenius_norm(h - h.conj().T) > linalg.HERMITIAN_TOL * max(norm, 1e-300):
        raise NonHermitianInput(f"{name} is not Hermitian")
    return h


def gram(spec: Spectrum, ops: Sequence[np.ndarray], kind: str = "qfi") -> np.ndarray:
    """Real symmetric matrix ``G_ij = Σ K_mn Re(<m|O_i|n><n|O_j|m>)``.

    For real coefficients ``c`` the form ``cᵀ G c`` is the chosen spectral
    quadratic form evaluated at ``Σ c_i O_i``; with ``kind="qfi"`` that is the
    Fisher information, and the off-diagonal entries are interference terms.
    """
    lam, v = spec
    k = kernel(lam, kind)
    t = np.stack([v.conj().T @ np.asarray(o) @ v for o in ops])
    g = np.einsum("mn,imn,jmn->ij", k, t, t.conj()).real
    return 0.5 * (g + g.T)


def qfi_spectral(rho, h) -> float:
    """Fisher information ``F²(ρ, H)`` from the eigendecomposition of ``ρ``."""
    m = as_matrix(rho)
    h = _check_hermitian(h, m.shape[0])
    spec = spectrum(m)
    return max(float(gram(spec, [h])[0, 0]), 0.0)


def sld(rho, h) -> np.ndarray:
    """Symmetric logarithmic derivative solving ``i[ρ, H] = ½(Lρ + ρL)``.

    Matrix elements with ``λ_m + λ_n <= EPS_DEN`` are set to zero, which gives
    the minimal-norm solution supported on ``supp(ρ)``.
    """
    m = as_matrix(rho)
    h = _check_hermitian(h, m.shape[0])
    lam, v = spectrum(m)
    hm = v.conj().T @ h @ v
    mask = _pair_mask(lam)
    lm = lam[:, None]
    ln = lam[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        l_eig = np.where(mask, 2j * (lm - ln) / (lm + ln) * hm, 0.0)
    out = v @ l_eig @ v.conj().T
    return 0.5 * (out + out.conj().T)


def qfi_via_sld(rho, h) -> float:
    """``F² = ¼ Tr(ρ L²)``."""
    m = as_matrix(rho)
    big_l = sld(m, h)
    return max(float(np.real(np.trace(m @ big_l @ big_l))) / 4.0, 0.0)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr √(√ρ σ √ρ))²``.

    The inner matrix is formed on the support of whichever state has the
    smaller numerical rank (the fidelity is symmetric). This keeps square
    roots of round-off eigenvalues, which would otherwise add ``~1e-9``
    errors for pure or rank-deficient inputs, out of the trace.
    """
    a = as_matrix(rho)
    b = as_matrix(sigma)
    if a.shape != b.shape:
        raise DimensionMismatch(f"states of shape {a.shape} and {b.shape}")
    ea, eb = linalg.hermitian_eig(a), linalg.hermitian_eig(b)
    if np.sum(eb.eigenvalues > SUPPORT_TOL) < np.sum(ea.eigenvalues > SUPPORT_TOL):
        (ea, a), (eb, b) = (eb, b), (ea, a)
    keep = ea.eigenvalues > SUPPORT_TOL
    v = ea.vectors[:, keep]
    root_lam = np.sqrt(ea.eigenvalues[keep])
    inner = root_lam[:, None] * (v.conj().T @ b @ v) * root_lam[None, :]
    inner = 0.5 * (inner + inner.conj().T)
    mu = linalg.hermitian_eig(inner).eigenvalues if inner.size else np.zeros(0)
    f = float(np.sum(np.sqrt(np.clip(mu, 0.0, None)))) ** 2
    return min(max(f, 0.0), 1.0)


def bures_distance(rho, sigma) -> float:
    """``D_B`` with ``D_B² = 4 (1 - √F_B)``."""
    f = fidelity(rho, sigma)
    return float(np.sqrt(max(4.0 * (1.0 - np.sqrt(f)), 0.0)))


def evolve(rho, h, t: float) -> np.ndarray:
    """``e^{-itH} ρ e^{itH}``."""
    m = as_matrix(rho)
    h = _check_hermitian(h, m.shape[0])
    u = linalg.unitary_exp(h, t)
    out = u @ m @ u.conj().T
    return 0.5 * (out + out.conj().T)


def speed_consistency(rho, h, dt: float) -> SpeedCheck:
    """Finite-time Bures speed against ``F = √F²``.

    With ``D_B² = 4(1 - √F_B)`` the distance grows as ``√2 F dt``, so the
    returned ``lhs`` is ``D_B(ρ, ρ(dt)) / (√2 dt)``; it matches ``rhs`` up to
    an ``O(dt²)`` discretization error.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    m = as_matrix(rho)
    later = evolve(m, h, dt)
    lhs = bures_distance(m, later) / (np.sqrt(2.0) * dt)
    rhs = np.sqrt(qfi_spectral(m, h))
    return SpeedCheck(float(lhs), float(rhs))


def interference_term(rho, h_a, h_b) -> float:
    """Cross term ``C`` of ``F²(H_A + H_B) = F²(H_A) + F²(H_B) + 2C``.

    Each ``(m, n)`` summand is paired with its ``(n, m)`` conjugate, so the
    result is real by construction.
    """
    m = as_matrix(rho)
    h_a = _check_hermitian(h_a, m.shape[0], "H_A")
    h_b = _check_hermitian(h_b, m.shape[0], "H_B")
    return float(gram(spectrum(m), [h_a, h_b])[0, 1])


def local_qfi(rho: DensityMatrix, h, site: int = 0) -> float:
    """Fisher information of ``h`` acting on one site of ``rho``."""
    return qfi_spectral(rho, embed_local(h, site, rho.dims))


def collective_hamiltonian(h, dims: Sequence[int]) -> np.ndarray:
    return sum(embed_local(h, i, dims) for i in range(len(dims)))


def gqfi_collective(rho_n: DensityMatrix, h) -> float:
    """``F²(ρ_N, Σ_i H_i)`` with the same ``h`` on every site."""
    h = np.asarray(h, dtype=complex)
    if any(d != h.shape[0] for d in rho_n.dims):
        raise DimensionMismatch(f"site dims {rho_n.dims} do not all match H of shape {h.shape}")
    return qfi_spectral(rho_n, collective_hamiltonian(h, rho_n.dims))
