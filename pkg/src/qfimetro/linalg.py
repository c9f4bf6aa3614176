"""Dense linear algebra for small complex matrices.

Eigendecompositions and SVDs use cyclic Jacobi rotations. Every routine is a
pure function of its inputs: sweep order is fixed and ties between equal
eigenvalues are broken by original column index, so identical inputs give
bit-identical outputs.
"""
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NonHermitianInput,
    NonSymmetricInput,
    NotPSD,
)

MAX_SWEEPS = 100
HERMITIAN_TOL = 1e-10
CONVERGED_TOL = 1e-12
PSD_TOL = 1e-10

_STOP_TOL = 1e-15
_NULL_TOL = 1e-14


class EigenDecomposition(NamedTuple):
    """Ascending eigenvalues and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    vectors: np.ndarray


class SVD(NamedTuple):
    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray


def frobenius_norm(m) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(m)) ** 2)))


def adjoint(m) -> np.ndarray:
    return np.asarray(m).conj().T


def trace(m) -> complex:
    m = _square(m)
    return complex(np.trace(m))


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def commutator(a, b) -> np.ndarray:
    a = _square(a)
    b = _square(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"commutator of {a.shape} and {b.shape}")
    return a @ b - b @ a


def kron(*ops) -> np.ndarray:
    """Tensor product of one or more matrices, leftmost factor outermost."""
    if not ops:
        raise DimensionMismatch("kron needs at least one factor")
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op))
    return out


def partial_trace(m, dims: Sequence[int], keep: Union[str, Sequence[int]] = "A") -> np.ndarray:
    """Trace out subsystems of an operator on ``H_1 ⊗ ... ⊗ H_K``.

    ``keep`` is ``"A"`` or ``"B"`` for a bipartite ``dims``, or a sequence of
    site indices (0-based) to retain, in which case the kept factors appear in
    ascending site order.
    """
    m = _square(m)
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != m.shape[0]:
        raise DimensionMismatch(f"dims {dims} do not factor a {m.shape[0]}-dim operator")
    if isinstance(keep, str):
        if len(dims) != 2 or keep not in ("A", "B"):
            raise DimensionMismatch("keep='A'/'B' requires bipartite dims")
        keep = [0] if keep == "A" else [1]
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatch(f"site index out of range for dims {dims}")

    k = len(dims)
    t = m.reshape(dims + dims)
    traced = [i for i in range(k) if i not in keep]
    # Contract traced sites from the highest index so axis numbers stay valid.
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(dk, dk)


def _square(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def _finite(m: np.ndarray) -> None:
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")


def _off_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return frobenius_norm(off)


def _jacobi(a: np.ndarray, norm: float) -> EigenDecomposition:
    """Cyclic Jacobi on a Hermitian (or real symmetric) working copy ``a``."""
    n = a.shape[0]
    v = np.eye(n, dtype=a.dtype)
    off = _off_norm(a)
    for _ in range(MAX_SWEEPS):
        if off <= _STOP_TOL * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]] acting on columns p, q.
                cph = np.conj(phase)
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * cph * col_q
                a[:, q] = s * col_p + c * cph * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * row_p + c * phase * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * cph * vq
                v[:, q] = s * vp + c * cph * vq
        new_off = _off_norm(a)
        if new_off >= off and new_off <= CONVERGED_TOL * norm:
            off = new_off
            break
        off = new_off
    if off > CONVERGED_TOL * norm:
        raise NoConvergence(
            f"off-diagonal norm {off:.3e} exceeds {CONVERGED_TOL:g}*|M| after {MAX_SWEEPS} sweeps"
        )
    w = np.real(np.diagonal(a)).copy()
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], v[:, order])


def hermitian_eig(m) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    The input is symmetrized as ``(M + M†)/2`` before iterating.

    Raises
    ------
    NonHermitianInput
        If ``|M - M†|_F > 1e-10 |M|_F``.
    NoConvergence
        If the off-diagonal mass is still above ``1e-12 |M|_F`` after 100 sweeps.
    """
    a = np.array(_square(m), dtype=complex)
    _finite(a)
    n = a.shape[0]
    norm = frobenius_norm(a)
    if norm == 0.0:
        return EigenDecomposition(np.zeros(n), np.eye(n, dtype=complex))
    if frobenius_norm(a - a.conj().T) > HERMITIAN_TOL * norm:
        raise NonHermitianInput("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    return _jacobi(a, norm)


def real_symmetric_eig(m) -> EigenDecomposition:
    """Real-arithmetic counterpart of :func:`hermitian_eig`."""
    a = np.array(_square(m), dtype=float)
    _finite(a)
    n = a.shape[0]
    norm = frobenius_norm(a)
    if norm == 0.0:
        return EigenDecomposition(np.zeros(n), np.eye(n))
    if frobenius_norm(a - a.T) > HERMITIAN_TOL * max(norm, 1.0):
        raise NonSymmetricInput("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    return _jacobi(a, norm)


def svd_real(m) -> SVD:
    """Thin SVD ``M = U diag(k) Vᵀ`` by one-sided (Hestenes) Jacobi.

    For an ``r x c`` input, ``U`` is ``r x min(r, c)`` and ``V`` is
    ``c x min(r, c)``, both with orthonormal columns. Singular values are
    returned non-negative and descending.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    _finite(a)
    if a.shape[0] < a.shape[1]:
        u, k, v = svd_real(a.T)
        return SVD(v, k, u)

    rows, cols = a.shape
    u = a.copy()
    v = np.eye(cols)
    # Columns below this norm are round-off on a null direction; rotating them
    # never settles because their relative overlap stays O(1).
    negligible = (_NULL_TOL * frobenius_norm(a)) ** 2
    for _ in range(MAX_SWEEPS):
        rotated = False
        for i in range(cols - 1):
            for j in range(i + 1, cols):
                alpha = u[:, i] @ u[:, i]
                beta = u[:, j] @ u[:, j]
                gamma = u[:, i] @ u[:, j]
                if alpha <= negligible or beta <= negligible:
                    continue
                # sqrt of each factor separately: alpha * beta can underflow.
                if gamma == 0.0 or abs(gamma) <= _STOP_TOL * np.sqrt(alpha) * np.sqrt(beta):
                    continue
                if abs(2.0 * gamma) < 1e-150 * abs(beta - alpha):
                    t = gamma / (beta - alpha)
                else:
                    zeta = (beta - alpha) / (2.0 * gamma)
                    t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                if s == 0.0:
                    continue
                rotated = True
                ui = u[:, i].copy()
                u[:, i] = c * ui - s * u[:, j]
                u[:, j] = s * ui + c * u[:, j]
                vi = v[:, i].copy()
                v[:, i] = c * vi - s * v[:, j]
                v[:, j] = s * vi + c * v[:, j]
        if not rotated:
            break
    else:
        raise NoConvergence(f"one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps")

    k = np.sqrt(np.sum(u * u, axis=0))
    order = np.argsort(-k, kind="stable")
    k = k[order]
    u = u[:, order]
    v = v[:, order]
    floor = max(_NULL_TOL * frobenius_norm(a), 1e-300)
    for j in range(cols):
        if k[j] > floor:
            u[:, j] /= k[j]
        else:
            k[j] = 0.0
            u[:, j] = _orthogonal_complement(u[:, :j], rows)
    return SVD(u, k, v)


def _orthogonal_complement(basis: np.ndarray, n: int) -> np.ndarray:
    # First standard basis vector that survives projection off the existing columns.
    best, best_norm = None, -1.0
    for e in np.eye(n):
        w = e - basis @ (basis.T @ e)
        w = w - basis @ (basis.T @ w)
        nw = np.linalg.norm(w)
        if nw > 0.5:
            return w / nw
        if nw > best_norm:
            best, best_norm = w, nw
    return best / best_norm


def matrix_sqrt_psd(m) -> np.ndarray:
    """Principal square root of a Hermitian positive-semidefinite matrix.

    Eigenvalues in ``[-1e-10, 0)`` are treated as numerical noise and clamped
    to zero; anything more negative raises :class:`NotPSD`. Eigenvalues below
    ``1e-14`` of the largest are also zeroed, since their square roots would
    otherwise leave ``~1e-8`` noise on rank-deficient inputs.
    """
    eig = hermitian_eig(m)
    lam = eig.eigenvalues
    if lam.size and lam[0] < -PSD_TOL:
        raise NotPSD(f"eigenvalue {lam[0]:.3e} below -{PSD_TOL:g}")
    cutoff = _NULL_TOL * (lam[-1] if lam.size else 0.0)
    root = np.sqrt(np.where(lam > cutoff, lam, 0.0))
    v = eig.vectors
    r = (v * root) @ v.conj().T
    return 0.5 * (r + r.conj().T)


def unitary_exp(h, t: float = 1.0) -> np.ndarray:
    """``exp(-i t H)`` for Hermitian ``H`` via its eigendecomposition."""
    eig = hermitian_eig(h)
    v = eig.vectors
    return (v * np.exp(-1j * t * eig.eigenvalues)) @ v.conj().T
