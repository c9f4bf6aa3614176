"""Density matrices, standard state families and the ``.qst`` text format.

Bell-state labels follow the convention::

    psi+ = (|00> + |11>)/sqrt2     psi- = (|00> - |11>)/sqrt2
    phi+ = (|01> + |10>)/sqrt2     phi- = (|01> - |10>)/sqrt2

so ``make_werner(p)`` with the default label is ``p|psi+><psi+| + (1-p)/4 I``
built on ``|00> + |11>``, and ``phi-`` is the singlet.
"""
import os
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    InvalidState,
    OutOfRangeParameter,
    RankTooLarge,
    StateFileError,
    TooManyTerms,
    ZeroVector,
)

STATE_TOL = 1e-10
LOAD_REJECT_TOL = 1e-6

SeedLike = Union[int, np.random.Generator, None]

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_BELL = {
    "psi+": np.array([1, 0, 0, 1]) / np.sqrt(2),
    "psi-": np.array([1, 0, 0, -1]) / np.sqrt(2),
    "phi+": np.array([0, 1, 1, 0]) / np.sqrt(2),
    "phi-": np.array([0, 1, -1, 0]) / np.sqrt(2),
}

BELL_LABELS = tuple(_BELL)


def tolerance_scale() -> float:
    """Multiplier applied to validation tolerances (env ``QFI_TOL_OVERRIDE``)."""
    raw = os.environ.get("QFI_TOL_OVERRIDE")
    if not raw:
        return 1.0
    try:
        scale = float(raw)
    except ValueError:
        raise ValueError(f"QFI_TOL_OVERRIDE must be a number, got {raw!r}") from None
    if not np.isfinite(scale) or scale <= 0:
        raise ValueError(f"QFI_TOL_OVERRIDE must be positive, got {raw!r}")
    return scale


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Counter-based (Philox) generator from a 64-bit seed.

    A ``Generator`` passed in is returned unchanged so callers can thread one
    stream through several constructors.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.Generator(np.random.Philox(int(seed) & (2**64 - 1)))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix on ``H_{d1} ⊗ ... ⊗ H_{dK}``.

    Construction checks Hermiticity, unit trace and positivity to
    ``1e-10`` (scaled by ``QFI_TOL_OVERRIDE``) and raises :class:`InvalidState`
    naming the violated invariant. ``renormalized`` is set by the file loader
    when it had to repair small violations.
    """

    matrix: np.ndarray
    dims: Tuple[int, ...]
    renormalized: bool = field(default=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidState(f"matrix must be square, got {m.shape}", "dims")
        if not dims or any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
            raise InvalidState(f"dims {dims} do not factor dimension {m.shape[0]}", "dims")
        if not np.all(np.isfinite(m)):
            raise InvalidState("matrix has non-finite entries", "finite")
        tol = STATE_TOL * tolerance_scale()
        herm = linalg.frobenius_norm(m - m.conj().T)
        if herm > tol:
            raise InvalidState(f"Hermiticity violated by {herm:.3e}", "hermitian")
        tr = np.trace(m)
        if abs(tr - 1) > tol:
            raise InvalidState(f"trace is {tr.real:.12g}, expected 1", "trace")
        m = 0.5 * (m + m.conj().T)
        lam_min = linalg.hermitian_eig(m).eigenvalues[0]
        if lam_min < -tol:
            raise InvalidState(f"minimum eigenvalue {lam_min:.3e} is negative", "positivity")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eig(self) -> linalg.EigenDecomposition:
        return linalg.hermitian_eig(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def reduced(self, keep) -> np.ndarray:
        return linalg.partial_trace(self.matrix, self.dims, keep)

    def bipartition(self) -> "DensityMatrix":
        """View as ``d1 x (d2...dK)``, grouping every site after the first."""
        if len(self.dims) == 2:
            return self
        rest = int(np.prod(self.dims[1:]))
        return DensityMatrix(self.matrix, (self.dims[0], rest))


def as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def pauli(axis: str) -> np.ndarray:
    try:
        return _PAULI[axis.lower()].copy()
    except (KeyError, AttributeError):
        raise ValueError(f"unknown Pauli axis {axis!r}; expected x, y or z") from None


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    """Unit vector ``(cos θ, sin θ cos φ, sin θ sin φ)`` over (x, y, z)."""
    return np.array([np.cos(theta), np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi)])


def bloch_hamiltonian(theta: float, phi: float) -> np.ndarray:
    """``r·σ`` for the unit vector of :func:`bloch_vector`; squares to the identity."""
    r = bloch_vector(theta, phi)
    return r[0] * _PAULI["x"] + r[1] * _PAULI["y"] + r[2] * _PAULI["z"]


def embed_local(h, site: int, dims: Sequence[int]) -> np.ndarray:
    """``I ⊗ ... ⊗ h ⊗ ... ⊗ I`` with ``h`` on the 0-based ``site``."""
    h = np.asarray(h, dtype=complex)
    dims = tuple(int(d) for d in dims)
    if not 0 <= site < len(dims):
        raise DimensionMismatch(f"site {site} out of range for dims {dims}")
    if h.shape != (dims[site], dims[site]):
        raise DimensionMismatch(f"operator of shape {h.shape} cannot act on a {dims[site]}-dim site")
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[site] = h
    return linalg.kron(*factors)


def make_pure(amplitudes, dims: Sequence[int] = None) -> DensityMatrix:
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ZeroVector("state vector has zero norm")
    psi = psi / norm
    if dims is None:
        dims = _qubit_dims(psi.size)
    return DensityMatrix(np.outer(psi, psi.conj()), dims)


def _qubit_dims(d: int) -> Tuple[int, ...]:
    n = int(round(np.log2(d))) if d > 1 else 0
    if d > 1 and 2**n == d:
        return (2,) * n
    return (d,)


def bell_vector(label: str = "psi+") -> np.ndarray:
    try:
        return _BELL[label].astype(complex)
    except KeyError:
        raise ValueError(f"unknown Bell label {label!r}; expected one of {BELL_LABELS}") from None


def make_werner(p: float, bell: str = "psi+") -> DensityMatrix:
    """``p |B><B| + (1-p)/4 I_4`` for the Bell state ``B`` named by ``bell``."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRangeParameter(f"Werner parameter p={p} outside [0, 1]")
    b = bell_vector(bell)
    m = p * np.outer(b, b.conj()) + (1 - p) / 4 * np.eye(4)
    return DensityMatrix(m, (2, 2))


def make_ghz(n: int) -> DensityMatrix:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1
    return make_pure(psi, (2,) * n)


def product_state(*states: DensityMatrix) -> DensityMatrix:
    m = linalg.kron(*[s.matrix for s in states])
    dims = tuple(d for s in states for d in s.dims)
    return DensityMatrix(m, dims)


def tensor_power(rho: DensityMatrix, n: int) -> DensityMatrix:
    return product_state(*([rho] * n))


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    d = int(np.prod(dims))
    return DensityMatrix(np.eye(d) / d, dims)


def random_unitary(dim: int, seed: SeedLike) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with phase fix."""
    rng = make_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density(dims: Sequence[int], rank: int = None, seed: SeedLike = 0) -> DensityMatrix:
    """``G G† / Tr(G G†)`` with ``G`` a ``d x rank`` complex Gaussian matrix."""
    dims = tuple(int(d) for d in dims)
    d = int(np.prod(dims))
    rank = d if rank is None else int(rank)
    if rank < 1 or rank > d:
        raise RankTooLarge(f"rank {rank} not in [1, {d}]")
    rng = make_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, dims)


def random_hermitian(dim: int, seed: SeedLike) -> np.ndarray:
    rng = make_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return a + a.conj().T


def random_bloch_hamiltonian(seed: SeedLike) -> np.ndarray:
    rng = make_rng(seed)
    r = rng.standard_normal(3)
    r /= np.linalg.norm(r)
    return r[0] * _PAULI["x"] + r[1] * _PAULI["y"] + r[2] * _PAULI["z"]


def random_cq_state(dA: int, dB: int, terms: int, seed: SeedLike) -> DensityMatrix:
    """``Σ_i p_i |a_i><a_i| ⊗ σ_i`` with a random orthonormal basis ``{a_i}`` on A.

    The ``σ_i`` are full-rank random states on B and the weights are a
    uniform draw from the simplex.
    """
    if terms < 1 or terms > dA:
        raise TooManyTerms(f"{terms} terms need an orthonormal set of that size in dimension {dA}")
    rng = make_rng(seed)
    u = random_unitary(dA, rng)
    weights = rng.dirichlet(np.ones(terms))
    m = np.zeros((dA * dB, dA * dB), dtype=complex)
    for i in range(terms):
        a = u[:, i]
        sigma = random_density((dB,), dB, rng).matrix
        m += weights[i] * np.kron(np.outer(a, a.conj()), sigma)
    return DensityMatrix(m, (dA, dB))


def random_cc_state(dA: int, dB: int, terms: int, seed: SeedLike) -> DensityMatrix:
    """``Σ_i p_i |a_i><a_i| ⊗ |b_i><b_i|`` with orthonormal sets on both sides."""
    if terms < 1 or terms > min(dA, dB):
        raise TooManyTerms(f"{terms} terms exceed min(dA, dB) = {min(dA, dB)}")
    rng = make_rng(seed)
    ua = random_unitary(dA, rng)
    ub = random_unitary(dB, rng)
    weights = rng.dirichlet(np.ones(terms))
    m = np.zeros((dA * dB, dA * dB), dtype=complex)
    for i in range(terms):
        v = np.kron(ua[:, i], ub[:, i])
        m += weights[i] * np.outer(v, v.conj())
    return DensityMatrix(m, (dA, dB))


def apply_local_unitary(rho: DensityMatrix, *unitaries) -> DensityMatrix:
    """``(U_1 ⊗ ... ⊗ U_K) ρ (U_1 ⊗ ... ⊗ U_K)†``."""
    u = linalg.kron(*unitaries)
    if u.shape != rho.matrix.shape:
        raise DimensionMismatch("local unitaries do not match the state dimension")
    m = u @ rho.matrix @ u.conj().T
    return DensityMatrix(0.5 * (m + m.conj().T), rho.dims)


def swap_parties(rho: DensityMatrix) -> DensityMatrix:
    """Exchange the two factors of a bipartite state."""
    if len(rho.dims) != 2:
        raise DimensionMismatch(f"swap needs a bipartite state, got dims {rho.dims}")
    dA, dB = rho.dims
    t = rho.matrix.reshape(dA, dB, dA, dB).transpose(1, 0, 3, 2)
    return DensityMatrix(t.reshape(dA * dB, dA * dB), (dB, dA))


def permute_sites(rho: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    """Reorder tensor factors so that new site ``k`` is old site ``order[k]``."""
    order = list(order)
    k = len(rho.dims)
    if sorted(order) != list(range(k)):
        raise DimensionMismatch(f"{order} is not a permutation of {k} sites")
    t = rho.matrix.reshape(rho.dims + rho.dims)
    t = t.transpose(order + [k + i for i in order])
    dims = tuple(rho.dims[i] for i in order)
    return DensityMatrix(t.reshape(rho.dim, rho.dim), dims)


def random_kraus_channel(dim: int, n_ops: int, seed: SeedLike):
    """Kraus operators of a random CPTP map: blocks of a Haar isometry."""
    u = random_unitary(dim * n_ops, seed)
    iso = u[:, :dim]
    return [iso[k * dim:(k + 1) * dim, :] for k in range(n_ops)]


def apply_channel_on_b(rho: DensityMatrix, kraus) -> DensityMatrix:
    """``(I ⊗ Λ)(ρ)`` for a bipartite ``ρ`` and Kraus operators acting on B."""
    dA, dB = rho.dims
    eye = np.eye(dA)
    m = np.zeros_like(rho.matrix)
    for k in kraus:
        big = np.kron(eye, k)
        m += big @ rho.matrix @ big.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m / np.trace(m).real, rho.dims)


# ---------------------------------------------------------------------------
# .qst text format

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_qst(rho: DensityMatrix) -> str:
    """Serialize: a ``dims`` header, then one matrix row per line of ``re,im`` tokens."""
    lines = ["dims " + " ".join(str(d) for d in rho.dims)]
    for row in rho.matrix:
        lines.append(" ".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in row))
    return "\n".join(lines) + "\n"


def write_qst(rho: DensityMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_qst(rho))


def loads_qst(text: str) -> DensityMatrix:
    """Parse ``.qst`` text.

    Deviations from Hermiticity or unit trace above ``1e-6`` are rejected
    with :class:`InvalidState`; smaller ones above ``1e-10`` are repaired by
    symmetrizing and renormalizing, and the result carries
    ``renormalized=True``.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise StateFileError("empty state file")
    header = lines[0].split()
    if not header or header[0] != "dims" or len(header) < 2:
        raise StateFileError("first line must be 'dims d1 d2 ...'")
    try:
        dims = tuple(int(tok) for tok in header[1:])
    except ValueError:
        raise StateFileError(f"bad dims line: {lines[0]!r}") from None
    if any(d < 1 for d in dims):
        raise StateFileError(f"dimensions must be positive: {dims}")
    d = int(np.prod(dims))
    tokens = " ".join(lines[1:]).split()
    if len(tokens) != d * d:
        raise StateFileError(f"expected {d * d} entries for dims {dims}, found {len(tokens)}")
    entries = np.empty(d * d, dtype=complex)
    for i, tok in enumerate(tokens):
        parts = tok.split(",")
        if len(parts) != 2:
            raise StateFileError(f"entry {i} is not of the form re,im: {tok!r}")
        try:
            entries[i] = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise StateFileError(f"entry {i} is not numeric: {tok!r}") from None
    if not np.all(np.isfinite(entries)):
        raise StateFileError("state file contains non-finite entries")
    m = entries.reshape(d, d)

    scale = tolerance_scale()
    reject = LOAD_REJECT_TOL * scale
    repair = STATE_TOL * scale
    herm = linalg.frobenius_norm(m - m.conj().T)
    tr_err = abs(np.trace(m) - 1)
    if herm > reject:
        raise InvalidState(f"Hermiticity violated by {herm:.3e}", "hermitian")
    if tr_err > reject:
        raise InvalidState(f"trace deviates from 1 by {tr_err:.3e}", "trace")
    renormalized = False
    if herm > repair or tr_err > repair:
        m = 0.5 * (m + m.conj().T)
        m = m / np.trace(m).real
        renormalized = True
        warnings.warn("state was symmetrized and renormalized on load", stacklevel=2)
    return DensityMatrix(m, dims, renormalized=renormalized)


def read_qst(path) -> DensityMatrix:
    with open(path) as fh:
        return loads_qst(fh.read())
