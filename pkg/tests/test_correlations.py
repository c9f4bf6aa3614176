import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qfimetro import correlations as corr
from qfimetro import qfi, qstate
from qfimetro.errors import ANotQubit, DimensionMismatch


def _measures(rho):
    return np.array([
        corr.q_measure(rho).value,
        corr.p_measure(rho).value,
        corr.hs_discord(rho),
        corr.hellinger_discord(rho),
    ])


def _asymmetric_cq():
    """CQ state whose B side carries non-commuting conditional states."""
    plus = np.array([[1, 1], [1, 1]]) / 2
    zero = np.diag([1.0, 0.0])
    m = 0.5 * np.kron(zero, zero) + 0.5 * np.kron(np.diag([0.0, 1.0]), plus)
    return qstate.DensityMatrix(m, (2, 2))


# ---------------------------------------------------------------------------
# W matrix

def test_w_matrix_werner_quarter():
    np.testing.assert_allclose(corr.w_matrix(qstate.make_werner(0.25)), 0.9 * np.eye(3), rtol=0, atol=1e-12)


def test_w_matrix_product_state():
    rho = qstate.product_state(qstate.make_pure([1, 0]), qstate.random_density((3,), seed=1))
    w = corr.w_matrix(rho)
    assert abs(np.linalg.eigvalsh(w).max() - 1) <= 1e-12
    assert corr.q_measure(rho).value <= 1e-12


def test_w_matrix_pure_bell():
    np.testing.assert_allclose(corr.w_matrix(qstate.make_werner(1.0)), 0, rtol=0, atol=1e-12)
    assert abs(corr.q_measure(qstate.make_werner(1.0)).value - 1) <= 1e-12


def test_w_identity_holds_for_every_direction():
    for seed in range(50):
        rho = qstate.random_density((2, 3), rank=1 + seed % 6, seed=seed)
        w = corr.w_matrix(rho)
        np.testing.assert_allclose(w, w.T, rtol=0, atol=1e-14)
        r = qstate.make_rng(seed).standard_normal(3)
        r /= np.linalg.norm(r)
        h = np.kron(np.einsum("i,ijk->jk", r, oracles.PAULIS), np.eye(3))
        assert abs(qfi.qfi_spectral(rho, h) - (1 - r @ w @ r)) <= 1e-10


def test_w_needs_qubit_a():
    with pytest.raises(ANotQubit):
        corr.w_matrix(qstate.random_density((3, 2), seed=0))


def test_single_qubit_is_accepted():
    rho = qstate.make_pure([1, 1])
    assert abs(corr.p_measure(rho).value - 1) <= 1e-12
    assert corr.q_measure(rho).value <= 1e-12


def test_multisite_state_groups_rest_into_b():
    ghz = qstate.make_ghz(3)
    np.testing.assert_allclose(corr.w_matrix(ghz), corr.w_matrix(ghz.bipartition()))


# ---------------------------------------------------------------------------
# Q and P

@pytest.mark.parametrize("p", np.linspace(0, 1, 101))
def test_werner_closed_form(p):
    rho = qstate.make_werner(p)
    assert abs(corr.q_measure(rho).value - oracles.werner_q2(p)) <= 1e-9
    assert abs(corr.p_measure(rho).value - oracles.werner_q2(p)) <= 1e-9


@pytest.mark.parametrize("bell", qstate.BELL_LABELS)
def test_werner_closed_form_for_every_bell_state(bell):
    assert abs(corr.q_measure(qstate.make_werner(0.6, bell)).value - oracles.werner_q2(0.6)) <= 1e-9


def test_werner_quarter_golden():
    rho = qstate.make_werner(0.25)
    assert abs(corr.q_measure(rho).value - 0.1) <= 1e-12
    assert abs(corr.p_measure(rho).value - 0.1) <= 1e-12


def test_verification_hook_at_extremal_directions():
    for seed in range(30):
        rho = qstate.random_density((2, 2), seed=seed)
        for ext in (corr.q_measure(rho), corr.p_measure(rho)):
            assert abs(np.linalg.norm(ext.bloch) - 1) <= 1e-12
            h = np.kron(np.einsum("i,ijk->jk", ext.bloch, oracles.PAULIS), np.eye(2))
            assert abs(qfi.qfi_spectral(rho, h) - ext.value) <= 1e-9


def test_cq_state_has_zero_q_but_positive_p():
    m = 0.7 * np.kron(np.diag([1.0, 0]), qstate.random_density((2,), seed=1).matrix)
    m += 0.3 * np.kron(np.diag([0, 1.0]), qstate.random_density((2,), seed=2).matrix)
    rho = qstate.DensityMatrix(m, (2, 2))
    assert corr.q_measure(rho).value <= 1e-9
    _, grid_max = oracles.grid_extrema(rho.matrix, 2)
    assert corr.p_measure(rho).value > 0.1
    assert abs(corr.p_measure(rho).value - grid_max) <= 2e-4


def test_maximally_mixed_has_no_information():
    rho = qstate.maximally_mixed((2, 2))
    assert corr.p_measure(rho).value <= 1e-12


def test_werner_half_values():
    rho = qstate.make_werner(0.5)
    assert abs(corr.hs_discord(rho) - 0.25) <= 1e-12
    assert abs(corr.hellinger_discord(rho) - (3 - np.sqrt(5)) / 4) <= 1e-12
    assert abs(corr.q_measure(rho).value - 1 / 3) <= 1e-12


@pytest.mark.parametrize("p", [0.5, 0.8])
def test_werner_discords_match_grid(p):
    rho = qstate.make_werner(p).matrix
    assert abs(corr.hs_discord(qstate.make_werner(p)) - oracles.grid_extrema(rho, 2, "hs")[0]) <= 2e-4
    assert abs(corr.hellinger_discord(qstate.make_werner(p)) - oracles.grid_extrema(rho, 2, "hellinger")[0]) <= 2e-4


def test_discords_vanish_when_trivial():
    assert corr.hs_discord(qstate.make_werner(0)) <= 1e-15
    assert corr.hellinger_discord(qstate.make_werner(0)) <= 1e-15
    for seed in range(10):
        rho = qstate.random_cq_state(2, 3, 2, seed=seed)
        assert corr.hs_discord(rho) <= 1e-9
        assert corr.hellinger_discord(rho) <= 1e-9


def test_grid_oracle_agreement():
    for seed in range(50):
        dims = (2, 2) if seed % 2 else (2, 3)
        rho = qstate.random_density(dims, rank=1 + seed % 4, seed=seed)
        q_min, p_max = oracles.grid_extrema(rho.matrix, dims[1], "qfi")
        hs_min, _ = oracles.grid_extrema(rho.matrix, dims[1], "hs")
        h_min, _ = oracles.grid_extrema(rho.matrix, dims[1], "hellinger")
        got = _measures(rho)
        np.testing.assert_allclose(got, [q_min, p_max, hs_min, h_min], rtol=0, atol=2e-4)
        # The grid can only overshoot a minimum and undershoot a maximum.
        assert got[0] <= q_min + 1e-12 and got[1] >= p_max - 1e-12


def test_bloch_extrema_agrees_with_q_and_p():
    rho = qstate.random_density((2, 3), seed=3)
    lo, hi = corr.bloch_extrema(rho, "qfi")
    assert abs(lo - corr.q_measure(rho).value) <= 1e-12
    assert abs(hi - corr.p_measure(rho).value) <= 1e-12


# ---------------------------------------------------------------------------
# invariances and ordering

def test_local_unitary_invariance():
    for seed in range(100):
        dims = (2, 2) if seed % 2 else (2, 3)
        rho = qstate.random_density(dims, rank=1 + seed % 4, seed=seed)
        ua = qstate.random_unitary(2, seed + 1)
        ub = qstate.random_unitary(dims[1], seed + 2)
        moved = qstate.apply_local_unitary(rho, ua, ub)
        np.testing.assert_allclose(_measures(moved), _measures(rho), rtol=0, atol=1e-9)


def test_cptp_on_b_monotonicity():
    for seed in range(100):
        dims = (2, 2) if seed % 2 else (2, 3)
        rho = qstate.random_density(dims, rank=1 + seed % 4, seed=seed)
        kraus = qstate.random_kraus_channel(dims[1], 1 + seed % 4, seed + 77)
        out = qstate.apply_channel_on_b(rho, kraus)
        assert corr.q_measure(out).value <= corr.q_measure(rho).value + 1e-9


def test_mixing_two_cq_states_creates_correlations():
    # Q² vanishes on a non-convex set, so it cannot be convex in general.
    z0, z1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    xp, xm = np.array([[1, 1], [1, 1]]) / 2, np.array([[1, -1], [-1, 1]]) / 2
    r1 = qstate.DensityMatrix(0.5 * np.kron(z0, z0) + 0.5 * np.kron(z1, z1), (2, 2))
    r2 = qstate.DensityMatrix(0.5 * np.kron(xp, xp) + 0.5 * np.kron(xm, xm), (2, 2))
    mix = qstate.DensityMatrix(0.5 * (r1.matrix + r2.matrix), (2, 2))
    assert corr.q_measure(r1).value <= 1e-12 and corr.q_measure(r2).value <= 1e-12
    assert abs(corr.q_measure(mix).value - 1 / 3) <= 1e-12
    assert abs(oracles.grid_extrema(mix.matrix, 2)[0] - 1 / 3) <= 2e-4


@pytest.mark.xfail(strict=True, reason="Q² is not convex: mixtures of CQ states can have Q² > 0")
def test_convexity_of_q():
    for seed in range(100):
        r1 = qstate.random_density((2, 2), rank=1 + seed % 4, seed=seed)
        r2 = qstate.random_density((2, 2), rank=1 + (seed + 2) % 4, seed=seed + 500)
        t = 0.1 + 0.8 * (seed % 9) / 8
        mix = qstate.DensityMatrix(t * r1.matrix + (1 - t) * r2.matrix, (2, 2))
        bound = t * corr.q_measure(r1).value + (1 - t) * corr.q_measure(r2).value
        assert corr.q_measure(mix).value <= bound + 1e-9


def test_hierarchy_and_report_invariants():
    for seed in range(100):
        dims = (2, 2) if seed % 2 else (2, 3)
        rho = qstate.random_density(dims, rank=1 + seed % (2 * dims[1]), seed=seed)
        rep = corr.correlation_report(rho)
        assert 0 <= rep.q_squared <= rep.p_squared <= 1 + 1e-10
        assert rep.q_squared >= rep.d_hs_squared - 1e-9
        assert rep.q_squared >= rep.d_h_squared - 1e-9


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.floats(0, 1))
def test_hierarchy_on_mixtures_with_noise(seed, p):
    rho = qstate.random_density((2, 2), rank=1, seed=seed)
    mixed = qstate.DensityMatrix(p * rho.matrix + (1 - p) * np.eye(4) / 4, (2, 2))
    rep = corr.correlation_report(mixed)
    assert rep.q_squared >= max(rep.d_hs_squared, rep.d_h_squared) - 1e-9


def test_asymmetry_between_parties():
    rho = _asymmetric_cq()
    assert corr.q_measure(rho).value <= 1e-12
    assert corr.q_measure_b(rho).value > 1e-3
    assert corr.classicality_check(rho)
    assert not corr.classicality_check(qstate.swap_parties(rho))


# ---------------------------------------------------------------------------
# operator-Schmidt decomposition and classicality

def _reconstruct(decomp):
    return np.einsum("k,kij,kab->iajb", decomp.coefficients, decomp.a_operators, decomp.b_operators)


def test_hermitian_basis_is_orthonormal():
    for d in (2, 3, 4):
        basis = corr.hermitian_basis(d)
        assert basis.shape == (d * d, d, d)
        gram = np.einsum("mij,nji->mn", basis, basis)
        np.testing.assert_allclose(gram, np.eye(d * d), rtol=0, atol=1e-14)
        np.testing.assert_allclose(basis, basis.conj().transpose(0, 2, 1))
    np.testing.assert_allclose(corr.hermitian_basis(2)[3] * np.sqrt(2), np.diag([1, -1]), rtol=0, atol=1e-15)


def test_schmidt_product_state():
    rho = qstate.product_state(qstate.random_density((2,), seed=1), qstate.random_density((3,), seed=2))
    decomp = corr.operator_schmidt(rho)
    assert corr.schmidt_rank(decomp) == 1
    assert np.sum(decomp.coefficients > 1e-10) == 1


def test_schmidt_bell_state():
    decomp = corr.operator_schmidt(qstate.make_werner(1.0))
    np.testing.assert_allclose(decomp.coefficients, [0.5] * 4, rtol=0, atol=1e-12)


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_schmidt_werner_reconstruction(p):
    rho = qstate.make_werner(p)
    decomp = corr.operator_schmidt(rho)
    assert corr.schmidt_rank(decomp) == 4
    assert np.linalg.norm(_reconstruct(decomp).reshape(4, 4) - rho.matrix) <= 1e-9


def test_schmidt_reconstruction_and_orthonormality():
    for seed in range(30):
        dims = [(2, 2), (2, 3), (3, 3), (3, 2)][seed % 4]
        rho = qstate.random_density(dims, rank=1 + seed % 4, seed=seed)
        decomp = corr.operator_schmidt(rho)
        d = rho.dim
        assert np.linalg.norm(_reconstruct(decomp).reshape(d, d) - rho.matrix) <= 1e-9
        for ops in (decomp.a_operators, decomp.b_operators):
            gram = np.einsum("mij,nji->mn", ops, ops)
            np.testing.assert_allclose(gram, np.eye(len(ops)), rtol=0, atol=1e-10)
        assert np.all(np.diff(decomp.coefficients) <= 0)


def test_correlation_matrix_needs_bipartite():
    with pytest.raises(DimensionMismatch):
        corr.correlation_matrix(qstate.make_ghz(3))


def test_classicality_examples():
    assert corr.classicality_check(qstate.random_cq_state(2, 3, 2, seed=3))
    assert not corr.classicality_check(qstate.make_werner(0.2))
    cc = qstate.random_cc_state(2, 3, 2, seed=3)
    assert corr.classicality_check(cc)


@pytest.mark.parametrize("seed", range(20))
def test_classicality_calibration_cq(seed):
    dims = [(2, 2), (2, 3), (3, 3), (2, 4)][seed % 4]
    rho = qstate.random_cq_state(dims[0], dims[1], 1 + seed % dims[0], seed=seed)
    assert corr.classicality_check(rho)


def test_classicality_calibration_werner_low_p():
    assert not corr.classicality_check(qstate.make_werner(0.01))
    assert corr.max_a_commutator(qstate.make_werner(0.01)) > 1e-3


def test_classicality_agrees_with_q_measure():
    states = [qstate.random_cq_state(2, 3, 2, seed=s) for s in range(10)]
    states += [qstate.random_density((2, 3), seed=s) for s in range(10)]
    states += [qstate.make_werner(p) for p in (0, 0.05, 0.5)]
    states.append(_asymmetric_cq())
    for rho in states:
        assert corr.classicality_check(rho) == (corr.q_measure(rho).value <= 1e-9)


def test_report_fields():
    rep = corr.correlation_report(qstate.make_werner(0.25))
    assert abs(rep.q_squared - 0.1) <= 1e-12
    assert not rep.classical_quantum
    assert rep.classicality_tol == corr.CLASSICALITY_TOL
    for v in (rep.minimizing_bloch, rep.maximizing_bloch):
        assert abs(np.linalg.norm(v) - 1) <= 1e-12
