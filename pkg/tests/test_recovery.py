import numpy as np
import pytest
from scipy.fft import dct, idct

from conceal_cs.codec import conceal, encrypt, ots_encrypt, strip_conceal
from conceal_cs.errors import ShapeError, SupportSizeError, ValidationError
from conceal_cs.keystream import SymbolGenerator, make_key
from conceal_cs.recovery import (
    amse,
    basis_pursuit,
    beam_sparse_solve,
    build_dictionary,
    dct_dictionary,
    dct_matrix,
    decode,
    fista_solve,
    greedy_sparse_solve,
)
from conceal_cs.sensing import build_matrix, reference_gaussian
from conceal_cs.signals import sparse_canonical_block, sparse_dct_block, sparse_dct_signal


@pytest.mark.parametrize("N", [2, 7, 64, 255])
def test_dct_matches_scipy(N):
    psi = dct_matrix(N)
    v = np.random.default_rng(N).standard_normal(N)
    assert np.allclose(psi @ v, idct(v, norm="ortho"))
    assert np.allclose(psi.T @ v, dct(v, norm="ortho"))
    assert np.allclose(psi.T @ psi, np.eye(N))


def test_dictionary_layout():
    D = build_dictionary(8)
    assert D.atoms.shape == (8, 16)
    assert np.array_equal(D.atoms[:, 8:], np.eye(8))
    assert D.labels[:8] == ["B1"] * 8 and D.labels[8:] == ["B2"] * 8
    # coherence between the halves is the largest DCT entry, sqrt(2/N) cos(pi/2N)
    mu = np.max(np.abs(D.atoms[:, :8].T @ D.atoms[:, 8:]))
    assert mu == pytest.approx(np.sqrt(2 / 8) * np.cos(np.pi / 16))
    with pytest.raises(ValidationError):
        build_dictionary(1)


def test_omp_identity_exact():
    y = np.array([0.0, 3.0, 0.0, -1.0])
    res = greedy_sparse_solve(np.eye(4), y)
    assert np.allclose(res.coefficients, y)
    assert sorted(res.support) == [1, 3]
    assert res.converged and res.residual_norm == 0.0


def test_omp_tie_breaks_to_lowest_index():
    A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    res = greedy_sparse_solve(A, np.array([2.0, 0.0]), max_atoms=1)
    assert res.support == [0]


def test_omp_residual_history_nonincreasing():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((20, 60))
    res = greedy_sparse_solve(A, rng.standard_normal(20), max_atoms=10)
    h = np.array(res.residual_history)
    assert np.all(np.diff(h) <= 1e-12)
    assert res.iterations == len(res.support) == 10


def test_omp_errors():
    with pytest.raises(SupportSizeError):
        greedy_sparse_solve(np.eye(3), np.ones(3), max_atoms=4)
    with pytest.raises(ShapeError):
        greedy_sparse_solve(np.eye(3), np.ones(2))
    with pytest.raises(ValidationError):
        greedy_sparse_solve(np.zeros((2, 3)), np.ones(2))


def test_omp_recovers_sparse_on_gaussian():
    rng = np.random.default_rng(1)
    hits = 0
    for _ in range(100):
        A = rng.standard_normal((32, 64))
        x = np.zeros(64)
        x[rng.choice(64, 4, replace=False)] = rng.uniform(1, 2, 4)
        hits += np.allclose(greedy_sparse_solve(A, A @ x).coefficients, x, atol=1e-8)
    assert hits >= 95


@pytest.mark.parametrize("solver", [basis_pursuit, fista_solve])
def test_convex_solvers_recover_planted_solution(solver):
    rng = np.random.default_rng(2)
    A = rng.standard_normal((30, 80))
    x = np.zeros(80)
    x[[3, 17, 40, 77]] = [1.5, -2.0, 1.0, -1.2]
    res = solver(A, A @ x)
    assert np.allclose(res.coefficients, x, atol=1e-8)
    assert res.support == [3, 17, 40, 77]


def test_basis_pursuit_zero_measurements():
    res = basis_pursuit(np.eye(3)[:2], np.zeros(2))
    assert not res.coefficients.any() and res.converged


def test_decode_ots_sparse_dct():
    rng = np.random.default_rng(3)
    s = sparse_dct_signal(64, 5, rng)
    phi = build_matrix(make_key(rng=3), 32, 64)
    rec = decode(ots_encrypt(s, phi), phi, dct_dictionary(64))
    assert amse([s], [rec.x_prime_hat]) < 1e-20


@pytest.mark.parametrize("method", ["bp", "omp", "fista"])
def test_concealed_round_trip(method):
    rng = np.random.default_rng(4)
    x = sparse_dct_block(64, 3, rng)
    phi = build_matrix(make_key(rng=4), 32, 64)
    ct = encrypt(conceal(x, 1.5 * float(x @ x)), phi)
    rec = decode(ct, phi, build_dictionary(64), method=method)
    assert amse([x], [strip_conceal(rec.x_prime_hat)]) < 1e-8


def test_concealed_round_trip_spiky_plaintext():
    # canonical-sparse plaintexts are sparse in the identity half
    rng = np.random.default_rng(5)
    x = sparse_canonical_block(64, 4, rng)
    phi = build_matrix(make_key(rng=5), 32, 64)
    rec = decode(encrypt(conceal(x, 2 * float(x @ x)), phi), phi, build_dictionary(64))
    assert amse([x], [strip_conceal(rec.x_prime_hat)]) < 1e-8


def test_two_basis_success_rate_lfsr_matches_reference():
    rng = np.random.default_rng(6)
    gen = SymbolGenerator(make_key(rng=6))
    D = build_dictionary(64)
    ok = {"lfsr": 0, "ref": 0}
    for t in range(40):
        x = sparse_dct_block(64, 4, rng)
        for name, phi in (("lfsr", build_matrix(gen, 32, 64)), ("ref", reference_gaussian(32, 64, rng))):
            ct = encrypt(conceal(x, 1.2 * float(x @ x)), phi)
            ok[name] += amse([x], [strip_conceal(decode(ct, phi, D).x_prime_hat)]) < 1e-8
    assert ok["lfsr"] >= 36 and ok["ref"] >= 36


def test_decode_validation():
    phi = build_matrix(make_key(rng=0), 8, 16)
    with pytest.raises(ShapeError):
        decode(np.zeros(8), phi, build_dictionary(17))
    with pytest.raises(ShapeError):
        decode(np.zeros(7), phi, build_dictionary(16))
    with pytest.raises(ValidationError):
        decode(np.zeros(8), phi, build_dictionary(16), method="cosamp")


def test_amse():
    assert amse([[0.0, 0.0], [1.0, 1.0]], [[1.0, 1.0], [1.0, 3.0]]) == pytest.approx((1.0 + 2.0) / 2)
    with pytest.raises(ValidationError):
        amse([[1.0]], [])
    with pytest.raises(ValidationError):
        amse([[1.0]], [[1.0, 2.0]])


def test_spike_index():
    assert build_dictionary(8).spike_index(0) == 8
    assert build_dictionary(8).spike_index(3) == 11
    assert dct_dictionary(8).spike_index(0) is None


def test_weighted_bp_zero_weight_is_free():
    # y = 10 e_0 + e_1: with e_0 unpenalized it is taken in full
    A = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    y = np.array([10.0, 1.0])
    plain = basis_pursuit(A, y)
    free = basis_pursuit(A, y, weights=np.array([0.0, 1.0, 1.0]))
    assert np.allclose(A @ plain.coefficients, y) and np.allclose(A @ free.coefficients, y)
    assert free.coefficients[0] == pytest.approx(10.0) and free.coefficients[2] == 0
    with pytest.raises(ValidationError):
        basis_pursuit(A, y, weights=np.array([1.0, -1.0, 1.0]))


def test_omp_initial_support():
    y = np.array([0.0, 3.0, 0.0, -1.0])
    res = greedy_sparse_solve(np.eye(4), y, max_atoms=3, initial_support=[0])
    assert res.support[0] == 0 and np.allclose(res.coefficients, y)


def test_beam_solve_planted_and_unreachable():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((20, 60))
    x = np.zeros(60)
    x[[5, 9, 30]] = [1.0, -2.0, 0.5]
    res = beam_sparse_solve(A, A @ x)
    assert res.converged and res.support == [5, 9, 30]
    assert np.allclose(res.coefficients, x)
    dense = beam_sparse_solve(A, rng.standard_normal(20), max_atoms=4)
    assert not dense.converged and len(dense.support) == 4


def test_decode_concealed_flag_from_scheme():
    rng = np.random.default_rng(8)
    x = sparse_dct_block(64, 5, rng)
    phi = build_matrix(make_key(rng=8), 32, 64)
    ct = encrypt(conceal(x, 1.2 * float(x @ x)), phi)
    auto = decode(ct, phi, build_dictionary(64))
    manual = decode(ct.y, phi, build_dictionary(64), concealed=True)
    assert np.allclose(auto.x_prime_hat, manual.x_prime_hat)


def test_fallback_rescues_dense_l1_solution():
    # instances where plain l1 over [DCT | I] returns a dense vector
    rng = np.random.default_rng(9)
    gen = SymbolGenerator(make_key(rng=9))
    D = build_dictionary(64)
    rescued = 0
    for _ in range(300):
        x = sparse_dct_block(64, 6, rng)
        phi = build_matrix(gen, 32, 64)
        ct = encrypt(conceal(x, 1.2 * float(x @ x)), phi)
        plain = decode(ct, phi, D, concealed=False, fallback=False)
        if amse([x], [strip_conceal(plain.x_prime_hat)]) > 1e-8:
            full = decode(ct, phi, D)
            rescued += amse([x], [strip_conceal(full.x_prime_hat)]) < 1e-8
            if rescued >= 3:
                break
    assert rescued >= 3
