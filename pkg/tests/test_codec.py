import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conceal_cs.codec import (
    conceal,
    default_e_max,
    encrypt,
    energy,
    eos_encrypt,
    normalize_scheme,
    ots_encrypt,
    strip_conceal,
)
from conceal_cs.errors import EnergyOverflowError, MatrixReuseError, ShapeError, ValidationError
from conceal_cs.keystream import make_key
from conceal_cs.sensing import build_matrix

finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=200)
@given(x=arrays(float, st.integers(1, 64), elements=finite), slack=st.floats(0.0, 10.0))
def test_concealed_energy_is_exactly_e_max(x, slack):
    e_max = energy(x) * (1 + slack) + 1.0
    b = conceal(x, e_max)
    assert energy(b.x_prime) == pytest.approx(e_max, rel=1e-9)
    assert b.c >= 0
    assert np.array_equal(strip_conceal(b.x_prime), x)


def test_conceal_examples():
    b = conceal([3.0, 4.0], 50.0)
    assert b.c == pytest.approx(5.0)
    assert np.allclose(b.x_prime, [5.0, 3.0, 4.0])
    assert conceal([3.0, 4.0], 25.0).c == 0.0


def test_energy_overflow():
    with pytest.raises(EnergyOverflowError) as info:
        conceal([3.0, 4.0], 24.0)
    assert info.value.energy == pytest.approx(25.0)
    with pytest.raises(ValidationError):
        conceal([1.0], 0.0)


def test_encrypt_linear_measurement_and_reuse_guard():
    phi = build_matrix(make_key(rng=0), 5, 9)
    b = conceal(np.arange(8.0), 500.0)
    ct = encrypt(b, phi)
    assert np.allclose(ct.y, phi.entries @ b.x_prime)
    with pytest.raises(MatrixReuseError):
        encrypt(b, phi)
    again = encrypt(b, phi, allow_reuse=True)
    assert np.array_equal(again.y, ct.y)


def test_reuse_makes_scheme_linear_in_plaintext():
    # why reuse is refused: with one matrix, scaling x scales y
    phi = build_matrix(make_key(rng=0), 5, 9)
    x = np.arange(9.0)
    y1 = ots_encrypt(x, phi).y
    y2 = ots_encrypt(2 * x, phi, allow_reuse=True).y
    assert np.allclose(y2, 2 * y1)


def test_shape_mismatch():
    phi = build_matrix(make_key(rng=0), 5, 9)
    with pytest.raises(ShapeError):
        ots_encrypt(np.ones(8), phi)


def test_zero_plaintext_gives_nonzero_ciphertext():
    phi = build_matrix(make_key(rng=2), 16, 32)
    ct = encrypt(conceal(np.zeros(31), 1.0), phi)
    assert np.linalg.norm(ct.y) > 0
    # the ciphertext is the first column scaled by sqrt(E_max)
    assert np.allclose(ct.y, phi.entries[:, 0])


def test_normalize_scheme():
    ct = normalize_scheme([3.0, 4.0])
    assert np.allclose(ct.y, [0.6, 0.8]) and ct.aux == pytest.approx(5.0)
    z = normalize_scheme(np.zeros(4), rng=0)
    assert np.linalg.norm(z.y) == pytest.approx(1.0) and z.aux == 0.0


def test_eos_multiplier_lognormal_and_seeded():
    phi = build_matrix(make_key(rng=0), 4, 8)
    x = np.ones(8)
    a = eos_encrypt(x, phi, 0.5, seed=1)
    b = eos_encrypt(x, phi, 0.5, seed=1, allow_reuse=True)
    assert a.aux == b.aux > 0
    assert np.allclose(a.y, a.aux * phi.entries @ x)
    with pytest.raises(ValidationError):
        eos_encrypt(x, phi, 0.0, allow_reuse=True)


def test_default_e_max():
    assert default_e_max([[1.0, 1.0], [2.0, 0.0]]) == pytest.approx(4.8)
    assert default_e_max([np.zeros(3)]) == 1.0
