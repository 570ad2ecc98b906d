"""Energy-concealment encryption and the baseline schemes.

A plaintext block x of length N-1 is extended with c = sqrt(E_max - |x|^2)
so every encrypted vector has the same energy E_max.  The measurements then
carry no information about the plaintext energy.

Baselines kept for comparison experiments:

* ``ots``        -- plain one-time sensing, y = phi @ x
* ``normalized`` -- y / |y| with the norm kept aside (needs a secure channel)
* ``eos``        -- z = a * phi @ x with log-normal a
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EnergyOverflowError, MatrixReuseError, ShapeError, ValidationError
from .sensing import SensingMatrix

CONCEALED = "concealed"
OTS = "ots"
NORMALIZED = "normalized"
EOS = "eos"
SCHEMES = (CONCEALED, OTS, NORMALIZED, EOS)

ENERGY_RTOL = 1e-9


@dataclass
class Block:
    x: np.ndarray
    x_prime: np.ndarray
    c: float
    E_max: float

    @property
    def N(self) -> int:
        return len(self.x_prime)


@dataclass
class Ciphertext:
    y: np.ndarray
    scheme: str
    # norm for "normalized", multiplier a for "eos"; never written to the wire
    aux: float | None = None

    @property
    def M(self) -> int:
        return len(self.y)


def energy(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x @ x)


def conceal(x, E_max: float) -> Block:
    """Prepend the energy-concealing variable so the block energy is E_max."""
    x = np.asarray(x, dtype=float).ravel()
    if not E_max > 0:
        raise ValidationError("E_max must be positive")
    e = energy(x)
    if e > E_max:
        raise EnergyOverflowError(e, E_max)
    c = float(np.sqrt(E_max - e))
    return Block(x, np.concatenate(([c], x)), c, float(E_max))


def strip_conceal(x_prime_hat) -> np.ndarray:
    """Drop the recovered concealing variable (first entry)."""
    return np.asarray(x_prime_hat, dtype=float)[1:]


def _measure(v: np.ndarray, phi: SensingMatrix, allow_reuse: bool) -> np.ndarray:
    if phi.N != len(v):
        raise ShapeError(f"matrix has N={phi.N}, vector has length {len(v)}")
    if phi.used and not allow_reuse:
        raise MatrixReuseError("sensing matrix already used; pass allow_reuse=True to override")
    phi.used = True
    return phi.entries @ v


def encrypt(block: Block, phi: SensingMatrix, *, allow_reuse: bool = False) -> Ciphertext:
    """y = phi @ x_prime.  Consumes ``phi`` unless ``allow_reuse`` is set.

    Reuse turns the scheme linear across blocks (scaling a plaintext scales
    the ciphertext) and opens it to chosen-plaintext attacks.
    """
    return Ciphertext(_measure(block.x_prime, phi, allow_reuse), CONCEALED)


def ots_encrypt(x, phi: SensingMatrix, *, allow_reuse: bool = False) -> Ciphertext:
    """Plain one-time sensing without concealment."""
    x = np.asarray(x, dtype=float).ravel()
    return Ciphertext(_measure(x, phi, allow_reuse), OTS)


def normalize_scheme(y, rng: np.random.Generator | int | None = None) -> Ciphertext:
    """Unit-norm ciphertext; a zero measurement becomes a random unit vector."""
    y = np.asarray(y, dtype=float).ravel()
    norm = float(np.linalg.norm(y))
    if norm**2 > 0:
        return Ciphertext(y / norm, NORMALIZED, norm)
    rng = np.random.default_rng(rng)
    u = rng.standard_normal(len(y))
    while not np.any(u):
        u = rng.standard_normal(len(y))
    return Ciphertext(u / np.linalg.norm(u), NORMALIZED, 0.0)


def eos_encrypt(
    x,
    phi: SensingMatrix,
    sigma_a: float,
    seed: np.random.Generator | int | None = None,
    *,
    allow_reuse: bool = False,
) -> Ciphertext:
    """Energy obfuscation: z = a * phi @ x with a = exp(N(0, sigma_a^2))."""
    if not sigma_a > 0:
        raise ValidationError("sigma_a must be positive")
    rng = np.random.default_rng(seed)
    a = float(np.exp(rng.normal(0.0, sigma_a)))
    x = np.asarray(x, dtype=float).ravel()
    return Ciphertext(a * _measure(x, phi, allow_reuse), EOS, a)


def default_e_max(blocks, factor: float = 1.2) -> float:
    """Public energy cap: ``factor`` times the largest block energy."""
    emax = max((energy(b) for b in blocks), default=0.0)
    return factor * emax if emax > 0 else 1.0
