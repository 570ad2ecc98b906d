"""Cryptanalysis toolkit.

* superincreasing chosen-plaintext recovery of a +-1 sensing matrix
* counting the register-bit tuples consistent with a limited symbol stream
* Berlekamp-Massey over GF(2)
* empirical energy-leak probe and wrong-key decoding
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .codec import CONCEALED, Ciphertext, energy, strip_conceal
from .errors import (
    InconsistentInputError,
    UndefinedCorrelationError,
    ValidationError,
)
from .keystream import SymbolSequence, make_key
from .recovery import amse, build_dictionary, dct_dictionary, decode
from .sensing import BINOMIAL, SensingMatrix, build_matrix

# float64 holds every partial sum of +-2**j for j < 53 exactly
EXACT_FLOAT_LIMIT = 52


@dataclass
class SuperincreasingPlaintext:
    values: np.ndarray

    def __post_init__(self):
        if not is_superincreasing(self.values):
            raise ValidationError("values are not superincreasing")

    def __len__(self) -> int:
        return len(self.values)


def is_superincreasing(values) -> bool:
    total = Fraction(0)
    for i, v in enumerate(values):
        v = Fraction(v)
        if i == 0 and v <= 0:
            return False
        if i > 0 and v < total + 1:
            return False
        total += v
    return len(values) > 0


def make_superincreasing(N: int) -> SuperincreasingPlaintext:
    """Powers of two; Python ints once floats would stop being exact."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    if N <= EXACT_FLOAT_LIMIT:
        values = 2.0 ** np.arange(N)
    else:
        values = np.array([1 << i for i in range(N)], dtype=object)
    return SuperincreasingPlaintext(values)


def measure_exact(phi: np.ndarray, x: SuperincreasingPlaintext) -> np.ndarray:
    """phi @ x without rounding: float for short plaintexts, ints beyond."""
    phi = np.asarray(phi)
    if x.values.dtype == object:
        return np.array([sum(int(p) * v for p, v in zip(row, x.values)) for row in phi], dtype=object)
    return phi.astype(float) @ x.values


def recover_binomial_row(y_i, x: SuperincreasingPlaintext, row: int | None = None) -> np.ndarray:
    """Peel the +-1 coefficients off y_i from the largest plaintext entry down."""
    y = Fraction(y_i) if not isinstance(y_i, Fraction) else y_i
    values = [Fraction(v) for v in x.values]
    out = np.zeros(len(values), dtype=np.int8)
    for j in range(len(values) - 1, -1, -1):
        if y == 0:
            raise InconsistentInputError(f"partial sum hit zero with {j + 1} entries left", row)
        out[j] = 1 if y > 0 else -1
        y -= out[j] * values[j]
    if y != 0:
        raise InconsistentInputError(f"nonzero residue {float(y):g}", row)
    return out


def recover_binomial_matrix(y: Sequence, x: SuperincreasingPlaintext) -> SensingMatrix:
    rows = [recover_binomial_row(v, x, row=i) for i, v in enumerate(y)]
    return SensingMatrix(np.array(rows, dtype=float), BINOMIAL, 1.0)


@dataclass
class SequenceCensus:
    L: int
    counts: dict[int, int]

    def __post_init__(self):
        for s, r in self.counts.items():
            if abs(s) >= self.L or (s - self.L) % 2:
                raise ValidationError(f"symbol {s} is not a limited symbol for L={self.L}")
            if r < 0:
                raise ValidationError("negative count")

    @property
    def F(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_symbols(cls, symbols: SymbolSequence | Iterable[int], L: int | None = None):
        if isinstance(symbols, SymbolSequence):
            L = symbols.level if L is None else L
            symbols = symbols.symbols
        if L is None:
            raise ValidationError("level L required")
        return cls(L, dict(Counter(int(s) for s in symbols)))


@dataclass
class SequenceCount:
    total: int
    lower_bound: int


def sequence_count(census: SequenceCensus) -> SequenceCount:
    """Number of register-bit tuples that produce the census, with the L**F bound.

    A symbol L - 2i needs exactly i registers at -1, which can happen in
    C(L, i) ways; positions are independent.
    """
    L = census.L
    total = 1
    for s, r in census.counts.items():
        i = (L - s) // 2
        total *= math.comb(L, i) ** r
    bound = L**census.F
    if bound > total:
        raise AssertionError(f"lower bound {bound} exceeds count {total}")
    return SequenceCount(total, bound)


MAX_ENUM_L = 5
MAX_ENUM_F = 6


def enumerate_consistent_bitstreams(symbols: SymbolSequence | Sequence[int], L: int | None = None) -> int:
    """Count tuples of L +-1 streams whose per-position sums match ``symbols``.

    A tuple of L streams of length F is the same thing as a sequence of F
    columns in {-1, +1}**L, so the count is accumulated column by column:
    every one of the 2**L columns is tried at each position.  No binomial
    coefficients are used.
    """
    if isinstance(symbols, SymbolSequence):
        L = symbols.level if L is None else L
        symbols = symbols.symbols
    symbols = [int(s) for s in symbols]
    if L is None:
        raise ValidationError("level L required")
    if L > MAX_ENUM_L or len(symbols) > MAX_ENUM_F:
        raise ValidationError(f"enumeration refused beyond L={MAX_ENUM_L}, F={MAX_ENUM_F}")
    columns = list(itertools.product((-1, 1), repeat=L))
    count = 1
    for s in symbols:
        count *= sum(1 for col in columns if sum(col) == s)
    return count


@dataclass
class LinearComplexityReport:
    complexity: int
    # c_0..c_L of C(x) = 1 + c_1 x + ... + c_L x^L
    connection_polynomial: tuple[int, ...]

    def feedback_taps(self) -> tuple[int, ...]:
        """Taps in the Fibonacci register convention of the keystream module."""
        L = self.complexity
        return tuple(sorted(L - i for i in range(1, L + 1) if self.connection_polynomial[i]))

    def regenerate(self, initial: Sequence[int], n: int) -> list[int]:
        """Extend ``initial`` (at least L bits) to ``n`` bits with the recurrence."""
        c, L = self.connection_polynomial, self.complexity
        out = [int(b) for b in initial[:L]]
        while len(out) < n:
            k = len(out)
            bit = 0
            for i in range(1, L + 1):
                bit ^= c[i] & out[k - i]
            out.append(bit)
        return out[:n]


def berlekamp_massey(bits: Sequence[int]) -> LinearComplexityReport:
    """Shortest LFSR generating ``bits`` over GF(2)."""
    s = [int(b) & 1 for b in bits]
    n = len(s)
    if n < 2:
        raise ValidationError("need at least two bits")
    C = [1] + [0] * n
    B = [1] + [0] * n
    L, m = 0, 1
    for k in range(n):
        d = s[k]
        for i in range(1, L + 1):
            d ^= C[i] & s[k - i]
        if d == 0:
            m += 1
            continue
        T = C[:]
        for i in range(m, n + 1):
            C[i] ^= B[i - m]
        if 2 * L <= k:
            L, B, m = k + 1 - L, T, 1
        else:
            m += 1
    return LinearComplexityReport(L, tuple(C[: L + 1]))


def regenerates(bits: Sequence[int], connection: Sequence[int]) -> bool:
    """True if the LFSR with this connection polynomial reproduces ``bits``."""
    L = len(connection) - 1
    s = [int(b) for b in bits]
    for k in range(L, len(s)):
        bit = 0
        for i in range(1, L + 1):
            bit ^= connection[i] & s[k - i]
        if bit != s[k]:
            return False
    return True


LEAK_THRESHOLD = 0.1


@dataclass
class LeakReport:
    correlation: float
    leaky: bool
    threshold: float = LEAK_THRESHOLD

    @property
    def verdict(self) -> str:
        return "leaky" if self.leaky else "sealed"


def energy_leak_probe(pairs, threshold: float = LEAK_THRESHOLD) -> LeakReport:
    """Pearson correlation between plaintext and ciphertext energies.

    ``pairs`` holds (plaintext, ciphertext) tuples; ciphertexts may be
    :class:`Ciphertext` objects or raw vectors.  The 0.1 threshold is a test
    constant, not a derived bound.
    """
    pairs = list(pairs)
    if len(pairs) < 30:
        raise ValidationError("energy leak probe needs at least 30 pairs")
    ex = np.array([energy(p) for p, _ in pairs])
    ey = np.array([energy(c.y if isinstance(c, Ciphertext) else c) for _, c in pairs])
    if np.ptp(ex) == 0 or np.ptp(ey) == 0:
        raise UndefinedCorrelationError("zero variance in plaintext or ciphertext energies")
    r = float(np.corrcoef(ex, ey)[0, 1])
    return LeakReport(r, abs(r) >= threshold, threshold)


@dataclass
class WrongKeyReport:
    legit_amse: float
    wrong_amse: np.ndarray
    wrong_recons: list[np.ndarray]

    @property
    def min_ratio(self) -> float:
        floor = max(self.legit_amse, np.finfo(float).tiny)
        return float(np.min(self.wrong_amse) / floor)


def wrong_matrix_decode(
    ct: Ciphertext,
    true_x,
    true_phi: SensingMatrix,
    trials: int,
    rng: np.random.Generator | int | None = None,
    L: int = 11,
    candidates: Sequence[SensingMatrix] | None = None,
) -> WrongKeyReport:
    """Decode ``ct`` with freshly keyed matrices an adversary might guess.

    ``candidates`` replaces the random guesses (used for control arms).
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    concealed = ct.scheme == CONCEALED
    N = true_phi.N
    dictionary = build_dictionary(N) if concealed else dct_dictionary(N)
    view = strip_conceal if concealed else (lambda v: v)

    def attempt(phi):
        return view(decode(ct, phi, dictionary).x_prime_hat)

    legit = amse([true_x], [attempt(true_phi)])
    if candidates is None:
        rng = np.random.default_rng(rng)
        kind = true_phi.source
        level = 3 if kind == BINOMIAL else L
        candidates = [
            build_matrix(make_key(level, rng=rng), true_phi.M, N, kind, rng=rng)
            for _ in range(trials)
        ]
    recons = [attempt(phi) for phi in candidates]
    wrong = np.array([amse([true_x], [r]) for r in recons])
    return WrongKeyReport(legit, wrong, recons)
