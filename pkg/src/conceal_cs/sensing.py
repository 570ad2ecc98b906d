"""Sensing matrices built from the keyed symbol stream, plus periodicity.

``lfsr-gaussian`` matrices hold limited symbols divided by sqrt(L) so each
entry has (nearly) unit variance.  ``binomial`` is the L = 3 case, whose
entries are +-1 with no scaling.  ``reference-gaussian`` draws i.i.d. standard
normals from a seeded numpy generator and exists only as a baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from pathlib import Path

import numpy as np

from .errors import ConfigError, ShapeError
from .keystream import Key, ShiftRegister, SymbolGenerator

LFSR_GAUSSIAN = "lfsr-gaussian"
BINOMIAL = "binomial"
REFERENCE_GAUSSIAN = "reference-gaussian"
SOURCES = (LFSR_GAUSSIAN, BINOMIAL, REFERENCE_GAUSSIAN)

PERIOD_CAP = 2**24


@dataclass
class SensingMatrix:
    entries: np.ndarray
    source: str
    scale: float = 1.0
    # half-open range of raw clock positions the entries were drawn from
    clock_range: tuple[int, int] | None = None
    used: bool = field(default=False, compare=False)

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    def symbols(self) -> np.ndarray:
        """Integer symbols behind the entries (keystream sources only)."""
        return np.rint(self.entries * self.scale).astype(np.int64)


def _check_shape(M: int, N: int):
    if M < 1 or N < 1:
        raise ShapeError(f"matrix dimensions must be positive, got {M}x{N}")
    if M >= N:
        raise ShapeError(f"need M < N for compressive sensing, got M={M}, N={N}")


def build_matrix(
    source: Key | SymbolGenerator | None,
    M: int,
    N: int,
    kind: str = LFSR_GAUSSIAN,
    rng: np.random.Generator | int | None = None,
) -> SensingMatrix:
    """Fill an M x N sensing matrix row-major from the next M*N symbols.

    Passing a :class:`Key` starts a fresh stream; passing a
    :class:`SymbolGenerator` continues it, so successive builds never share
    stream positions.  ``rng`` is only used for ``reference-gaussian``.
    """
    _check_shape(M, N)
    if kind == REFERENCE_GAUSSIAN:
        return reference_gaussian(M, N, rng)
    if kind not in SOURCES:
        raise ConfigError(f"unknown matrix source {kind!r}")
    if source is None:
        raise ConfigError(f"{kind} matrices need a key or generator")
    gen = SymbolGenerator(source) if isinstance(source, Key) else source
    if kind == BINOMIAL and gen.level != 3:
        raise ConfigError(f"binomial matrices need L=3, key has L={gen.level}")
    seq = gen.take(M * N)
    symbols = seq.symbols.reshape(M, N)
    scale = 1.0 if kind == BINOMIAL else math.sqrt(gen.level)
    clock_range = (int(seq.positions[0]), int(seq.positions[-1]) + 1)
    return SensingMatrix(symbols / scale, kind, scale, clock_range)


def reference_gaussian(M: int, N: int, rng: np.random.Generator | int | None = None) -> SensingMatrix:
    _check_shape(M, N)
    rng = np.random.default_rng(rng)
    return SensingMatrix(rng.standard_normal((M, N)), REFERENCE_GAUSSIAN, 1.0)


def matrix_stream(key: Key, M: int, N: int, kind: str = LFSR_GAUSSIAN):
    """Endless iterator of one-time matrices from a single generator."""
    gen = SymbolGenerator(key)
    while True:
        yield build_matrix(gen, M, N, kind)


def dump_matrix_csv(phi: SensingMatrix, path: str | Path) -> None:
    """Debug dump: one row per line, 17 significant digits."""
    lines = [",".join(f"{v:.17g}" for v in row) for row in phi.entries]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class PeriodReport:
    lfsr_periods: list[int]
    lower_bound_P: int
    F_prime_period_estimate: int
    repeatability: Fraction

    @property
    def log2_repeatability(self) -> float:
        return math.log2(self.repeatability.numerator) - math.log2(self.repeatability.denominator)


def period_report(key: Key, M: int, N: int) -> PeriodReport:
    """Analytic period bound for the raw stream and matrix repeatability.

    Assumes primitive LFSRs (period 2**d - 1).  The limited-stream period is
    estimated as P - P / 2**(L-1) with P the lcm bound.
    """
    periods = [2**r.degree - 1 for r in key.lfsrs]
    P = reduce(math.lcm, periods, 1)
    P_prime = P - P // 2 ** (key.L - 1)
    return PeriodReport(periods, P, P_prime, Fraction(P_prime, M * N))


@dataclass
class MeasuredPeriod:
    period: int
    null_count: int
    register_cycles: list[int]

    @property
    def null_fraction(self) -> Fraction:
        return Fraction(self.null_count, self.period)


def _divisors(n: int) -> list[int]:
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def measure_period(key: Key, cap: int = PERIOD_CAP) -> MeasuredPeriod | None:
    """Smallest period of the raw symbol stream, found by direct generation.

    The joint state repeats after lcm(register cycle lengths) clocks, so the
    symbol period divides that; each divisor is tested against one full
    cycle of symbols.  Returns None when the state cycle exceeds ``cap``.
    """
    cycles = []
    for spec, seed in zip(key.registers, key.seeds):
        c = ShiftRegister(spec, seed).cycle_length(cap)
        if c is None:
            return None
        cycles.append(c)
    state_period = reduce(math.lcm, cycles, 1)
    if state_period > cap:
        return None
    raw = SymbolGenerator(key).raw(state_period)
    for p in _divisors(state_period):
        if np.array_equal(raw, np.roll(raw, -p)):
            break
    nulls = int(np.count_nonzero(np.abs(raw[:p]) == key.L))
    return MeasuredPeriod(p, nulls, cycles)
