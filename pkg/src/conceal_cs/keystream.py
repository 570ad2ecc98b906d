"""Shift-register bit streams and the Binomial-sum symbol stream.

L registers (L-1 linear, one nonlinear) are clocked together.  Each output
bit is mapped 0 -> -1, 1 -> +1 and the L values are summed into a raw symbol
in {-L, -L+2, ..., L}.  The limiter drops the two extreme symbols, which
occur only when every register emits the same bit and would therefore leak
the register outputs directly.

Registers use the Fibonacci configuration.  A state is an integer whose bit
``i`` is stage ``i``; stage 0 is the emitted bit and the feedback bit enters
at stage ``degree - 1``.  With taps ``T`` the emitted sequence obeys

    s[n + degree] = XOR_{t in T} s[n + t]  (XOR AND-terms for an NFSR)

so the characteristic polynomial of a linear register is
``x**degree + sum(x**t for t in T)``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DegenerateStateError, ValidationError

LINEAR = "linear"
NONLINEAR = "nonlinear"

# Primitive polynomials x^d + sum(x^t); every entry is checked by is_primitive
# in the test-suite.
PRIMITIVE_TAPS: dict[int, tuple[int, ...]] = {
    3: (0, 1),
    4: (0, 1),
    5: (0, 2),
    6: (0, 1),
    7: (0, 1),
    8: (0, 2, 3, 4),
    9: (0, 4),
    10: (0, 3),
    11: (0, 2),
    12: (0, 1, 4, 6),
    13: (0, 1, 3, 4),
    14: (0, 1, 3, 5),
    15: (0, 1),
    16: (0, 2, 3, 5),
    17: (0, 3),
    18: (0, 7),
    19: (0, 1, 2, 5),
    20: (0, 3),
    21: (0, 2),
    22: (0, 1),
    23: (0, 5),
    24: (0, 1, 2, 7),
    25: (0, 3),
    26: (0, 1, 2, 6),
    27: (0, 1, 2, 5),
    28: (0, 3),
    29: (0, 2),
    30: (0, 1, 4, 6),
    31: (0, 3),
    32: (0, 2, 6, 7),
}

DEFAULT_LEVEL = 11
# Ten distinct degrees around 20; the lcm of their periods is ~2**206.
DEFAULT_LFSR_DEGREES = (19, 20, 21, 22, 23, 24, 25, 26, 27, 28)
DEFAULT_NFSR_DEGREE = 7
# AND terms that, on top of the primitive taps, give a single cycle through
# all 2**d - 1 nonzero states (so the output is balanced).  Checked in tests.
NFSR_TERMS: dict[int, tuple[tuple[int, int], ...]] = {
    5: ((1, 2), (3, 4)),
    6: ((1, 2), (4, 5)),
    7: ((1, 5), (3, 4)),
    8: ((1, 2), (2, 4)),
    9: ((1, 3), (2, 8)),
    10: ((1, 2), (2, 8)),
    11: ((4, 5), (6, 10)),
    12: ((1, 2), (1, 8)),
    13: ((1, 9), (3, 5)),
    14: ((1, 6), (2, 3)),
}
MAX_DEGREE = 64


@dataclass(frozen=True)
class RegisterSpec:
    degree: int
    taps: tuple[int, ...]
    kind: str = LINEAR
    nonlinear_terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "taps", tuple(sorted(set(int(t) for t in self.taps))))
        object.__setattr__(
            self,
            "nonlinear_terms",
            tuple(tuple(sorted((int(a), int(b)))) for a, b in self.nonlinear_terms),
        )
        if not 2 <= self.degree <= MAX_DEGREE:
            raise ConfigError(f"register degree must be in [2, {MAX_DEGREE}], got {self.degree}")
        if self.kind not in (LINEAR, NONLINEAR):
            raise ConfigError(f"unknown register kind {self.kind!r}")
        if not self.taps:
            raise ConfigError("register needs at least one tap")
        for t in self.taps:
            if not 0 <= t < self.degree:
                raise ConfigError(f"tap {t} outside [0, {self.degree})")
        if self.kind == LINEAR and self.nonlinear_terms:
            raise ConfigError("linear register cannot carry nonlinear terms")
        for a, b in self.nonlinear_terms:
            if a == b or not (0 <= a < self.degree and 0 <= b < self.degree):
                raise ConfigError(f"bad nonlinear term ({a}, {b}) for degree {self.degree}")

    @property
    def is_linear(self) -> bool:
        return self.kind == LINEAR

    @property
    def max_index(self) -> int:
        idx = list(self.taps) + [i for term in self.nonlinear_terms for i in term]
        return max(idx)

    def feedback(self, state: int) -> int:
        """Feedback bit for an integer state."""
        fb = 0
        for t in self.taps:
            fb ^= state >> t
        for a, b in self.nonlinear_terms:
            fb ^= (state >> a) & (state >> b)
        return fb & 1


def lfsr_spec(degree: int) -> RegisterSpec:
    try:
        taps = PRIMITIVE_TAPS[degree]
    except KeyError:
        raise ConfigError(f"no built-in primitive polynomial for degree {degree}") from None
    return RegisterSpec(degree, taps)


def nfsr_spec(degree: int = DEFAULT_NFSR_DEGREE, terms=None) -> RegisterSpec:
    """NFSR with the primitive linear taps of ``degree`` plus AND terms.

    Without explicit ``terms`` only degrees in ``NFSR_TERMS`` are accepted.
    """
    if terms is None:
        try:
            terms = NFSR_TERMS[degree]
        except KeyError:
            raise ConfigError(f"no built-in NFSR for degree {degree}; pass terms explicitly") from None
    return RegisterSpec(degree, lfsr_spec(degree).taps, NONLINEAR, tuple(terms))


def bits_to_int(bits: Sequence[int]) -> int:
    """Pack a stage-ordered bit vector (stage 0 first) into an integer."""
    return sum((int(b) & 1) << i for i, b in enumerate(bits))


def int_to_bits(value: int, degree: int) -> tuple[int, ...]:
    return tuple((value >> i) & 1 for i in range(degree))


def register_step(spec: RegisterSpec, state: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Clock one register once.

    ``state`` is a bit vector with stage 0 first.  Returns the emitted bit and
    the new state.
    """
    state = tuple(int(b) & 1 for b in state)
    if len(state) != spec.degree:
        raise ValidationError(f"state has {len(state)} bits, register degree is {spec.degree}")
    if spec.is_linear and not any(state):
        raise DegenerateStateError("all-zero state is a fixed point of a linear register")
    fb = 0
    for t in spec.taps:
        fb ^= state[t]
    for a, b in spec.nonlinear_terms:
        fb ^= state[a] & state[b]
    return state[0], state[1:] + (fb,)


class ShiftRegister:
    """Stateful register that emits bits in word-parallel chunks."""

    def __init__(self, spec: RegisterSpec, state: int):
        if not 0 <= state < (1 << spec.degree):
            raise ValidationError(f"seed does not fit in {spec.degree} bits")
        if spec.is_linear and state == 0:
            raise DegenerateStateError("all-zero seed on a linear register")
        self.spec = spec
        self.state = state
        # s[n + d + j] only depends on already-known stages while j < d - max_index
        self._chunk = min(spec.degree - spec.max_index, 64)

    def step(self) -> int:
        out = self.state & 1
        fb = self.spec.feedback(self.state)
        self.state = (self.state >> 1) | (fb << (self.spec.degree - 1))
        return out

    def bits(self, n: int) -> np.ndarray:
        """Emit the next ``n`` bits as a uint8 array."""
        if n <= 0:
            return np.zeros(0, dtype=np.uint8)
        d, k = self.spec.degree, self._chunk
        taps, terms = self.spec.taps, self.spec.nonlinear_terms
        s = self.state
        chunks = []
        remaining = n
        while remaining > 0:
            step = k if remaining >= k else remaining
            mask = (1 << step) - 1
            fb = 0
            for t in taps:
                fb ^= s >> t
            for a, b in terms:
                fb ^= (s >> a) & (s >> b)
            chunks.append(s & mask)
            s = (s >> step) | ((fb & mask) << (d - step))
            remaining -= step
        self.state = s
        words = np.array(chunks, dtype=np.uint64)
        shifts = np.arange(k, dtype=np.uint64)
        out = ((words[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
        return out.ravel()[:n]

    def cycle_length(self, cap: int | None = None) -> int | None:
        """Steps until the current state recurs, or None past ``cap``.

        Only meaningful for invertible feedback (taps include stage 0).
        """
        start = s = self.state
        d = self.spec.degree
        count = 0
        while True:
            s = (s >> 1) | (self.spec.feedback(s) << (d - 1))
            count += 1
            if s == start:
                return count
            if cap is not None and count >= cap:
                return None


def raw_symbol(bits: Sequence[int]) -> int:
    """Sum of the +-1 mapped register outputs."""
    return sum(1 if b else -1 for b in bits)


def limiter(f: int, level: int) -> int | None:
    """Drop the extreme symbols +-level; None means no symbol for this clock."""
    return None if abs(f) == level else f


@dataclass(frozen=True)
class Key:
    registers: tuple[RegisterSpec, ...]
    seeds: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "registers", tuple(self.registers))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        L = len(self.registers)
        if L < 3 or L % 2 == 0:
            raise ConfigError(f"L must be odd and >= 3, got {L}")
        if len(self.seeds) != L:
            raise ConfigError("one seed per register required")
        if sum(not r.is_linear for r in self.registers) != 1:
            raise ConfigError("key must hold exactly one nonlinear register")
        for spec, seed in zip(self.registers, self.seeds):
            if not 0 <= seed < (1 << spec.degree):
                raise ConfigError(f"seed {seed:#x} does not fit degree {spec.degree}")
            if seed == 0:
                raise ConfigError("all-zero seeds are not allowed")

    @property
    def L(self) -> int:
        return len(self.registers)

    @property
    def lfsrs(self) -> list[RegisterSpec]:
        return [r for r in self.registers if r.is_linear]

    @property
    def nfsr(self) -> RegisterSpec:
        return next(r for r in self.registers if not r.is_linear)

    def seed_bits(self, i: int) -> tuple[int, ...]:
        return int_to_bits(self.seeds[i], self.registers[i].degree)


def make_key(
    L: int = DEFAULT_LEVEL,
    degrees: Iterable[int] | None = None,
    nfsr_degree: int = DEFAULT_NFSR_DEGREE,
    rng: np.random.Generator | int | None = None,
) -> Key:
    """Build a key with primitive LFSRs and random nonzero seeds.

    ``degrees`` lists the L-1 LFSR degrees; by default the first L-1 entries
    of ``DEFAULT_LFSR_DEGREES`` (cycled if L is large).
    """
    if L < 3 or L % 2 == 0:
        raise ConfigError(f"L must be odd and >= 3, got {L}")
    if degrees is None:
        base = DEFAULT_LFSR_DEGREES
        degrees = [base[i % len(base)] for i in range(L - 1)]
    degrees = list(degrees)
    if len(degrees) != L - 1:
        raise ConfigError(f"need {L - 1} LFSR degrees for L={L}, got {len(degrees)}")
    rng = np.random.default_rng(rng)
    registers = [lfsr_spec(d) for d in degrees] + [nfsr_spec(nfsr_degree)]
    seeds = [_random_seed(rng, r.degree) for r in registers]
    return Key(tuple(registers), tuple(seeds))


def _random_seed(rng: np.random.Generator, degree: int) -> int:
    while True:
        seed = int.from_bytes(rng.bytes(8), "little") & ((1 << degree) - 1)
        if seed:
            return seed


def derive_block_key(key: Key, block_index: int) -> Key:
    """Per-block key: same registers, seeds mixed with the block index."""
    seeds = []
    for i, (spec, seed) in enumerate(zip(key.registers, key.seeds)):
        h = hashlib.blake2b(digest_size=8)
        h.update(seed.to_bytes(8, "little"))
        h.update(i.to_bytes(4, "little"))
        h.update(int(block_index).to_bytes(8, "little"))
        s = int.from_bytes(h.digest(), "little") & ((1 << spec.degree) - 1)
        seeds.append(s or 1)
    return Key(key.registers, tuple(seeds))


@dataclass
class SymbolSequence:
    symbols: np.ndarray
    level: int
    # raw clock index of each symbol; None for hand-built sequences
    positions: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.symbols)


class SymbolGenerator:
    """Sequential generator of the limited symbol stream for one key.

    Not safe to share between concurrent callers.
    """

    def __init__(self, key: Key):
        self.key = key
        self.level = key.L
        self._registers = [ShiftRegister(spec, seed) for spec, seed in zip(key.registers, key.seeds)]
        self._clock = 0  # raw cycles already generated
        self._buf = np.zeros(0, dtype=np.int64)
        self._buf_pos = np.zeros(0, dtype=np.int64)

    @property
    def clock(self) -> int:
        """Raw clock index just past the last symbol handed out."""
        if len(self._buf_pos):
            return int(self._buf_pos[0])
        return self._clock

    def raw(self, n: int) -> np.ndarray:
        """Next ``n`` raw (unlimited) symbols.  Clocks the registers directly,
        so do not interleave with :meth:`take` on one instance."""
        ones = sum(r.bits(n).astype(np.int64) for r in self._registers)
        self._clock += n
        return 2 * ones - self.level

    def take(self, n: int) -> SymbolSequence:
        if n < 1:
            raise ValidationError("must request at least one symbol")
        buf, pos = [self._buf], [self._buf_pos]
        have = len(self._buf)
        # extremes occur with probability 2**(1-L); oversample slightly
        while have < n:
            want = n - have
            batch = want + want // (1 << (self.level - 2)) + 16
            start = self._clock
            raw = self.raw(batch)
            keep = np.abs(raw) != self.level
            buf.append(raw[keep])
            pos.append(start + np.flatnonzero(keep))
            have += int(keep.sum())
        allbuf, allpos = np.concatenate(buf), np.concatenate(pos)
        self._buf, self._buf_pos = allbuf[n:], allpos[n:]
        return SymbolSequence(allbuf[:n], self.level, allpos[:n])


def take_symbols(key: Key, n: int) -> SymbolSequence:
    """First ``n`` post-limiter symbols of the key's stream."""
    return SymbolGenerator(key).take(n)


def truncated_variance(level: int) -> float:
    """Exact variance of a limited symbol under ideal Bernoulli(1/2) bits."""
    num = sum((level - 2 * i) ** 2 * math.comb(level, i) for i in range(1, level))
    return num / (2**level - 2)


# GF(2) polynomial helpers; polynomials are ints with bit i = coeff of x^i.

def _polymulmod(a: int, b: int, mod: int, deg: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if (a >> deg) & 1:
            a ^= mod
    return out


def _polypowmod(base: int, e: int, mod: int, deg: int) -> int:
    result = 1
    while e:
        if e & 1:
            result = _polymulmod(result, base, mod, deg)
        base = _polymulmod(base, base, mod, deg)
        e >>= 1
    return result


def characteristic_polynomial(spec: RegisterSpec) -> int:
    return (1 << spec.degree) | reduce(lambda acc, t: acc | (1 << t), spec.taps, 0)


def connection_polynomial(spec: RegisterSpec) -> tuple[int, ...]:
    """Coefficients c_0..c_d of 1 + sum c_i x^i with s[n] = XOR c_i s[n-i]."""
    coeffs = [0] * (spec.degree + 1)
    coeffs[0] = 1
    for t in spec.taps:
        coeffs[spec.degree - t] = 1
    return tuple(coeffs)


def is_primitive(degree: int, taps: Iterable[int]) -> bool:
    """True if x^degree + sum(x^t) is primitive over GF(2)."""
    from sympy import factorint

    taps = set(taps)
    if 0 not in taps:
        return False
    mod = (1 << degree) | sum(1 << t for t in taps)
    order = (1 << degree) - 1
    x = 0b10 if degree > 1 else 0b10 ^ mod
    if _polypowmod(x, order, mod, degree) != 1:
        return False
    return all(_polypowmod(x, order // q, mod, degree) != 1 for q in factorint(order))
