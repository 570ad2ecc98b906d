"""What an adversary can and cannot do.

Run: python3 demos/04_attacks.py
"""

# %% Chosen plaintext: a superincreasing x exposes a +-1 matrix row by row.
import numpy as np

from conceal_cs.attacks import (
    SequenceCensus,
    berlekamp_massey,
    make_superincreasing,
    measure_exact,
    recover_binomial_matrix,
    sequence_count,
)
from conceal_cs.experiments import run_attack_demo
from conceal_cs.keystream import ShiftRegister, lfsr_spec, make_key, take_symbols

rng = np.random.default_rng(3)
x = make_superincreasing(32)
phi = rng.choice([-1.0, 1.0], size=(10, 32))
y = measure_exact(phi, x)
print("binomial matrix recovered exactly:", np.array_equal(recover_binomial_matrix(y, x).entries, phi))

# %% With L registers summed, one symbol pins down far fewer bits.
seq = take_symbols(make_key(rng=3), 320)
count = sequence_count(SequenceCensus.from_symbols(seq))
print(f"bit tuples consistent with 320 symbols at L=11: ~2^{count.total.bit_length() - 1}")
print(f"  (lower bound L^F = 2^{count.lower_bound.bit_length() - 1})")

# %% A lone LFSR falls to Berlekamp-Massey after 2d output bits.
spec = lfsr_spec(16)
rep = berlekamp_massey(ShiftRegister(spec, 0xBEEF).bits(32))
print(f"\nlinear complexity {rep.complexity}, recovered taps {rep.feedback_taps()}, true taps {spec.taps}")

# %% The summed stream is much harder: its linear complexity keeps growing.
for n in (200, 400, 800):
    bits = (take_symbols(make_key(rng=5), n).symbols > 0).astype(int)
    print(f"  sign bits of {n} symbols: linear complexity {berlekamp_massey(bits).complexity}")

# %% Energy leakage: plain OTS vs concealment vs energy obfuscation.
print()
for row in run_attack_demo("eos-compare", seed=0):
    print(f"{row['scheme']:>16s}  corr(E_x, E_y) = {row['statistic']:+.3f}  {row['verdict']}")
for row in run_attack_demo("energy-leak", seed=0):
    if row["scheme"] == "ots":
        print(f"{'plain ots':>16s}  corr(E_x, E_y) = {row['statistic']:+.3f}  {row['verdict']}")
