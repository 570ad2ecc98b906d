"""Where the sensing-matrix entries come from.

Run: python3 demos/01_keystream.py
"""

# %% A key is L shift registers: L-1 primitive LFSRs and one NFSR.
import math

import numpy as np

from conceal_cs.keystream import SymbolGenerator, make_key, truncated_variance
from conceal_cs.sensing import build_matrix, period_report

key = make_key(rng=2024)
for spec, seed in zip(key.registers, key.seeds):
    print(f"{spec.kind:9s} degree {spec.degree:2d} taps {spec.taps} seed {seed:#x}")

# %% Each clock sums the +-1 outputs; the extremes +-L are thrown away.
gen = SymbolGenerator(key)
seq = gen.take(200_000)
values, counts = np.unique(seq.symbols, return_counts=True)
total = 2**key.L - 2
print("\nsymbol  observed  expected")
for v, c in zip(values, counts):
    expected = math.comb(key.L, (key.L - v) // 2) / total
    print(f"{v:+4d}    {c / len(seq):.4f}    {expected:.4f}")
print(f"variance {seq.symbols.var():.4f}, truncated-binomial value {truncated_variance(key.L):.4f}")
dropped = int(seq.positions[-1]) + 1 - len(seq)
print(f"limiter dropped {dropped} clocks, about 1 in {2 ** (key.L - 1)} expected")

# %% Matrices are filled row by row and scaled by 1/sqrt(L).
phi = build_matrix(gen, 64, 256)
print(f"\n64x256 matrix: mean {phi.entries.mean():+.4f}, var {phi.entries.var():.4f}")

# %% How long until a matrix could repeat?
rep = period_report(key, 64, 256)
print(f"lcm of LFSR periods ~ 2^{math.log2(rep.lower_bound_P):.1f}")
print(f"distinct 64x256 matrices before repetition ~ 2^{rep.log2_repeatability:.1f}")
