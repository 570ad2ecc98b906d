"""Does concealment cost reconstruction quality?

Two sweeps, both through the experiment harness:

1. keystream matrices against i.i.d. Gaussian ones on exactly sparse signals;
2. concealed two-basis decoding against plain one-time sensing with DCT
   decoding on compressible ECG-like blocks, at N=64 and at N=256.

At N=64 the concealed decoder searches 128 atoms with only 19-32
measurements.  Plain l1 over that dictionary falls well behind the DCT
baseline at low measurement ratios; leaving the concealing spike out of the
penalty (the decoder knows where it sits) brings it back within 2x.  At
N=256 the concealed decoder comes out well ahead.  Part of that edge is the
synthetic source: the blocks are cut from signals that are sparse on the
N-point DCT grid, so their (N-1)-point DCT is only approximately sparse and
the baseline decoder pays for it.

Run: python3 demos/03_recovery_parity.py   (about a minute)
"""

# %%
from collections import defaultdict

import numpy as np

from conceal_cs.codec import conceal, default_e_max, encrypt
from conceal_cs.experiments import ExperimentConfig, run_experiment
from conceal_cs.keystream import SymbolGenerator, make_key
from conceal_cs.recovery import amse, build_dictionary, decode
from conceal_cs.sensing import build_matrix
from conceal_cs.signals import ecg_like_block


def summarize(rows):
    table = defaultdict(dict)
    for r in rows:
        if r["trial"] == "mean":
            table[r["value"]][r["scheme"]] = (r["amse"], r["success_rate"])
    return dict(table)


# %% Keystream vs Gaussian matrices, exact recovery rate per sparsity.
cfg = ExperimentConfig(kind="matrix", N=64, M_values=[32], K_values=[2, 4, 6, 8, 10, 12], trials=50, seed=1)
print("K   lfsr-gaussian  reference-gaussian   (exact-recovery rate)")
for K, by_scheme in summarize(run_experiment(cfg)).items():
    print(f"{K:<3d} {by_scheme['lfsr-gaussian'][1]:>10.2f} {by_scheme['reference-gaussian'][1]:>16.2f}")

# %% Concealed two-basis vs plain DCT decoding.
for N, blocks in ((64, 100), (256, 30)):
    cfg = ExperimentConfig(kind="two-basis", N=N, rho_values=[0.3, 0.4, 0.5], blocks=blocks, seed=2)
    print(f"\nN={N}, {blocks} blocks: mean AMSE")
    print("rho   ots-dct     concealed   ratio")
    for rho, by_scheme in summarize(run_experiment(cfg)).items():
        ots, con = by_scheme["ots-dct"][0], by_scheme["concealed-two-basis"][0]
        print(f"{rho:<5} {ots:.3e}   {con:.3e}   {con / ots:5.2f}")

# %% The spike prior at N=64, rho=0.3: plain vs weighted l1 on the same ciphertexts.
rng = np.random.default_rng(5)
gen = SymbolGenerator(make_key(rng=5))
blocks = [ecg_like_block(64, rng) for _ in range(50)]
E_max = default_e_max(blocks)
D = build_dictionary(64)
errs = {"plain l1": [], "spike unpenalized": []}
for x in blocks:
    phi = build_matrix(gen, 19, 64)
    ct = encrypt(conceal(x, E_max), phi)
    errs["plain l1"].append(amse([x], [decode(ct, phi, D, concealed=False).x_prime_hat[1:]]))
    errs["spike unpenalized"].append(amse([x], [decode(ct, phi, D).x_prime_hat[1:]]))
print()
for name, e in errs.items():
    print(f"{name:>18s}: mean AMSE {np.mean(e):.3e}")
