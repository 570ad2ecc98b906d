"""Energy concealment end to end, in memory and through files.

Run: python3 demos/02_encrypt_decrypt.py
"""

# %% Plaintext blocks of length N-1; concealment brings each to length N.
import tempfile
from pathlib import Path

import numpy as np

from conceal_cs.codec import conceal, default_e_max, energy
from conceal_cs.fileio import key_id, read_ciphertext, save_key, write_ciphertext
from conceal_cs.keystream import make_key
from conceal_cs.pipeline import decrypt_blocks, encrypt_blocks
from conceal_cs.recovery import amse
from conceal_cs.signals import sparse_dct_block

rng = np.random.default_rng(7)
N, M = 64, 32
blocks = [sparse_dct_block(N, 5, rng) * rng.uniform(0.2, 3.0) for _ in range(6)]
E_max = default_e_max(blocks)
print(f"public energy cap E_max = {E_max:.3f}")
for x in blocks:
    b = conceal(x, E_max)
    print(f"  |x|^2 = {energy(x):7.3f}  c = {b.c:6.3f}  |x'|^2 = {energy(b.x_prime):.6f}")

# %% Every block gets a fresh matrix from the same keyed stream.
key = make_key(rng=99)
cf = encrypt_blocks(key, blocks, M, E_max)
# their energies move with the random matrix, not with |x|^2
print("\nciphertext energies:", np.round(np.sum(cf.blocks**2, axis=1), 2))

# %% Round trip through the key and ciphertext file formats.
with tempfile.TemporaryDirectory() as tmp:
    save_key(key, Path(tmp) / "key.json")
    write_ciphertext(cf, Path(tmp) / "blocks.ccs")
    back = read_ciphertext(Path(tmp) / "blocks.ccs")
    print("header:", back.header)
    recovered = decrypt_blocks(key, back)
print(f"AMSE after decryption: {amse(blocks, recovered):.2e}")

# %% The wrong key gives noise of the right energy, not the plaintext.
wrong = make_key(rng=100)
cf.header["key_id"] = key_id(wrong)  # bypass the key check on purpose
garbage = decrypt_blocks(wrong, cf)
print(f"AMSE with a wrong key:  {amse(blocks, garbage):.2e}")
