"""Multi-block encryption and decryption with a single key.

Blocks are encrypted in order with consecutive one-time matrices from one
symbol generator; the receiver replays the same stream to rebuild them.
"""

from __future__ import annotations

import numpy as np

from .codec import CONCEALED, OTS, conceal, default_e_max, encrypt, ots_encrypt, strip_conceal
from .errors import ConfigError, EnergyOverflowError, FormatError
from .fileio import CiphertextFile, key_id
from .keystream import Key, SymbolGenerator
from .recovery import build_dictionary, dct_dictionary, decode
from .sensing import build_matrix


def encrypt_blocks(
    key: Key,
    blocks,
    M: int,
    E_max: float | None = None,
    scheme: str = CONCEALED,
) -> CiphertextFile:
    blocks = [np.asarray(b, dtype=float).ravel() for b in blocks]
    if not blocks:
        raise ConfigError("no plaintext blocks")
    if scheme not in (CONCEALED, OTS):
        raise ConfigError(f"file encryption supports 'concealed' and 'ots', not {scheme!r}")
    length = len(blocks[0])
    N = length + 1 if scheme == CONCEALED else length
    if E_max is None:
        E_max = default_e_max(blocks)
    gen = SymbolGenerator(key)
    out = []
    for i, x in enumerate(blocks):
        if len(x) != length:
            raise ConfigError(f"block {i} has length {len(x)}, expected {length}")
        phi = build_matrix(gen, M, N)
        if scheme == CONCEALED:
            try:
                block = conceal(x, E_max)
            except EnergyOverflowError as exc:
                raise EnergyOverflowError(exc.energy, exc.e_max, block_index=i) from None
            out.append(encrypt(block, phi).y)
        else:
            out.append(ots_encrypt(x, phi).y)
    header = {
        "scheme": scheme,
        "N": N,
        "M": M,
        "L": key.L,
        "E_max": float(E_max),
        "block_count": len(out),
        "key_id": key_id(key),
    }
    return CiphertextFile(header, np.array(out))


def decrypt_blocks(key: Key, cf: CiphertextFile, method: str = "bp") -> list[np.ndarray]:
    h = cf.header
    if h["key_id"] != key_id(key):
        raise FormatError("ciphertext was produced with a different key")
    if h["L"] != key.L:
        raise FormatError(f"ciphertext expects L={h['L']}, key has L={key.L}")
    N, M = int(h["N"]), int(h["M"])
    concealed = h["scheme"] == CONCEALED
    dictionary = build_dictionary(N) if concealed else dct_dictionary(N)
    gen = SymbolGenerator(key)
    out = []
    for y in cf.blocks:
        phi = build_matrix(gen, M, N)
        x_hat = decode(y, phi, dictionary, method=method, concealed=concealed).x_prime_hat
        out.append(strip_conceal(x_hat) if concealed else x_hat)
    return out
