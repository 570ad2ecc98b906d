"""Synthetic plaintext sources and the CSV signal format.

Blocks are synthesized on the N-point DCT grid and the first sample is
dropped, giving N-1 plaintext samples.  After concealment the vector
[c, x_1, ..., x_{N-1}] differs from the synthesized signal only in entry 0,
so it is the sum of a DCT-sparse part and a single spike, which is exactly
the two-basis model the decoder assumes.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import FormatError
from .recovery import dct_matrix


def sparse_dct_signal(N: int, K: int, rng: np.random.Generator, amplitude=(1.0, 2.0)) -> np.ndarray:
    """Length-N signal with exactly K nonzero DCT coefficients of random sign."""
    rng = np.random.default_rng(rng)
    theta = np.zeros(N)
    idx = rng.choice(N, size=K, replace=False)
    lo, hi = amplitude
    theta[idx] = rng.uniform(lo, hi, size=K) * rng.choice([-1.0, 1.0], size=K)
    return dct_matrix(N) @ theta


def sparse_dct_block(N: int, K: int, rng: np.random.Generator, amplitude=(1.0, 2.0)) -> np.ndarray:
    """Plaintext block (length N-1) whose concealed form is (K+1)-sparse in [DCT | I]."""
    return sparse_dct_signal(N, K, rng, amplitude)[1:]


def sparse_canonical_block(N: int, K: int, rng: np.random.Generator, amplitude=(1.0, 2.0)) -> np.ndarray:
    """Length N-1 block with K nonzero samples."""
    rng = np.random.default_rng(rng)
    x = np.zeros(N - 1)
    idx = rng.choice(N - 1, size=K, replace=False)
    lo, hi = amplitude
    x[idx] = rng.uniform(lo, hi, size=K) * rng.choice([-1.0, 1.0], size=K)
    return x


def ecg_like_signal(
    N: int,
    rng: np.random.Generator,
    n_atoms: tuple[int, int] = (3, 8),
    decay: float = 0.6,
    noise: float = 0.01,
) -> np.ndarray:
    """Compressible length-N signal: a few low-frequency DCT atoms with
    geometrically decaying amplitudes plus small dense Gaussian noise."""
    rng = np.random.default_rng(rng)
    k = int(rng.integers(n_atoms[0], n_atoms[1] + 1))
    band = max(k, N // 4)
    idx = np.sort(rng.choice(band, size=k, replace=False))
    theta = np.zeros(N)
    theta[idx] = decay ** np.arange(k) * rng.uniform(0.5, 1.5, size=k) * rng.choice([-1.0, 1.0], size=k)
    s = dct_matrix(N) @ theta
    return s + noise * np.std(s) * rng.standard_normal(N)


def ecg_like_block(N: int, rng: np.random.Generator, **kw) -> np.ndarray:
    return ecg_like_signal(N, rng, **kw)[1:]


def write_blocks_csv(blocks, path: str | Path | None = None) -> str:
    """One block per row; the header names every sample column (s1..sL)."""
    blocks = [np.asarray(b, dtype=float).ravel() for b in blocks]
    if not blocks:
        raise FormatError("no blocks to write")
    length = len(blocks[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"s{i + 1}" for i in range(length)])
    for b in blocks:
        if len(b) != length:
            raise FormatError("all blocks must have the same length")
        w.writerow([f"{v:.17g}" for v in b])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_blocks_csv(path: str | Path) -> list[np.ndarray]:
    text = Path(path).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise FormatError(f"{path}: empty signal file")
    length = len(rows[0])
    blocks = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != length:
            raise FormatError(f"{path}:{lineno}: expected {length} values, got {len(row)}")
        try:
            blocks.append(np.array([float(v) for v in row]))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
    return blocks
