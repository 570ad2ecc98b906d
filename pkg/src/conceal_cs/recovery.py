"""Sparse decoding over a DCT + identity dictionary.

A concealed block x' = [c, x] is generally sparse in neither the DCT nor the
canonical basis alone: the signal part is compressible under the DCT while
the concealing variable is a single spike.  Decoding therefore searches the
concatenated dictionary [DCT | I] (2N atoms).

The two halves are not incoherent (mutual coherence close to sqrt(2/N)) and
the dictionary has twice as many atoms as a single basis, so plain l1
minimization runs out of measurements early.  ``decode`` makes up for it
with what the receiver already knows and a cheap check:

* the concealing variable always sits at index 0, so its spike atom is left
  out of the l1 penalty (weighted basis pursuit);
* a failed l1 solve on an exactly sparse problem comes back dense, so a
  solution using more than M/2 atoms triggers a beam-search pursuit that
  only accepts exact fits.  Any exact fit with fewer than spark/2 atoms is
  the unique sparsest one, so preferring it never trades a right answer for
  a wrong one.

Greedy pursuit (OMP) and FISTA remain available as alternative solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .codec import CONCEALED, Ciphertext
from .errors import ShapeError, SupportSizeError, ValidationError
from .sensing import SensingMatrix

DCT = "B1"
IDENTITY = "B2"


def dct_matrix(N: int) -> np.ndarray:
    """Orthonormal DCT-II synthesis matrix; column k is the k-th cosine atom.

    ``dct_matrix(N) @ theta`` inverts the orthonormal DCT-II of a signal.
    """
    n = np.arange(N)[:, None]
    k = np.arange(N)[None, :]
    psi = np.cos(np.pi * (2 * n + 1) * k / (2 * N)) * np.sqrt(2.0 / N)
    psi[:, 0] = 1.0 / np.sqrt(N)
    return psi


@dataclass
class Dictionary:
    N: int
    atoms: np.ndarray
    labels: list[str] = field(repr=False)

    @property
    def size(self) -> int:
        return self.atoms.shape[1]

    def spike_index(self, i: int) -> int | None:
        """Column holding the canonical atom e_i, or None for DCT-only dictionaries."""
        spikes = [j for j, lab in enumerate(self.labels) if lab == IDENTITY]
        return spikes[i] if spikes else None


def build_dictionary(N: int) -> Dictionary:
    """The N x 2N two-basis dictionary [DCT | I]."""
    if N < 2:
        raise ValidationError("dictionary needs N >= 2")
    psi = dct_matrix(N)
    if not np.allclose(psi.T @ psi, np.eye(N), atol=1e-10):
        raise AssertionError("DCT matrix lost orthonormality")
    atoms = np.hstack([psi, np.eye(N)])
    return Dictionary(N, atoms, [DCT] * N + [IDENTITY] * N)


def dct_dictionary(N: int) -> Dictionary:
    """DCT-only dictionary used by the plain one-time-sensing baseline."""
    if N < 2:
        raise ValidationError("dictionary needs N >= 2")
    return Dictionary(N, dct_matrix(N), [DCT] * N)


@dataclass
class SolveResult:
    coefficients: np.ndarray
    support: list[int]
    residual_norm: float
    iterations: int
    converged: bool
    residual_history: list[float] = field(default_factory=list, repr=False)


def greedy_sparse_solve(
    A: np.ndarray,
    y: np.ndarray,
    max_atoms: int | None = None,
    residual_tol: float | None = None,
    initial_support=(),
) -> SolveResult:
    """Orthogonal matching pursuit.

    Picks the column (normalized for the correlation step only) most
    correlated with the residual, re-fits least squares on the whole support
    and stops after ``max_atoms`` atoms or once the residual norm drops below
    ``residual_tol``.  Ties go to the lowest column index.  Defaults:
    ``max_atoms = M // 2`` and ``residual_tol = 1e-7 * |y|``.  Atoms in
    ``initial_support`` are selected before the first greedy step.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    M, D = A.shape
    if len(y) != M:
        raise ShapeError(f"A has {M} rows, y has length {len(y)}")
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise ValidationError("dictionary-projected matrix has zero columns")
    K = max(M // 2, 1) if max_atoms is None else int(max_atoms)
    if K > M:
        raise SupportSizeError(f"cannot select {K} atoms from {M} measurements")
    K = min(K, D)
    y_norm = float(np.linalg.norm(y))
    tol = 1e-7 * y_norm if residual_tol is None else float(residual_tol)

    An = A / norms
    support = [int(j) for j in initial_support]
    available = np.ones(D, dtype=bool)
    available[support] = False
    coef_s = np.zeros(0)
    r = y.copy()
    if support:
        coef_s, *_ = np.linalg.lstsq(A[:, support], y, rcond=None)
        r = y - A[:, support] @ coef_s
    history = [float(np.linalg.norm(r))]
    while len(support) < K and history[-1] > tol:
        corr = np.abs(An.T @ r)
        corr[~available] = -1.0
        j = int(np.argmax(corr))
        support.append(j)
        available[j] = False
        coef_s, *_ = np.linalg.lstsq(A[:, support], y, rcond=None)
        r = y - A[:, support] @ coef_s
        history.append(float(np.linalg.norm(r)))

    coefficients = np.zeros(D)
    coefficients[support] = coef_s
    return SolveResult(
        coefficients,
        support,
        history[-1],
        len(support),
        history[-1] <= tol,
        history,
    )


def fista_solve(
    A: np.ndarray,
    y: np.ndarray,
    lam: float | None = None,
    max_iter: int = 10000,
    tol: float = 1e-10,
) -> SolveResult:
    """Accelerated iterative shrinkage for min 0.5|Ax - y|^2 + lam |x|_1.

    Secondary backend; the support it finds is re-fit by least squares so the
    returned coefficients are unbiased on that support.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    M, D = A.shape
    lam = 1e-4 * float(np.max(np.abs(A.T @ y))) if lam is None else lam
    step = 1.0 / np.linalg.norm(A, 2) ** 2
    x = z = np.zeros(D)
    t = 1.0
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        g = z - step * (A.T @ (A @ z - y))
        x_new = np.sign(g) * np.maximum(np.abs(g) - step * lam, 0.0)
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        z = x_new + ((t - 1) / t_new) * (x_new - x)
        delta = np.linalg.norm(x_new - x)
        x, t = x_new, t_new
        history.append(float(np.linalg.norm(y - A @ x)))
        if delta <= tol * max(1.0, np.linalg.norm(x)):
            break
    support = [int(i) for i in np.argsort(-np.abs(x)) if abs(x[i]) > 1e-4 * np.max(np.abs(x))]
    support = sorted(support[:M])
    coefficients = np.zeros(D)
    if support:
        coef_s, *_ = np.linalg.lstsq(A[:, support], y, rcond=None)
        coefficients[support] = coef_s
    res = float(np.linalg.norm(y - A @ coefficients))
    return SolveResult(coefficients, support, res, it, res <= 1e-7 * np.linalg.norm(y), history)


def basis_pursuit(
    A: np.ndarray,
    y: np.ndarray,
    support_rtol: float = 1e-9,
    weights: np.ndarray | None = None,
) -> SolveResult:
    """min sum(w_i |theta_i|) subject to A theta = y, solved as a linear program.

    ``weights`` defaults to all ones (plain l1); a zero weight leaves that
    coefficient unpenalized.  The LP solution is polished by a least-squares
    refit on its support, so noiseless sparse problems come back exact to
    machine precision.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    M, D = A.shape
    if len(y) != M:
        raise ShapeError(f"A has {M} rows, y has length {len(y)}")
    y_norm = float(np.linalg.norm(y))
    if y_norm == 0:
        return SolveResult(np.zeros(D), [], 0.0, 0, True, [0.0])
    w = np.ones(D) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (D,) or np.any(w < 0):
        raise ValidationError("weights must be a non-negative vector with one entry per column")
    # theta = u - v with u, v >= 0; scaling y keeps solver tolerances relative
    res = linprog(
        np.concatenate([w, w]),
        A_eq=np.hstack([A, -A]),
        b_eq=y / y_norm,
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        raise ValidationError(f"basis pursuit LP failed: {res.message}")
    theta = (res.x[:D] - res.x[D:]) * y_norm
    mags = np.abs(theta)
    order = np.argsort(-mags, kind="stable")
    support = sorted(int(i) for i in order[:M] if mags[i] > support_rtol * mags.max())
    coefficients = np.zeros(D)
    coef_s, *_ = np.linalg.lstsq(A[:, support], y, rcond=None)
    coefficients[support] = coef_s
    residual = float(np.linalg.norm(y - A @ coefficients))
    return SolveResult(
        coefficients, support, residual, int(res.nit), residual <= 1e-7 * y_norm, [y_norm, residual]
    )


def beam_sparse_solve(
    A: np.ndarray,
    y: np.ndarray,
    width: int = 8,
    branch: int = 4,
    max_atoms: int | None = None,
    residual_tol: float | None = None,
    initial_support=(),
) -> SolveResult:
    """Matching pursuit that keeps the ``width`` best supports at each size.

    Every kept support is extended by its ``branch`` most correlated unused
    atoms and refit by least squares.  Stops at the first support whose
    residual is below ``residual_tol`` (default ``1e-7 * |y|``); otherwise
    returns the best support of ``max_atoms`` atoms (default M // 2) with
    ``converged=False``.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    M, D = A.shape
    if len(y) != M:
        raise ShapeError(f"A has {M} rows, y has length {len(y)}")
    K = max(M // 2, 1) if max_atoms is None else int(max_atoms)
    if K > M:
        raise SupportSizeError(f"cannot select {K} atoms from {M} measurements")
    tol = 1e-7 * float(np.linalg.norm(y)) if residual_tol is None else float(residual_tol)
    An = A / np.linalg.norm(A, axis=0)

    def fit(support):
        if not support:
            return np.zeros(0), y
        coef, *_ = np.linalg.lstsq(A[:, list(support)], y, rcond=None)
        return coef, y - A[:, list(support)] @ coef

    start = tuple(sorted(int(j) for j in initial_support))
    beam = [(float(np.linalg.norm(fit(start)[1])), start)]
    history = [beam[0][0]]
    steps = 0
    while beam[0][0] > tol and len(beam[0][1]) < K:
        scored = {}
        for _, support in beam:
            corr = np.abs(An.T @ fit(support)[1])
            corr[list(support)] = -1.0
            for j in np.argsort(-corr, kind="stable")[:branch]:
                grown = tuple(sorted(support + (int(j),)))
                if grown not in scored:
                    scored[grown] = float(np.linalg.norm(fit(grown)[1]))
        beam = sorted(((r, sup) for sup, r in scored.items()))[:width]
        history.append(beam[0][0])
        steps += 1
    residual, support = beam[0]
    coefficients = np.zeros(D)
    coefficients[list(support)] = fit(support)[0]
    return SolveResult(coefficients, list(support), residual, steps, residual <= tol, history)


SOLVERS = ("bp", "omp", "fista")


@dataclass
class RecoveryResult:
    x_prime_hat: np.ndarray
    coefficients: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool = True


def decode(
    ct: Ciphertext | np.ndarray,
    phi: SensingMatrix,
    dictionary: Dictionary,
    max_atoms: int | None = None,
    residual_tol: float | None = None,
    method: str = "bp",
    concealed: bool | None = None,
    fallback: bool = True,
) -> RecoveryResult:
    """Recover the encrypted vector from its measurements.

    ``method`` selects the sparse solver on phi @ atoms: ``"bp"`` (weighted
    l1, default), ``"omp"`` (greedy, honours ``max_atoms`` and
    ``residual_tol``) or ``"fista"``.

    ``concealed`` says whether entry 0 is a concealing variable; by default
    it is read from the ciphertext scheme (False for bare arrays).  When set
    and the dictionary has spike atoms, e_0 is unpenalized for ``"bp"`` and
    preselected for ``"omp"``.  ``fallback`` enables the beam search after a
    dense ``"bp"`` solution.
    """
    if concealed is None:
        concealed = isinstance(ct, Ciphertext) and ct.scheme == CONCEALED
    y = ct.y if isinstance(ct, Ciphertext) else np.asarray(ct, dtype=float)
    if phi.N != dictionary.N:
        raise ShapeError(f"matrix N={phi.N} does not match dictionary N={dictionary.N}")
    if len(y) != phi.M:
        raise ShapeError(f"ciphertext length {len(y)} != M={phi.M}")
    A = phi.entries @ dictionary.atoms
    spike = dictionary.spike_index(0) if concealed else None
    free = () if spike is None else (spike,)
    if method == "bp":
        weights = np.ones(dictionary.size)
        weights[list(free)] = 0.0
        sol = basis_pursuit(A, y, weights=weights)
        if fallback and len(sol.support) > phi.M // 2:
            beam = beam_sparse_solve(A, y, initial_support=free)
            if beam.converged:
                sol = beam
    elif method == "omp":
        sol = greedy_sparse_solve(A, y, max_atoms, residual_tol, initial_support=free)
    elif method == "fista":
        sol = fista_solve(A, y)
    else:
        raise ValidationError(f"unknown solver {method!r}")
    x_hat = dictionary.atoms @ sol.coefficients
    residual = float(np.linalg.norm(y - phi.entries @ x_hat))
    return RecoveryResult(x_hat, sol.coefficients, residual, sol.iterations, sol.converged)


def amse(originals, recons) -> float:
    """Mean over blocks of the per-sample squared error."""
    originals = [np.asarray(o, dtype=float).ravel() for o in originals]
    recons = [np.asarray(r, dtype=float).ravel() for r in recons]
    if len(originals) != len(recons):
        raise ValidationError("block counts differ")
    if not originals:
        raise ValidationError("no blocks")
    total = 0.0
    for o, r in zip(originals, recons):
        if o.shape != r.shape:
            raise ValidationError(f"block lengths differ: {o.shape} vs {r.shape}")
        total += float(np.mean((o - r) ** 2))
    return total / len(originals)
