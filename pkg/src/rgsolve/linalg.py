"""Dense matrix/vector primitives: cached norms, orthonormalization, small-scale SVD."""

from __future__ import annotations

import numpy as np

from .errors import GenerationError, RgsolveError, SizeGuardError, UsageError

# Spectral routines are meant for bound verification on small instances only.
SVD_MIN_DIM_LIMIT = 512

# Singular values below this fraction of the largest one are treated as zero.
ZERO_SIGMA_REL = 1e-10


def as_vector(v, length: int | None = None, name: str = "vector") -> np.ndarray:
    """Coerce ``v`` to a finite 1-D float64 array, checking its length if given."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise UsageError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise UsageError(f"{name} has length {arr.shape[0]}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} contains non-finite entries")
    return arr


class DenseMatrix:
    """Immutable dense coefficient matrix with cached row/column squared norms.

    The entry array and a contiguous transposed copy are both kept so row and
    column sweeps are O(m*n) without repeated transposition; matrices in scope
    fit desk memory. Instances are safe to share across concurrent solves.
    """

    def __init__(self, entries):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2:
            raise UsageError(f"matrix entries must be two-dimensional, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise UsageError("matrix must have at least one row and one column")
        if not np.all(np.isfinite(arr)):
            raise UsageError("matrix contains non-finite entries")
        self.entries = arr
        self.entries_t = np.ascontiguousarray(arr.T)
        self.row_sqnorms = np.einsum("ij,ij->i", arr, arr)
        self.col_sqnorms = np.einsum("ij,ij->j", arr, arr)
        self.frob_sq = float(self.row_sqnorms.sum())
        for a in (self.entries, self.entries_t, self.row_sqnorms, self.col_sqnorms):
            a.setflags(write=False)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def matvec(self, x) -> np.ndarray:
        """Return ``A @ x`` for a length-n vector ``x``."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise UsageError(f"matvec expects a length-{self.n} vector, got shape {x.shape}")
        return self.entries @ x

    def matvec_transpose(self, r) -> np.ndarray:
        """Return ``A.T @ r`` for a length-m vector ``r``."""
        r = np.asarray(r, dtype=float)
        if r.shape != (self.m,):
            raise UsageError(
                f"matvec_transpose expects a length-{self.m} vector, got shape {r.shape}"
            )
        return self.entries_t @ r

    def column(self, j: int) -> np.ndarray:
        """Contiguous view of column ``j``."""
        return self.entries_t[j]

    def __repr__(self) -> str:
        return f"DenseMatrix({self.m}x{self.n})"


def matvec(a: DenseMatrix, x) -> np.ndarray:
    return a.matvec(x)


def matvec_transpose(a: DenseMatrix, r) -> np.ndarray:
    return a.matvec_transpose(r)


def orthonormalize_columns(raw) -> np.ndarray:
    """Orthonormalize the columns of ``raw`` (m x r), preserving their span.

    Raises GenerationError when the input is numerically rank deficient
    (smallest R-diagonal magnitude <= 1e-10 times the largest); the caller is
    expected to retry with a fresh random draw.
    """
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 2:
        raise UsageError(f"expected a 2-D value grid, got shape {arr.shape}")
    if arr.shape[0] < arr.shape[1]:
        raise UsageError("cannot orthonormalize more columns than rows")
    q, r = np.linalg.qr(arr)
    diag = np.diag(r)
    mags = np.abs(diag)
    if mags.max() == 0.0 or mags.min() <= 1e-10 * mags.max():
        raise GenerationError("columns are numerically rank deficient; retry with a new draw")
    # Fix the QR sign ambiguity so diagonal scalings map to the identity.
    signs = np.where(diag >= 0.0, 1.0, -1.0)
    return q * signs


def _jacobi_orthogonalize(w: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60) -> None:
    """One-sided Jacobi: rotate column pairs of ``w`` in place until orthogonal."""
    n = w.shape[1]
    if n < 2:
        return
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                cp = w[:, p]
                cq = w[:, q]
                dot_pq = float(cp @ cq)
                if dot_pq == 0.0:
                    continue
                sq_p = float(cp @ cp)
                sq_q = float(cq @ cq)
                if abs(dot_pq) <= tol * np.sqrt(sq_p * sq_q):
                    continue
                zeta = (sq_q - sq_p) / (2.0 * dot_pq)
                sign = 1.0 if zeta >= 0.0 else -1.0
                t = sign / (abs(zeta) + np.hypot(1.0, zeta))
                cs = 1.0 / np.sqrt(1.0 + t * t)
                sn = cs * t
                new_p = cs * cp - sn * cq
                w[:, q] = sn * cp + cs * cq
                w[:, p] = new_p
                rotated = True
        if not rotated:
            return
    raise RgsolveError("jacobi orthogonalization did not converge within the sweep limit")


def singular_values(a) -> np.ndarray:
    """Nonincreasing nonzero singular values of ``a`` via one-sided Jacobi.

    ``a`` may be a DenseMatrix or a raw 2-D array. Values below
    ``ZERO_SIGMA_REL`` times the largest singular value are treated as zero
    and dropped. Guarded to min(m, n) <= 512; larger instances must skip
    bound verification.
    """
    arr = a.entries if isinstance(a, DenseMatrix) else np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise UsageError(f"expected a matrix, got shape {arr.shape}")
    m, n = arr.shape
    if min(m, n) > SVD_MIN_DIM_LIMIT:
        raise SizeGuardError(
            f"min(m, n) = {min(m, n)} exceeds the {SVD_MIN_DIM_LIMIT} guard; "
            "skip bound verification for this instance"
        )
    # Work on whichever orientation has the fewer columns.
    w = np.array(arr.T if m < n else arr, dtype=float)
    _jacobi_orthogonalize(w)
    sig = np.sqrt(np.einsum("ij,ij->j", w, w))
    sig[::-1].sort()
    if sig.size == 0 or sig[0] == 0.0:
        return np.empty(0)
    return sig[sig >= ZERO_SIGMA_REL * sig[0]]


def sigma_extremes(a) -> tuple[float, float]:
    """Largest and smallest nonzero singular values of ``a``."""
    sig = singular_values(a)
    if sig.size == 0:
        raise UsageError("zero matrix has no nonzero singular values")
    return float(sig[0]), float(sig[-1])
