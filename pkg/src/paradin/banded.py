"""Square matrices stored by diagonals, and the kernels that act on them.

Storage is row indexed: ``data[k, i] = A[i, i + offsets[k]]`` for rows
where the column is in range, and exactly zero elsewhere.  A batch of rows
``lo:hi`` of a matrix is therefore just ``data[:, lo:hi]``, which is what
the row-partitioned product build relies on.

Every reduction runs in a fixed order (ascending inner index), so a row
batch computed in isolation is bitwise identical to the same rows of the
full product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import as_strided
from scipy.linalg import blas, solve_triangular

from .errors import DimensionMismatch, SingularPivot, ZeroDiagonal

PIVOT_FLOOR = 1e-300


@dataclass
class OpCounter:
    """Multiplies and adds spent on structurally nonzero term pairs."""

    multiplies: int = 0
    adds: int = 0

    @property
    def total(self) -> int:
        return self.multiplies + self.adds


class BandedMatrix:
    __slots__ = ("n", "offsets", "data")

    def __init__(self, n: int, offsets, data, check: bool = True):
        self.n = int(n)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.data = np.asarray(data, dtype=float)
        if check:
            if self.n <= 0:
                raise ValueError("matrix dimension must be positive")
            if self.data.shape != (len(self.offsets), self.n):
                raise DimensionMismatch(
                    f"data shape {self.data.shape} does not match {len(self.offsets)} offsets x n={self.n}"
                )
            if len(self.offsets) and (
                np.any(np.diff(self.offsets) <= 0) or np.any(np.abs(self.offsets) >= self.n)
            ):
                raise ValueError(f"offsets must be strictly increasing and inside (-n, n): {self.offsets}")

    # construction -----------------------------------------------------

    @classmethod
    def from_diagonals(cls, n: int, diagonals: dict) -> "BandedMatrix":
        """Build from ``{offset: values}`` with ``len(values) == n - |offset|``."""
        offsets = sorted(int(d) for d in diagonals)
        data = np.zeros((len(offsets), n))
        for k, d in enumerate(offsets):
            vals = np.asarray(diagonals[d], dtype=float)
            if vals.shape != (n - abs(d),):
                raise DimensionMismatch(f"diagonal {d} needs {n - abs(d)} values, got {vals.shape}")
            lo, hi = _row_range(n, d)
            data[k, lo:hi] = vals
        return cls(n, offsets, data)

    @classmethod
    def identity(cls, n: int) -> "BandedMatrix":
        return cls(n, [0], np.ones((1, n)))

    @classmethod
    def from_dense(cls, a) -> "BandedMatrix":
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        if a.shape != (n, n):
            raise DimensionMismatch("matrix must be square")
        diags = {d: np.diagonal(a, d).copy() for d in range(-n + 1, n) if np.any(np.diagonal(a, d) != 0)}
        if not diags:
            diags = {0: np.zeros(n)}
        return cls.from_diagonals(n, diags)

    # access -------------------------------------------------------------

    def diagonal(self, offset: int) -> np.ndarray:
        idx = np.searchsorted(self.offsets, offset)
        lo, hi = _row_range(self.n, offset)
        if idx == len(self.offsets) or self.offsets[idx] != offset:
            return np.zeros(hi - lo)
        return self.data[idx, lo:hi].copy()

    @property
    def bandwidths(self) -> tuple[int, int]:
        """(lower, upper) bandwidth of the stored envelope."""
        if len(self.offsets) == 0:
            return 0, 0
        return max(0, -int(self.offsets[0])), max(0, int(self.offsets[-1]))

    def nnz(self) -> int:
        return int(np.count_nonzero(self.data))

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        rows = np.arange(self.n)
        for k, d in enumerate(self.offsets):
            lo, hi = _row_range(self.n, int(d))
            a[rows[lo:hi], rows[lo:hi] + d] = self.data[k, lo:hi]
        return a

    def pruned(self) -> "BandedMatrix":
        """Drop diagonals that hold no nonzero value."""
        keep = np.any(self.data != 0, axis=1)
        if keep.all():
            return self
        if not keep.any():
            return BandedMatrix(self.n, [0], np.zeros((1, self.n)), check=False)
        return BandedMatrix(self.n, self.offsets[keep], self.data[keep], check=False)

    def identical(self, other: "BandedMatrix") -> bool:
        """Bitwise equality of shape, offsets and values."""
        return (
            self.n == other.n
            and np.array_equal(self.offsets, other.offsets)
            and self.data.tobytes() == other.data.tobytes()
        )

    def __repr__(self):
        return f"BandedMatrix(n={self.n}, offsets={len(self.offsets)} in [{self.offsets.min()}, {self.offsets.max()}])"

    # text dump (tests and debugging) ----------------------------------------

    def dumps(self) -> str:
        lines = [" ".join([str(self.n)] + [str(int(d)) for d in self.offsets])]
        for d in self.offsets:
            lines.append(" ".join(repr(float(v)) for v in self.diagonal(int(d))))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "BandedMatrix":
        lines = text.strip("\n").split("\n")
        head = [int(t) for t in lines[0].split()]
        n, offsets = head[0], head[1:]
        if len(lines) - 1 != len(offsets):
            raise ValueError("dump has a different number of diagonal lines than offsets")
        diags = {d: np.array([float(t) for t in line.split()]) for d, line in zip(offsets, lines[1:])}
        return cls.from_diagonals(n, diags)


def _row_range(n: int, d: int) -> tuple[int, int]:
    return max(0, -d), min(n, n - d)


def _check_same_n(x: BandedMatrix, y: BandedMatrix):
    if x.n != y.n:
        raise DimensionMismatch(f"dimensions differ: {x.n} vs {y.n}")


def product_offsets(x_offsets, y_offsets, n: int) -> np.ndarray:
    s = np.unique(np.add.outer(np.asarray(x_offsets), np.asarray(y_offsets)).ravel())
    return s[np.abs(s) < n]


def band_matmul_rows(
    x_rows: np.ndarray,
    x_offsets,
    y: BandedMatrix,
    lo: int,
    hi: int,
    counter: OpCounter | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``lo:hi`` of X @ Y, given only those rows of X.

    Returns ``(offsets, block)`` where ``block`` has one row per candidate
    product offset (no pruning, so batches from different workers line up).
    For each output entry the terms are summed in ascending inner index.
    """
    n = y.n
    x_offsets = np.asarray(x_offsets, dtype=np.int64)
    out_offsets = product_offsets(x_offsets, y.offsets, n)
    block = np.zeros((len(out_offsets), hi - lo))
    cnt = np.zeros(block.shape, dtype=np.int64) if counter is not None else None
    rows = np.arange(lo, hi)
    inner = rows[None, :] + x_offsets[:, None]
    inner_clipped = np.clip(inner, 0, n - 1)
    x_nz = x_rows != 0 if counter is not None else None
    # descending q makes p = s - q ascending for every output diagonal s
    for b in range(len(y.offsets) - 1, -1, -1):
        q = int(y.offsets[b])
        s = x_offsets + q
        keep = np.abs(s) < n
        if not keep.any():
            continue
        target = np.searchsorted(out_offsets, s[keep])
        y_gather = y.data[b][inner_clipped[keep]]
        block[target] += x_rows[keep] * y_gather
        if cnt is not None:
            cnt[target] += x_nz[keep] & (y_gather != 0)
    if counter is not None:
        counter.multiplies += int(cnt.sum())
        counter.adds += int(np.maximum(cnt - 1, 0).sum())
    return out_offsets, block


def band_matmul(x: BandedMatrix, y: BandedMatrix, counter: OpCounter | None = None) -> BandedMatrix:
    """Z = X @ Y in diagonal storage, with all-zero diagonals pruned."""
    _check_same_n(x, y)
    offsets, block = band_matmul_rows(x.data, x.offsets, y, 0, x.n, counter)
    return BandedMatrix(x.n, offsets, block, check=False).pruned()


def assemble_row_blocks(n: int, blocks) -> BandedMatrix:
    """Stack ``(lo, hi, offsets, block)`` row batches into one matrix.

    The batches must cover ``0..n`` and share one offset list.
    """
    blocks = sorted(blocks, key=lambda b: b[0])
    offsets = blocks[0][2]
    expect = 0
    for lo, hi, offs, _ in blocks:
        if lo != expect or not np.array_equal(offs, offsets):
            raise ValueError("row batches are not contiguous or disagree on offsets")
        expect = hi
    if expect != n:
        raise ValueError(f"row batches cover {expect} of {n} rows")
    data = np.concatenate([b[3] for b in blocks], axis=1)
    return BandedMatrix(n, offsets, data, check=False).pruned()


def band_matvec_rows(x_rows: np.ndarray, x_offsets, v: np.ndarray, lo: int, hi: int) -> np.ndarray:
    n = len(v)
    rows = np.arange(lo, hi)
    acc = np.zeros(hi - lo)
    for k, p in enumerate(np.asarray(x_offsets)):
        cols = np.clip(rows + int(p), 0, n - 1)
        acc += x_rows[k] * v[cols]
    return acc


def band_matvec(x: BandedMatrix, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (x.n,):
        raise DimensionMismatch(f"vector of length {v.shape} for matrix of size {x.n}")
    return band_matvec_rows(x.data, x.offsets, v, 0, x.n)


@dataclass(frozen=True)
class DiagonalScaling:
    """Row scaling: row i of the system is divided by ``values[i]``."""

    values: np.ndarray

    def apply(self, a: BandedMatrix, b=None):
        scaled = BandedMatrix(a.n, a.offsets, a.data / self.values[None, :], check=False)
        if b is None:
            return scaled
        return scaled, np.asarray(b, dtype=float) / self.values


def diagonal_of(x: BandedMatrix, pivot_floor: float = PIVOT_FLOOR) -> DiagonalScaling:
    idx = np.searchsorted(x.offsets, 0)
    if idx == len(x.offsets) or x.offsets[idx] != 0:
        raise ZeroDiagonal(0, 0.0)
    d = x.data[idx].copy()
    bad = np.flatnonzero(~(np.abs(d) >= pivot_floor))
    if len(bad):
        raise ZeroDiagonal(int(bad[0]), float(d[bad[0]]))
    return DiagonalScaling(d)


def _lapack_band(a: BandedMatrix) -> tuple[np.ndarray, int, int]:
    """Copy into LAPACK general-band layout ``ab[ku + i - j, j] = A[i, j]``."""
    kl, ku = a.bandwidths
    n = a.n
    ab = np.zeros((kl + ku + 1, n), order="F")
    for k, d in enumerate(a.offsets):
        d = int(d)
        lo, hi = _row_range(n, d)
        ab[ku - d, lo + d : hi + d] = a.data[k, lo:hi]
    return ab, kl, ku


def band_lu_factor(a: BandedMatrix, pivot_floor: float = PIVOT_FLOOR, block: int = 64):
    """In-place LU without pivoting over the full envelope.

    Right-looking and blocked: each panel of ``block`` columns is factored
    with rank-1 updates inside a dense window, then the window's trailing
    part gets one triangular solve and one matrix product.  Fill never
    leaves the envelope, so the window maps back into band storage.

    Returns ``(ab, kl, ku)`` with unit-lower L below and U on and above the
    main diagonal row ``ku``.
    """
    ab, kl, ku = _lapack_band(a)
    n = a.n
    w = kl + ku + 1
    flat = ab.ravel(order="F")
    item = flat.itemsize
    for k0 in range(0, n, block):
        k1 = min(k0 + block, n)
        p = k1 - k0
        nr = min(n, k1 + kl) - k0
        nc = min(n, k1 + ku) - k0
        # window[r, c] = A[k0 + r, k0 + c]; positions outside the envelope alias
        # other storage and are masked out on both read and write
        view = as_strided(flat[ku + k0 * w :], shape=(nr, nc), strides=(item, (w - 1) * item))
        lag = np.arange(nr)[:, None] - np.arange(nc)[None, :]
        inside = (lag <= kl) & (-lag <= ku)
        win = np.where(inside, view, 0.0)
        for j in range(p):
            piv = win[j, j]
            if not abs(piv) >= pivot_floor:
                raise SingularPivot(k0 + j, float(piv))
            win[j + 1 :, j] /= piv
            if j + 1 < p:
                win[j + 1 :, j + 1 : p] -= np.multiply.outer(win[j + 1 :, j], win[j, j + 1 : p])
        if nc > p:
            win[:p, p:] = solve_triangular(win[:p, :p], win[:p, p:], lower=True, unit_diagonal=True)
            if nr > p:
                win[p:, p:] -= win[p:, :p] @ win[:p, p:]
        view[inside] = win[inside]
    return ab, kl, ku


def band_lu_solve(
    a: BandedMatrix,
    b,
    scaling: DiagonalScaling | None = None,
    pivot_floor: float = PIVOT_FLOOR,
) -> np.ndarray:
    """Solve A x = b with a banded LU factorization and no pivoting."""
    b = np.asarray(b, dtype=float)
    if b.shape != (a.n,):
        raise DimensionMismatch(f"right-hand side of length {b.shape} for matrix of size {a.n}")
    if scaling is not None:
        a, b = scaling.apply(a, b)
    ab, kl, ku = band_lu_factor(a, pivot_floor)
    x = b.copy()
    if kl > 0:
        x = blas.dtbsv(kl, np.asfortranarray(ab[ku:, :]), x, lower=1, diag=1)
    return blas.dtbsv(ku, np.asfortranarray(ab[: ku + 1, :]), x, lower=0, diag=0)
