"""Dense-vector and compressed-sparse-row (CSR) primitives.

All numerical data is 64-bit floating point.  Vectors are plain 1-D numpy
arrays; matrices are immutable :class:`SparseMatrix` instances.  Every
operation here is a pure function of its inputs, so matrices and vectors can
be shared freely across threads.

Reduction orders are fixed: matrix products accumulate in storage order
(ascending column within each row for ``matvec``, row-major scatter for
``matvec_transpose``), so repeated runs of the same computation are
bit-identical on a given platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

__all__ = [
    "BreakdownError",
    "SparseMatrix",
    "as_vector",
    "axpy",
    "csr_from_triplets",
    "dot",
    "matvec",
    "matvec_transpose",
    "norm2",
    "read_matrix_market",
    "toeplitz_banded",
    "write_matrix_market",
]


class BreakdownError(RuntimeError):
    """A coefficient denominator vanished (numerically) before convergence.

    Attributes
    ----------
    kind : str
        Which denominator broke down (e.g. ``"lanczos"``, ``"pivot"``,
        ``"eta"``).
    iteration : int or None
        Iteration index at which the breakdown occurred, when known.
    """

    def __init__(self, kind: str, iteration: int | None = None):
        where = "" if iteration is None else f" at iteration {iteration}"
        super().__init__(f"{kind} breakdown{where}")
        self.kind = kind
        self.iteration = iteration


def as_vector(x, n: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a float64 1-D array, optionally checking its length."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"expected a vector of length {n}, got {v.shape[0]}")
    return v


@dataclass(frozen=True)
class SparseMatrix:
    """Real matrix in compressed sparse row form.

    Column indices are strictly increasing within each row and duplicates are
    forbidden; explicit (stored) zeros are allowed.  The arrays are marked
    read-only at construction.

    Parameters
    ----------
    n_rows, n_cols : int
        Matrix dimensions.
    row_offsets : array of int, shape (n_rows + 1,)
        ``row_offsets[i]:row_offsets[i+1]`` slices the entries of row ``i``.
    col_indices : array of int
        Column index of every stored entry.
    values : array of float
        Value of every stored entry.
    """

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        offsets = np.array(self.row_offsets, dtype=np.int64, copy=True)
        cols = np.array(self.col_indices, dtype=np.int64, copy=True)
        vals = np.array(self.values, dtype=np.float64, copy=True)

        if self.n_rows < 0 or self.n_cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        if offsets.shape != (self.n_rows + 1,):
            raise ValueError("row_offsets must have length n_rows + 1")
        if offsets[0] != 0 or offsets[-1] != vals.shape[0]:
            raise ValueError("row_offsets must start at 0 and end at nnz")
        if np.any(np.diff(offsets) < 0):
            raise ValueError("row_offsets must be non-decreasing")
        if cols.shape != vals.shape:
            raise ValueError("col_indices and values must have equal length")
        if cols.size and (cols.min() < 0 or cols.max() >= self.n_cols):
            raise ValueError("column index out of range")

        # per-entry row labels; also reused by the transposed product
        rows = np.repeat(np.arange(self.n_rows, dtype=np.int64), np.diff(offsets))
        if cols.size > 1:
            same_row = rows[1:] == rows[:-1]
            if np.any(np.diff(cols)[same_row] <= 0):
                raise ValueError(
                    "column indices must be strictly increasing within each row"
                )

        for a in (offsets, cols, vals, rows):
            a.setflags(write=False)
        object.__setattr__(self, "row_offsets", offsets)
        object.__setattr__(self, "col_indices", cols)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_row_indices", rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        """Number of stored entries (explicit zeros included)."""
        return self.values.shape[0]

    def to_dense(self) -> np.ndarray:
        """Return the dense ``(n_rows, n_cols)`` array with the same entries."""
        dense = np.zeros((self.n_rows, self.n_cols))
        dense[self._row_indices, self.col_indices] = self.values
        return dense

    def triplets(self) -> list[tuple[int, int, float]]:
        """Stored entries as ``(row, col, value)`` tuples in storage order."""
        return [
            (int(i), int(j), float(v))
            for i, j, v in zip(self._row_indices, self.col_indices, self.values)
        ]


def csr_from_triplets(
    n_rows: int,
    n_cols: int,
    triplets: Iterable[tuple[int, int, float]],
) -> SparseMatrix:
    """Build a :class:`SparseMatrix` from ``(row, col, value)`` triplets.

    Triplets may arrive in any order; duplicates of the same ``(row, col)``
    position are an error.  Explicit zero values are preserved.
    """
    entries = list(triplets)
    if entries:
        rows = np.asarray([t[0] for t in entries], dtype=np.int64)
        cols = np.asarray([t[1] for t in entries], dtype=np.int64)
        vals = np.asarray([t[2] for t in entries], dtype=np.float64)
    else:
        rows = np.zeros(0, dtype=np.int64)
        cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0, dtype=np.float64)

    if rows.size:
        if rows.min() < 0 or rows.max() >= n_rows:
            raise ValueError("row index out of range")
        if cols.min() < 0 or cols.max() >= n_cols:
            raise ValueError("column index out of range")

    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if rows.size > 1:
        dup = (np.diff(rows) == 0) & (np.diff(cols) == 0)
        if np.any(dup):
            k = int(np.flatnonzero(dup)[0])
            raise ValueError(f"duplicate entry at ({rows[k]}, {cols[k]})")

    offsets = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n_rows), out=offsets[1:])
    return SparseMatrix(n_rows, n_cols, offsets, cols, vals)


def matvec(A: SparseMatrix, x) -> np.ndarray:
    """Compute ``A @ x``.

    Each output component accumulates in ascending column order within its
    row, so results are reproducible bit-for-bit across runs.
    """
    x = as_vector(x, A.n_cols)
    products = A.values * x[A.col_indices]
    y = np.bincount(A._row_indices, weights=products, minlength=A.n_rows)
    return y.astype(np.float64, copy=False)


def matvec_transpose(A: SparseMatrix, x) -> np.ndarray:
    """Compute ``A.T @ x`` without materializing the transpose.

    Contributions are scattered in storage (row-major) order, again giving a
    fixed, reproducible accumulation order.
    """
    x = as_vector(x, A.n_rows)
    products = A.values * x[A._row_indices]
    y = np.bincount(A.col_indices, weights=products, minlength=A.n_cols)
    return y.astype(np.float64, copy=False)


def toeplitz_banded(n: int, gamma: float) -> SparseMatrix:
    """Nonsymmetric banded Toeplitz test matrix.

    Entries: 2 on the diagonal, 1 on the first superdiagonal, ``gamma`` on the
    second subdiagonal.  The zero band between the diagonal and ``gamma`` is
    not stored.  Conditioning worsens as ``gamma`` grows, which makes the
    family a convenient dial for stressing nonsymmetric Krylov solvers.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    triplets = [(i, i, 2.0) for i in range(n)]
    triplets += [(i, i + 1, 1.0) for i in range(n - 1)]
    triplets += [(i, i - 2, float(gamma)) for i in range(2, n)]
    return csr_from_triplets(n, n, triplets)


def dot(x, y) -> float:
    """Standard inner product ``x.T @ y``."""
    x = as_vector(x)
    y = as_vector(y, x.shape[0])
    return float(np.dot(x, y))


def norm2(x) -> float:
    """Euclidean norm, computed as ``sqrt(dot(x, x))``."""
    x = as_vector(x)
    return float(np.sqrt(np.dot(x, x)))


def axpy(a: float, x, y) -> np.ndarray:
    """Return ``a * x + y`` as a new vector."""
    x = as_vector(x)
    y = as_vector(y, x.shape[0])
    return a * x + y


# ---------------------------------------------------------------------------
# Matrix Market coordinate format (real, general or symmetric)
# ---------------------------------------------------------------------------


def _text_lines(source: str | Path | IO) -> list[str]:
    if isinstance(source, (str, Path)):
        data = Path(source).read_text()
    else:
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("ascii")
    return data.splitlines()


def read_matrix_market(source: str | Path | IO) -> SparseMatrix:
    """Read a Matrix Market coordinate file into a :class:`SparseMatrix`.

    Supports the ``real`` field with ``general`` or ``symmetric`` symmetry;
    symmetric files are expanded to general storage (off-diagonal entries
    mirrored, diagonal entries kept once).  File indices are 1-based.

    Parameters
    ----------
    source : path or readable file object (text or bytes)

    Raises
    ------
    ValueError
        On a malformed header, an unsupported field/symmetry, an index out of
        the declared bounds, or a truncated/garbled body.
    """
    lines = _text_lines(source)
    if not lines:
        raise ValueError("empty Matrix Market stream")

    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket":
        raise ValueError(f"malformed Matrix Market header: {lines[0]!r}")
    obj, fmt, field, symmetry = (w.lower() for w in header[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise ValueError(f"unsupported Matrix Market object/format: {obj} {fmt}")
    if field != "real":
        raise ValueError(f"unsupported Matrix Market field: {field!r} (need real)")
    if symmetry not in ("general", "symmetric"):
        raise ValueError(f"unsupported Matrix Market symmetry: {symmetry!r}")

    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ValueError("missing Matrix Market size line")
    size = body[0].split()
    if len(size) != 3:
        raise ValueError(f"malformed size line: {body[0]!r}")
    n_rows, n_cols, nnz = (int(w) for w in size)
    if len(body) - 1 != nnz:
        raise ValueError(f"expected {nnz} entries, found {len(body) - 1}")

    triplets: list[tuple[int, int, float]] = []
    for ln in body[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"malformed entry line: {ln!r}")
        i, j = int(parts[0]) - 1, int(parts[1]) - 1
        v = float(parts[2])
        if not (0 <= i < n_rows and 0 <= j < n_cols):
            raise ValueError(f"entry ({i + 1}, {j + 1}) outside declared bounds")
        triplets.append((i, j, v))
        if symmetry == "symmetric" and i != j:
            triplets.append((j, i, v))

    return csr_from_triplets(n_rows, n_cols, triplets)


def write_matrix_market(A: SparseMatrix, target: str | Path | IO) -> None:
    """Write ``A`` in Matrix Market coordinate real general format.

    Values are written with 17 significant digits, so a write/read round trip
    reproduces the matrix exactly.
    """
    out = ["%%MatrixMarket matrix coordinate real general"]
    out.append(f"{A.n_rows} {A.n_cols} {A.nnz}")
    for i, j, v in zip(A._row_indices, A.col_indices, A.values):
        out.append(f"{i + 1} {j + 1} {v:.17g}")
    text = "\n".join(out) + "\n"
    if isinstance(target, (str, Path)):
        Path(target).write_text(text)
    else:
        target.write(text)
