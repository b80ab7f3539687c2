"""Dense complex linear algebra and tensor-product operator construction.

Operators and state vectors throughout the package are plain numpy
``complex128`` arrays in row-major order.  The three-mode factor structure
(qubit, resonator a, resonator b) is carried separately by
:class:`ModeLayout`.  Total dimensions stay tiny (18 at the default Fock
truncation), so everything is dense and eager; there is deliberately no
sparse path.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class ModeLayout:
    """Per-mode dimensions in the fixed order qubit, resonator a, resonator b.

    The qubit basis is |g> = 0, |e> = 1; each bosonic mode is Fock-ascending
    |0>, |1>, ...  This ordering is fixed project-wide so matrix dumps and
    basis indices are reproducible.
    """

    dims: tuple[int, int, int]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3:
            raise ValueError("layout must have exactly three modes (qubit + two resonators)")
        if dims[0] != 2:
            raise ValueError("mode 0 is the qubit and must have dimension 2")
        if dims[1] < 2 or dims[2] < 2:
            raise ValueError("bosonic modes need at least two Fock levels")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def for_n_max(cls, n_max: int) -> "ModeLayout":
        """Layout with both resonators truncated at Fock level ``n_max``."""
        if n_max < 1:
            raise ValueError("n_max must be at least 1")
        return cls((2, n_max + 1, n_max + 1))

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1] * self.dims[2]

    def basis_index(self, qubit: int, n_a: int, n_b: int) -> int:
        """Flat index of the product basis state |qubit, n_a, n_b>."""
        if not (0 <= qubit < 2 and 0 <= n_a < self.dims[1] and 0 <= n_b < self.dims[2]):
            raise ValueError(f"basis labels ({qubit},{n_a},{n_b}) outside layout {self.dims}")
        return (qubit * self.dims[1] + n_a) * self.dims[2] + n_b

    def basis_state(self, qubit: int, n_a: int, n_b: int) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=complex)
        vec[self.basis_index(qubit, n_a, n_b)] = 1.0
        return vec


class EigPair(NamedTuple):
    """One eigenpair of a general complex matrix with its residual norm."""

    value: complex
    vector: np.ndarray
    residual: float


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose, returned contiguous."""
    return np.ascontiguousarray(np.asarray(a).conj().T)


def embed(op: np.ndarray, site: int, layout: ModeLayout) -> np.ndarray:
    """Lift a single-mode operator to the full product space.

    Returns ``I (x) ... (x) op (x) ... (x) I`` with ``op`` at position
    ``site`` in the layout order.
    """
    op = np.asarray(op, dtype=complex)
    if site not in (0, 1, 2):
        raise ValueError("site must be 0 (qubit), 1 (resonator a) or 2 (resonator b)")
    d = layout.dims[site]
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} does not match mode dimension {d}")
    factors = [np.eye(n, dtype=complex) for n in layout.dims]
    factors[site] = op
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def matrix_exponential(a: np.ndarray) -> np.ndarray:
    """Matrix exponential via scaling-and-squaring (scipy backend)."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix_exponential requires a square matrix")
    return scipy.linalg.expm(a)


def eig_nonhermitian(a: np.ndarray) -> list[EigPair]:
    """Eigendecomposition of a general (possibly non-Hermitian) matrix.

    Each returned vector is unit-norm and carries the residual
    ``||A v - lambda v||`` so callers can spot defective or ill-conditioned
    pairs.  Convergence failures in the underlying QR iteration surface as
    ``numpy.linalg.LinAlgError``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("eig_nonhermitian requires a square matrix")
    if a.shape[0] > 1000:
        raise ValueError("dense eigensolver limited to dimension 1000")
    values, vectors = scipy.linalg.eig(a)
    pairs = []
    for k in range(a.shape[0]):
        v = vectors[:, k]
        norm = np.linalg.norm(v)
        if norm > 0:
            v = v / norm
        residual = float(np.linalg.norm(a @ v - values[k] * v))
        pairs.append(EigPair(complex(values[k]), v, residual))
    return pairs


def assert_finite(a: np.ndarray, name: str = "matrix") -> None:
    if not np.all(np.isfinite(a.view(float) if np.iscomplexobj(a) else a)):
        raise ValueError(f"{name} contains non-finite entries")


def dump_matrix_csv(a: np.ndarray, path) -> None:
    """Debug dump of a matrix as (row, col, re, im) rows for external checks."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "re", "im"])
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                writer.writerow([i, j, f"{a[i, j].real:.12g}", f"{a[i, j].imag:.12g}"])
