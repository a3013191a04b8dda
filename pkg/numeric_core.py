"""
Numeric core for the Derm2Vec models.

Matrices are 2-D float64 numpy arrays in row-major (C) order. The helpers
here add the shape and finiteness checks the learning modules rely on, a
seeded random stream built on numpy's PCG64 bit generator, and central
finite differences for gradient checks.
"""

import hashlib
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from errors import NumericError, ShapeError

Matrix = np.ndarray

_ELEMENTWISE_OPS = {
    'add': np.add,
    'sub': np.subtract,
    'mul': np.multiply,
}


def as_matrix(values: Union[Sequence, np.ndarray]) -> Matrix:
    """
    Convert values to a finite, C-contiguous float64 matrix.

    A 1-D input becomes a single row.

    Args:
        values: Nested sequence or array

    Returns:
        2-D float64 array
    """
    matrix = np.array(values, dtype=np.float64, order='C', copy=True)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got {matrix.ndim} dimensions")
    return ensure_finite(matrix)


def ensure_finite(matrix: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Raise NumericError if any entry is NaN or infinite."""
    if not np.all(np.isfinite(matrix)):
        raise NumericError(f"{what} contains non-finite values")
    return matrix


def zeros(rows: int, cols: int) -> Matrix:
    return np.zeros((rows, cols), dtype=np.float64)


def identity(n: int) -> Matrix:
    return np.eye(n, dtype=np.float64)


def _shape(m: np.ndarray) -> str:
    return f"{m.shape[0]}x{m.shape[1]}" if m.ndim == 2 else str(m.shape)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """
    Matrix product with an explicit shape check.

    Args:
        a: Left operand (n x k)
        b: Right operand (k x m)

    Returns:
        Product (n x m)
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {_shape(a)} by {_shape(b)}")
    return ensure_finite(a @ b, "product")


def elementwise(a: Matrix, b: Matrix, op: str) -> Matrix:
    """
    Entrywise add, sub or mul of two equally shaped matrices.

    Args:
        a: First operand
        b: Second operand
        op: One of 'add', 'sub', 'mul'

    Returns:
        Entrywise result
    """
    if op not in _ELEMENTWISE_OPS:
        raise ValueError(f"Unknown elementwise op: {op}. Supported ops: {sorted(_ELEMENTWISE_OPS)}")
    if a.shape != b.shape:
        raise ShapeError(f"cannot {op} {_shape(a)} and {_shape(b)}")
    return ensure_finite(_ELEMENTWISE_OPS[op](a, b), f"{op} result")


def numeric_gradient(
    f: Callable[[np.ndarray], float],
    x: np.ndarray,
    eps: float = 1e-5
) -> np.ndarray:
    """
    Central finite-difference gradient of a scalar function.

    Each coordinate is (f(x + eps*e_i) - f(x - eps*e_i)) / (2*eps).

    Args:
        f: Scalar function of a parameter vector
        x: Point to differentiate at
        eps: Step size, must be positive

    Returns:
        Gradient vector with the shape of x
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")

    x = np.array(x, dtype=np.float64).ravel()
    grad = np.zeros_like(x)
    for i in range(x.size):
        original = x[i]
        x[i] = original + eps
        f_plus = float(f(x))
        x[i] = original - eps
        f_minus = float(f(x))
        x[i] = original
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NumericError(f"function is not finite near coordinate {i}")
        grad[i] = (f_plus - f_minus) / (2.0 * eps)
    return grad


def derive_seed(parent_seed: int, *tags: Union[str, int]) -> int:
    """
    Derive an independent 64-bit child seed from a parent seed and tags.

    The seed is the first 8 bytes of SHA-256 over the parent seed and the tags,
    so the mapping is identical on every platform.

    Args:
        parent_seed: Parent seed
        *tags: Stream names or indices (e.g. "ae", "fold", 3)

    Returns:
        Unsigned 64-bit seed
    """
    payload = ":".join([str(int(parent_seed))] + [str(tag) for tag in tags])
    digest = hashlib.sha256(payload.encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


class RngState:
    """
    Single-owner random stream.

    Wraps numpy's PCG64 bit generator (a permuted congruential generator with
    128-bit state), which produces the same stream for the same seed on every
    platform. Parallel consumers take a child() stream instead of sharing one.
    """

    algorithm = "PCG64"

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    @classmethod
    def from_seed(cls, seed: int) -> "RngState":
        return cls(seed)

    def child(self, *tags: Union[str, int]) -> "RngState":
        """Independent stream derived from this stream's seed and the tags."""
        return RngState(derive_seed(self.seed, *tags))

    def uniform(self, low: float, high: float, shape: Iterable[int]) -> Matrix:
        return self.generator.uniform(low, high, size=tuple(shape))

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def integers(self, high: int, size: int) -> np.ndarray:
        return self.generator.integers(0, high, size=size)

    def keep_mask(self, shape: Iterable[int], keep_prob: float) -> np.ndarray:
        """Boolean mask whose entries are True with probability keep_prob."""
        return self.generator.random(tuple(shape)) < keep_prob

    def choice(self, n: int, size: int) -> np.ndarray:
        """size distinct indices from range(n), in draw order."""
        return self.generator.choice(n, size=size, replace=False)

    def __repr__(self):
        return f"RngState(seed={self.seed}, algorithm={self.algorithm})"
