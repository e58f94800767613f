"""Uniform Dirichlet grid on [-L, L]^2 and the discrete norms used everywhere.

Arrays are stored as ``data[c, iy, ix]``: component first, then the y index,
then the x index, so ``data.ravel()`` is row-major over (component, y, x).
Boundary nodes are not stored; they carry the value 0.

All reductions sum in numpy's default order, which is deterministic for a
fixed array shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridMismatchError(ValueError):
    """Two fields (or a field and a table) live on different grids."""


@dataclass(frozen=True)
class GridSpec:
    """Interior nodes of a uniform grid on the square [-L, L]^2.

    Parameters
    ----------
    L : float
        Half width of the domain.
    h : float
        Mesh size. ``2L/h`` must be an integer.
    """

    L: float
    h: float
    n: int = field(init=False)

    def __post_init__(self):
        if not (self.L > 0 and self.h > 0):
            raise ValueError(f"L and h must be positive, got L={self.L}, h={self.h}")
        cells = 2.0 * self.L / self.h
        m = int(round(cells))
        if m < 2 or abs(cells - m) > 1e-9 * max(1.0, cells):
            raise ValueError(f"2L/h = {cells!r} must be an integer >= 2")
        object.__setattr__(self, "n", m - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def size(self) -> int:
        """Number of interior nodes per component."""
        return self.n * self.n

    @property
    def coords(self) -> np.ndarray:
        """1D interior coordinates ``-L + j h`` for j = 1..n."""
        return -self.L + self.h * np.arange(1, self.n + 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` with ``X[iy, ix] = x_ix`` and ``Y[iy, ix] = y_iy``."""
        c = self.coords
        X, Y = np.meshgrid(c, c, indexing="xy")
        return X, Y


class WaveField:
    """Two complex components on a shared interior grid."""

    __slots__ = ("grid", "data")

    def __init__(self, grid: GridSpec, data):
        data = np.asarray(data, dtype=np.complex128)
        if data.shape != (2, grid.n, grid.n):
            raise ValueError(f"expected shape {(2, grid.n, grid.n)}, got {data.shape}")
        self.grid = grid
        self.data = data

    @classmethod
    def zeros(cls, grid: GridSpec) -> "WaveField":
        return cls(grid, np.zeros((2, grid.n, grid.n), dtype=np.complex128))

    @classmethod
    def from_components(cls, grid: GridSpec, psi1, psi2) -> "WaveField":
        return cls(grid, np.stack([np.asarray(psi1), np.asarray(psi2)]).astype(np.complex128))

    @property
    def psi1(self) -> np.ndarray:
        return self.data[0]

    @property
    def psi2(self) -> np.ndarray:
        return self.data[1]

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.data.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.data).all())

    def _wrap(self, data) -> "WaveField":
        return WaveField(self.grid, data)

    def _other(self, other):
        if isinstance(other, WaveField):
            check_same_grid(self, other)
            return other.data
        return other

    def __add__(self, other):
        return self._wrap(self.data + self._other(other))

    def __sub__(self, other):
        return self._wrap(self.data - self._other(other))

    def __mul__(self, scalar):
        return self._wrap(self.data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._wrap(self.data / scalar)

    def __neg__(self):
        return self._wrap(-self.data)

    def __repr__(self):
        return f"WaveField(L={self.grid.L}, h={self.grid.h}, n={self.grid.n})"


def check_same_grid(f: WaveField, g: WaveField) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grid mismatch: {f.grid} vs {g.grid}")


def l2_norm_sq(f: WaveField) -> float:
    h = f.grid.h
    d = f.data
    return float(h * h * (np.sum(d.real * d.real) + np.sum(d.imag * d.imag)))


def l2_norm(f: WaveField) -> float:
    """sqrt(h^2 * sum |f_i|^2) over both components."""
    return float(np.sqrt(l2_norm_sq(f)))


def inner_l2(f: WaveField, g: WaveField) -> float:
    """Real L2 pairing ``h^2 Re sum f conj(g)`` summed over components."""
    check_same_grid(f, g)
    h = f.grid.h
    a, b = f.data, g.data
    return float(h * h * (np.sum(a.real * b.real) + np.sum(a.imag * b.imag)))


def h1_seminorm_sq(f: WaveField) -> float:
    """Discrete |f|_{H^1}^2 from forward differences, boundary edges included.

    Every edge between two neighbouring nodes (interior or boundary) contributes
    ``|difference / h|^2 * h^2``, so this equals ``-h^2 Re sum conj(f) Lap_h f``
    for the 5-point Laplacian with zero Dirichlet data.
    """
    d = f.data
    pad = np.zeros((2, d.shape[1] + 2, d.shape[2] + 2), dtype=d.dtype)
    pad[:, 1:-1, 1:-1] = d
    dx = np.diff(pad[:, 1:-1, :], axis=2)
    dy = np.diff(pad[:, :, 1:-1], axis=1)
    # h^2 * |D/h|^2 = |D|^2
    return float(np.sum(np.abs(dx) ** 2) + np.sum(np.abs(dy) ** 2))


def linf_norm(f: WaveField) -> float:
    """Largest complex modulus over both components jointly."""
    if f.data.size == 0:
        return 0.0
    return float(np.max(np.abs(f.data)))
