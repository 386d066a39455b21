"""Rectangular BS antenna array geometry and sparsity-support bookkeeping."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Rectangular grid of antennas with uniform spacing (in wavelengths)."""

    rows: int
    cols: int
    spacing: float = 0.5
    carrier_freq_hz: float = 3.5e9

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be positive")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")

    @property
    def n_antennas(self) -> int:
        return self.rows * self.cols

    def positions(self) -> np.ndarray:
        """(N, 2) antenna coordinates in wavelengths, row-major order."""
        r, c = np.meshgrid(np.arange(self.rows), np.arange(self.cols),
                           indexing="ij")
        pos = np.stack([r.ravel(), c.ravel()], axis=1).astype(float)
        return pos * self.spacing

    def pairwise_distances(self) -> np.ndarray:
        """(N, N) symmetric matrix of inter-antenna distances in wavelengths."""
        pos = self.positions()
        diff = pos[:, None, :] - pos[None, :, :]
        return np.sqrt((diff ** 2).sum(axis=-1))


@dataclass
class SparsitySupport:
    """Per-column nonzero index sets of the BS NRC matrix estimator.

    ``threshold`` is measured in units of the grid spacing (lambda/2 for the
    default geometry): antennas farther apart than the threshold are treated
    as uncoupled and the corresponding off-diagonal entries forced to zero.
    The diagonal (self) index is always part of every support.
    """

    threshold: float
    supports: list = field(repr=False)
    r_per_column: np.ndarray = field(repr=False)

    @property
    def r_max(self) -> int:
        return int(self.r_per_column.max())

    def mask(self, n: int) -> np.ndarray:
        """(N, N) boolean mask, entry (i, j) true iff i in support of column j."""
        m = np.zeros((n, n), dtype=bool)
        for j, sup in enumerate(self.supports):
            m[sup, j] = True
        return m


def build_support(geometry: ArrayGeometry, threshold: float) -> SparsitySupport:
    """Neighbor sets within ``threshold`` grid-spacing units of each antenna.

    A small tolerance absorbs floating-point error in the pairwise distances
    so that e.g. threshold sqrt(2) captures the diagonal neighbors exactly.
    """
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    dist = geometry.pairwise_distances() / geometry.spacing
    n = geometry.n_antennas
    keep = dist <= threshold + 1e-9
    supports = [np.flatnonzero(keep[:, j]) for j in range(n)]
    # dist[j, j] = 0 so j is always in its own support
    r = np.array([len(s) for s in supports])
    return SparsitySupport(threshold=threshold, supports=supports,
                           r_per_column=r)
