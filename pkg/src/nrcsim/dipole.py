"""Self and mutual impedances of parallel thin half-wave dipoles.

Closed forms follow the induced-EMF method with sinusoidal current,
expressed through sine/cosine integrals. Distances are in wavelengths;
impedances in ohms.
"""

import numpy as np
from scipy.special import sici

_EULER_GAMMA = 0.5772156649015329


def self_impedance() -> complex:
    """Input impedance of an infinitely thin half-wave dipole (~73.1+j42.5)."""
    si, ci = sici(2 * np.pi)
    return complex(30 * (_EULER_GAMMA + np.log(2 * np.pi) - ci), 30 * si)


def mutual_impedance(distance_wavelengths):
    """Mutual impedance of two side-by-side half-wave dipoles.

    Accepts a scalar or array of center-to-center distances (> 0). The d = 0
    case is the self-impedance and must go through :func:`self_impedance`.
    """
    d = np.asarray(distance_wavelengths, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive; use self_impedance() at d=0")
    u0 = 2 * np.pi * d
    u1 = 2 * np.pi * (np.sqrt(d * d + 0.25) + 0.5)
    u2 = 2 * np.pi * (np.sqrt(d * d + 0.25) - 0.5)
    si0, ci0 = sici(u0)
    si1, ci1 = sici(u1)
    si2, ci2 = sici(u2)
    r = 30 * (2 * ci0 - ci1 - ci2)
    x = -30 * (2 * si0 - si1 - si2)
    z = r + 1j * x
    return complex(z) if np.isscalar(distance_wavelengths) else z


def impedance_matrix(geometry) -> np.ndarray:
    """(N, N) array impedance matrix: self terms on the diagonal, induced-EMF
    mutual terms elsewhere. Symmetric by reciprocity."""
    dist = geometry.pairwise_distances()
    n = geometry.n_antennas
    z = np.empty((n, n), dtype=complex)
    off = ~np.eye(n, dtype=bool)
    z[off] = mutual_impedance(dist[off])
    z[np.eye(n, dtype=bool)] = self_impedance()
    return z
