"""Physical channels, transceiver mismatches, and effective UL/DL channels.

The effective channels are G = L_r M_r P F_t (uplink) and
H = F_r P^T M_t L_t (downlink); their relative description is
H = A G^T B with A = F_r F_t^{-1} (diagonal, UE side) and
B = L_r^{-1} (M_r^T)^{-1} M_t L_t (dense, BS side).
"""

from dataclasses import dataclass

import numpy as np

from .dipole import impedance_matrix, self_impedance
from .geometry import ArrayGeometry

# Reference/termination impedance the input reflection coefficients are
# defined against (ohms).
Z_REF = 50.0

# Diagonal frequency-response entries with magnitude below this are redrawn
# (A and B require inverting them).
_MIN_DIAG_MAG = 1e-6

_MAX_RETRIES = 10


@dataclass
class NrcRealization:
    """One draw of all mismatch matrices and the derived NRC matrices.

    Diagonal matrices are stored as their diagonal vectors: ``f_t``/``f_r``
    are the K UE TX/RX frequency responses, ``l_t``/``l_r`` the N BS ones.
    ``m_t``/``m_r`` are the dense N x N BS coupling matrices.
    """

    f_t: np.ndarray
    f_r: np.ndarray
    l_t: np.ndarray
    l_r: np.ndarray
    m_t: np.ndarray
    m_r: np.ndarray
    sigma_F2: float
    sigma_L2: float
    sigma_M2: float

    def __post_init__(self):
        # a_k = f_r,k / f_t,k ; B = L_r^-1 (M_r^T)^-1 M_t L_t
        self.a = self.f_r / self.f_t
        self.B = (np.linalg.solve(self.m_r.T, self.m_t)
                  * self.l_t[None, :] / self.l_r[:, None])

    @property
    def n_bs(self) -> int:
        return self.l_t.size

    @property
    def n_ue(self) -> int:
        return self.f_t.size

    @property
    def A(self) -> np.ndarray:
        return np.diag(self.a)

    @property
    def a_dev(self) -> np.ndarray:
        return self.a - 1.0

    @property
    def B_dev(self) -> np.ndarray:
        return self.B - np.eye(self.n_bs)


@dataclass
class ChannelSet:
    """Physical channel and the effective channels derived from one NRC draw."""

    P: np.ndarray
    G: np.ndarray
    H: np.ndarray
    subcarrier_index: int = 0


def gen_physical_channel(n_bs: int, n_ue: int, rng: np.random.Generator,
                         size: int | None = None) -> np.ndarray:
    """i.i.d. CN(0, 1) physical channel(s), shape (N, K) or (size, N, K)."""
    if n_ue < 1 or n_bs < n_ue:
        raise ValueError(f"need N >= K >= 1, got N={n_bs}, K={n_ue}")
    shape = (n_bs, n_ue) if size is None else (size, n_bs, n_ue)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        / np.sqrt(2.0)


def _fr_diagonal(size: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Diagonal of a frequency-response matrix: 1 + CN(0, sigma2) entries."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be non-negative")
    d = 1.0 + np.sqrt(sigma2 / 2.0) * (rng.standard_normal(size)
                                       + 1j * rng.standard_normal(size))
    for _ in range(_MAX_RETRIES):
        bad = np.abs(d) < _MIN_DIAG_MAG
        if not bad.any():
            break
        d[bad] = 1.0 + np.sqrt(sigma2 / 2.0) * (
            rng.standard_normal(bad.sum()) + 1j * rng.standard_normal(bad.sum()))
    return d.astype(complex)


def gen_fr_mismatch(size: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Diagonal frequency-response mismatch matrix (size x size)."""
    return np.diag(_fr_diagonal(size, sigma2, rng))


def gen_coupling_matrix(geometry: ArrayGeometry, sigma_M2: float,
                        rng: np.random.Generator,
                        z_matrix: np.ndarray | None = None,
                        coupled: bool = True) -> np.ndarray:
    """One draw of the BS mutual-coupling matrix (either TX or RX mode).

    Per-antenna input reflection coefficients gamma_i ~ CN(0, sigma_M2)
    (against the reference impedance Z_REF) perturb the termination
    impedances z_i = Z_REF (1 + gamma_i) / (1 - gamma_i), giving

        M = (Z_self + Z_REF) (Z + diag(z_i))^{-1},

    where Z is the array impedance matrix. M -> I for a matched, decoupled
    array; ``coupled=False`` zeroes the mutual terms (test hook).
    """
    if sigma_M2 < 0:
        raise ValueError("sigma_M2 must be non-negative")
    n = geometry.n_antennas
    z_self = self_impedance()
    if z_matrix is None:
        z_matrix = impedance_matrix(geometry)
    if not coupled:
        z_matrix = np.diag(np.diag(z_matrix))
    for _ in range(_MAX_RETRIES):
        gamma = np.sqrt(sigma_M2 / 2.0) * (rng.standard_normal(n)
                                           + 1j * rng.standard_normal(n))
        # Z carries z_self on its diagonal; the termination adds in series.
        z_term = Z_REF * (1.0 + gamma) / (1.0 - gamma)
        loaded = z_matrix + np.diag(z_term)
        try:
            return (z_self + Z_REF) * np.linalg.inv(loaded)
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError("coupling matrix singular after retries")


def draw_nrc(geometry: ArrayGeometry, n_ue: int, sigma_F2: float,
             sigma_L2: float, sigma_M2: float, rng: np.random.Generator,
             z_matrix: np.ndarray | None = None,
             coupled: bool = True) -> NrcRealization:
    """Draw all mismatch matrices for one trial (fixed across subcarriers)."""
    if z_matrix is None:
        z_matrix = impedance_matrix(geometry)
    n = geometry.n_antennas
    return NrcRealization(
        f_t=_fr_diagonal(n_ue, sigma_F2, rng),
        f_r=_fr_diagonal(n_ue, sigma_F2, rng),
        l_t=_fr_diagonal(n, sigma_L2, rng),
        l_r=_fr_diagonal(n, sigma_L2, rng),
        m_t=gen_coupling_matrix(geometry, sigma_M2, rng, z_matrix, coupled),
        m_r=gen_coupling_matrix(geometry, sigma_M2, rng, z_matrix, coupled),
        sigma_F2=sigma_F2, sigma_L2=sigma_L2, sigma_M2=sigma_M2)


def identity_nrc(n_bs: int, n_ue: int) -> NrcRealization:
    """Fully reciprocal hardware: A = I_K, B = I_N exactly."""
    return NrcRealization(
        f_t=np.ones(n_ue, complex), f_r=np.ones(n_ue, complex),
        l_t=np.ones(n_bs, complex), l_r=np.ones(n_bs, complex),
        m_t=np.eye(n_bs, dtype=complex), m_r=np.eye(n_bs, dtype=complex),
        sigma_F2=0.0, sigma_L2=0.0, sigma_M2=0.0)


def assemble_channels(P: np.ndarray, nrc: NrcRealization,
                      subcarrier_index: int = 0) -> ChannelSet:
    """Effective channels G = L_r M_r P F_t and H = F_r P^T M_t L_t."""
    n, k = P.shape
    if n != nrc.n_bs or k != nrc.n_ue:
        raise ValueError(f"P shape {P.shape} does not match NRC draw "
                         f"({nrc.n_bs}, {nrc.n_ue})")
    G = nrc.l_r[:, None] * (nrc.m_r @ P) * nrc.f_t[None, :]
    H = nrc.f_r[:, None] * (P.T @ nrc.m_t) * nrc.l_t[None, :]
    return ChannelSet(P=P, G=G, H=H, subcarrier_index=subcarrier_index)
