"""Reference BS-side calibration schemes: direct-path LS and neighbor LS.

Both schemes measure the inter-antenna coupling channel to estimate the
per-antenna TX/RX frequency-response ratios, producing a strictly diagonal
BS NRC estimate (mutual-coupling mismatch is outside their model). UE-side
compensation is handled separately through downlink demodulation pilots.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .dipole import impedance_matrix
from .geometry import ArrayGeometry

DEFAULT_COUPLING_SNR_DB = 80.0


@dataclass
class CouplingMeasurement:
    """Bidirectional observations over the inter-antenna coupling channel."""

    pairs: list = field(default_factory=list)  # (i, j, forward_obs, reverse_obs)
    coupling_snr_db: float = DEFAULT_COUPLING_SNR_DB


def coupling_channel(geometry: ArrayGeometry,
                     coupling_snr_db: float = DEFAULT_COUPLING_SNR_DB) -> np.ndarray:
    """(N, N) coupling-channel gains between antenna pairs.

    Complex gains follow the mutual-impedance profile, scaled so the
    strongest (nearest-neighbor) pair sits at the configured SNR against
    unit-variance observation noise.
    """
    z = impedance_matrix(geometry).copy()
    np.fill_diagonal(z, 0.0)
    peak = np.abs(z).max()
    if peak == 0:
        raise ValueError("degenerate geometry: no inter-antenna coupling")
    return z * (10.0 ** (coupling_snr_db / 20.0) / peak)


def measure_pairs(nrc, geometry: ArrayGeometry, pair_indices,
                  rng: np.random.Generator,
                  coupling_snr_db: float = DEFAULT_COUPLING_SNR_DB,
                  noise: bool = True) -> CouplingMeasurement:
    """Exchange pilots over the coupling channel for the given (i, j) pairs.

    forward_obs: antenna i transmits, j receives (l_r[j] c_ij l_t[i] + noise);
    reverse_obs: the reverse direction. Noise is i.i.d. CN(0, 1).
    """
    c = coupling_channel(geometry, coupling_snr_db)
    meas = CouplingMeasurement(coupling_snr_db=coupling_snr_db)
    for i, j in pair_indices:
        fwd = nrc.l_r[j] * c[i, j] * nrc.l_t[i]
        rev = nrc.l_r[i] * c[j, i] * nrc.l_t[j]
        if noise:
            fwd = fwd + (rng.standard_normal() + 1j * rng.standard_normal()) \
                / np.sqrt(2.0)
            rev = rev + (rng.standard_normal() + 1j * rng.standard_normal()) \
                / np.sqrt(2.0)
        meas.pairs.append((i, j, fwd, rev))
    return meas


def argos_calibrate(meas: CouplingMeasurement, n: int,
                    reference: int = 0) -> np.ndarray:
    """Direct-path ratio calibration against a reference antenna.

    Expects one (reference, i) pair per non-reference antenna; returns the
    length-N diagonal of the BS NRC estimate, anchored to 1 at the
    reference. With diagonal true B this recovers b_i / b_ref.
    """
    b_hat = np.ones(n, dtype=complex)
    seen = np.zeros(n, dtype=bool)
    seen[reference] = True
    for i, j, fwd, rev in meas.pairs:
        if i == reference:
            other, num, den = j, rev, fwd   # j tx -> ref rx over reverse
        elif j == reference:
            other, num, den = i, fwd, rev
        else:
            continue
        # b_other / b_ref = (l_t,other l_r,ref) / (l_r,other l_t,ref)
        if np.abs(den) < 1e-12 * max(np.abs(num), 1.0):
            warnings.warn(f"near-zero observation for antenna {other}; "
                          "excluded from calibration", RuntimeWarning,
                          stacklevel=2)
            continue
        b_hat[other] = num / den
        seen[other] = True
    if not seen.all():
        missing = np.flatnonzero(~seen)
        warnings.warn(f"antennas {missing.tolist()} had no usable reference "
                      "measurement; left at unity", RuntimeWarning,
                      stacklevel=2)
    return b_hat


def argos_pairs(n: int, reference: int = 0):
    """Star-topology pair list (reference, i) for all other antennas."""
    return [(reference, i) for i in range(n) if i != reference]


def neighbor_pairs(geometry: ArrayGeometry, radius: float):
    """All unordered antenna pairs within ``radius`` grid-spacing units."""
    dist = geometry.pairwise_distances() / geometry.spacing
    n = geometry.n_antennas
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= radius + 1e-9:
                out.append((i, j))
    return out


def neighbor_ls_calibrate(meas: CouplingMeasurement, n: int,
                          anchor: int = 0) -> np.ndarray:
    """Joint LS over all pair observations, anchored at one antenna.

    Minimizes sum over pairs of |b_i rev_ij - b_j fwd_ij|^2 subject to
    b_anchor = 1 (consistency: b_i l_r,i l_t,j = b_j l_r,j l_t,i).
    """
    adj = np.zeros((n, n))
    for i, j, _, _ in meas.pairs:
        adj[i, j] = adj[j, i] = 1
    n_comp, _ = connected_components(adj, directed=False)
    if n_comp > 1:
        raise ValueError("measurement graph is disconnected; "
                         "cannot calibrate jointly")
    free = [i for i in range(n) if i != anchor]
    col = {ant: idx for idx, ant in enumerate(free)}
    a = np.zeros((len(meas.pairs), n - 1), dtype=complex)
    rhs = np.zeros(len(meas.pairs), dtype=complex)
    for e, (i, j, fwd, rev) in enumerate(meas.pairs):
        # equation: rev * b_i - fwd * b_j = 0
        if i == anchor:
            rhs[e] = -rev
        else:
            a[e, col[i]] = rev
        if j == anchor:
            rhs[e] = fwd
        else:
            a[e, col[j]] = -fwd
    sol, _, _, _ = np.linalg.lstsq(a, rhs, rcond=None)
    b_hat = np.ones(n, dtype=complex)
    b_hat[free] = sol
    return b_hat


def dl_pilot_csi(H: np.ndarray, precoder, tau_d: int, rho_d: float,
                 rng: np.random.Generator, noise: bool = True) -> np.ndarray:
    """Per-UE effective-gain estimates from orthogonal downlink pilots.

    After despreading the length-tau_d pilots through the beamformed
    channel, each UE sees y_k = sqrt(rho_d tau_d) beta h_k^T u_k + n_k and
    estimates the gain as y_k / sqrt(rho_d tau_d).
    """
    k = H.shape[0]
    if tau_d < k:
        raise ValueError(f"pilot budget tau_d={tau_d} < K={k}")
    alpha = precoder.beta * np.einsum("kn,nk->k", H, precoder.U)
    scale = np.sqrt(rho_d * tau_d)
    z = np.zeros(k, dtype=complex)
    if noise:
        z = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2.0)
    return alpha + z / scale
