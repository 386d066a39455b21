"""Round-trip pilot protocol and iterative estimation of the NRC matrices.

The BS transmits an orthonormal N x N pilot matrix, UEs echo conjugated
receptions, and the BS forms the processed observation
Q = Y* X^H = sqrt(rho_u rho_d) G* A G^T B + V. A and B are then estimated by
alternating column-wise least squares: B on a sparse antenna-neighborhood
support, A through a real-stacked diagonal LS solve.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import dft

from .geometry import SparsitySupport

# Relative singular-value cutoff for the column-wise pseudo-inverse solves.
LSTSQ_RCOND = 1e-12


@dataclass
class EstimationResult:
    """Final averaged estimates plus per-subcarrier convergence traces."""

    a_hat: np.ndarray                      # length-K diagonal of A estimate
    B_hat: np.ndarray                      # N x N, zero outside the support
    iterations: int
    objective_trace: list = field(default_factory=list)

    @property
    def A_hat(self) -> np.ndarray:
        return np.diag(self.a_hat)

    @property
    def psi_hat(self) -> np.ndarray:
        return np.concatenate([self.a_hat.real, self.a_hat.imag])


def gen_pilot_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix of size n (orthonormal, constant-modulus entries)."""
    if n < 1:
        raise ValueError("pilot matrix size must be >= 1")
    return dft(n) / np.sqrt(n)


def roundtrip(G: np.ndarray, H: np.ndarray, X_nrc: np.ndarray,
              rho_tilde_d: float, rho_tilde_u: float,
              rng: np.random.Generator, noise: bool = True) -> np.ndarray:
    """BS-to-UEs-to-BS pilot exchange; returns the N x N observation Y_nrc."""
    k, n = H.shape
    zd = np.zeros((k, n), dtype=complex)
    zu = np.zeros((n, n), dtype=complex)
    if noise:
        zd = (rng.standard_normal(zd.shape) + 1j * rng.standard_normal(zd.shape)) \
            / np.sqrt(2.0)
        zu = (rng.standard_normal(zu.shape) + 1j * rng.standard_normal(zu.shape)) \
            / np.sqrt(2.0)
    r_nrc = np.sqrt(rho_tilde_d) * (H @ X_nrc) + zd
    return np.sqrt(rho_tilde_u) * (G @ np.conj(r_nrc)) + zu


def process_observation(Y_nrc: np.ndarray, X_nrc: np.ndarray) -> np.ndarray:
    """Q = Y* X^H; noiselessly equals sqrt(rho_u rho_d) G* A G^T B."""
    return np.conj(Y_nrc) @ np.conj(X_nrc.T)


def _regressor(G_hat: np.ndarray, a_hat: np.ndarray,
               rho_tilde_u: float, rho_tilde_d: float) -> np.ndarray:
    """T = sqrt(rho_u rho_d) Ghat* Ahat Ghat^T, the N x N B-step regressor."""
    scale = np.sqrt(rho_tilde_u * rho_tilde_d)
    return scale * ((np.conj(G_hat) * a_hat[None, :]) @ G_hat.T)


def estimate_B_step(Q: np.ndarray, G_hat: np.ndarray, a_hat: np.ndarray,
                    support: SparsitySupport, rho_tilde_u: float,
                    rho_tilde_d: float) -> np.ndarray:
    """Column-wise sparse LS refinement of B given the current A estimate.

    Each column j is solved on its reduced support via the minimum-norm
    pseudo-inverse; entries off the support are exactly zero. Rank-deficient
    reduced systems fall back to the minimum-norm solution with a warning.
    """
    n = Q.shape[0]
    t = _regressor(G_hat, a_hat, rho_tilde_u, rho_tilde_d)
    b_hat = np.zeros((n, n), dtype=complex)
    for j in range(n):
        sup = support.supports[j]
        sol, _, rank, _ = np.linalg.lstsq(t[:, sup], Q[:, j], rcond=LSTSQ_RCOND)
        if rank < len(sup):
            warnings.warn(f"rank-deficient reduced system in column {j} "
                          f"(rank {rank} < {len(sup)}); using minimum-norm "
                          "solution", RuntimeWarning, stacklevel=2)
        b_hat[sup, j] = sol
    return b_hat


def estimate_A_step(Q: np.ndarray, G_hat: np.ndarray, B_hat: np.ndarray,
                    rho_tilde_u: float, rho_tilde_d: float) -> np.ndarray:
    """Diagonal UE-side LS refinement given the current B estimate.

    Solves min_xi sum_j ||q_j - W_j xi||^2 with
    W_j = sqrt(rho_u rho_d) Ghat* diag([Ghat^T Bhat]_j) through the
    real-stacked normal equations, returning the length-K diagonal estimate.
    """
    k = G_hat.shape[1]
    scale = np.sqrt(rho_tilde_u * rho_tilde_d)
    c = scale * (G_hat.T @ B_hat)            # (K, N), columns c_j
    s = G_hat.T @ np.conj(G_hat)             # Ghat^T Ghat*
    # sum_j W_j^H W_j and sum_j W_j^H q_j, using W_j = Ghat* diag(c_j)
    normal = s * (np.conj(c) @ c.T)
    rhs = (np.conj(c) * (G_hat.T @ Q)).sum(axis=1)
    # real-stacked system in psi = [Re(xi); Im(xi)]
    nr = np.block([[normal.real, -normal.imag], [normal.imag, normal.real]])
    br = np.concatenate([rhs.real, rhs.imag])
    cond = np.linalg.cond(nr)
    if not np.isfinite(cond) or cond > 1e14:
        raise np.linalg.LinAlgError(
            f"singular normal matrix in A step (cond={cond:.3e}, K={k})")
    psi = np.linalg.solve(nr, br)
    return psi[:k] + 1j * psi[k:]


def _objective(Q, G_hat, a_hat, B_hat, rho_tilde_u, rho_tilde_d) -> float:
    t = _regressor(G_hat, a_hat, rho_tilde_u, rho_tilde_d)
    return float(np.linalg.norm(Q - t @ B_hat, "fro") ** 2)


def iterate_estimate(Q_list, G_hat_list, support: SparsitySupport, iters: int,
                     rho_tilde_u: float, rho_tilde_d: float) -> EstimationResult:
    """Alternating B/A refinement per subcarrier, then subcarrier averaging.

    Starts from A_hat = I_K. Each iteration round is one B step followed by
    one A step; the Frobenius objective is recorded after each half-step.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if len(Q_list) != len(G_hat_list) or not Q_list:
        raise ValueError("need matching, non-empty Q and G_hat lists")
    k = G_hat_list[0].shape[1]
    a_acc = np.zeros(k, dtype=complex)
    b_acc = np.zeros_like(Q_list[0])
    traces = []
    for q, g_hat in zip(Q_list, G_hat_list):
        a_hat = np.ones(k, dtype=complex)
        trace = []
        for _ in range(iters):
            b_hat = estimate_B_step(q, g_hat, a_hat, support,
                                    rho_tilde_u, rho_tilde_d)
            trace.append(_objective(q, g_hat, a_hat, b_hat,
                                    rho_tilde_u, rho_tilde_d))
            a_hat = estimate_A_step(q, g_hat, b_hat, rho_tilde_u, rho_tilde_d)
            trace.append(_objective(q, g_hat, a_hat, b_hat,
                                    rho_tilde_u, rho_tilde_d))
        a_acc += a_hat
        b_acc = b_acc + b_hat
        traces.append(trace)
    n_sc = len(Q_list)
    return EstimationResult(a_hat=a_acc / n_sc, B_hat=b_acc / n_sc,
                            iterations=iters, objective_trace=traces)
