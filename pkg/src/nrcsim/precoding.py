"""Uplink training, MRT/ZF precoding, NRC-aware correction, and downlink SINR."""

from dataclasses import dataclass

import numpy as np

# SINR reported when the residual interference-plus-noise power is zero.
SINR_CAP = 1e9


@dataclass
class Precoder:
    """Linear precoder U with power-normalization scalar beta.

    ``U`` is the unnormalized matrix (N x K); the transmitted signal is
    x = beta * U @ s, so that per-realization normalization gives
    Tr((beta U)^H (beta U)) = 1 exactly.
    """

    U: np.ndarray
    beta: float
    kind: str
    nrc_corrected: bool = False

    @property
    def scaled(self) -> np.ndarray:
        return self.beta * self.U


@dataclass
class LinkSample:
    """One downlink block with the interference bookkeeping of the NRC model.

    All arrays are (K, n_symbols). The received signal decomposes exactly as
    r = sqrt(rho_d) * alpha_hat * s + z_si + z_iui + z_noise.
    """

    r: np.ndarray
    s: np.ndarray
    z_si: np.ndarray
    z_iui: np.ndarray
    z_noise: np.ndarray
    alpha_hat: np.ndarray


def ul_train_and_estimate(G: np.ndarray, rho_u: float, tau_u: int,
                          rng: np.random.Generator) -> np.ndarray:
    """LMMSE uplink channel estimate from orthogonal pilots.

    Simulates Y = sqrt(rho_u tau_u) G + Z with unit-variance noise and
    applies the per-entry LMMSE scaling valid for CN(0, 1) channel entries.
    ``G`` may be batched with leading axes; rho_u is linear scale.
    """
    k = G.shape[-1]
    if tau_u < k:
        raise ValueError(f"pilot budget tau_u={tau_u} < K={k}")
    if rho_u <= 0:
        raise ValueError("rho_u must be positive (linear scale)")
    snr = rho_u * tau_u
    z = (rng.standard_normal(G.shape) + 1j * rng.standard_normal(G.shape)) \
        / np.sqrt(2.0)
    y = np.sqrt(snr) * G + z
    return (np.sqrt(snr) / (1.0 + snr)) * y


def _zf_unnormalized(H_hat: np.ndarray) -> np.ndarray:
    """H^H (H H^H)^{-1}, batched over leading axes."""
    hh = H_hat @ np.conj(np.swapaxes(H_hat, -1, -2))
    if np.ndim(hh) == 2 and np.linalg.cond(hh) > 1e12:
        raise np.linalg.LinAlgError("H Hhat^H is (near-)singular; ZF undefined")
    sol = np.linalg.solve(hh, H_hat)  # (.., K, N) = (HH^H)^-1 H
    return np.conj(np.swapaxes(sol, -1, -2))


def make_precoder(H_hat: np.ndarray, kind: str) -> Precoder:
    """NRC-blind MRT or ZF precoder from the estimated downlink channel."""
    if kind == "MRT":
        u = np.conj(H_hat.T)
    elif kind == "ZF":
        u = _zf_unnormalized(H_hat)
    else:
        raise ValueError(f"unknown precoder kind {kind!r}")
    beta = 1.0 / np.sqrt(np.sum(np.abs(u) ** 2))
    return Precoder(U=u, beta=float(beta), kind=kind)


def nrc_aware(precoder: Precoder, b_hat: np.ndarray,
              a_hat: np.ndarray | None = None) -> Precoder:
    """Transform a blind precoder to U_nrc = Bhat^{-1} U Ahat^{-1}.

    ``b_hat`` is either a dense (N, N) matrix or the length-N diagonal of a
    diagonal estimate; ``a_hat`` is the length-K diagonal of the UE-side
    estimate, or None when only the BS side was estimated.
    """
    u = precoder.U
    if b_hat.ndim == 1:
        if np.any(np.abs(b_hat) < 1e-12):
            raise np.linalg.LinAlgError("singular diagonal B estimate")
        u = u / b_hat[:, None]
    else:
        u = np.linalg.solve(b_hat, u)
    if a_hat is not None:
        if np.any(np.abs(a_hat) < 1e-12):
            raise np.linalg.LinAlgError("singular A estimate")
        u = u / a_hat[None, :]
    beta = 1.0 / np.sqrt(np.sum(np.abs(u) ** 2))
    return Precoder(U=u, beta=float(beta), kind=precoder.kind,
                    nrc_corrected=True)


def qpsk_symbols(n_ue: int, n_symbols: int, rng: np.random.Generator) -> np.ndarray:
    """(K, n_symbols) unit-modulus QPSK data symbols."""
    bits = rng.integers(0, 4, size=(n_ue, n_symbols))
    return np.exp(1j * (np.pi / 4 + np.pi / 2 * bits))


def dl_transmit_receive(H: np.ndarray, precoder: Precoder, s: np.ndarray,
                        rho_d: float, rng: np.random.Generator,
                        alpha_hat: np.ndarray | None = None,
                        noise: bool = True) -> LinkSample:
    """Simulate one downlink block r = sqrt(rho_d) H (beta U) s + z.

    ``alpha_hat`` is the per-user effective-gain reference used for the
    SI/IUI bookkeeping (defaults to the instantaneous beamformed gains,
    which zeroes the SI term).
    """
    k = H.shape[0]
    if s.ndim == 1:
        s = s[:, None]
    if s.shape[0] != k:
        raise ValueError("symbol vector does not match user count")
    eff = precoder.beta * (H @ precoder.U)  # (K, K) beamformed channel
    gains = np.diag(eff).copy()
    if alpha_hat is None:
        alpha_hat = gains
    z = np.zeros((k, s.shape[1]), dtype=complex)
    if noise:
        z = (rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape)) \
            / np.sqrt(2.0)
    sq = np.sqrt(rho_d)
    z_si = sq * (gains - alpha_hat)[:, None] * s
    z_iui = sq * ((eff - np.diag(gains)) @ s)
    r = sq * alpha_hat[:, None] * s + z_si + z_iui + z
    return LinkSample(r=r, s=s, z_si=z_si, z_iui=z_iui, z_noise=z,
                      alpha_hat=np.asarray(alpha_hat))


def beamformed_gain_samples(nrc, rho_u: float, tau_u: int, kind: str,
                            n_mc: int, rng: np.random.Generator,
                            b_hat: np.ndarray | None = None,
                            a_hat: np.ndarray | None = None) -> np.ndarray:
    """(n_mc, K) Monte-Carlo samples of beta * h_k^T u_k for one NRC draw.

    Fresh physical channels and training noise per draw; the precoder is the
    configured MRT/ZF design, optionally NRC-corrected with the supplied
    estimates. Vectorized over draws.
    """
    from .channel import gen_physical_channel  # local import avoids cycle

    n, k = nrc.n_bs, nrc.n_ue
    p = gen_physical_channel(n, k, rng, size=n_mc)
    g = nrc.l_r[None, :, None] * (nrc.m_r @ p) * nrc.f_t[None, None, :]
    h = nrc.f_r[None, :, None] * (np.swapaxes(p, -1, -2) @ nrc.m_t) \
        * nrc.l_t[None, None, :]
    g_hat = ul_train_and_estimate(g, rho_u, tau_u, rng)
    h_hat = np.swapaxes(g_hat, -1, -2)
    if kind == "MRT":
        u = np.conj(np.swapaxes(h_hat, -1, -2))
    elif kind == "ZF":
        u = _zf_unnormalized(h_hat)
    else:
        raise ValueError(f"unknown precoder kind {kind!r}")
    if b_hat is not None:
        if b_hat.ndim == 1:
            u = u / b_hat[None, :, None]
        else:
            u = np.linalg.solve(b_hat[None, :, :], u)
    if a_hat is not None:
        u = u / a_hat[None, None, :]
    beta = 1.0 / np.sqrt(np.sum(np.abs(u) ** 2, axis=(-2, -1)))
    return beta[:, None] * np.einsum("bkn,bnk->bk", h, u)


def effective_gain(nrc, rho_u: float, tau_u: int, kind: str, n_mc: int,
                   rng: np.random.Generator,
                   b_hat: np.ndarray | None = None,
                   a_hat: np.ndarray | None = None) -> np.ndarray:
    """Channel-hardening effective gains alpha_k = E[beta h_k^T u_k]."""
    if n_mc < 1:
        raise ValueError("n_mc must be >= 1")
    # chunked to bound peak memory: each draw carries several N x N arrays
    chunk = max(1, min(n_mc, 256))
    total = np.zeros(nrc.n_ue, dtype=complex)
    done = 0
    while done < n_mc:
        m = min(chunk, n_mc - done)
        total += beamformed_gain_samples(nrc, rho_u, tau_u, kind, m, rng,
                                         b_hat, a_hat).sum(axis=0)
        done += m
    return total / n_mc


def instantaneous_sinr(link: LinkSample, alpha_hat: np.ndarray, rho_d: float,
                       cap: float = SINR_CAP) -> np.ndarray:
    """Per-user SINR with the residual averaged over the block's symbols."""
    sq = np.sqrt(rho_d)
    signal = np.mean(np.abs(sq * alpha_hat[:, None] * link.s) ** 2, axis=1)
    resid = np.mean(np.abs(link.r - sq * alpha_hat[:, None] * link.s) ** 2,
                    axis=1)
    sinr = np.full(link.r.shape[0], cap)
    ok = resid > 0
    sinr[ok] = np.minimum(signal[ok] / resid[ok], cap)
    return sinr
