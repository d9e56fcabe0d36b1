"""Classical linear precoders and the dirty-paper-coding rate bound."""

from __future__ import annotations

import numpy as np

from .errors import NumericError
from .metrics import Precoder, frobenius_normalized


def mrt(H: np.ndarray) -> Precoder:
    """Matched-filter precoder F = H / ||H||_F."""
    if np.linalg.norm(H) == 0:
        raise ValueError("MRT undefined for a zero channel")
    return frobenius_normalized(H)


def rzf(H: np.ndarray, alpha: float) -> Precoder:
    """Regularized zero-forcing F = normalize(H (H^H H + alpha I)^{-1})."""
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    k = H.shape[1]
    gram = H.conj().T @ H + alpha * np.eye(k)
    try:
        weights = np.linalg.inv(gram)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"RZF system singular at alpha={alpha}: {exc}") from exc
    return frobenius_normalized(H @ weights)


def zf(H: np.ndarray) -> Precoder:
    """Zero-forcing precoder; H^H F is diagonal (no inter-user interference)."""
    n, k = H.shape
    if n < k:
        raise NumericError(f"ZF needs n_antennas >= n_users, got {n} < {k}")
    svals = np.linalg.svd(H, compute_uv=False)
    if svals[-1] <= 1e-12 * svals[0]:
        raise NumericError("ZF requires a full-column-rank channel")
    return rzf(H, alpha=0.0)


def water_filling(gains: np.ndarray, total_power: float) -> np.ndarray:
    """Power allocation p_k = max(0, mu - 1/g_k) with sum p_k = total_power.

    The water level mu is found by bisection on the allocated-power sum; the
    residual after bisection is spread over the active channels so the budget
    is met to machine precision.
    """
    gains = np.asarray(gains, dtype=float)
    if gains.size == 0 or np.any(gains <= 0):
        raise ValueError("all gains must be positive")
    if not (total_power > 0):
        raise ValueError(f"total_power must be positive, got {total_power}")
    inv_g = 1.0 / gains
    lo = float(inv_g.min())                  # zero power allocated
    hi = float(inv_g.max()) + total_power    # allocates at least total_power
    mu = hi
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        allocated = np.maximum(0.0, mu - inv_g).sum()
        if abs(allocated - total_power) <= 1e-12:
            break
        if allocated < total_power:
            lo = mu
        else:
            hi = mu
    p = np.maximum(0.0, mu - inv_g)
    active = p > 0
    p[active] += (total_power - p.sum()) / active.sum()
    return p


def zf_dpc_rate(
    H: np.ndarray,
    power: float,
    sigma2: float,
    waterfill: bool = False,
    order: np.ndarray | None = None,
) -> float:
    """Sum-rate bound of zero-forcing dirty paper coding, in bits/s/Hz.

    Users are encoded in natural column order unless ``order`` permutes them;
    the QR factorization of the (possibly reordered) channel yields per-user
    effective gains |R_kk|^2, powered uniformly or by water-filling.
    """
    n, k = H.shape
    if n < k:
        raise NumericError(f"ZF-DPC needs n_antennas >= n_users, got {n} < {k}")
    if order is not None:
        H = H[:, np.asarray(order)]
    _, r = np.linalg.qr(H)
    gains = np.abs(np.diag(r)) ** 2
    if np.any(gains <= 1e-24 * gains.max()):
        raise NumericError("ZF-DPC encountered a rank-deficient channel")
    if waterfill:
        p = water_filling(gains / sigma2, power)
    else:
        p = np.full(k, power / k)
    return float(np.log2(1.0 + p * gains / sigma2).sum())
