"""Spectral-efficiency metrics and subspace diagnostics.

All rates are in bits/s/Hz (log base 2). Precoders are evaluated as-is; the
noise term enters as ``sigma2 / power`` so that a unit-Frobenius-norm precoder
corresponds to transmitting at the full power budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericError


@dataclass(frozen=True)
class Precoder:
    """N x K precoding matrix, column k serving user k."""

    F: np.ndarray

    @property
    def n_users(self) -> int:
        return self.F.shape[1]

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.F))


def frobenius_normalized(F: np.ndarray) -> Precoder:
    """Scale F to unit Frobenius norm (full power budget used with equality)."""
    F = np.asarray(F, dtype=complex)
    norm = np.linalg.norm(F)
    if norm == 0:
        raise ValueError("cannot normalize a zero precoder")
    return Precoder(F=F / norm)


def _as_matrix(F) -> np.ndarray:
    if isinstance(F, Precoder):
        return F.F
    return np.asarray(F)


def sinr(F, H: np.ndarray, k: int, power: float, sigma2: float) -> float:
    """Linear SINR of user k (0-based): |h_k^H f_k|^2 / (interference + sigma2/P)."""
    F = _as_matrix(F)
    if not (power > 0 and sigma2 > 0):
        raise ValueError("power and sigma2 must be positive")
    if F.shape[0] != H.shape[0] or F.shape[1] != H.shape[1]:
        raise ValueError(f"shape mismatch: F {F.shape} vs H {H.shape}")
    if not (0 <= k < H.shape[1]):
        raise ValueError(f"user index {k} out of range for K={H.shape[1]}")
    gains = np.abs(H[:, k].conj() @ F) ** 2
    signal = gains[k]
    interference = gains.sum() - signal
    return float(signal / (interference + sigma2 / power))


def sum_se(F, H: np.ndarray, power: float, sigma2: float) -> float:
    """Sum spectral efficiency sum_k log2(1 + SINR_k) in bits/s/Hz."""
    F = _as_matrix(F)
    return float(
        sum(np.log2(1.0 + sinr(F, H, k, power, sigma2)) for k in range(H.shape[1]))
    )


def sum_se_lower_bound(
    F, H_hat: np.ndarray, Phi: list[np.ndarray], power: float, sigma2: float
) -> float:
    """Robust sum-SE lower bound under estimated channels and error covariances.

    Per user, the denominator collects estimated-channel interference, the
    total error-covariance leakage sum_i f_i^H Phi_k f_i, and sigma2/P.
    """
    F = _as_matrix(F)
    if not (power > 0 and sigma2 > 0):
        raise ValueError("power and sigma2 must be positive")
    n, n_users = H_hat.shape
    if F.shape != (n, n_users):
        raise ValueError(f"shape mismatch: F {F.shape} vs H_hat {H_hat.shape}")
    if len(Phi) != n_users:
        raise ValueError(f"expected {n_users} error covariances, got {len(Phi)}")
    total = 0.0
    for k in range(n_users):
        gains = np.abs(H_hat[:, k].conj() @ F) ** 2
        leakage = float(np.einsum("ni,nm,mi->", F.conj(), Phi[k], F).real)
        if leakage < -1e-10:
            raise NumericError(f"Phi[{k}] quadratic form is negative ({leakage:.3e})")
        denom = gains.sum() - gains[k] + max(leakage, 0.0) + sigma2 / power
        total += np.log2(1.0 + gains[k] / denom)
    return float(total)


def subspace_residual(F, basis: np.ndarray) -> float:
    """Relative distance of span(F) from the column space of ``basis``.

    Returns ||F - proj(F)||_F / ||F||_F with the projector built from a
    column-pivoted QR factorization truncated at 1e-10 of the leading
    diagonal magnitude (tolerant of ill-conditioned bases).
    """
    F = _as_matrix(F)
    norm = np.linalg.norm(F)
    if norm == 0:
        raise ValueError("subspace_residual undefined for a zero matrix")
    if basis.shape[0] != F.shape[0]:
        raise ValueError(f"basis rows {basis.shape[0]} != F rows {F.shape[0]}")
    q, r, _ = scipy.linalg.qr(basis, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return 1.0
    rank = int(np.count_nonzero(diag > 1e-10 * diag[0]))
    q = q[:, :rank]
    residual = F - q @ (q.conj().T @ F)
    return float(np.linalg.norm(residual) / norm)
