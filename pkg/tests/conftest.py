"""Shared fixtures and independent oracles for the test suite.

The dense oracles rebuild every quadratic-form matrix from the raw channel
inputs with explicit Kronecker products, so they share no code path with the
blockwise solver internals they check.
"""

from __future__ import annotations

import numpy as np
import pytest

from sgpip import gpip


def crandn(rng: np.random.Generator, *shape) -> np.ndarray:
    """Standard complex Gaussian CN(0, 1) array."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_psd(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    x = crandn(rng, n, n)
    return scale * (x @ x.conj().T) / n


def dense_quadratic_pair(
    basis: np.ndarray,
    channel_cols: np.ndarray,
    Phi: list[np.ndarray] | None,
    noise_ratio: float,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Explicit (K*D x K*D) numerator/denominator matrices per user.

    Built from raw inputs: A_k = I (x) (G^H h_k h_k^H G + G^H Phi_k G)
    + noise_ratio * I (x) G^H G, and B_k removes the signal rank-one term
    from diagonal block k only.
    """
    n_users = channel_cols.shape[1]
    gram = basis.conj().T @ basis
    eye = np.eye(n_users)
    a_list, b_list = [], []
    for k in range(n_users):
        s_k = basis.conj().T @ channel_cols[:, k]
        n_k = np.outer(s_k, s_k.conj())
        if Phi is not None:
            n_k = n_k + basis.conj().T @ Phi[k] @ basis
        a_k = np.kron(eye, n_k + noise_ratio * gram)
        selector = np.zeros((n_users, n_users))
        selector[k, k] = 1.0
        b_k = a_k - np.kron(selector, np.outer(s_k, s_k.conj()))
        a_list.append(a_k)
        b_list.append(b_k)
    return a_list, b_list


def dense_kkt_step(
    a_list: list[np.ndarray], b_list: list[np.ndarray], w: np.ndarray
) -> np.ndarray:
    """B~^{-1} A~ w from the dense matrices (eigenvalue scales omitted)."""
    a_vals = [float((w.conj() @ m @ w).real) for m in a_list]
    b_vals = [float((w.conj() @ m @ w).real) for m in b_list]
    a_tilde = sum(m / v for m, v in zip(a_list, a_vals))
    b_tilde = sum(m / v for m, v in zip(b_list, b_vals))
    return np.linalg.solve(b_tilde, a_tilde @ w)


def dense_btilde(
    a_list: list[np.ndarray], b_list: list[np.ndarray], w: np.ndarray
) -> np.ndarray:
    b_vals = [float((w.conj() @ m @ w).real) for m in b_list]
    return sum(m / v for m, v in zip(b_list, b_vals))


def scalar_sinr_oracle(F: np.ndarray, H: np.ndarray, k: int, power: float, sigma2: float):
    """Term-by-term SINR with explicit Python loops (no vectorized reuse)."""
    n, n_users = H.shape
    signal = 0.0 + 0.0j
    for antenna in range(n):
        signal += np.conj(H[antenna, k]) * F[antenna, k]
    interference = 0.0
    for i in range(n_users):
        if i == k:
            continue
        term = 0.0 + 0.0j
        for antenna in range(n):
            term += np.conj(H[antenna, k]) * F[antenna, i]
        interference += abs(term) ** 2
    return abs(signal) ** 2 / (interference + sigma2 / power)


def scalar_sum_se_oracle(F, H, power, sigma2):
    return sum(
        np.log2(1.0 + scalar_sinr_oracle(F, H, k, power, sigma2))
        for k in range(H.shape[1])
    )


def scalar_lower_bound_oracle(F, H_hat, Phi, power, sigma2):
    n, n_users = H_hat.shape
    total = 0.0
    for k in range(n_users):
        signal = abs(np.conj(H_hat[:, k]) @ F[:, k]) ** 2
        interference = 0.0
        for i in range(n_users):
            if i != k:
                interference += abs(np.conj(H_hat[:, k]) @ F[:, i]) ** 2
        leakage = 0.0
        for i in range(n_users):
            leakage += float((F[:, i].conj() @ Phi[k] @ F[:, i]).real)
        total += np.log2(1.0 + signal / (interference + leakage + sigma2 / power))
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20250808)


def make_perfect_problem(rng, n=8, k=3, noise_ratio=0.1):
    H = crandn(rng, n, k)
    return gpip.build_subspace_problem_perfect(H, 1.0, noise_ratio), H


def make_cov_problem(rng, n=8, k=2, r=1, noise_ratio=0.1, phi_scale=0.2):
    H_hat = crandn(rng, n, k)
    Phi = [random_psd(rng, n, phi_scale) for _ in range(k)]
    return gpip.build_subspace_problem_cov(H_hat, Phi, r, 1.0, noise_ratio), H_hat, Phi


def make_fulldim_problem(rng, n=6, k=2, noise_ratio=0.1, with_phi=False, phi_scale=0.2):
    H = crandn(rng, n, k)
    Phi = [random_psd(rng, n, phi_scale) for _ in range(k)] if with_phi else None
    return gpip.build_subspace_problem_fulldim(H, 1.0, noise_ratio, Phi=Phi), H, Phi


def random_unit_weights(rng, problem) -> np.ndarray:
    w = crandn(rng, problem.n_users * problem.dim)
    return w / np.linalg.norm(w)
