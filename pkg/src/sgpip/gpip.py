"""Subspace-parameterized generalized power iteration precoding.

The precoder is parameterized as F = G W with a tall basis G (N x D) and the
K weight blocks of W stacked into a single vector w of length K*D. Each
user's rate is a Rayleigh quotient log2(w^H A_k w / w^H B_k w) whose
ingredients are block-diagonal, so the whole iteration runs on D x D blocks:

    M_k      = s_k s_k^H + E_k + noise_ratio * C0      (block of A_k)
    s_k      = G^H h_k        (signal vector)
    E_k      = G^H Phi_k G    (error Gram; zero under perfect CSIT)
    C0       = G^H G
    B_k      = A_k with the rank-one s_k s_k^H removed from block k only.

The fixed-point step solves B~^{-1} A~ w with A~ = sum_k A_k / a_k and
B~ = sum_k B_k / b_k (eigenvalue scale factors dropped; they only rescale the
iterate ahead of normalization). Every diagonal block of B~ is the common
matrix S~ minus one rank-one term, so a single D x D inversion plus K
Sherman-Morrison updates covers the whole solve.

Basis choices:
  * perfect CSIT: G = H (stationary precoders live in range(H));
  * imperfect CSIT: G = [H_hat, top-r eigenvectors of each Phi_k];
  * full-dimension reference: G = I_N (the conventional iteration).
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import IllConditionedBasisError, NumericError
from .metrics import Precoder, frobenius_normalized


@dataclass(frozen=True)
class SubspaceProblem:
    """Reduced quadratic-form ingredients driving every solver variant.

    ``signal_vecs`` holds s_k as row k; ``error_grams`` stacks the K D x D
    error Grams (all zero under perfect CSIT); ``basis_gram`` is G^H G and
    ``noise_ratio`` is sigma2 / power.
    """

    basis: np.ndarray
    signal_vecs: np.ndarray
    error_grams: np.ndarray
    basis_gram: np.ndarray
    noise_ratio: float
    has_error: bool = field(init=False)

    def __post_init__(self):
        if self.noise_ratio <= 0:
            raise ValueError(f"noise_ratio must be positive, got {self.noise_ratio}")
        object.__setattr__(self, "has_error", bool(np.any(self.error_grams)))

    @property
    def n_users(self) -> int:
        return self.signal_vecs.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class SolverResult:
    """Converged weights, reconstructed precoder, and the objective trace."""

    weights: np.ndarray          # stacked K*D vector, unit norm
    precoder: Precoder
    objective_trace: list[float]
    iterations: int
    converged: bool
    wall_time: float
    stalled: bool = False


def build_subspace_problem_perfect(
    H: np.ndarray, power: float, sigma2: float
) -> SubspaceProblem:
    """Reduced problem with basis G = H; requires numerically full column rank."""
    n, k = H.shape
    if n < k:
        raise ValueError(f"need n_antennas >= n_users, got {n} < {k}")
    svals = np.linalg.svd(H, compute_uv=False)
    if svals[-1] < 1e-10 * svals[0]:
        raise IllConditionedBasisError(
            f"channel matrix is rank deficient (sigma_min/sigma_max = {svals[-1]/svals[0]:.2e})"
        )
    gram = H.conj().T @ H
    return SubspaceProblem(
        basis=H,
        signal_vecs=gram.conj(),  # row k = G^H h_k
        error_grams=np.zeros((k, k, k), dtype=complex),
        basis_gram=gram,
        noise_ratio=sigma2 / power,
    )


def build_subspace_problem_cov(
    H_hat: np.ndarray,
    Phi: list[np.ndarray],
    r: int,
    power: float,
    sigma2: float,
) -> SubspaceProblem:
    """Augmented basis G = [H_hat, Psi_1, ..., Psi_K] from error-covariance eigenvectors.

    Psi_k holds the r dominant eigenvectors of Phi_k (descending eigenvalues);
    eigenvectors beyond the numerical rank are padded with zero columns. Only
    the basis is truncated: the error Grams use the full Phi_k.
    """
    n, n_users = H_hat.shape
    if not (1 <= r <= n):
        raise ValueError(f"cov rank r must be in [1, {n}], got {r}")
    if len(Phi) != n_users:
        raise ValueError(f"expected {n_users} error covariances, got {len(Phi)}")
    blocks = [H_hat]
    for k, phi in enumerate(Phi):
        scale = np.abs(phi).max()
        if scale > 0 and np.abs(phi - phi.conj().T).max() > 1e-10 * scale:
            raise NumericError(f"Phi[{k}] is not Hermitian")
        lam, vec = np.linalg.eigh(phi)
        if lam.size and lam.min() < -1e-10 * max(lam.max(), 0.0):
            raise NumericError(f"Phi[{k}] is not PSD (min eigenvalue {lam.min():.3e})")
        lam, vec = lam[::-1], vec[:, ::-1]
        rank = int(np.count_nonzero(lam > 1e-12 * max(lam[0], 0.0))) if lam.size else 0
        psi = vec[:, :r].copy()
        if rank < r:
            warnings.warn(
                f"Phi[{k}] has numerical rank {rank} < r={r}; padding with zero eigenvectors",
                stacklevel=2,
            )
            psi[:, rank:] = 0.0
        blocks.append(psi)
    basis = np.hstack(blocks)
    error_grams = np.stack([basis.conj().T @ phi @ basis for phi in Phi])
    return SubspaceProblem(
        basis=basis,
        signal_vecs=(basis.conj().T @ H_hat).T,
        error_grams=error_grams,
        basis_gram=basis.conj().T @ basis,
        noise_ratio=sigma2 / power,
    )


def build_subspace_problem_fulldim(
    channel: np.ndarray,
    power: float,
    sigma2: float,
    Phi: list[np.ndarray] | None = None,
) -> SubspaceProblem:
    """Full-dimension reference problem (basis G = I_N); the unreduced iteration."""
    n, n_users = channel.shape
    if Phi is None:
        error_grams = np.zeros((n_users, n, n), dtype=complex)
    else:
        if len(Phi) != n_users:
            raise ValueError(f"expected {n_users} error covariances, got {len(Phi)}")
        error_grams = np.stack([np.asarray(p, dtype=complex) for p in Phi])
    return SubspaceProblem(
        basis=np.eye(n, dtype=complex),
        signal_vecs=channel.T.copy(),
        error_grams=error_grams,
        basis_gram=np.eye(n, dtype=complex),
        noise_ratio=sigma2 / power,
    )


def _blocks(problem: SubspaceProblem, w: np.ndarray) -> np.ndarray:
    """View the stacked vector as (K, D) with row k = weight block of user k."""
    w = np.asarray(w)
    k, d = problem.n_users, problem.dim
    if w.shape != (k * d,):
        raise ValueError(f"expected stacked weight vector of length {k * d}, got {w.shape}")
    return w.reshape(k, d)


def quad_forms(problem: SubspaceProblem, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Numerator/denominator quadratic forms (a_k, b_k) of every user's quotient.

    b_k is accumulated from nonnegative terms (interference, error leakage,
    noise) rather than by subtraction, so a_k >= b_k holds exactly.
    """
    wb = _blocks(problem, w)
    if not np.any(wb):
        raise ValueError("quad_forms requires a nonzero weight vector")
    inner = problem.signal_vecs.conj() @ wb.T            # [k, i] = s_k^H w_i
    power2 = np.abs(inner) ** 2
    sig_own = np.diag(power2).copy()
    sig_other = power2.sum(axis=1) - sig_own
    noise = problem.noise_ratio * float(
        np.sum((wb.conj() @ problem.basis_gram) * wb).real
    )
    if problem.has_error:
        contracted = np.matmul(wb.conj()[None, :, :], problem.error_grams)
        err = np.sum(contracted * wb[None, :, :], axis=(1, 2)).real
    else:
        err = np.zeros(problem.n_users)
    b = sig_other + err + noise
    a = b + sig_own
    if np.any(b <= 0) or not np.all(np.isfinite(b)):
        raise NumericError(f"nonpositive denominator quadratic form: min b = {b.min():.3e}")
    return a, b


def sherman_morrison_block(
    base_inverse: np.ndarray,
    s: np.ndarray,
    c: float,
    base: np.ndarray | None = None,
) -> np.ndarray:
    """Inverse of (Base - c s s^H) from Base^{-1} via a rank-one update.

    When the update denominator is within 1e-10 of zero the formula is
    unusable; if ``base`` is supplied the block is recomputed by a direct
    ridge-regularized inversion, otherwise a NumericError is raised.
    """
    u = base_inverse @ s
    denom = 1.0 - c * complex(s.conj() @ u)
    if abs(denom) < 1e-10:
        if base is None:
            raise NumericError(f"Sherman-Morrison denominator ~ 0 ({abs(denom):.2e})")
        d = base.shape[0]
        ridge = 1e-12 * float(np.trace(base).real) / d
        return np.linalg.inv(base - c * np.outer(s, s.conj()) + ridge * np.eye(d))
    return base_inverse + (c / denom) * np.outer(u, u.conj())


def _common_matrices(
    problem: SubspaceProblem, a: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """T_A = sum_k M_k / a_k and S~ = sum_k M_k / b_k from the reduced ingredients."""
    s = problem.signal_vecs
    noise_c0 = problem.noise_ratio * problem.basis_gram

    def weighted(coeff: np.ndarray) -> np.ndarray:
        m = (s.T * coeff) @ s.conj() + coeff.sum() * noise_c0
        if problem.has_error:
            m = m + np.einsum("k,kde->de", coeff, problem.error_grams)
        return m

    return weighted(1.0 / a), weighted(1.0 / b)


def _invert_common(problem: SubspaceProblem, s_tilde: np.ndarray) -> np.ndarray:
    """Explicit inverse of S~ with a trace-scaled ridge when it is singular.

    The rank-one-update recursion needs the inverse as a matrix, so this is
    a plain LAPACK getrf/getri pair. Augmented covariance bases can be
    numerically rank deficient (error eigenvectors nearly inside the
    estimated-channel span), in which case the computed inverse is garbage
    and the un-damped iteration diverges; the residual check catches that
    and the ridge keeps the applied inverse bounded without touching
    healthy problems.
    """
    d = s_tilde.shape[0]
    lu, piv, info = lapack.zgetrf(s_tilde)
    if info == 0:
        s_inv, info = lapack.zgetri(lu, piv)
        if info == 0 and np.linalg.norm(s_tilde @ s_inv - np.eye(d)) <= 1e-6 * np.sqrt(d):
            return s_inv
    ridge = 1e-12 * float(np.trace(s_tilde).real) / d
    if ridge <= 0:
        raise NumericError("common denominator matrix is singular with nonpositive trace")
    return np.linalg.inv(s_tilde + ridge * np.eye(d))


def _apply_btilde_inverse(
    problem: SubspaceProblem,
    s_tilde: np.ndarray,
    s_inv: np.ndarray,
    b: np.ndarray,
    rows: np.ndarray,
    use_sherman_morrison: bool = True,
) -> np.ndarray:
    """Solve B~ x = y blockwise; block i of B~ is S~ - (1/b_i) s_i s_i^H.

    The rank-one-update inverses are applied in vector form across all users
    at once: x_i = S~^{-1} r_i + c_i (u_i^H r_i) / (1 - c_i s_i^H u_i) * u_i
    with u_i = S~^{-1} s_i. Blocks whose update denominator is within 1e-10
    of zero fall back to a ridge-regularized dense solve.
    """
    if not use_sherman_morrison:
        out = np.empty_like(rows)
        for i in range(problem.n_users):
            block = s_tilde - (1.0 / b[i]) * np.outer(
                problem.signal_vecs[i], problem.signal_vecs[i].conj()
            )
            out[i] = np.linalg.solve(block, rows[i])
        return out
    s = problem.signal_vecs
    c = 1.0 / b
    base = rows @ s_inv.T        # row i = S~^{-1} r_i
    u = s @ s_inv.T              # row i = S~^{-1} s_i
    s_dot_u = np.sum(s.conj() * u, axis=1)
    u_dot_r = np.sum(u.conj() * rows, axis=1)
    denom = 1.0 - c * s_dot_u
    if np.all(np.abs(denom) >= 1e-10):
        return base + ((c * u_dot_r / denom)[:, None]) * u
    safe = np.abs(denom) >= 1e-10
    coeff = np.where(safe, c * u_dot_r / np.where(safe, denom, 1.0), 0.0)
    out = base + coeff[:, None] * u
    d = s_tilde.shape[0]
    ridge = 1e-12 * float(np.trace(s_tilde).real) / d
    for i in np.flatnonzero(~safe):
        block = s_tilde - c[i] * np.outer(s[i], s[i].conj()) + ridge * np.eye(d)
        out[i] = np.linalg.solve(block, rows[i])
    return out


def _fixed_point_step(
    problem: SubspaceProblem,
    wb: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    use_sherman_morrison: bool = True,
) -> np.ndarray:
    t_a, s_tilde = _common_matrices(problem, a, b)
    numer = wb @ t_a.T  # row i = T_A w_i
    s_inv = _invert_common(problem, s_tilde) if use_sherman_morrison else None
    return _apply_btilde_inverse(problem, s_tilde, s_inv, b, numer, use_sherman_morrison)


def kkt_apply(
    problem: SubspaceProblem, w: np.ndarray, use_sherman_morrison: bool = True
) -> np.ndarray:
    """One un-normalized fixed-point step B~^{-1} A~ w, computed blockwise."""
    a, b = quad_forms(problem, w)
    wb = _blocks(problem, w)
    return _fixed_point_step(problem, wb, a, b, use_sherman_morrison).reshape(-1)


def rzf_init(problem: SubspaceProblem, channel_estimate: np.ndarray, alpha: float) -> np.ndarray:
    """Unit-norm stacked weights whose reconstruction is the RZF precoder.

    Solves the basis-gram normal equations for the coordinates of
    H (H^H H + alpha I)^{-1} in the problem basis; since the RZF precoder lies
    in range(H) the reconstruction is exact for every basis variant.
    """
    if not (alpha > 0):
        raise ValueError(f"alpha must be positive, got {alpha}")
    n_users = channel_estimate.shape[1]
    gram = channel_estimate.conj().T @ channel_estimate
    f_rzf = channel_estimate @ np.linalg.inv(gram + alpha * np.eye(n_users))
    rhs = problem.basis.conj().T @ f_rzf
    try:
        coords = np.linalg.solve(problem.basis_gram, rhs)
    except np.linalg.LinAlgError:
        d = problem.dim
        ridge = 1e-12 * float(np.trace(problem.basis_gram).real) / d
        coords = np.linalg.solve(problem.basis_gram + ridge * np.eye(d), rhs)
    w = coords.T.reshape(-1)  # stack columns of the D x K weight matrix
    return w / np.linalg.norm(w)


def reconstruct_precoder(problem: SubspaceProblem, w: np.ndarray) -> Precoder:
    """Frobenius-normalized precoder G W from the stacked weight vector."""
    wb = _blocks(problem, w)
    return frobenius_normalized(problem.basis @ wb.T)


def _align_phase(w_new: np.ndarray, w_ref: np.ndarray) -> np.ndarray:
    """Rotate the global phase of w_new to best match w_ref.

    The iteration is phase-invariant, so without alignment the stopping
    test can oscillate between antipodal iterates.
    """
    inner = np.vdot(w_ref, w_new)
    mag = abs(inner)
    if mag == 0:
        return w_new
    return w_new * (inner.conjugate() / mag)


def objective_value(problem: SubspaceProblem, w: np.ndarray) -> float:
    """Sum of per-user quotient rates sum_k log2(a_k / b_k) in bits/s/Hz."""
    a, b = quad_forms(problem, w)
    return float(np.log2(a / b).sum())


def s_gpip(
    problem: SubspaceProblem,
    init: np.ndarray,
    tol: float = 1e-2,
    t_max: int = 100,
    use_sherman_morrison: bool = True,
) -> SolverResult:
    """Fixed-point power iteration on the stacked weight vector.

    Iterates w <- normalize(B~^{-1} A~ w) until the phase-aligned iterate
    difference drops below ``tol`` or ``t_max`` is reached (not an error;
    the convergence flag records which happened).
    """
    if not (tol > 0):
        raise ValueError(f"tol must be positive, got {tol}")
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    start = time.perf_counter()
    w = np.asarray(init, dtype=complex)
    w = w / np.linalg.norm(w)
    a, b = quad_forms(problem, w)
    trace = [float(np.log2(a / b).sum())]
    converged = False
    iterations = 0
    for _ in range(t_max):
        stepped = _fixed_point_step(problem, _blocks(problem, w), a, b, use_sherman_morrison)
        w_new = stepped.reshape(-1)
        norm = np.linalg.norm(w_new)
        if norm == 0 or not np.isfinite(norm):
            raise NumericError("fixed-point step produced a zero or non-finite iterate")
        w_new = _align_phase(w_new / norm, w)
        iterations += 1
        diff = np.linalg.norm(w_new - w)
        w = w_new
        a, b = quad_forms(problem, w)
        trace.append(float(np.log2(a / b).sum()))
        if diff <= tol:
            converged = True
            break
    return SolverResult(
        weights=w,
        precoder=reconstruct_precoder(problem, w),
        objective_trace=trace,
        iterations=iterations,
        converged=converged,
        wall_time=time.perf_counter() - start,
    )


def kkt_residual(problem: SubspaceProblem, w: np.ndarray) -> float:
    """Stationarity diagnostic: sine of the angle between B~^{-1} A~ w and w.

    Zero at a fixed point of the iteration; scale-free, so no eigenvalue
    bookkeeping is needed.
    """
    w = np.asarray(w, dtype=complex)
    w = w / np.linalg.norm(w)
    y = kkt_apply(problem, w)
    ny = np.linalg.norm(y)
    if ny == 0:
        return 1.0
    cos2 = min(abs(np.vdot(w, y)) ** 2 / ny**2, 1.0)
    return float(np.sqrt(max(1.0 - cos2, 0.0)))
