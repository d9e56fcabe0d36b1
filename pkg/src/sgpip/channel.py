"""Spatially correlated downlink channels and the imperfect-CSIT model.

Per-user spatial covariances follow a one-ring scattering geometry for a
uniform linear array: scatterers occupy an angular interval of half-width
``angular_spread_rad`` around the user azimuth, so the covariance entry for
antenna lag ``d`` is the bandlimited integral

    R[d] = gain / (2*spread) * int_{az-spread}^{az+spread}
           exp(1j * 2*pi * spacing * d * sin(alpha)) d(alpha).

Channels are drawn through the eigen-factorization R = U diag(lam) U^H as
``h = U diag(sqrt(lam)) g`` with ``g ~ CN(0, I)``; the latent ``g`` is kept so
that channel estimates of tunable quality ``kappa`` can be generated for the
same realization:

    h_hat = U diag(sqrt(lam)) (sqrt(1 - kappa^2) g + kappa q),  q ~ CN(0, I)

which leaves the estimation error with covariance
``(2 - 2*sqrt(1 - kappa^2)) R``.

All randomness flows through an explicit ``numpy.random.Generator``; identical
generators yield bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

from .errors import NumericError

# Gauss-Legendre order for the covariance integral; accurate to ~1e-13 even
# for the largest antenna lags at half-wavelength spacing.
_QUAD_ORDER = 2048
_QUAD_NODES, _QUAD_WEIGHTS = np.polynomial.legendre.leggauss(_QUAD_ORDER)


@dataclass(frozen=True)
class UlaGeometry:
    """Uniform linear array: antenna count and element spacing in wavelengths."""

    n_antennas: int
    element_spacing: float = 0.5

    def __post_init__(self):
        if self.n_antennas < 1:
            raise ValueError(f"n_antennas must be >= 1, got {self.n_antennas}")
        if not (self.element_spacing > 0) or not math.isfinite(self.element_spacing):
            raise ValueError(f"element_spacing must be positive, got {self.element_spacing}")


@dataclass(frozen=True)
class UserGeometry:
    """User placement: 2D distance, azimuth, and scattering angular spread."""

    distance_m: float
    azimuth_rad: float
    angular_spread_rad: float

    def __post_init__(self):
        if not (self.distance_m > 0):
            raise ValueError(f"distance_m must be positive, got {self.distance_m}")
        if not (0.0 <= self.angular_spread_rad <= math.pi):
            raise ValueError(
                f"angular_spread_rad must be in [0, pi], got {self.angular_spread_rad}"
            )
        if not math.isfinite(self.azimuth_rad):
            raise ValueError("azimuth_rad must be finite")


@dataclass(frozen=True)
class ChannelCovariance:
    """Hermitian PSD spatial covariance with its large-scale linear gain."""

    matrix: np.ndarray
    gain: float

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"covariance must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("covariance contains non-finite entries")
        scale = np.abs(m).max()
        if scale > 0 and np.abs(m - m.conj().T).max() > 1e-12 * scale:
            raise ValueError("covariance is not Hermitian within 1e-12 relative")

    @property
    def n_antennas(self) -> int:
        return self.matrix.shape[0]

    def factor(self) -> np.ndarray:
        """U diag(sqrt(lam)) with tiny negative eigenvalues clipped to zero."""
        try:
            lam, u = np.linalg.eigh(self.matrix)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"covariance eigendecomposition failed: {exc}") from exc
        if lam.size and lam.min() < -1e-10 * max(lam.max(), 0.0):
            raise NumericError("covariance is not PSD (eigenvalue below -1e-10 * lam_max)")
        return u * np.sqrt(np.clip(lam, 0.0, None))


@dataclass(frozen=True)
class ChannelRealization:
    """True channels of all users plus the latent draws that produced them."""

    H: np.ndarray                                # N x K, column k = user k
    covariances: list[ChannelCovariance]
    latent: list[np.ndarray]                     # the g_k draws
    factors: list[np.ndarray] = field(default_factory=list)  # U_k diag(sqrt(lam_k))

    @property
    def n_users(self) -> int:
        return self.H.shape[1]


@dataclass(frozen=True)
class CsitRealization:
    """Channel estimates with per-user error covariances at quality ``kappa``."""

    H_hat: np.ndarray
    Phi: list[np.ndarray]
    kappa: float


def steering_vector(geometry: UlaGeometry, azimuth_rad: float) -> np.ndarray:
    """Array response a_m = exp(1j * 2*pi * spacing * m * sin(az))."""
    m = np.arange(geometry.n_antennas)
    return np.exp(2j * np.pi * geometry.element_spacing * m * np.sin(azimuth_rad))


def one_ring_covariance(
    geometry: UlaGeometry, user: UserGeometry, gain: float
) -> ChannelCovariance:
    """One-ring spatial covariance for a ULA; Toeplitz, Hermitian, PSD.

    Zero angular spread degenerates to the rank-one steering covariance.
    Diagonal entries equal ``gain`` exactly.
    """
    if not math.isfinite(gain) or gain < 0:
        raise ValueError(f"gain must be finite and nonnegative, got {gain}")
    n = geometry.n_antennas
    spread = user.angular_spread_rad
    if spread == 0.0:
        a = steering_vector(geometry, user.azimuth_rad)
        return ChannelCovariance(matrix=gain * np.outer(a, a.conj()), gain=gain)

    # Entries depend only on the antenna lag, so integrate once per lag.
    # Jacobian of alpha = az + spread*x cancels the 1/(2*spread) prefactor.
    alpha = user.azimuth_rad + spread * _QUAD_NODES
    weights = 0.5 * _QUAD_WEIGHTS
    phase = 2.0 * np.pi * geometry.element_spacing * np.sin(alpha)
    lags = np.arange(n)
    r = gain * (np.exp(1j * np.outer(lags, phase)) @ weights)
    r[0] = gain  # lag-0 integrand is identically 1
    return ChannelCovariance(matrix=toeplitz(r, r.conj()), gain=gain)


def pathloss_umi_nlos(fc_ghz: float, d_2d_m: float, h_bs_m: float, h_ut_m: float) -> float:
    """Urban-microcell NLoS path loss in dB.

    PL = 35.3 log10(d_3d) + 22.4 + 21.3 log10(fc) - 0.3 (h_ut - 1.5),
    with d_3d = sqrt(h_bs^2 + d_2d^2).
    """
    for name, v in (("fc_ghz", fc_ghz), ("d_2d_m", d_2d_m), ("h_bs_m", h_bs_m), ("h_ut_m", h_ut_m)):
        if not (v > 0) or not math.isfinite(v):
            raise ValueError(f"{name} must be positive and finite, got {v}")
    d_3d = math.hypot(h_bs_m, d_2d_m)
    return 35.3 * math.log10(d_3d) + 22.4 + 21.3 * math.log10(fc_ghz) - 0.3 * (h_ut_m - 1.5)


def noise_power_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Thermal noise power in dBm: -174 dBm/Hz + 10 log10(BW) + NF."""
    if not (bandwidth_hz > 0):
        raise ValueError(f"bandwidth_hz must be positive, got {bandwidth_hz}")
    return -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def sample_channel(
    cov: ChannelCovariance, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw one channel vector h = U diag(sqrt(lam)) g; returns (h, g)."""
    factor = cov.factor()
    n = cov.n_antennas
    g = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    return factor @ g, g


def draw_realization(
    covariances: list[ChannelCovariance], rng: np.random.Generator
) -> ChannelRealization:
    """Sample all users' channels; keeps latents and factors for the CSIT model."""
    columns, latents, factors = [], [], []
    for cov in covariances:
        factor = cov.factor()
        n = cov.n_antennas
        g = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
        columns.append(factor @ g)
        latents.append(g)
        factors.append(factor)
    return ChannelRealization(
        H=np.column_stack(columns),
        covariances=list(covariances),
        latent=latents,
        factors=factors,
    )


def imperfect_csit(
    channel: ChannelRealization, kappa: float, rng: np.random.Generator
) -> CsitRealization:
    """Estimates h_hat_k and error covariances Phi_k at quality ``kappa``.

    kappa = 0 reproduces the true channel exactly with Phi_k = 0; kappa = 1
    gives a statistically independent estimate with Phi_k = 2 K_k.
    """
    if not (0.0 <= kappa <= 1.0):
        raise ValueError(f"kappa must be in [0, 1], got {kappa}")
    keep = np.sqrt(1.0 - kappa**2)
    err_scale = 2.0 - 2.0 * keep
    factors = channel.factors or [cov.factor() for cov in channel.covariances]
    columns, phis = [], []
    for cov, g, factor in zip(channel.covariances, channel.latent, factors):
        n = cov.n_antennas
        q = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
        columns.append(factor @ (keep * g + kappa * q))
        phis.append(err_scale * cov.matrix)
    return CsitRealization(H_hat=np.column_stack(columns), Phi=phis, kappa=kappa)
