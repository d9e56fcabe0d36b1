"""Seeded Monte Carlo experiment harness with CSV persistence.

Reproducibility contract: every trial draws from its own counter-based
stream, a Philox(4x64) generator keyed by (master_seed, sweep_index * 2^32 +
trial). Rows therefore depend only on (config, seed) and are emitted in
(sweep value, trial, algorithm) order whether trials run serially or in a
process pool. Wall-clock timings are the one non-deterministic column; runs
that need byte-identical CSVs set ``record_timing = False`` to zero it out.

Every algorithm in a trial sees the same channel realization (paired
comparisons). Spectral efficiency is always evaluated on the true channel;
the robust lower bound under the trial's CSIT is recorded alongside in an
auxiliary column.
"""

from __future__ import annotations

import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import baselines, channel, convergent, gpip, metrics
from .errors import ConfigError, NumericError

GPIP_ALGORITHMS = (
    "sgpip",
    "sgpip_cov",
    "gpip_full",
    "gpip_full_cov",
    "convergent_sgpip",
    "convergent_sgpip_cov",
)
ALL_ALGORITHMS = GPIP_ALGORITHMS + ("mrt", "rzf", "zf", "zfdpc", "zfdpc_wf")

CSV_HEADER = (
    "sweep_name,sweep_value,algorithm,trial,seed,sum_se_bps_hz,"
    "sum_se_lb_bps_hz,wall_time_ms,iterations,converged"
)

_SWEEPABLE = ("n_antennas", "n_users", "power_dbm")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a single swept variable, everything else scalar.

    Channel defaults: 10.5 GHz carrier, 300 MHz bandwidth, 5 dB noise figure,
    10 m / 1.5 m BS and user heights, pi/6 angular spread, users uniform on
    [20, 100] m, log-normal shadowing with 7.82 dB deviation.
    """

    n_antennas: int | tuple[int, ...] = 16
    n_users: int | tuple[int, ...] = 4
    power_dbm: float | tuple[float, ...] = (30.0,)
    kappa: float = 0.0
    cov_rank: int = 1
    fc_ghz: float = 10.5
    bandwidth_hz: float = 300e6
    noise_figure_db: float = 5.0
    h_bs_m: float = 10.0
    h_ut_m: float = 1.5
    angular_spread_rad: float = math.pi / 6
    distance_range_m: tuple[float, float] = (20.0, 100.0)
    shadowing_enabled: bool = True
    shadowing_std_db: float = 7.82
    element_spacing: float = 0.5
    algorithms: tuple[str, ...] = ("sgpip", "rzf", "mrt")
    trials: int = 50
    seed: int = 1
    tol: float = 1e-2
    t_max: int = 100
    n_workers: int = 1
    record_timing: bool = True

    def sweep(self) -> tuple[str, tuple]:
        """Name and values of the single swept field."""
        swept = [name for name in _SWEEPABLE if isinstance(getattr(self, name), (tuple, list))]
        if len(swept) != 1:
            raise ConfigError(
                f"exactly one of {_SWEEPABLE} must be a sweep list, found {swept or 'none'}"
            )
        name = swept[0]
        values = tuple(getattr(self, name))
        if not values:
            raise ConfigError(f"{name}: sweep list must be non-empty")
        return name, values

    def validate(self) -> None:
        name, values = self.sweep()
        for point in values:
            n = point if name == "n_antennas" else self.n_antennas
            k = point if name == "n_users" else self.n_users
            if n < k:
                raise ConfigError(f"{name}: requires n_antennas >= n_users, got N={n}, K={k}")
            if k < 1:
                raise ConfigError("n_users: must be >= 1")
        if not (0.0 <= self.kappa <= 1.0):
            raise ConfigError(f"kappa: must be in [0, 1], got {self.kappa}")
        if self.cov_rank < 1:
            raise ConfigError(f"cov_rank: must be >= 1, got {self.cov_rank}")
        unknown = [a for a in self.algorithms if a not in ALL_ALGORITHMS]
        if unknown:
            raise ConfigError(f"algorithms: unknown {unknown}; valid: {ALL_ALGORITHMS}")
        if not self.algorithms:
            raise ConfigError("algorithms: must list at least one algorithm")
        if self.trials < 0:
            raise ConfigError(f"trials: must be >= 0, got {self.trials}")
        if not (self.tol > 0):
            raise ConfigError(f"tol: must be positive, got {self.tol}")
        if self.t_max < 1:
            raise ConfigError(f"t_max: must be >= 1, got {self.t_max}")
        if self.n_workers < 1:
            raise ConfigError(f"n_workers: must be >= 1, got {self.n_workers}")
        lo, hi = self.distance_range_m
        if not (0 < lo <= hi):
            raise ConfigError(f"distance_range_m: invalid range ({lo}, {hi})")
        if not (self.bandwidth_hz > 0):
            raise ConfigError(f"bandwidth_hz: must be positive, got {self.bandwidth_hz}")


@dataclass(frozen=True)
class ResultRow:
    sweep_name: str
    sweep_value: float
    algorithm: str
    trial_index: int
    seed: int
    sum_se_bits_per_hz: float
    sum_se_lb_bits_per_hz: float
    wall_time_ms: float
    iterations: int
    converged_flag: bool
    note: str = ""


def trial_stream(seed: int, sweep_index: int, trial: int) -> np.random.Generator:
    """Independent per-trial stream: Philox keyed on the master seed and a counter."""
    key = np.array([np.uint64(seed), np.uint64((sweep_index << 32) | trial)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _noise_power_w(config: ExperimentConfig) -> float:
    dbm = channel.noise_power_dbm(config.bandwidth_hz, config.noise_figure_db)
    return 10.0 ** ((dbm - 30.0) / 10.0)


def _draw_scene(
    config: ExperimentConfig, n: int, k: int, rng: np.random.Generator
) -> tuple[channel.ChannelRealization, channel.CsitRealization]:
    """User placement, large-scale gains, channels, and CSIT for one trial."""
    geometry = channel.UlaGeometry(n_antennas=n, element_spacing=config.element_spacing)
    lo, hi = config.distance_range_m
    distances = rng.uniform(lo, hi, size=k)
    azimuths = rng.uniform(-np.pi / 2, np.pi / 2, size=k)
    shadows = rng.normal(0.0, config.shadowing_std_db, size=k) if config.shadowing_enabled \
        else np.zeros(k)
    covs = []
    for d, az, sh in zip(distances, azimuths, shadows):
        pl_db = channel.pathloss_umi_nlos(config.fc_ghz, d, config.h_bs_m, config.h_ut_m)
        gain = 10.0 ** (-(pl_db + sh - 30.0) / 10.0)
        user = channel.UserGeometry(
            distance_m=d, azimuth_rad=az, angular_spread_rad=config.angular_spread_rad
        )
        covs.append(channel.one_ring_covariance(geometry, user, gain))
    realization = channel.draw_realization(covs, rng)
    csit = channel.imperfect_csit(realization, config.kappa, rng)
    return realization, csit


def _solve(
    name: str,
    csit: channel.CsitRealization,
    H_true: np.ndarray,
    power_w: float,
    sigma2_w: float,
    config: ExperimentConfig,
):
    """Run one algorithm; returns (precoder or None, dpc_rate or None, iters, converged)."""
    h_hat = csit.H_hat
    k = h_hat.shape[1]
    alpha = k * sigma2_w / power_w
    if name == "mrt":
        return baselines.mrt(h_hat), None, 0, True
    if name == "rzf":
        return baselines.rzf(h_hat, alpha), None, 0, True
    if name == "zf":
        return baselines.zf(h_hat), None, 0, True
    if name == "zfdpc":
        return None, baselines.zf_dpc_rate(H_true, power_w, sigma2_w, waterfill=False), 0, True
    if name == "zfdpc_wf":
        return None, baselines.zf_dpc_rate(H_true, power_w, sigma2_w, waterfill=True), 0, True

    if name in ("sgpip", "convergent_sgpip"):
        problem = gpip.build_subspace_problem_perfect(h_hat, power_w, sigma2_w)
    elif name in ("sgpip_cov", "convergent_sgpip_cov"):
        problem = gpip.build_subspace_problem_cov(
            h_hat, csit.Phi, config.cov_rank, power_w, sigma2_w
        )
    elif name == "gpip_full":
        problem = gpip.build_subspace_problem_fulldim(h_hat, power_w, sigma2_w)
    elif name == "gpip_full_cov":
        problem = gpip.build_subspace_problem_fulldim(h_hat, power_w, sigma2_w, Phi=csit.Phi)
    else:
        raise ConfigError(f"algorithms: unknown algorithm {name!r}")
    init = gpip.rzf_init(problem, h_hat, alpha)
    if name.startswith("convergent"):
        result = convergent.convergent_s_gpip(problem, init, tol=config.tol, t_max=config.t_max)
    else:
        result = gpip.s_gpip(problem, init, tol=config.tol, t_max=config.t_max)
    return result.precoder, None, result.iterations, result.converged


def _run_trial(
    config: ExperimentConfig, sweep_name: str, sweep_index: int, sweep_value, trial: int
) -> list[ResultRow]:
    n = sweep_value if sweep_name == "n_antennas" else config.n_antennas
    k = sweep_value if sweep_name == "n_users" else config.n_users
    p_dbm = sweep_value if sweep_name == "power_dbm" else config.power_dbm
    power_w = 10.0 ** ((p_dbm - 30.0) / 10.0)
    sigma2_w = _noise_power_w(config)
    rng = trial_stream(config.seed, sweep_index, trial)
    realization, csit = _draw_scene(config, n, k, rng)
    rows = []
    for name in config.algorithms:
        note = ""
        se = lb = float("nan")
        iters, converged, elapsed_ms = 0, False, 0.0
        try:
            start = time.perf_counter()
            precoder, dpc_rate, iters, converged = _solve(
                name, csit, realization.H, power_w, sigma2_w, config
            )
            elapsed_ms = (time.perf_counter() - start) * 1e3
            if precoder is not None:
                se = metrics.sum_se(precoder, realization.H, power_w, sigma2_w)
                lb = metrics.sum_se_lower_bound(precoder, csit.H_hat, csit.Phi, power_w, sigma2_w)
            else:
                se = dpc_rate
        except (NumericError, np.linalg.LinAlgError) as exc:
            note = f"{type(exc).__name__}: {exc}"
            converged = False
        rows.append(
            ResultRow(
                sweep_name=sweep_name,
                sweep_value=float(sweep_value),
                algorithm=name,
                trial_index=trial,
                seed=config.seed,
                sum_se_bits_per_hz=se,
                sum_se_lb_bits_per_hz=lb,
                wall_time_ms=elapsed_ms if config.record_timing else 0.0,
                iterations=iters,
                converged_flag=converged,
                note=note,
            )
        )
    return rows


def _trial_task(args) -> list[ResultRow]:
    return _run_trial(*args)


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """All (sweep value x trial x algorithm) rows, in deterministic order."""
    config.validate()
    sweep_name, values = config.sweep()
    tasks = [
        (config, sweep_name, i, value, trial)
        for i, value in enumerate(values)
        for trial in range(config.trials)
    ]
    if config.n_workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.n_workers) as pool:
            per_trial = list(pool.map(_trial_task, tasks, chunksize=1))
    else:
        per_trial = [_trial_task(t) for t in tasks]
    return [row for rows in per_trial for row in rows]


def run_convergence_trace(config: ExperimentConfig, algorithm: str) -> list[float]:
    """Per-iteration objective of one solver run on the trial-0 realization.

    Uses the first sweep value. For covariance variants the trace is the
    robust lower-bound objective; otherwise it is the sum SE on the channel
    estimate the solver saw.
    """
    config.validate()
    if algorithm not in GPIP_ALGORITHMS:
        raise ConfigError(
            f"algorithm: convergence traces need one of {GPIP_ALGORITHMS}, got {algorithm!r}"
        )
    sweep_name, values = config.sweep()
    sweep_value = values[0]
    n = sweep_value if sweep_name == "n_antennas" else config.n_antennas
    k = sweep_value if sweep_name == "n_users" else config.n_users
    p_dbm = sweep_value if sweep_name == "power_dbm" else config.power_dbm
    power_w = 10.0 ** ((p_dbm - 30.0) / 10.0)
    sigma2_w = _noise_power_w(config)
    rng = trial_stream(config.seed, 0, 0)
    _, csit = _draw_scene(config, n, k, rng)
    h_hat = csit.H_hat
    alpha = k * sigma2_w / power_w
    if algorithm in ("sgpip", "convergent_sgpip"):
        problem = gpip.build_subspace_problem_perfect(h_hat, power_w, sigma2_w)
    elif algorithm in ("sgpip_cov", "convergent_sgpip_cov"):
        problem = gpip.build_subspace_problem_cov(
            h_hat, csit.Phi, config.cov_rank, power_w, sigma2_w
        )
    elif algorithm == "gpip_full":
        problem = gpip.build_subspace_problem_fulldim(h_hat, power_w, sigma2_w)
    else:
        problem = gpip.build_subspace_problem_fulldim(h_hat, power_w, sigma2_w, Phi=csit.Phi)
    init = gpip.rzf_init(problem, h_hat, alpha)
    if algorithm.startswith("convergent"):
        result = convergent.convergent_s_gpip(problem, init, tol=config.tol, t_max=config.t_max)
    else:
        result = gpip.s_gpip(problem, init, tol=config.tol, t_max=config.t_max)
    return result.objective_trace


def bench_scaling(config: ExperimentConfig) -> list[ResultRow]:
    """Timing-focused run over an antenna sweep; one unrecorded warm-up per point."""
    config.validate()
    sweep_name, values = config.sweep()
    if sweep_name != "n_antennas":
        raise ConfigError(f"n_antennas: bench requires an antenna sweep, got {sweep_name} sweep")
    timed = replace(config, record_timing=True)
    if timed.trials == 0:
        return []
    for i, value in enumerate(values):
        _run_trial(timed, sweep_name, i, value, 0)  # warm-up: JIT-less but primes caches/BLAS
    return run_experiment(timed)


def median_wall_times(rows: list[ResultRow]) -> dict[tuple[str, float], float]:
    """Median wall time in ms per (algorithm, sweep value)."""
    groups: dict[tuple[str, float], list[float]] = {}
    for row in rows:
        groups.setdefault((row.algorithm, row.sweep_value), []).append(row.wall_time_ms)
    return {key: float(np.median(times)) for key, times in groups.items()}


def _fmt(x: float) -> str:
    return f"{x:.9e}"


def rows_to_csv(rows: list[ResultRow]) -> str:
    """Render rows to the canonical CSV text (LF endings, 10 significant digits)."""
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in rows:
        out.write(
            f"{r.sweep_name},{_fmt(r.sweep_value)},{r.algorithm},{r.trial_index},{r.seed},"
            f"{_fmt(r.sum_se_bits_per_hz)},{_fmt(r.sum_se_lb_bits_per_hz)},"
            f"{_fmt(r.wall_time_ms)},{r.iterations},"
            f"{'true' if r.converged_flag else 'false'}\n"
        )
    return out.getvalue()


def write_csv(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


def trace_rows(trace: list[float], algorithm: str, seed: int) -> list[ResultRow]:
    """Wrap a convergence trace in the CSV row schema (sweep over iterations)."""
    return [
        ResultRow(
            sweep_name="iteration",
            sweep_value=float(t),
            algorithm=algorithm,
            trial_index=0,
            seed=seed,
            sum_se_bits_per_hz=value,
            sum_se_lb_bits_per_hz=float("nan"),
            wall_time_ms=0.0,
            iterations=t,
            converged_flag=True,
        )
        for t, value in enumerate(trace)
    ]
