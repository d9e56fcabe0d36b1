import numpy as np
import pytest

from sgpip import convergent, gpip
from sgpip.errors import NumericError

from conftest import (
    crandn,
    dense_btilde,
    dense_quadratic_pair,
    make_cov_problem,
    make_perfect_problem,
    random_unit_weights,
)


def test_objective_zero_when_signals_nulled(rng):
    h = np.zeros((3, 1), dtype=complex)
    h[0] = 1.0
    problem = gpip.build_subspace_problem_fulldim(h, 1.0, 0.5)
    w = np.array([0.0, 1.0, 0.0], dtype=complex)
    assert convergent.objective(problem, w) == pytest.approx(0.0, abs=1e-14)


def test_objective_scale_invariance(rng):
    problem, _ = make_perfect_problem(rng)
    w = random_unit_weights(rng, problem)
    base = convergent.objective(problem, w)
    # powers of two rescale the quadratic forms exactly
    assert convergent.objective(problem, 0.5 * w) == base
    assert convergent.objective(problem, 2.0 * w) == base
    assert convergent.objective(problem, np.exp(1j * np.pi / 3) * w) == pytest.approx(
        base, rel=1e-12
    )


def test_gradient_matches_finite_differences(rng):
    problem, _ = make_perfect_problem(rng, n=6, k=2)
    ln2 = np.log(2.0)
    for _ in range(3):
        w = random_unit_weights(rng, problem)
        grad = convergent.gradient(problem, w)
        dim = w.size
        fd = np.zeros(dim, dtype=complex)
        eps = 1e-6
        for j in range(dim):
            step = np.zeros(dim, dtype=complex)
            step[j] = eps
            f_re = (
                convergent.objective(problem, w + step)
                - convergent.objective(problem, w - step)
            ) / (2 * eps)
            step[j] = 1j * eps
            f_im = (
                convergent.objective(problem, w + step)
                - convergent.objective(problem, w - step)
            ) / (2 * eps)
            fd[j] = (f_re + 1j * f_im) * ln2
        assert np.linalg.norm(fd - grad) <= 1e-5 * np.linalg.norm(grad)


def test_gradient_vanishes_at_stationary_point(rng):
    problem, H = make_perfect_problem(rng, n=8, k=2)
    result = gpip.s_gpip(problem, gpip.rzf_init(problem, H, 0.2), tol=1e-10, t_max=3000)
    grad = convergent.gradient(problem, result.weights)
    assert np.linalg.norm(grad) <= 1e-4


def test_gradient_single_user_optimum(rng):
    h = crandn(rng, 5, 1)
    problem = gpip.build_subspace_problem_perfect(h, 1.0, 0.2)
    result = gpip.s_gpip(problem, gpip.rzf_init(problem, h, 0.2), tol=1e-12, t_max=500)
    assert np.linalg.norm(convergent.gradient(problem, result.weights)) <= 1e-8


def test_g_mapping_identity(rng):
    problem, _ = make_perfect_problem(rng)
    for _ in range(100):
        w = random_unit_weights(rng, problem)
        g = convergent.g_mapping(problem, w)
        z = convergent.preconditioned_gradient(problem, w)
        assert np.linalg.norm(g - w - 0.5 * z) <= 1e-10 * np.linalg.norm(g)


def test_g_mapping_equals_kkt_apply(rng):
    problem, _ = make_perfect_problem(rng)
    w = random_unit_weights(rng, problem)
    assert np.array_equal(convergent.g_mapping(problem, w), gpip.kkt_apply(problem, w))


def test_ppga_step_half_is_gpip_step(rng):
    problem, _ = make_perfect_problem(rng)
    for _ in range(5):
        w = random_unit_weights(rng, problem)
        stepped = convergent.ppga_step(problem, w, 0.5)
        g = convergent.g_mapping(problem, w)
        g /= np.linalg.norm(g)
        assert np.linalg.norm(stepped - g) <= 1e-12


def test_ppga_step_zero_eta_is_identity(rng):
    problem, _ = make_perfect_problem(rng)
    w = random_unit_weights(rng, problem)
    assert np.array_equal(convergent.ppga_step(problem, w, 0.0), w)


def test_ppga_small_step_ascends(rng):
    problem, _ = make_perfect_problem(rng)
    for _ in range(5):
        w = random_unit_weights(rng, problem)
        if np.linalg.norm(convergent.gradient(problem, w)) < 1e-6:
            continue
        before = convergent.objective(problem, w)
        after = convergent.objective(problem, convergent.ppga_step(problem, w, 1e-4))
        assert after > before


def test_precond_bounds_single_user_formulas(rng):
    h = crandn(rng, 5, 1)
    problem = gpip.build_subspace_problem_perfect(h, 1.0, 0.4)
    bounds = convergent.precond_bounds(problem)
    nr_c0 = problem.noise_ratio * problem.basis_gram
    s = problem.signal_vecs[0]
    m_block = np.outer(s, s.conj()) + nr_c0
    assert bounds.b_min == pytest.approx(float(np.linalg.eigvalsh(nr_c0)[0]), rel=1e-12)
    assert bounds.b_max == pytest.approx(float(np.linalg.eigvalsh(m_block)[-1]), rel=1e-12)
    # with one user the off-user sum is just noise_ratio * C0
    assert bounds.m == pytest.approx(bounds.b_min / float(np.linalg.eigvalsh(nr_c0)[-1]), rel=1e-12)
    assert bounds.M == pytest.approx(bounds.b_max / float(np.linalg.eigvalsh(nr_c0)[0]), rel=1e-12)


@pytest.mark.parametrize("kind", ["perfect", "cov"])
def test_precond_bounds_sandwich(rng, kind):
    if kind == "perfect":
        problem, H = make_perfect_problem(rng, n=6, k=2)
        a_list, b_list = dense_quadratic_pair(problem.basis, H, None, problem.noise_ratio)
    else:
        problem, H_hat, Phi = make_cov_problem(rng, n=6, k=2, r=1)
        a_list, b_list = dense_quadratic_pair(problem.basis, H_hat, Phi, problem.noise_ratio)
    bounds = convergent.precond_bounds(problem)
    for _ in range(100):
        w = random_unit_weights(rng, problem)
        eigs = np.linalg.eigvalsh(dense_btilde(a_list, b_list, w))
        assert 1.0 / eigs[-1] >= bounds.m * (1.0 - 1e-9)
        assert 1.0 / eigs[0] <= bounds.M * (1.0 + 1e-9)


def test_precond_bounds_rescale_consistency(rng):
    H = crandn(rng, 6, 2)
    p1 = gpip.build_subspace_problem_perfect(H, 1.0, 0.1)
    p2 = gpip.build_subspace_problem_perfect(2.0 * H, 1.0, 0.1)
    b1, b2 = convergent.precond_bounds(p1), convergent.precond_bounds(p2)
    a_list, b_list = dense_quadratic_pair(p2.basis, 2.0 * H, None, p2.noise_ratio)
    for _ in range(20):
        w = random_unit_weights(rng, p2)
        eigs = np.linalg.eigvalsh(dense_btilde(a_list, b_list, w))
        assert 1.0 / eigs[-1] >= b2.m * (1.0 - 1e-9)
        assert 1.0 / eigs[0] <= b2.M * (1.0 + 1e-9)
    # quadratic channel scaling moves the bounds by ~1/4
    assert b2.m == pytest.approx(b1.m / 4.0, rel=0.6)


def test_precond_bounds_rejects_singular_gram():
    h = np.zeros((4, 2), dtype=complex)
    h[0, 0] = 1.0
    h[1, 1] = 1.0
    problem = gpip.build_subspace_problem_fulldim(h, 1.0, 0.0 + 1e-12)
    # basis gram is the identity here, so force the degenerate case directly
    degenerate = gpip.SubspaceProblem(
        basis=problem.basis,
        signal_vecs=problem.signal_vecs,
        error_grams=problem.error_grams,
        basis_gram=np.diag([1.0, 1.0, 1.0, 0.0]).astype(complex),
        noise_ratio=0.1,
    )
    with pytest.raises(NumericError):
        convergent.precond_bounds(degenerate)


def test_backtrack_accepts_immediately_at_stationary_point(rng):
    problem, H = make_perfect_problem(rng, n=6, k=2)
    result = gpip.s_gpip(problem, gpip.rzf_init(problem, H, 0.2), tol=1e-12, t_max=3000)
    step = convergent.backtrack_eta(problem, result.weights)
    aligned = step.w_next * np.sign(np.vdot(step.w_next, result.weights).real or 1.0)
    assert np.linalg.norm(aligned - result.weights) <= 1e-5


def test_backtrack_low_snr_accepts_full_step(rng):
    # benign landscape: the un-damped step already satisfies the ascent test
    H = crandn(rng, 8, 2)
    problem = gpip.build_subspace_problem_perfect(H, 1.0, 2.0)
    w = gpip.rzf_init(problem, H, 4.0)
    step = convergent.backtrack_eta(problem, w)
    assert step.eta == pytest.approx(0.5)
    assert not step.stalled


def test_convergent_s_gpip_monotone_and_noninferior(rng):
    for seed in range(5):
        local = np.random.default_rng(7000 + seed)
        H = crandn(local, 8, 3)
        problem = gpip.build_subspace_problem_perfect(H, 1.0, 1e-4)  # high SNR
        init = gpip.rzf_init(problem, H, 3e-4)
        damped = convergent.convergent_s_gpip(problem, init, tol=1e-8, t_max=200)
        fixed = gpip.s_gpip(problem, init, tol=1e-8, t_max=200)
        trace = np.asarray(damped.objective_trace)
        assert np.all(np.diff(trace) >= -1e-12)
        assert trace[-1] >= fixed.objective_trace[-1] - 1e-6


def test_backtrack_high_snr_shrinks_eta_but_stays_monotone():
    # steep landscape: the plain half-step overshoots on some iterations,
    # so the line search must shrink eta below 1/2 at least once
    shrank = False
    for seed in range(10):
        rng = np.random.default_rng(7100 + seed)
        H = crandn(rng, 8, 3)
        problem = gpip.build_subspace_problem_perfect(H, 1.0, 1e-6)
        try:
            m = convergent.precond_bounds(problem).m
        except NumericError:
            m = 0.0
        w = gpip.rzf_init(problem, H, 3e-6)
        level = convergent.objective(problem, w)
        for _ in range(60):
            step = convergent.backtrack_eta(problem, w, m=m, l_ref=level)
            assert step.l_next >= level - 1e-12
            shrank = shrank or (not step.stalled and step.eta < 0.5)
            w, level = step.w_next, step.l_next
            if step.eta == 0.0:
                break
    assert shrank


def test_convergent_s_gpip_single_user_mrt(rng):
    h = crandn(rng, 8, 1)
    problem = gpip.build_subspace_problem_perfect(h, 1.0, 0.1)
    result = convergent.convergent_s_gpip(problem, gpip.rzf_init(problem, h, 0.1), tol=1e-10, t_max=300)
    f = result.precoder.F[:, 0]
    cosine = abs(np.vdot(f, h[:, 0])) / (np.linalg.norm(f) * np.linalg.norm(h))
    assert cosine >= 1.0 - 1e-6


def test_line_search_params_validation():
    with pytest.raises(ValueError):
        convergent.LineSearchParams(eta0=0.0)
    with pytest.raises(ValueError):
        convergent.LineSearchParams(beta=1.0)
    with pytest.raises(ValueError):
        convergent.LineSearchParams(c_armijo=1.5)
