import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbvp.errors import ConfigurationError, LinearAlgebraError, NonConvergenceError
from sbvp.newton import (
    NewtonConfig, damped_newton, fd_jacobian_dense, lu_solve_checked,
)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 6))
def test_affine_map_converges_in_one_step(seed, n):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n)) + 3 * n * np.eye(n)
    b = rng.normal(size=n)
    res = damped_newton(lambda s: M @ s - b, np.zeros(n), jacobian=lambda s, fs: M)
    assert res.iterations == 1
    assert res.trace[1][2] == 1.0
    assert np.allclose(res.x, np.linalg.solve(M, b), atol=1e-12)


def test_hand_newton_step():
    cfg = NewtonConfig(max_iter=1)
    with pytest.raises(NonConvergenceError) as exc:
        damped_newton(lambda s: s**2 - 4, np.array([3.0]), cfg, jacobian=lambda s, fs: np.diag(2 * s))
    assert exc.value.best[0] == pytest.approx(13 / 6, abs=1e-15)
    res = damped_newton(lambda s: s**2 - 4, np.array([3.0]))
    assert res.x[0] == pytest.approx(2.0, abs=1e-10)


def test_damping_rescues_a_divergent_full_step():
    # undamped Newton on arctan diverges from |x0| > 1.39
    res = damped_newton(np.arctan, np.array([3.0]), NewtonConfig(tol=1e-12))
    assert abs(res.x[0]) < 1e-12
    assert any(lam < 1.0 for _, _, lam in res.trace[1:])


def test_non_convergence_carries_best_iterate():
    with pytest.raises(NonConvergenceError) as exc:
        damped_newton(lambda x: x**2 + 1, np.array([2.0]), NewtonConfig(max_iter=10))
    assert exc.value.residual == pytest.approx(np.max(np.abs(exc.value.best**2 + 1)))
    assert exc.value.iterations == 10


def test_singular_jacobian():
    with pytest.raises(LinearAlgebraError):
        lu_solve_checked(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))
    with pytest.raises(LinearAlgebraError):
        lu_solve_checked(np.zeros((2, 2)), np.ones(2))


def test_fd_jacobian_dense():
    F = lambda x: np.array([x[0] ** 2, x[0] * x[1]])  # noqa: E731
    x = np.array([1.5, -2.0])
    J = fd_jacobian_dense(F, x)
    assert np.allclose(J, [[3.0, 0.0], [-2.0, 1.5]], atol=1e-5)
    Jc = fd_jacobian_dense(F, x, central=True)
    assert np.allclose(Jc, [[3.0, 0.0], [-2.0, 1.5]], atol=1e-8)


@pytest.mark.parametrize("kw", [{"tol": 0.0}, {"lambda_min": 0.0}, {"lambda_min": 2.0},
                                {"reduction": 1.0}, {"fd_epsilon": -1.0}])
def test_config_validation(kw):
    with pytest.raises(ConfigurationError):
        NewtonConfig(**kw)


def test_final_correction_removes_jacobian_error():
    # approximate Jacobian: stopping on the residual alone leaves cond(J) * tol in x
    M = np.array([[1.0, 0.0], [0.0, 1e-3]])
    b = np.array([1.0, 1e-3])
    J_approx = M * (1 + 1e-4)
    F = lambda s: M @ s - b  # noqa: E731
    exact = np.linalg.solve(M, b)
    plain = damped_newton(F, np.zeros(2), NewtonConfig(final_correction=False),
                          jacobian=lambda s, fs: J_approx)
    corrected = damped_newton(F, np.zeros(2), jacobian=lambda s, fs: J_approx)
    assert plain.iterations == corrected.iterations
    assert np.max(np.abs(corrected.x - exact)) < 0.01 * np.max(np.abs(plain.x - exact))
    assert corrected.residual <= plain.residual
