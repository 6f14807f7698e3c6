import math

import numpy as np
import pytest

from mwm import (FOUR_WAVE, SIX_WAVE, Dataset, FitProblem, PulseSequence, jacobian_check,
                 residuals, solve)
from mwm.errors import DomainError, FitError
from mwm.fit import _sigmas, levenberg_marquardt, model_curves
from mwm.gamma import gamma_pi
from mwm.pulses import FREE_INDUCTION
from mwm.spectral import Ohmic

TRUTH = {"alpha": 0.1, "omega_c": 8.0}
FIXED = {"T": 10.0, "delta_B": 5.0}
TEMPLATE = PulseSequence.weak((0.0, 0.3, 0.6))
GRID = np.linspace(0.05, 0.55, 11)


def sweep_problem(y4=None, y6=None, free=("alpha", "omega_c"), bounds=None, initial=None,
                  fixed=None, n_starts=4, seq=TEMPLATE):
    fixed = dict(FIXED, **(fixed or {}))
    zeros = np.zeros_like(GRID)
    ds = [Dataset(FOUR_WAVE, "t1", GRID, zeros if y4 is None else y4, seq, 1.0),
          Dataset(SIX_WAVE, "t1", GRID, zeros if y6 is None else y6, seq, 1.0)]
    bounds = bounds or {"alpha": (0.02, 0.3), "omega_c": (3.0, 15.0)}
    initial = initial or {"alpha": 0.15, "omega_c": 6.0}
    for k in list(TRUTH):
        if k not in free:
            fixed[k] = TRUTH[k]
    return FitProblem(ds, free, {k: bounds[k] for k in free}, {k: initial[k] for k in free},
                      fixed, n_starts=n_starts, seed=1)


@pytest.fixture(scope="module")
def synthetic():
    p = sweep_problem()
    y4, y6 = model_curves(p, [TRUTH["alpha"], TRUTH["omega_c"]])
    w4, w6 = 1 / y4.max(), 1 / y6.max()
    return y4, y6, w4, w6


def weighted(problem, w4, w6):
    problem.datasets[0].weight = w4
    problem.datasets[1].weight = w6
    return problem


def test_self_consistent_residual(synthetic):
    y4, y6, w4, w6 = synthetic
    p = weighted(sweep_problem(y4, y6), w4, w6)
    assert np.linalg.norm(residuals(p, [0.1, 8.0])) < 1e-10


def test_fast_model_matches_exact(synthetic):
    y4, y6, w4, w6 = synthetic
    ds = [Dataset(o, "t1", GRID[::5], y[::5], TEMPLATE) for o, y in
          ((FOUR_WAVE, y4), (SIX_WAVE, y6))]
    p = FitProblem(ds, ("alpha", "omega_c"), {"alpha": (0.02, 0.3), "omega_c": (3, 15)},
                   {"alpha": 0.1, "omega_c": 8.0}, dict(FIXED))
    fast = model_curves(p, [0.1, 8.0])
    exact = model_curves(p, [0.1, 8.0], exact=True)
    for a, b in zip(fast, exact):
        assert np.allclose(a, b, rtol=1e-7, atol=0)


def test_empty_free_set(synthetic):
    y4, y6, _, _ = synthetic
    p = sweep_problem(y4, y6, free=())
    r1 = residuals(p, [])
    r2 = residuals(p, np.array([]))
    assert np.array_equal(r1, r2)
    with pytest.raises(DomainError):
        solve(p)


def test_linear_response():
    seq = PulseSequence.pi_train((0.0,))
    t = np.linspace(0.05, 1.0, 12)
    sd = Ohmic(1e-4, 8.0)
    data = model_curves(FitProblem([Dataset(FREE_INDUCTION, "t", t, np.ones_like(t), seq)],
                                   (), {}, {}, {"alpha": 1e-4, "omega_c": 8.0}), [])[0]
    ds = Dataset(FREE_INDUCTION, "t", t, data, seq, weight=1.0)
    p = FitProblem([ds], ("alpha",), {"alpha": (0.0, 1e-3)}, {"alpha": 1e-4}, {"omega_c": 8.0})
    r = residuals(p, [2e-4])
    dgamma = gamma_pi(Ohmic(2e-4, 8.0), 0.0, (0.0,), t) - gamma_pi(sd, 0.0, (0.0,), t)
    assert np.allclose(r, -2 * dgamma * data, rtol=2e-3)


def test_round_trip_noiseless(synthetic):
    y4, y6, w4, w6 = synthetic
    res = solve(weighted(sweep_problem(y4, y6), w4, w6))
    assert res.converged
    assert res.estimates["alpha"] == pytest.approx(0.1, rel=1e-3)
    assert res.estimates["omega_c"] == pytest.approx(8.0, rel=1e-3)
    assert res.residual_norm <= res.initial_residual_norm
    assert all(b <= a for a, b in zip(res.trace, res.trace[1:]))
    assert "alpha" in res.report()


def test_bounds_respected(synthetic):
    y4, y6, w4, w6 = synthetic
    p = weighted(sweep_problem(y4, y6, bounds={"alpha": (0.12, 0.3), "omega_c": (3.0, 15.0)}),
                 w4, w6)
    res = solve(p)
    for n, (lo, hi) in p.bounds.items():
        assert lo <= res.estimates[n] <= hi
    assert res.estimates["alpha"] == pytest.approx(0.12, abs=1e-9)


def test_degenerate_flat_data_raises():
    seq = PulseSequence.weak((0.0, 0.3, 0.6), thetas=(math.pi / 2, math.pi / 2, 0.0))
    p = sweep_problem(seq=seq)
    with pytest.raises(FitError) as exc:
        solve(p)
    assert exc.value.best is not None


def test_ill_conditioning_flag():
    J = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    sig, ill = _sigmas(J, 1.0, 3)
    assert ill and np.all(np.isinf(sig))
    sig, ill = _sigmas(np.eye(3)[:, :2] + 0.1, 1.0, 3)
    assert not ill and np.all(np.isfinite(sig))


def test_lm_on_quadratic_trace():
    target = np.array([0.3, -0.2])

    def fun(x):
        return np.array([x[0] - target[0], 10 * (x[1] - target[1]), x[0] * x[1] - 0.3 * -0.2])

    res = levenberg_marquardt(fun, [0.9, 0.9], [-1, -1], [1, 1])
    assert res.converged
    assert np.allclose(res.x, target, atol=1e-6)
    assert all(b <= a for a, b in zip(res.trace, res.trace[1:]))


def test_jacobian_check_quadratic():
    def fun(x):
        return np.array([x[0] ** 2 + x[1], 3 * x[1] ** 2 - x[0] * x[1]])

    assert jacobian_check(fun, [0.7, -1.3]) < 1e-6


def test_jacobian_check_forward_model(synthetic):
    y4, y6, w4, w6 = synthetic
    p = weighted(sweep_problem(y4, y6), w4, w6)
    assert jacobian_check(p, [0.11, 7.5]) < 1e-4


def test_jacobian_check_detects_tiny_steps():
    # adaptive quadrature noise dominates once the step falls below its tolerance
    seq = PulseSequence.weak((0.0, 0.1, 0.3))
    t = np.linspace(0.3, 1.0, 8)
    ds = Dataset(SIX_WAVE, "t", t, np.zeros_like(t), seq)
    p = FitProblem([ds], ("alpha", "omega_c"), {"alpha": (0.0, 0.3), "omega_c": (3.0, 15.0)},
                   {"alpha": 0.1, "omega_c": 8.0}, {"T": 10.0})
    good = jacobian_check(p, [0.1, 8.0], exact=True)
    bad = jacobian_check(p, [0.1, 8.0], rel_step=1e-12, exact=True)
    assert good < 1e-4
    assert bad > 10 * good


def test_problem_validation():
    seq = PulseSequence.weak((0.0, 0.3, 0.6))
    ds = Dataset(SIX_WAVE, "t1", GRID, GRID, seq)
    with pytest.raises(DomainError):
        FitProblem([], ("alpha",), {"alpha": (0, 1)}, {"alpha": 0.5}, {"omega_c": 8.0})
    with pytest.raises(DomainError):
        FitProblem([ds], ("alpha",), {"alpha": (1, 0)}, {"alpha": 0.5}, {"omega_c": 8.0})
    with pytest.raises(DomainError):
        FitProblem([ds], ("alpha",), {"alpha": (0, 1)}, {"alpha": 2.0}, {"omega_c": 8.0})
    with pytest.raises(DomainError):
        FitProblem([ds], ("alpha",), {"alpha": (0, 1)}, {"alpha": 0.5}, {})
    with pytest.raises(DomainError):
        Dataset(SIX_WAVE, "t1", GRID, GRID, PulseSequence.pi_train((0.0, 0.2)))
    p = FitProblem([ds], ("alpha",), {"alpha": (0, 1)}, {"alpha": 0.5}, {"omega_c": 8.0})
    with pytest.raises(DomainError):
        residuals(p, [1.5])
