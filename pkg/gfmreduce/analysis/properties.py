# -*- coding: utf-8 -*-
'''
Randomized property suites run by `gfmreduce check`.

Each suite returns a `PropertyResult`; none of them raise on failure, the
caller decides what a failed property means.
'''
import math
import time

from dataclasses import dataclass, asdict
from typing import Callable

import numpy as np

from ..common_utils.constants import GFMREDUCE_SEED
from ..common_utils.concurrent_utils import map_in_background
from ..common_utils.debug_utils import get_logger
from ..model.full_order import Inputs, full_rhs
from ..model.limiter import gain_matrices, gain_matrices_oracle, rho_smooth, solve_rho_reduced
from ..model.params import ParameterSet
from ..model.reduced_order import manifold_states
from .modal import jacobian_fd

_logger = get_logger(__name__)

LIMITER_EPS = (0.1, 0.2, 0.3, 0.4)
FAST_ROWS = slice(4, 12)


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    worst: float
    '''largest violation measure over all samples'''
    threshold: float
    samples: int
    elapsed: float

    def to_dict(self) -> dict:
        return asdict(self)

    def describe(self) -> str:
        status = 'ok' if self.passed else 'FAILED'
        return (f'{self.name:<24} {status:<6} worst {self.worst:.3e} (limit {self.threshold:.1e}), '
                f'{self.samples} samples, {self.elapsed:.2f} s')


def _timed(name: str, threshold: float, samples: int, body: Callable[[], float],
           passes: Callable[[float], bool]|None = None) -> PropertyResult:
    started = time.perf_counter()
    worst = float(body())
    elapsed = time.perf_counter() - started
    passed = passes(worst) if passes is not None else worst <= threshold
    result = PropertyResult(name=name, passed=bool(passed), worst=worst, threshold=threshold,
                            samples=samples, elapsed=elapsed)
    _logger.debug(result.describe())
    return result


def limiter_bound_property(I_max: float = 1.2, eps_list=LIMITER_EPS, n: int = 10_000,
                           tol: float = 1e-12) -> PropertyResult:
    '''0 ≤ min(1, I_max/x) − ρ(x) ≤ ε·ln 2 over log-spaced norms.'''
    x = np.logspace(-3, 3, n)
    exact = np.minimum(1.0, I_max / x)

    def body():
        worst = 0.0
        for eps in eps_list:
            gap = exact - rho_smooth(x, I_max, eps)
            worst = max(worst, float(np.max(-gap)), float(np.max(gap - eps * math.log(2.0))))
        return worst
    return _timed('limiter-bound', tol, n * len(eps_list), body)


def gain_oracle_property(params: ParameterSet, rng: np.random.Generator, n: int = 1000,
                         tol: float = 1e-9) -> PropertyResult:
    '''Closed-form gain matrices against the inverse forms, entrywise.'''
    rhos = 1.0 - rng.uniform(0.0, 0.99, n)

    def body():
        worst = 0.0
        for rho in rhos:
            a, b = gain_matrices(float(rho), params), gain_matrices_oracle(float(rho), params)
            for name in ('A1', 'A2', 'A3', 'A4'):
                worst = max(worst, float(np.max(np.abs(getattr(a, name) - getattr(b, name)))))
        return worst
    return _timed('gain-oracle', tol, n, body)


def random_reduced_states(params: ParameterSet, rng: np.random.Generator, n: int) -> np.ndarray:
    '''Reduced-L states around nominal operation, some of them deep in saturation.'''
    delta = rng.uniform(-math.pi, math.pi, n)
    E_star = rng.uniform(0.8, 1.2, n) * params.E_b
    I_g = rng.uniform(-2.0, 2.0, (n, 2)) * params.I_max
    return np.column_stack([delta, E_star, I_g])

def manifold_residual(state, params: ParameterSet, inputs: Inputs|None = None) -> float:
    '''Norm of the fast rows of the full model, divided by ω_b, on the manifold of `state`.'''
    delta, E_star, I_gd, I_gq = (float(v) for v in state)
    inputs = inputs or Inputs.Of((0.0, 0.0), (1.0, 0.0))
    rho = solve_rho_reduced(E_star, (I_gd, I_gq), params).rho
    point = manifold_states(E_star, (I_gd, I_gq), rho, params)
    x = np.array([delta, E_star, I_gd, I_gq, *point.I_i, *point.E, *point.Phi, *point.Gamma])
    dx = full_rhs(x, inputs, params, omega=params.omega_b)
    return float(np.linalg.norm(dx[FAST_ROWS])) / params.omega_b

def manifold_consistency_property(params: ParameterSet, rng: np.random.Generator, n: int = 100,
                                  tol: float = 1e-8) -> PropertyResult:
    states = random_reduced_states(params, rng, n)
    return _timed('manifold-consistency', tol, n,
                  lambda: max(manifold_residual(x, params) for x in states))


def random_full_states(params: ParameterSet, rng: np.random.Generator, n: int) -> np.ndarray:
    delta = rng.uniform(-math.pi, math.pi, n)
    E_star = rng.uniform(0.9, 1.1, n) * params.E_b
    I_g = rng.uniform(-0.5, 0.5, (n, 2))
    I_i = I_g + rng.uniform(-0.05, 0.05, (n, 2))
    E_d = rng.uniform(0.8, 1.2, n)
    E_q = rng.uniform(-0.2, 0.2, n)
    Phi = rng.uniform(-0.05, 0.05, (n, 2))
    Gamma = rng.uniform(-0.05, 0.05, (n, 2))
    return np.column_stack([delta, E_star, I_g, I_i, E_d, E_q, Phi, Gamma])

def step_halving_ratio(rhs: Callable, x0, step: float = 4e-4) -> float:
    '''‖J(h) − J(h/2)‖ / ‖J(h/2) − J(h/4)‖, about 4 for a second-order difference.'''
    J1, J2, J3 = (jacobian_fd(rhs, x0, step=step / k) for k in (1, 2, 4))
    return float(np.linalg.norm(J1 - J2) / np.linalg.norm(J2 - J3))

def jacobian_convergence_property(params: ParameterSet, rng: np.random.Generator, n: int = 10,
                                  tol: float = 0.5, inputs: Inputs|None = None) -> PropertyResult:
    inputs = inputs or Inputs.Of((1.0, 0.5), (1.0, 0.0))
    states = random_full_states(params, rng, n)
    rhs = lambda x: full_rhs(x, inputs, params)
    return _timed('jacobian-step-halving', tol, n,
                  lambda: max(abs(step_halving_ratio(rhs, x) - 4.0) for x in states))


def run_property_suites(params: ParameterSet, seed: int|None = None, parallel: bool = True) -> list[PropertyResult]:
    '''All four suites, each with its own generator spawned from `seed`.'''
    seed = GFMREDUCE_SEED if seed is None else seed
    rngs = np.random.default_rng(seed).spawn(3)
    suites = [
        lambda: limiter_bound_property(params.I_max),
        lambda: gain_oracle_property(params, rngs[0]),
        lambda: manifold_consistency_property(params, rngs[1]),
        lambda: jacobian_convergence_property(params, rngs[2]),
    ]
    return map_in_background(lambda suite: suite(), suites, parallel=parallel)


__all__ = [
    'PropertyResult',
    'limiter_bound_property',
    'gain_oracle_property',
    'manifold_residual',
    'manifold_consistency_property',
    'step_halving_ratio',
    'jacobian_convergence_property',
    'run_property_suites',
]
