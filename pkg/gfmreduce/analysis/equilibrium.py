# -*- coding: utf-8 -*-
'''Operating points of the three models at constant inputs.'''
from dataclasses import replace

import numpy as np

from scipy.integrate import solve_ivp
from scipy.optimize import root

from .modal import ModalReport, jacobian_fd, participation_matrix
from ..common_utils.constants import SLOW_FAST_CUTOFF
from ..common_utils.debug_utils import get_logger
from ..common_utils.errors import EquilibriumError, GFMReduceError
from ..model.frames import E1, wrap_angle
from ..model.full_order import Inputs
from ..model.limiter import RhoCache, gain_matrices, solve_rho_reduced
from ..model.params import ParameterSet
from ..model.reduced_order import LimiterMode, manifold_states
from ..simulate.engine import ModelKind, STATE_NAMES, model_rhs

_logger = get_logger(__name__)

SETTLE_TIME = 2.0
'''s of reduced-model simulation before the root solve'''
RESIDUAL_LIMIT = 1e-7


def _newton_polish(rhs, x: np.ndarray, max_iterations: int = 8) -> tuple[np.ndarray, float]:
    f = rhs(x)
    norm = float(np.linalg.norm(f))
    for _ in range(max_iterations):
        if norm < 1e-12:
            break
        try:
            dx = np.linalg.solve(jacobian_fd(rhs, x), -f)
        except (np.linalg.LinAlgError, GFMReduceError):
            break
        x_new = x + dx
        try:
            f_new = rhs(x_new)
        except GFMReduceError:
            break
        norm_new = float(np.linalg.norm(f_new))
        if not norm_new < norm:
            break
        x, f, norm = x_new, f_new, norm_new
    return x, norm

def _solve(rhs, x0: np.ndarray, label: str) -> np.ndarray:
    x = np.asarray(x0, dtype=float)
    norm0 = float(np.linalg.norm(rhs(x)))
    try:
        sol = root(rhs, x, method='hybr', options={'xtol': 1e-13})
        if np.isfinite(sol.x).all() and float(np.linalg.norm(rhs(sol.x))) < norm0:
            x = sol.x
    except GFMReduceError as e:
        _logger.debug(f'{label}: root solve left the valid region ({e}), polishing the seed')
    x, norm = _newton_polish(rhs, x)
    if not norm < RESIDUAL_LIMIT:
        raise EquilibriumError(f'{label}: no equilibrium found, derivative norm {norm:.3g}')
    x = x.copy()
    x[0] = wrap_angle(float(x[0]))
    _logger.debug(f'{label}: equilibrium with derivative norm {norm:.3g}')
    return x

def _reduced_L_seed(inputs: Inputs, params: ParameterSet, mode: LimiterMode) -> np.ndarray:
    E_b = params.E_b
    A3 = gain_matrices(1.0, params).A3
    I_g = A3 @ (E1 * E_b - inputs.V_DQ.as_array())
    x0 = np.array([0.0, E_b, I_g[0], I_g[1]])
    rhs = model_rhs(ModelKind.REDUCED_L, inputs, params, mode, RhoCache())
    sol = solve_ivp(lambda t, y: rhs(y), (0.0, SETTLE_TIME), x0, method='RK45', rtol=1e-9, atol=1e-11)
    if not sol.success:
        raise EquilibriumError(f'settling run failed: {sol.message}')
    return sol.y[:, -1]

def find_equilibrium(model: ModelKind|str, inputs: Inputs, params: ParameterSet,
                     mode: LimiterMode|str = LimiterMode.SMOOTH,
                     guess=None) -> np.ndarray:
    '''
    Equilibrium state of `model` at constant inputs.

    Without a guess the reduced-L model is settled by simulation first; the
    full-model seed is the manifold point of that equilibrium.
    '''
    model, mode = ModelKind(model), LimiterMode(mode)
    label = f'{model.value} equilibrium'
    if guess is not None:
        return _solve(model_rhs(model, inputs, params, mode, RhoCache()), np.asarray(guess, dtype=float), label)

    seed_mode = LimiterMode.SMOOTH if model is ModelKind.FULL else mode
    x_l = _solve(model_rhs(ModelKind.REDUCED_L, inputs, params, seed_mode, RhoCache()),
                 _reduced_L_seed(inputs, params, seed_mode), 'reduced-L equilibrium')
    if model is ModelKind.REDUCED_L:
        return x_l
    if model is ModelKind.REDUCED_R:
        return _solve(model_rhs(model, inputs, params, mode, RhoCache()), x_l[:2], label)

    delta, E_star, I_gd, I_gq = x_l
    rho = solve_rho_reduced(E_star, (I_gd, I_gq), params).rho
    point = manifold_states(E_star, (I_gd, I_gq), rho, params)
    seed = np.array([delta, E_star, I_gd, I_gq, *point.I_i, *point.E, *point.Phi, *point.Gamma])
    return _solve(model_rhs(model, inputs, params), seed, label)

def linearize(model: ModelKind|str, inputs: Inputs, params: ParameterSet,
              mode: LimiterMode|str = LimiterMode.SMOOTH,
              equilibrium=None) -> tuple[np.ndarray, np.ndarray]:
    '''(equilibrium, Jacobian) at constant inputs.'''
    x_eq = find_equilibrium(model, inputs, params, mode) if equilibrium is None else np.asarray(equilibrium, float)
    rhs = model_rhs(model, inputs, params, mode, RhoCache())
    return x_eq, jacobian_fd(rhs, x_eq)

def modal_analysis(model: ModelKind|str, inputs: Inputs, params: ParameterSet,
                   mode: LimiterMode|str = LimiterMode.SMOOTH,
                   cutoff: float = SLOW_FAST_CUTOFF) -> ModalReport:
    '''Linearize at the equilibrium and compute the participation report.'''
    model = ModelKind(model)
    x_eq, A = linearize(model, inputs, params, mode)
    report = participation_matrix(A, cutoff=cutoff, state_names=STATE_NAMES[model])
    return replace(report, equilibrium=x_eq)


__all__ = ['find_equilibrium', 'linearize', 'modal_analysis']
