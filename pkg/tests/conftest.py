import numpy as np
import pytest

from gfmreduce.common_utils.constants import GFMREDUCE_SEED
from gfmreduce.model.full_order import Inputs
from gfmreduce.model.params import named_parameters


@pytest.fixture
def params():
    '''Reference parameters with the line inductance added to L_g.'''
    return named_parameters('table1-inductive')

@pytest.fixture
def params_resistive():
    return named_parameters('table1-resistive')

@pytest.fixture
def rng():
    return np.random.default_rng(GFMREDUCE_SEED)

@pytest.fixture
def light_inputs():
    '''Setpoints that keep the current reference far below I_max.'''
    return Inputs.Of((0.3, 0.1), (1.0, 0.0))

@pytest.fixture
def modal_inputs():
    return Inputs.Of((2.0, 2.0), (1.0, 0.0))
