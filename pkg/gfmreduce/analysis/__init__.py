from .modal import *
from .equilibrium import *
