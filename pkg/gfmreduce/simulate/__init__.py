from .configs import *
from .trace import *
from .engine import *
