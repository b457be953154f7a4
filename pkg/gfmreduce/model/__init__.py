from .frames import *
from .params import *
from .limiter import *
from .full_order import *
from .reduced_order import *
