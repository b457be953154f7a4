from .helper_funcs import *
