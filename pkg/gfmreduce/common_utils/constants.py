import os
import math

from pathlib import Path

GFMREDUCE_LOG_LEVEL = os.environ.get('GFMREDUCE_LOG_LEVEL', 'INFO').upper()
if GFMREDUCE_LOG_LEVEL not in ('VERBOSE', 'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
    GFMREDUCE_LOG_LEVEL = 'INFO'

try:
    GFMREDUCE_SEED = int(os.environ.get('GFMREDUCE_SEED', '0').strip())
except ValueError:
    GFMREDUCE_SEED = 0

if 'GFMREDUCE_OUTPUT_DIR' in os.environ:
    OUTPUT_DIR = Path(os.environ['GFMREDUCE_OUTPUT_DIR'])
else:
    OUTPUT_DIR = Path.cwd() / "gfmreduce_output"

def tidy_dir(p: Path|str) -> Path:
    '''Create `p` if missing and make sure it is writable.'''
    p = Path(p).expanduser().resolve()
    if not p.exists():
        p.mkdir(parents=True, exist_ok=True)
    if not os.access(p, os.W_OK):
        raise PermissionError(f"Directory '{p}' is not writable.")
    return p

# region numerics
RHO_TOLERANCE = 1e-12
'''residual tolerance of the implicit saturation-factor solve'''
RHO_MAX_ITERATIONS = 200
RHO_DEGENERATE_NORM = 1e-12
'''below this reference norm the saturation factor is exactly 1'''

SLOW_FAST_CUTOFF = 260.0
'''rad/s, eigenvalues with real part below -cutoff are fast'''
CLASSIFICATION_TIE = 1e-6
ASSUMPTION1_EPS = 1.0 / 260.0
'''allowed relative frequency excursion of the reduced models'''
EIGENVECTOR_CONDITION_LIMIT = 1e12
JACOBIAN_STEP = 1e-6

LN2 = math.log(2.0)
# endregion


__all__ = [
    "GFMREDUCE_LOG_LEVEL",
    "GFMREDUCE_SEED",
    "OUTPUT_DIR",
    "tidy_dir",

    "RHO_TOLERANCE",
    "RHO_MAX_ITERATIONS",
    "RHO_DEGENERATE_NORM",
    "SLOW_FAST_CUTOFF",
    "CLASSIFICATION_TIE",
    "ASSUMPTION1_EPS",
    "EIGENVECTOR_CONDITION_LIMIT",
    "JACOBIAN_STEP",
    "LN2",
]
