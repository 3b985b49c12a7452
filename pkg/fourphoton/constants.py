"""
Constants used throughout the fourphoton library.

Centralizes the magic transmissivities, numerical tolerances and default
configuration values so every module agrees on them.
"""

import math

# Mathematical constants
PI = math.pi
DEG_TO_RAD = PI / 180.0
RAD_TO_DEG = 180.0 / PI

# Four-photon Hong-Ou-Mandel transmissivities, T = (3 +/- sqrt(3)) / 6
T_STAR = (3.0 + math.sqrt(3.0)) / 6.0
T_STAR_LOW = (3.0 - math.sqrt(3.0)) / 6.0
# Half-wave-plate angle with cos^2(2 theta) = T_STAR (about 13.68 degrees)
THETA_STAR = 0.5 * math.acos(math.sqrt(T_STAR))
# Half-wave-plate angle acting as a 50:50 splitter
THETA_BALANCED = PI / 8.0

# Three-photon Hong-Ou-Mandel transmissivity, T = 2R = 2/3
T_THREE_PHOTON = 2.0 / 3.0

# Channel labels used by the double-pair source (H = a, V = b)
CHANNEL_H = 0
CHANNEL_V = 1
DEFAULT_CHANNELS = 2

# Engine limits
MAX_PHOTONS = 10
MAX_INTERNAL_MODES = 8
MAX_SCHMIDT_MODES = 4
MAX_PERMANENT_SIZE = 20

# Numerical tolerances
PRUNE_THRESHOLD = 1e-14  # amplitudes below this magnitude are dropped
NORM_TOLERANCE = 1e-12  # normalized kets sit this close to 1
DETECTION_NORM_TOLERANCE = 1e-9  # detect_prob rejects states further from 1
UNITARITY_TOLERANCE = 1e-12
SCHMIDT_NORM_TOLERANCE = 1e-12

# Delay model
DEFAULT_COHERENCE_LENGTH_UM = 120.0

# Fitting
FIT_MAX_ITERATIONS = 500
FIT_RSS_RTOL = 1e-12  # relative RSS change treated as converged
FIT_GRADIENT_TOL = 1e-10  # gradient infinity norm treated as converged
FIT_STEP_RTOL = 1e-15  # relative step size treated as converged
JACOBIAN_STEP = 1e-6  # relative central-difference step
POISSON_WEIGHT_FLOOR = 1.0  # weight = 1 / max(y, floor)
FWHM_PER_WIDTH = 2.0 * math.sqrt(2.0 * math.log(2.0))  # Gaussian FWHM / sigma

# Balance search
BALANCE_HALF_WIDTH_DEG = 3.0
BALANCE_GRID_STEP_DEG = 0.05
BALANCE_FRINGE_POINTS = 24
BALANCE_XTOL = 1e-12
DEFAULT_BALANCE_TOLERANCE = 0.02

# Output formats
FORMAT_TAG = "fourphoton v1"
FLOAT_FORMAT = "%.17g"  # lossless float round trip
