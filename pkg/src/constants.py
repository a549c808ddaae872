SCHEMA_VERSION = "v1"

# numerical-zero factor for group activity, scaled by max(1, ||x||_2)
ZERO_THRESHOLD = 1e-8

PENALTY_TOL = 1e-6
PENALTY_MAX_ITERS = 20000
# stopping tests run every PENALTY_CHECK_WINDOW iterations; rho is fixed after PENALTY_RHO_FREEZE
PENALTY_CHECK_WINDOW = 50
PENALTY_RHO_FREEZE = 1000

SOLVER_REL_TOL = 1e-8
SOLVER_MAX_ITERS = 5000
POWER_ITERATIONS = 50
BACKTRACKING_FACTOR = 0.5

ENUMERATION_LIMIT = 10**7
MIN_WIDTH_TRIALS = 30
MIN_CHISQ_TRIALS = 1000

QUADRATURE_POINTS = 128
EIGENVALUE_FLOOR = 1e-12

TABLE_TOLERANCE = 1e-3

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_NOT_CONVERGED = 2
EXIT_INPUT_ERROR = 3
