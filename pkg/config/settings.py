import os
from dotenv import load_dotenv

load_dotenv()

# Physical units
HBAR = float(os.getenv("HBAR", "1.0"))

# Linear algebra tolerances
HERMITIAN_TOL = float(os.getenv("HERMITIAN_TOL", "1e-12"))        # relative to max |entry|
DENSITY_TRACE_TOL = float(os.getenv("DENSITY_TRACE_TOL", "1e-12"))
PSD_TOL = float(os.getenv("PSD_TOL", "1e-10"))
UNITARY_TOL = float(os.getenv("UNITARY_TOL", "1e-10"))
DEGENERACY_REL_TOL = float(os.getenv("DEGENERACY_REL_TOL", "1e-9"))  # times spectral range
IMAG_RESIDUE_TOL = float(os.getenv("IMAG_RESIDUE_TOL", "1e-10"))

# Pointer
POSITIVITY_SLACK = 1e-12

# Work distributions
ATOM_MERGE_REL_TOL = float(os.getenv("ATOM_MERGE_REL_TOL", "1e-8"))  # times spectral range
NEGATIVE_WEIGHT_TOL = 1e-12
MUCH_LESS_FACTOR = float(os.getenv("MUCH_LESS_FACTOR", "10"))       # reading of "<<" and ">>"
N_EPSILON_DEFAULT = float(os.getenv("N_EPSILON", "1e-6"))
EVAL_GRID_POINTS = int(os.getenv("EVAL_GRID_POINTS", "2001"))
EVAL_GRID_SIGMAS = float(os.getenv("EVAL_GRID_SIGMAS", "8"))
FFT_SIZE = int(os.getenv("FFT_SIZE", str(2 ** 14)))

# Outcome quadrature
QUADRATURE_SIGMAS = 8.0
QUADRATURE_SPACING = 1 / 20        # grid step in units of sigma_e
SELECTIVE_MIN_PROB = 1e-14

# Grid oracle
ORACLE_GRID_POINTS = int(os.getenv("ORACLE_GRID_POINTS", str(2 ** 14)))
ORACLE_LEAK_TOL = float(os.getenv("ORACLE_LEAK_TOL", "1e-12"))
ORACLE_MASS_TOL = 1e-9
KERNEL_WEIGHT_CUTOFF = 1e-12
KERNEL_MAX_MODES = int(os.getenv("KERNEL_MAX_MODES", "400"))

# Fluctuation checks
CROOKS_REL_TOL = 1e-9
MODIFIED_CROOKS_REL_TOL = 1e-8
JARZYNSKI_REL_TOL = 1e-10
ORACLE_L1_TOL = 1e-6
CLOSED_FORM_TOL = 1e-10          # work-meter mixture against the two-level formula

# Output
OUTPUT_DIR = os.getenv("OUTPUT_DIR", "results")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")