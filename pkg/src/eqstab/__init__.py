"""Global stability analysis of autonomous nonlinear systems.

The core idea is the extended-Jacobian test: find the (unique) equilibrium in a
region, look at the sign pattern of the Jacobian spectrum there, and corroborate
with simulation, the Popov criterion and the Bendixson divergence test.  A
Greitzer compressor model is included as a worked application.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError, DomainError, EqstabError, ExprSyntaxError, PreconditionError,
    StepSizeError, SystemDefinitionError, UnknownIdentifierError, VariableIndexError,
)
from .expr import compile_expr, diff_expr, eval_expr, parse_expr, to_text  # noqa: E402
from .sysdef import DynamicalSystem, builtin, jacobian, parse_system  # noqa: E402
from .eig import Spectrum, eigenvalues  # noqa: E402
from .stability import (  # noqa: E402
    LureSystem, bendixson_test, classify, eigen_field, find_equilibria, popov_test,
)
from .sim import detect_limit_cycle, integrate, outcome, phase_portrait  # noqa: E402

__all__ = [
    "__version__",
    "EqstabError", "ExprSyntaxError", "UnknownIdentifierError", "VariableIndexError",
    "DomainError", "SystemDefinitionError", "ConvergenceError", "StepSizeError",
    "PreconditionError",
    "parse_expr", "to_text", "eval_expr", "compile_expr", "diff_expr",
    "DynamicalSystem", "parse_system", "builtin", "jacobian",
    "Spectrum", "eigenvalues",
    "classify", "find_equilibria", "eigen_field", "LureSystem", "popov_test", "bendixson_test",
    "integrate", "outcome", "phase_portrait", "detect_limit_cycle",
]
