"""Caputo-type time-fractional diffusion driven by a diagonalized operator.

Submodules:

* :mod:`gfde.kernel` -- memory kernels and the admissibility probe;
* :mod:`gfde.gcaputo` -- product-integration derivative and implicit stepper;
* :mod:`gfde.relaxation` -- scalar relaxation equation, Duhamel form, Mittag-Leffler;
* :mod:`gfde.spectrum` -- spectral models (torus, Heisenberg), transforms, Sobolev norms;
* :mod:`gfde.diffusion` -- mode-wise diffusion solvers;
* :mod:`gfde.estimates` -- numerical verification of the estimates;
* :mod:`gfde.cli` -- command line interface.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AdmissibilityError,
    ArgumentError,
    CapabilityError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    GFDEError,
    MisuseError,
    UnsupportedKernelError,
)
from .kernel import (  # noqa: E402
    CaputoPower,
    DistributedOrder,
    ExponentialNonAdmissible,
    MemoryKernel,
    MultiTerm,
    check_admissibility,
    kernel_weights,
)
from .gcaputo import TimeGrid, apply_derivative, derivative_history  # noqa: E402
from .relaxation import duhamel, mittag_leffler, solve_relaxation, solve_scalar_ivp  # noqa: E402
from .spectrum import (  # noqa: E402
    Field,
    Mode,
    SpectralModel,
    analyze,
    apply_fractional_power,
    sobolev_norm,
    synthesize,
)
from .diffusion import (  # noqa: E402
    CoefficientPath,
    DiffusionProblem,
    SeparableSource,
    SolutionTrajectory,
    apply_generator,
    picard_solve_mode,
    solve,
    solve_mode,
)
