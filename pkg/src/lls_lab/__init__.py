"""Pseudospectral laboratory for the Landau-Lifshitz-Slonczewski equation,
its stereographic Ginzburg-Landau transform, dyadic function-space norms,
and the Duhamel/Picard fixed-point solution map."""

from .core import (
    ComplexField,
    CurrentField,
    MagnetizationField,
    SpaceTimeField,
    TorusGrid,
    dealias,
    fft_forward,
    fft_inverse,
    gradient,
    laplacian,
    semigroup_apply,
    time_reverse,
)
from .stereo import project, unproject
from .lls import LlsState, lls_evolve, lls_rhs, lls_step
from .gl import (
    gl_march,
    gl_nonlinearity,
    gl_residual,
    gl_residual_preflip,
    picard_map,
    picard_solve,
)
from .dyadic import (
    DyadicDecomposition,
    lp_project,
    lp_project_directional,
    lp_project_leq,
    mod_project,
    norm_anisotropic,
    norm_besov,
    norm_mixed,
    norm_space,
    norm_xsbq,
)
from .estimates import (
    check_linear_estimate,
    check_nonlinear_estimate,
    check_strichartz,
    measure_contraction,
    smallness_sweep,
)

__version__ = "0.1.0"
