"""Exact computations with (phi,N)-modules and limit cohomology of
semistable degenerations over Q(sqrt p)."""

__version__ = "0.1.0"

from .complexes import (
    Complex, DoubleComplex, MonodromyComplex, SSResult, cone, fiber, homology, monodromy_fiber,
    monodromy_on_graded, total_complex, twist_shift, weight_ss,
)
from .degeneration import (
    CSReport, SemistableFiber, SteenbrinkComplex, builtin_example, chi_compare, clemens_schmid,
    limit_cohomology, self_duality, special_fiber_complexes, steenbrink, validate_fiber,
)
from .errors import *  # noqa: F401,F403
from .exact import Field, Matrix, QSqrt, WeightSplit, rank_kernel, scalar_ops, weil_split
from .koszul import (
    bar_mult_table, cofree_truncation, derivation_check, kummer_object, lax_tensor,
    projection_formula_matrix,
)
from .phimod import (
    MonodromyFiltration, PhiModule, PhiNModule, PhiNMorphism, dual, hom_ext_phi, hom_ext_phin,
    mk_phin, monodromy_filtration, tate_twist, tensor, unit, weight_grading, wm_check,
)
