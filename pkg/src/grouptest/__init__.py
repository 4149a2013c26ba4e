"""Property testing of functions on finite groups."""

__version__ = "0.1.0"

from .access import CorrectedAccess, QueryOracle, Witness, corrected_query
from .errors import (
    DimMismatch,
    FormatError,
    GroupMismatch,
    GroupTestError,
    GroupTooLarge,
    IncompatibleFamily,
    NotAGroup,
    NumericalFailure,
    OrderCapExceeded,
    ShapeMismatch,
)
from .functions import MatrixFunction, ScalarFunction, class_function, load_function, save_function
from .groups import (
    FiniteGroup,
    boolean_cube,
    builtin,
    conjugation_fiber_size,
    cyclic,
    dihedral,
    direct_product,
    from_cayley_table,
    load_group,
    parse_group_spec,
    quaternion,
    save_group,
    symmetric,
    uniform_element,
)
from .reps import (
    IrrepBasis,
    UnitaryIrrep,
    character,
    compute_irreps,
    distance,
    fourier_transform,
    inner_product,
    inverse_fourier,
    l2_norm,
    normalized_character,
    sample_haar_unitary,
)
from .testers import (
    TesterConfig,
    TesterReport,
    character_core,
    estimate_mean,
    expected_queries,
    homomorphism_core,
    test_character_proportional,
    test_conjugate_invariance,
    test_homomorphism,
    test_unitary_equivalence,
    with_class_function_reduction,
)
