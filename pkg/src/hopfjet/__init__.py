"""Truncated power-series dynamics of holomorphic contraction germs.

Jets of maps of C^n at a fixed point, their spectra and resonances,
Poincare-Dulac normal forms, equivariant flat connections on the tangent
bundle and cohomology dimensions on diagonal linear Hopf manifolds.
"""
__version__ = "0.1.0"

from .cohomology import (
    CohomologyReport,
    TensorBundleSpec,
    invariant_section_dim,
    line_bundle_cohomology,
    mall_dims,
    resonance_cohomology_bridge,
)
from .connection import (
    ConnectionForm,
    CurvatureForm,
    EquivariantBundle,
    TorsionTensor,
    curvature,
    developing_coordinates,
    gauge_pullback,
    graded_weights,
    linearize_via_connection,
    parallel_coframe,
    solve_equivariant_connection,
    torsion,
)
from .errors import *  # noqa: F401,F403
from .normal_form import (
    HomogeneousVectorField,
    HomologicalOperator,
    NormalFormReport,
    homological_solve,
    linearize,
    normal_form,
    verify_conjugacy,
)
from .parse import format_germ, format_number, format_series, parse_constant, parse_germ, parse_series
from .series import (
    JetBasis,
    MonomialIndex,
    TensorSeries,
    TruncatedMapGerm,
    TruncatedSeries,
    compose,
    compose_germs,
    differentiate,
    graded_component,
    invert_germ,
    jet_basis,
)
from .spectral import (
    BundleAction,
    ResonanceRelation,
    SpectralData,
    assert_contraction,
    bundle_resonances,
    eigen,
    is_contraction,
    matrix_resonances,
    nearest_resonance,
    resonance_bound,
    schur,
    small_divisor,
)
