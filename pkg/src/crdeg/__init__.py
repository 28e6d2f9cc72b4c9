"""Exact formal computations for holomorphic maps between generic submanifolds.

Series live over Q(i) and are truncated at a working order; every verdict is
qualified by that order.
"""
__version__ = "0.1.0"

from .series import (GaussianRational, PrecisionError, SeriesError, SeriesVector, TruncatedSeries,
                     VariableBlocks, arith, evaluate, implicit_solve, multiindices)
from .manifold import (ManifoldError, NormalManifold, Recentering, hyperquadric_like,
                       recenter_normalize, validate_manifold)
from .maps import (FormalMap, GeneratorTarget, MapError, check_maps_into, levi_data,
                   levi_pullback_check, recenter_map, transversality_check)
from .degeneracy import (DegeneracyError, analyze, constant_rank_probe, degeneracy_at_origin,
                         degeneracy_rows, delta_system, hol_vector_fields, identity_map)
from .segre import finite_type_test, segre_map
from .identity import (BasicIdentityCertificate, IdentityError, basic_identity,
                       basic_identity_1deg, derivative_identities, jet_determination_check,
                       upsilon_1deg, upsilon_recursion)

__all__ = [
    "GaussianRational", "PrecisionError", "SeriesError", "SeriesVector", "TruncatedSeries",
    "VariableBlocks", "arith", "evaluate", "implicit_solve", "multiindices",
    "ManifoldError", "NormalManifold", "Recentering", "hyperquadric_like", "recenter_normalize",
    "validate_manifold",
    "FormalMap", "GeneratorTarget", "MapError", "check_maps_into", "levi_data",
    "levi_pullback_check", "recenter_map", "transversality_check",
    "DegeneracyError", "analyze", "constant_rank_probe", "degeneracy_at_origin",
    "degeneracy_rows", "delta_system", "hol_vector_fields", "identity_map",
    "finite_type_test", "segre_map",
    "BasicIdentityCertificate", "IdentityError", "basic_identity", "basic_identity_1deg",
    "derivative_identities", "jet_determination_check", "upsilon_1deg", "upsilon_recursion",
]
