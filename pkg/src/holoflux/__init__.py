"""holoflux: a desk-scale kernel for holonomy/flux quantum geometry.

Piecewise-linear paths and simplicial surfaces stand in for the analytic
category; compact-group representation arithmetic (U(1), SU(2)), cylindrical
functions with exact product-Haar inner products, Weyl (exponentiated flux)
operators, localized stratified diffeomorphism constructors, and the
numerical estimate suites are all exact or explicitly error-bounded.
"""

from .connections import (
    AdmissibleMap,
    Germ,
    RestrictedConnection,
    SurfaceLabel,
    admissible_to_map,
    constant_label,
    flux_admissible_map,
    flux_germ,
    germ_extend,
    holonomy,
    quasi_flux,
    random_connection,
)
from .cylindrical import (
    CylFun,
    align_to_common,
    cylfun,
    evaluate,
    gamma_based,
    gsn,
    inner_product_exact,
    inner_product_mc,
    is_gsn,
    norm_l2,
    orthogonality_predicate,
    refine_for_surface,
    subdivide_edge,
)
from .geometry import (
    AffineMap,
    Graph,
    OrientedSurface,
    PolyPath,
    Simplex,
    build_graph,
    completely_transversal,
    decompose_minimal,
    joint_surface,
    map_path,
    map_surface,
    punctures,
    sigma_eval,
)
from .liegroup import (
    GroupElement,
    Irrep,
    LieBasis,
    character,
    exp_alg,
    find_character_zero,
    haar_sample,
    identity,
    parse_irrep,
    schur_inner,
    square_root,
    su2_basis,
    u1_basis,
)
from .weylops import (
    GaugeTransform,
    Graphomorphism,
    WeylDescriptor,
    adjoint_weyl,
    apply_gauge,
    apply_graphomorphism,
    apply_weyl,
    weyl_constant,
    weyl_one_param,
)

__version__ = "0.1.0"
