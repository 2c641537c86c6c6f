"""L² cohomology of Γ-equivariant constructible sheaves on cocompact Γ-simplicial complexes."""

from .chain import GroupRingComplex, adjoint_complex, build_cochain, build_cosheaf_chain, laplacian
from .complex import ComplexError, GammaComplex, NonFreeAction, NotSeparated, Subdivision, VertexOrdering
from .duality import comparison_mono, dualizing_complex, duality_check, verdier_dual, verdier_dual_complex
from .group_algebra import (
    GroupRingElement,
    GroupRingMatrix,
    GroupSpec,
    Mode,
    VNDimension,
    ns_probe,
    quotient_error_bound,
    spectral_samples,
    trace_vn,
    vn_kernel_dim,
    vn_rank,
)
from .l2 import L2Report, atiyah_check, hyper_l2, l2_betti, total_complex, truncation_check
from .scalars import Mat, Scalar
from .sheaf import (
    ConstructibleSheaf,
    Cosheaf,
    SheafComplex,
    constant_sheaf,
    direct_sum,
    dual_cosheaf,
    skyscraper,
    subdivision_pullback,
)

__version__ = "0.1.0"
