"""Cut-and-project point sets with exact arithmetic.

The package builds model sets from lattice data, pairs them point-by-point
with ordinary lattices while certifying a displacement bound, runs bounded
remainder set experiments for torus rotations, and carries the classical
five-fold scheme with its ten-piece window decomposition.
"""

from .errors import (
    BoundaryAmbiguousError,
    CutProjectError,
    DegenerateDecompositionError,
    FieldMismatchError,
    NoComplementError,
    NotFundamentalDomainError,
    PrecisionExhaustedError,
    RankDeficientError,
    RegionError,
    SingularOffsetError,
)
from .scalars import (
    Surd,
    exact_ceil,
    exact_floor,
    float_sign,
    format_scalar,
    golden_ratio,
    parse_scalar,
    scalar_sign,
    sqrt_int,
)
from .scheme import (
    EXACT,
    FloatMode,
    GammaBox,
    LiftedPoint,
    Patch,
    PhysicalBall,
    Scheme,
    Window,
    WindowPiece,
    generate_patch,
    parallelotope_window,
    window_membership,
)
from .lattice import (
    complement,
    coset_structure,
    hermite_form,
    saturate,
    smith_normal_form,
    sublattice_index,
)
from .zonotope import (
    Decomposition,
    ZonotopePiece,
    as_window_pieces,
    half_open_decomposition,
    validate_decomposition,
    zonotope_volume,
)
from .bijection import (
    BijectionSetup,
    DisplacementBound,
    build_setup,
    bijection_pairs,
    displacement_bound,
    fibers,
    map_point,
    verify_patch,
)
from .rotation import (
    DiscrepancyBound,
    DiscrepancyCurve,
    DriftReport,
    IntervalCertificate,
    OffsetResult,
    ReturnTimes,
    RotationInstance,
    SweepReport,
    bound_sweep,
    discrepancy_bound,
    discrepancy_curve,
    hit_count,
    interval_certificate,
    lattice_drift,
    offset_grid,
    return_times,
    rotation_instance,
    suspension,
    suspension_box,
    time_displacement_bound,
)
from .penrose import (
    CubeCountReport,
    PenroseScheme,
    PieceData,
    WindowDecomposition,
    build_penrose,
    cube_count_residual,
    decompose_window,
    density_estimate,
    piece_patch,
    plane_coords,
    random_polyomino,
    sine_scale,
    true_plane_point,
    vertex_patch,
)
from .io import (
    FormatError,
    parse_instance_file,
    parse_scheme_file,
    read_region_file,
    write_instance_file,
    write_patch_csv,
    write_region_file,
    write_scheme_file,
)

__version__ = "0.1.0"
