"""Capacities, Sobolev constants and isocapacitary bound checkers for the
p-Laplacian on finite weighted graphs with boundary."""

from .capacity import (
    CapacityResult,
    TruncationReport,
    capacity,
    capacity_p2_oracle,
    path_capacity_closed_form,
    truncation_invariance_check,
)
from .checks import (
    BoundCheckReport,
    CapacityLevelsReport,
    HardyReport,
    IntervalCapacityReport,
    LayerCakeReport,
    LevelProfile,
    MonotoneProfile,
    SweepCell,
    capacity_levels_check,
    hardy_check,
    interval_capacity_identity,
    layer_cake_check,
    lower_bound_constant,
    sweep,
    two_sided_bound_check,
    upper_bound_constant,
)
from .geometry_io import (
    MeshSpec,
    SchemaError,
    gen_model,
    graphs_equal,
    load_graph,
    load_mesh_off,
    mesh_disk,
    mesh_to_graph,
    save_graph,
)
from .graphs import (
    GraphValidationError,
    WeightedGraph,
    finite_difference_check,
    p_energy,
    p_energy_gradient,
    vertex_set,
)
from .isocap import (
    BudgetExceededError,
    DegenerateSeedError,
    IsocapResult,
    admissible_pair_count,
    isocap_exact,
    isocap_heuristic,
)
from .spectral import (
    EigenResult,
    SobolevResult,
    first_eigenvalue,
    neumann_p2_oracle,
    rayleigh_quotient,
    recenter,
    sobolev_constant,
    steklov_p2_oracle,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
