"""Finite-strain biphasic porous-media FEM with Taylor-Hood tetrahedra
and Galerkin least-squares pressure stabilization.

Units throughout: mm, N, s, MPa (= N/mm^2), permeability mm^4 N^-1 s^-1.
"""

from .errors import (
    BiphasicError,
    ConfigError,
    GeometryError,
    InvertedElementError,
    MeshError,
    MeshParseError,
    MetricError,
    QueryError,
    StepFailureError,
)
from .fem import (
    ElementMatrices,
    GlsParams,
    QuadratureRule,
    element_matrices,
    quadrature_tet4pt,
    shape_tet4,
    shape_tet10,
    tau_gls,
)
from .material import (
    Kinematics,
    NeoHookeParams,
    PermeabilityParams,
    StressTangent,
    cauchy_stress,
    spatial_tangent,
    strain_energy,
)
from .mesh import (
    Mesh,
    MeshSpec,
    Tet10,
    Vertex,
    circumsphere_radius,
    generate,
    generate_box,
    generate_quarter_cylinder,
    read_mesh,
    reference_line_nodes,
    write_mesh,
)
from .postprocess import (
    OscillationReport,
    PressureProfile,
    extract_profile,
    oscillation_metric,
    write_profile_csv,
    write_summary,
    write_vtk,
)
from .scenario import (
    BoundaryConditionSet,
    Scenario,
    SimulationConfig,
    build_terzaghi_column,
    build_unconfined_compression,
    load_config,
    save_config,
)
from .solver import (
    DofMap,
    GlobalSystem,
    NewtonSettings,
    SolutionState,
    apply_dirichlet,
    assemble,
    march,
    solve_time_step,
)

__version__ = "0.1.0"
