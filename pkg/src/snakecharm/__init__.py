"""Horizontal lifts, singularities and bracket structure for spherical arms.

The service (`snakecharm.service`) and CLI (`snakecharm.cli`) are imported
explicitly by the code that needs them, so importing the package stays light.
"""

from .algebroid import (
    SectionField,
    StructureConstants,
    almost_bracket,
    anchor,
    g_bracket,
    jacobi_defect,
    section_bracket,
    structure_constants,
)
from .control import (
    LOOP_BRACKET_SIGN,
    FlowSchedule,
    ReachResult,
    TargetCurve,
    TargetError,
    Trajectory,
    commutator_loop,
    composite_flow,
    control_coordinates,
    energy,
    flow_frame,
    lift_velocity,
    reach_probe,
    sup_distance,
    track,
)
from .endpoint import (
    GramData,
    SingularityReport,
    endpoint,
    gram,
    pushforward,
    singular_tolerance,
    singularity,
    solve_transfer,
)
from .frames import (
    GVector,
    PolyField,
    RankReport,
    bracket_field,
    dbar_rank,
    frame_field,
    horizontal_gradient,
    horizontal_projection,
    pointwise_commutator,
    predicted_kernel_dim,
    psi,
    psi_matrix,
    v_subspace,
)
from .geometry import (
    Configuration,
    DegeneracyError,
    LayoutError,
    Partition,
    QuadratureRule,
    TangentField,
    arm_to_sampled,
    integrate_field,
    l2_inner,
    l2_norm,
    random_configuration,
    renormalize,
    snake_shape,
    sup_norm,
)
from .scenario import (
    IntegratorSpec,
    Scenario,
    ScenarioError,
    Tolerances,
    build_target,
    dumps_canonical,
    export_matrix_csv,
    export_trajectory,
    load_scenario,
    load_trajectory,
    parse_target_preset,
    save_report,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

__all__ = [
    "Configuration",
    "DegeneracyError",
    "FlowSchedule",
    "GVector",
    "GramData",
    "IntegratorSpec",
    "LOOP_BRACKET_SIGN",
    "LayoutError",
    "Partition",
    "PolyField",
    "QuadratureRule",
    "RankReport",
    "ReachResult",
    "Scenario",
    "ScenarioError",
    "SectionField",
    "SingularityReport",
    "StructureConstants",
    "TangentField",
    "TargetCurve",
    "TargetError",
    "Tolerances",
    "Trajectory",
    "almost_bracket",
    "anchor",
    "arm_to_sampled",
    "bracket_field",
    "build_target",
    "commutator_loop",
    "composite_flow",
    "control_coordinates",
    "dbar_rank",
    "dumps_canonical",
    "endpoint",
    "energy",
    "export_matrix_csv",
    "export_trajectory",
    "flow_frame",
    "frame_field",
    "g_bracket",
    "gram",
    "horizontal_gradient",
    "horizontal_projection",
    "integrate_field",
    "jacobi_defect",
    "l2_inner",
    "l2_norm",
    "lift_velocity",
    "load_scenario",
    "load_trajectory",
    "parse_target_preset",
    "pointwise_commutator",
    "predicted_kernel_dim",
    "psi",
    "psi_matrix",
    "pushforward",
    "random_configuration",
    "reach_probe",
    "renormalize",
    "save_report",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "section_bracket",
    "singular_tolerance",
    "singularity",
    "snake_shape",
    "solve_transfer",
    "structure_constants",
    "sup_distance",
    "sup_norm",
    "track",
    "v_subspace",
]
