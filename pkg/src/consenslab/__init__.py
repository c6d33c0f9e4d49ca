"""Simulation lab for projection-constrained consensus of disturbed
single-integrator agent networks."""

__version__ = "0.1.0"

from .analysis import (GammaCertificate, GraphNotConnectedError,
                       InfeasibleConfigurationError, MetricsReport,
                       OutputWeights, check_theorem1, consensus_metrics,
                       controlled_output, full_metrics, gamma_matrix,
                       lyapunov_monitors, min_gamma, performance_index,
                       schur_feasibility)
from .convex import (Ball, Box, EmptyIntersectionError, Halfspace,
                     Intersection, ProjectionResult, contains, distance,
                     distance_many, project, project_many)
from .graph import (Graph, algebraic_connectivity, is_connected, laplacian,
                    reduced_laplacian)
from .linalg import (MAX_DIM, ComplementBasis, EigenDecomposition, SymMatrix,
                     centering_matrix, complement_basis, is_negative_definite,
                     leading_principal_minors, sym_eigen)
from .protocol import (AgentConfig, DecayingExp, GaussianPulse, Scenario,
                       SinePulse, Trace, TrajectoryDiverged, Zero,
                       control_input, disturbance_l2_norm_sq, integrate,
                       vector_field)
from .scenario import (ScenarioParseError, dump_scenario, load_scenario,
                       parse_scenario, scenario_to_dict)
