"""Local hidden variable tests for two-qutrit Bell experiments by linear programming."""

__version__ = "0.1.0"

from .lhv import (  # noqa: E402
    BellCertificate,
    FThreshold,
    JointDistribution,
    build_feasibility,
    check_marginals,
    critical_admixture,
    lhv_feasible,
    vertex_oracle,
)
from .lp import LpOutcome, LpProblem, solve  # noqa: E402
from .measurements import (  # noqa: E402
    ProbabilityTable,
    SettingsQuad,
    Su3Angles,
    haar_random_settings,
    measurement_projectors,
    probability_table,
    su3_unitary,
)
from .states import (  # noqa: E402
    DensityOperator,
    PureState,
    StateAngles,
    admixture,
    bound_entangled_state,
    complement_basis,
    linear_entanglement_degree,
    state_from_angles,
    tiles_upb,
)
