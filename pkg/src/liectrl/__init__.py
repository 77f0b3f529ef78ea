"""liectrl: discrete-time linear control systems on Lie groups.

Chart arithmetic for Euclidean, Aff2, Heisenberg and general nilpotent
groups; spectral splitting of the automorphism; accessibility rank tests;
controllability verdicts; and point-cloud reachable-set approximations.
"""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    LieCtrlError,
    ModelError,
    NumericalError,
    PreconditionError,
    ResourceError,
    SpecError,
)
from .groups import (
    Aff2,
    Euclidean,
    GroupModel,
    Heisenberg,
    NilpotentStructConst,
    bch,
    bracket,
    exp,
    inv,
    log,
    mul,
)
from .spectral import (
    AutomorphismModel,
    SpectralSplit,
    closure_check,
    differential_at_identity,
    eigensplit,
    equivariance_check,
)
from .system import (
    ControlRange,
    LinearSystem,
    aff2_system,
    controllable_set_finite,
    euclidean_system,
    heisenberg_example_system,
    heisenberg_system,
    nilpotent_system,
    reachable_set_finite,
    reverse,
    step,
    trajectory,
    translation_identity_residual,
)
from .accessibility import (
    RankReport,
    ad_chain,
    aff2_accessible,
    gamma_rank,
    regular_pair_rank,
    x_minus,
    x_plus,
)
from .controllability import (
    ClassifyOptions,
    Verdict,
    aff2_controllable,
    classify,
    euclidean_check,
    reach_equals_group_test,
)
from .reach import (
    CloudConfig,
    PointCloud,
    coverage,
    duality_cloud_check,
    reach_cloud,
    read_cloud_csv,
    write_cloud_csv,
)
from .specfile import load_preset, load_spec, parse_spec, system_to_spec
