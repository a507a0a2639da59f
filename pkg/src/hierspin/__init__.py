"""Free-energy bounds for hierarchical spin models.

Exact and bounding computations for Dyson's hierarchical ferromagnet (DHM)
and the hierarchical Edwards-Anderson spin glass (HEA).
"""

from .bounds import BoundResult, beta_critical, detect_transition, maximize_bound, phi_mf, phi_nmf
from .dhm import (
    MagnetizationLogWeights,
    dhm_free_energy,
    init_single_spin,
    level_up,
    magnetization_distribution,
)
from .errors import DepthCapError, DivergentSeriesError, ParameterError, QuadratureError
from .hea import (
    HEAInstance,
    QuenchedEstimate,
    ancestor_level,
    instance_free_energy,
    quenched_free_energy,
    read_instance,
    sample_instance,
    write_instance,
)
from .params import INF, FieldSpec, ModelParams, coupling_sum_c1, coupling_sum_c2, validate
from .rsb import ParisiParams, QuadratureSpec, annealed_bound, optimize_parisi, parisi_log_z0, rsb_bound
from .verify import CheckReport, check_dhm, check_hea

__version__ = "0.1.0"
