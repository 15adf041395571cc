"""Numerical laboratory for the quenched copolymer at a selective interface.

Submodules:

* :mod:`copolymer.model` — disorder laws, renewal step laws, parameters.
* :mod:`copolymer.partition` — exact log-domain partition functions and the
  brute-force enumeration oracle.
* :mod:`copolymer.estimators` — Monte Carlo disorder averages and exact
  contact statistics.
* :mod:`copolymer.bounds` — rigorous certificates bracketing h_c(lambda).
* :mod:`copolymer.paths` — exact trajectory sampling and path observables.
* :mod:`copolymer.experiments` — named experiments, config files, CSV output.
"""

from .bounds import (
    HcBracket,
    SigmaEvaluation,
    annealed_critical_curve,
    hbar,
    hc_bracket,
    rare_stretch_lower_bound,
    sigma_series,
    slope_bracket,
    strategy_a_restricted_log_z,
)
from .estimators import (
    ContactProfile,
    EstimateWithCI,
    contact_profile,
    estimate_fractional_moment,
    estimate_free_energy,
    estimate_mu,
    localization_certificate,
)
from .experiments import CriticalPointEstimate, ExperimentConfig, run_experiment
from .model import CopolymerParams, DisorderLaw, InterArrivalLaw, QuenchedSample
from .partition import (
    AnnealedTable,
    LogPartitionTable,
    brute_force_log_partition,
    build_annealed_table,
    build_partition_table,
    dump_table,
    free_log_z_at,
    load_table,
    window_log_partition,
)
from .paths import (
    PathTrajectory,
    correlation_probe,
    excursion_tail_statistics,
    no_water_probability,
    path_observables,
    sample_path,
    sample_paths,
)

__version__ = "0.1.0"
