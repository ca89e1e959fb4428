"""Ulam (finite-rank) approximations of transfer operators for interval maps
with neutral fixed points."""

from .interval_maps import (Branch, FamilyReport, IntervalMap, PreconditionError,
                            branch_preimage, counterexample_map, evaluate, identity_map,
                            load_map, map_from_json, mp_map, preimage_of_interval,
                            verify_family_T, verify_theorem4_conditions)
from .measures import (IntervalPair, StepMeasure, avg_density, check_key_inequality,
                       is_monotonic, measure_of_interval, project, pushforward,
                       random_monotonic)
from .partitions import Partition, quasi_uniform_partition, uniform_partition
from .stationary import (DiscreteSRB, StationaryResult, check_unique_ergodicity,
                         srb_from_pi, stationary_distribution, tail_mass)
from .ulam_operator import (FirstRowDiagnostics, UlamMatrix, apply, build_matrix,
                            first_row_diagnostics)

__all__ = [name for name in dir() if not name.startswith("_")]
