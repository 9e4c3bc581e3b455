"""Notification-set optimization for non-exclusive ride dispatch.

Riders broadcast to sets of drivers; each driver accepts independently and
contention is resolved either by a uniformly random acceptor (FA) or by the
best-scoring acceptor (BA).  The package evaluates these valuations exactly,
optimizes disjoint notification sets across riders and benchmarks the result.
"""

from .ba_multi import (
    CgConfig,
    HeterogeneousProbabilities,
    ba_config_lp_bound,
    ba_continuous_greedy,
    ba_demand_oracle,
    ba_greedy,
    ba_homogeneous_solve,
)
from .baselines import BudgetExceeded, OracleBudget, ed_solve, fa_greedy, opt_bruteforce
from .bench import bench_run, histogram_export
from .core import (
    Assignment,
    Instance,
    InstanceError,
    InstanceFormatError,
    Solution,
    ThreePartitionSpec,
    gen_hardness,
    gen_uniform,
    read_assignment,
    read_instance,
    validate,
    write_assignment,
    write_instance,
)
from .fa_multi import (
    FaMultiConfig,
    FractionalSolution,
    demand_oracle_mnl,
    fa_multi_solve,
    mnl_knapsack_fptas,
    round_and_prune,
    solve_config_lp,
)
from .fa_single import PtasConfig, brute_single, prune, ptas_select
from .optlib import LinearProgram, LpSolution, lp_solve, max_weight_matching
from .valuation import (
    DriverView,
    ValuationKind,
    ba_value,
    closure_value,
    fa_threshold,
    fa_value,
    mnl_value,
    simulate,
    value,
    welfare,
)

__version__ = "0.1.0"
