"""Simulation of the Fed+ family of federated learning algorithms.

Parties minimise their own loss plus a proximal pull ``alpha * B(x_n, C(X))``
toward a central point ``C`` of all party models. Choosing ``C`` (mean,
geometric median, coordinate median), ``alpha`` and whether parties restart
from the centre each round recovers FedAvg, FedProx, RFA and coordinate-wise
median, and their personalised "+" variants.
"""

from .aggregators import CentralitySpec, aggregate, geometric_median_objective
from .engine import (
    PRESETS,
    FederationConfig,
    LogisticTask,
    QuadraticTask,
    RoundRecord,
    preset_config,
    run_federation,
    sample_parties,
)
from .errors import AggregationError, ConfigError, DataError, DimensionError, FedPlusError, NumericalError
from .local import AlphaSchedule, LocalSolveSpec, advance_alpha, convex_combination_step, local_solve
from .models import Batch, LogisticShape
from .params import DistanceSpec, axpy, distance, distance_grad
from .reporting import RunSummary, aggregation_change, summarize
from .synth import PowerLaw, SynthSpec, SyntheticTask, generate, sample_counts

__version__ = "0.1.0"
