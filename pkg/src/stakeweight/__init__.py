"""Decentralization metrics and square-root stake weighting for validator sets."""

from .errors import (
    DuplicateAddressError,
    DuplicateIndexError,
    EmptySetError,
    FetchError,
    InvalidHorizonError,
    MalformedResponseError,
    NegativeStakeError,
    NetworkError,
    OutOfRangeError,
    PaginationError,
    SchemaError,
    StakeweightError,
    ValidatorIndexError,
)
from .ingest import ChainAdapter, fetch_validators, load_snapshot, parse_snapshot, write_snapshot
from .metrics import (
    MetricsReport,
    epsilon,
    full_report,
    gini,
    lorenz_points,
    nakamoto_liveness,
    nakamoto_safety,
    scale_nakamoto,
)
from .model import (
    Validator,
    ValidatorSnapshot,
    WeightedSet,
    WeightScheme,
    apply_weights,
    canonicalize,
    weigh_stakes,
)
from .report import ComparisonReport, ComparisonRow, compare
from .simulate import (
    ProposerHistogram,
    RewardTrajectory,
    compare_proposer_concentration,
    proposer_distribution,
    simulate_rewards,
)
from .srsw import (
    EconParams,
    QuorumThreshold,
    SplitVerdict,
    meets_quorum,
    quorum_threshold,
    reward,
    select_top_m,
    sybil_split_analysis,
)

__version__ = "0.1.0"
