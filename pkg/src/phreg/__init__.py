"""phreg: topology-aware regularizers for regression representation learning.

The package turns 0-dimensional persistent homology (computed as Euclidean
minimum spanning trees) into differentiable losses that pull a learned
feature space toward the intrinsic dimension and topology of its regression
target space, plus the estimators and the experiment harness around them.
"""

from .datasets import (
    EncodedDataset,
    SplitIndices,
    SyntheticSpec,
    encode,
    generate_dataset,
    sample_shape,
    split,
)
from .errors import (
    DegenerateInputError,
    DegenerateTargetError,
    IngestionError,
    InvalidInputError,
)
from .geometry import (
    DistanceMatrix,
    PointCloud,
    load_cloud_csv,
    pairwise_distances,
    save_cloud_csv,
    subsample,
)
from .harness import (
    DataBundle,
    ExperimentConfig,
    MetricsReport,
    dump_embeddings,
    measure_epoch_overhead,
    run_experiment,
    track_id,
    train_one_seed,
)
from .id_estimation import (
    IdEstimate,
    SubsetSchedule,
    default_schedule,
    ls_slope,
    ph_dim_birdal,
    twonn,
)
from .nn import (
    AdamWState,
    ForwardTrace,
    MlpModel,
    adamw_step,
    backward,
    forward,
    init_model,
    load_model,
    mse_loss,
    save_model,
)
from .regularizers import (
    BatchPair,
    RegularizerOutput,
    combined_loss,
    loss_ld,
    loss_ld_prime,
    loss_lt,
    make_batch_pair,
    training_schedule,
)
from .tda import MstEdge, MstResult, mst, ph0, total_persistence

__version__ = "0.1.0"
