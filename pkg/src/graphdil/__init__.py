"""Domain-incremental graph learning.

A frozen graph-convolution backbone plus one low-rank adapter per domain
keeps every learned domain's embeddings fixed forever; a recursively
updated ridge classifier absorbs each new domain without touching (or
needing) old data; and test graphs of unknown origin are routed to the
right adapter by nearest-prototype matching in a random high-dimensional
projection.  The harness runs incremental sequences and reports the
accuracy matrix with Average Accuracy / Average Forgetting.
"""

from .adapters import AdapterRegistry, AdapterTrainConfig, LoraAdapter, init_adapter, train_adapter
from .backbone import (
    BackboneParams,
    PretrainConfig,
    Tape,
    backward,
    forward,
    pretrain_link_prediction,
)
from .clustering import Prototype, PrototypeSet, auto_eps, dbscan, extract_prototypes
from .config import RunConfig, load_config, parse_config
from .container import read_matrix, write_matrix
from .datasets import load_dataset, save_dataset
from .discrimination import (
    DomainPrototype,
    ProjectionParams,
    discriminate,
    domain_prototype,
    init_projection,
    random_projection,
)
from .errors import ConfigError, DataError, GraphDilError, NumericalError
from .graphs import (
    DomainTask,
    FeatureAligner,
    Graph,
    align_features,
    augment,
    fit_aligner,
    induced_subgraph,
    normalized_adjacency,
    synth_domain_suite,
)
from .harness import (
    AccuracyMatrix,
    InferenceResult,
    RunArtifacts,
    RunReport,
    embed,
    infer,
    load_checkpoint,
    load_run_tasks,
    metrics,
    run_sequence,
    save_checkpoint,
)
from .numerics import SvdResult, ridge_solve_batch, rng, softmax_rows, spd_solve, truncated_svd
from .objectives import LossReport, inter_loss, intra_loss, total_loss
from .ridge import (
    ClassBlock,
    RidgeState,
    batch_oracle,
    init_state,
    one_hot,
    predict,
    update_state,
)

__version__ = "0.1.0"
