"""Geometry engineering for supervised-contrastive learning with fixed prototypes.

Free unit-norm embeddings (the unconstrained-features model) are trained
against a batch augmented with copies of fixed class prototypes, and the
geometry of the learned class means is compared with the prototype Gram
matrix.
"""

from .analysis import MetricsRecord, alignment, class_means, geometry_delta, mean_gram, within_class_spread
from .config import RunConfig, Schedule, load_config, parse_config
from .data import BatchPlan, EmbeddingSet, LabelDistribution, init_embeddings, sample_batches, step_imbalance
from .errors import ProtoGeomError
from .geometry import (
    GeometrySpec,
    PrototypeSet,
    convergence_delta,
    gram,
    make_etf,
    make_from_gram,
    make_majority_collapse,
    make_minority_angle,
)
from .loss import LossParams, LossReport, grad_check, limit_gap, limit_loss, scl_augmented_loss, scl_loss
from .optim import TrainState, project_and_step, run

__version__ = "0.1.0"
