"""View-invariant action comparison from 2D body-joint tracks with learned
per-action body-point weights."""
from .alignment import (Alignment, ErrorScoreMatrix, align, align_sequences, cost_matrix, error_score_matrix,
                        triplet_significance_report)
from .body import BodyModel, TripletId, enumerate_triplets
from .geometry import (EigenPairScore, TransitionErrorVector, affinity_from_triplet, homology_score,
                       transition_similarity)
from .learning import QuadraticObjective, TrainingSet, build_objective, optimize_weights
from .recognition import ConfusionMatrix, ReferenceDatabase, classify, evaluate
from .sequence import JointSequence, Pose2D, transitions_of
from .weighting import (AffineScoreCoefficients, TripletWeights, WeightVector, affine_coefficients,
                        sequence_similarity, triplet_weights, weighted_transition_error)

__version__ = "0.1.0"

__all__ = [
    "Alignment", "AffineScoreCoefficients", "BodyModel", "ConfusionMatrix", "EigenPairScore",
    "ErrorScoreMatrix", "JointSequence", "Pose2D", "QuadraticObjective", "ReferenceDatabase",
    "TrainingSet", "TransitionErrorVector", "TripletId", "TripletWeights", "WeightVector",
    "affine_coefficients", "affinity_from_triplet", "align", "align_sequences", "build_objective",
    "classify", "cost_matrix", "enumerate_triplets", "error_score_matrix", "evaluate", "homology_score",
    "optimize_weights", "sequence_similarity", "transition_similarity", "transitions_of",
    "triplet_significance_report", "triplet_weights", "weighted_transition_error",
]
