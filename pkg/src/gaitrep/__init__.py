"""Evolving behavioral repertoires of hexapod gaits with a transferability surrogate."""

from .baselines import TargetedSearch, TransferTargetedSearch, kmeans_targets
from .evolvers import NoveltyLocalCompetition, NoveltySearch, RepertoireEvolver
from .geometry import (
    RegionOfInterest,
    arc_length,
    desired_heading,
    heading_error,
    orientation_quality,
    wrap_angle,
)
from .io import RunConfig, load_config
from .repertoire import Archive, archive_update, evaluate_controller
from .simulator import (
    DEFAULT_REALITY_GAP,
    PerturbationProfile,
    RobotModel,
    SimOutcome,
    WorldParams,
    simulate,
    transferability_score,
)
from .surrogate import TransferabilityModel, TransferRecord, contact_descriptor

__version__ = "0.1.0"

__all__ = [
    "Archive",
    "DEFAULT_REALITY_GAP",
    "NoveltyLocalCompetition",
    "NoveltySearch",
    "PerturbationProfile",
    "RegionOfInterest",
    "RepertoireEvolver",
    "RobotModel",
    "RunConfig",
    "SimOutcome",
    "TargetedSearch",
    "TransferTargetedSearch",
    "TransferabilityModel",
    "TransferRecord",
    "WorldParams",
    "arc_length",
    "archive_update",
    "contact_descriptor",
    "desired_heading",
    "evaluate_controller",
    "heading_error",
    "kmeans_targets",
    "load_config",
    "orientation_quality",
    "simulate",
    "transferability_score",
    "wrap_angle",
    "__version__",
]
