"""Spreadness certificates for random subspaces and planted sparse vector recovery."""

__version__ = "0.1.0"

from .certifier import (  # noqa: E402
    SpreadCertificate,
    SpreadCertifier,
    certify_moment_norm,
    certify_spread,
    combine_quartic_bound,
    convert_spread_distortion,
    scan_subsets,
)
from .errors import DomainError, InvalidDimensionError, ResourceLimitError, WellSpreadError  # noqa: E402
from .randmodels import (  # noqa: E402
    NBRParams,
    PlantedInstance,
    compressibility_profile,
    sample_gaussian,
    sample_nbr,
    sample_planted,
)
from .recovery import (  # noqa: E402
    AscentParams,
    RecoveryResult,
    SparseVectorRecovery,
    ascend,
    evaluate_overlap,
    objective_and_grad,
    recover,
)

__all__ = [
    "AscentParams",
    "DomainError",
    "InvalidDimensionError",
    "NBRParams",
    "PlantedInstance",
    "RecoveryResult",
    "ResourceLimitError",
    "SparseVectorRecovery",
    "SpreadCertificate",
    "SpreadCertifier",
    "WellSpreadError",
    "__version__",
    "ascend",
    "certify_moment_norm",
    "certify_spread",
    "combine_quartic_bound",
    "compressibility_profile",
    "convert_spread_distortion",
    "evaluate_overlap",
    "objective_and_grad",
    "recover",
    "sample_gaussian",
    "sample_nbr",
    "sample_planted",
    "scan_subsets",
]
