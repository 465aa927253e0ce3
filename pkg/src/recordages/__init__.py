"""Exact, asymptotic and simulated statistics of record ages in random walks."""

__version__ = "0.1.0"

from .ages import AgeRecord, ages_from_records, kth_largest, rank_of_last
from .errors import DivergenceError, QuadratureError, RecordAgesError, ResourceLimitError

__all__ = [
    "__version__",
    "AgeRecord",
    "ages_from_records",
    "kth_largest",
    "rank_of_last",
    "RecordAgesError",
    "DivergenceError",
    "ResourceLimitError",
    "QuadratureError",
]
