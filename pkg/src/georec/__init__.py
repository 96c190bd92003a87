"""Geographic context recommendations over user/item/location triples."""

from .clustering import NOISE, Clustering, dbscan
from .data import Dataset, EventRecord, GeoContext, ingest
from .engine import Engine
from .errors import ConfigError, DataError, GeorecError
from .evaluation import EvalReport, Scenario, make_splits, run_experiment
from .geo import BoundingBox, Coordinate, haversine_km
from .graph import NodeRef, RelationalGraph, build_graph
from .partonomy import Partonomy
from .recommend import RecommendationList, recommend, score_all
from .synth import SynthConfig, synth_dataset
from .units import UnitIndex
from .weighting import SCHEMES, build_scheme

__version__ = "0.1.0"

__all__ = [
    "NOISE",
    "Clustering",
    "dbscan",
    "Dataset",
    "EventRecord",
    "GeoContext",
    "ingest",
    "Engine",
    "ConfigError",
    "DataError",
    "GeorecError",
    "EvalReport",
    "Scenario",
    "make_splits",
    "run_experiment",
    "BoundingBox",
    "Coordinate",
    "haversine_km",
    "NodeRef",
    "RelationalGraph",
    "build_graph",
    "Partonomy",
    "RecommendationList",
    "recommend",
    "score_all",
    "SynthConfig",
    "synth_dataset",
    "UnitIndex",
    "SCHEMES",
    "build_scheme",
    "__version__",
]
