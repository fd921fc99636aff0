"""Interactive multivariate analysis of timestamped event sequences.

Core pieces: a typed dataset model, CSV ingestion with quality reporting,
user-driven transformations (substitution/aggregation, anchor alignment,
sorting), EventBox summaries (quartiles, Tukey outliers, histograms,
breakdown), a selection query language, an automatic statistical report, a
session HTTP service, and a batch CLI.
"""

from .eventbox import (
    EventBox,
    EventBoxConfig,
    FiveNumberSummary,
    breakdown,
    build_eventbox,
    density_grid,
    merge,
    quartiles,
    tukey_partition,
)
from .grouping import ClusterAssignment, cluster, signature_distance, unique_sequences
from .ingest import ColumnMap, IngestConfig, QualityReport, export_csv, infer_schema, load_dataset
from .model import (
    AttributeSchema,
    AttributeSpec,
    Dataset,
    EventOccurrence,
    SelectionSet,
    Sequence,
    resolve_attribute,
    selection_combine,
)
from .query import evaluate_query, format_query, parse_query
from .special import special_cdf
from .stats import ReportConfig, anova, contingency, generate_report, mean_comparison
from .synthetic import PlantedEffect, SyntheticConfig, generate_synthetic
from .transforms import GAP, AlignedView, AnchorSpec, MergePolicy, align, sort_by_event, substitute_aggregate

__version__ = "0.1.0"

__all__ = [
    "AlignedView",
    "AnchorSpec",
    "AttributeSchema",
    "AttributeSpec",
    "ClusterAssignment",
    "ColumnMap",
    "Dataset",
    "EventBox",
    "EventBoxConfig",
    "EventOccurrence",
    "FiveNumberSummary",
    "GAP",
    "IngestConfig",
    "MergePolicy",
    "PlantedEffect",
    "QualityReport",
    "ReportConfig",
    "SelectionSet",
    "Sequence",
    "SyntheticConfig",
    "align",
    "anova",
    "breakdown",
    "build_eventbox",
    "cluster",
    "contingency",
    "density_grid",
    "evaluate_query",
    "export_csv",
    "format_query",
    "generate_report",
    "generate_synthetic",
    "infer_schema",
    "load_dataset",
    "mean_comparison",
    "merge",
    "parse_query",
    "quartiles",
    "resolve_attribute",
    "selection_combine",
    "signature_distance",
    "sort_by_event",
    "special_cdf",
    "substitute_aggregate",
    "tukey_partition",
    "unique_sequences",
]
