"""Code clone detection with a transformer pair classifier and an
execution-output similarity feature fused into the classification head."""

from ._core import (
    compare_table,
    compute_metrics,
    extract_dataflow,
    gradient_check,
    ingest,
    ingest_to_file,
    lex,
    output_similarity,
    run_experiment_json,
)

__all__ = [
    "compare_table",
    "compute_metrics",
    "extract_dataflow",
    "gradient_check",
    "ingest",
    "ingest_to_file",
    "lex",
    "output_similarity",
    "run_experiment_json",
]
