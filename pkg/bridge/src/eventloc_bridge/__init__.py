"""Annotation bridge: raw text to the event-location corpus JSONL schema."""

__version__ = "0.1.0"

from .annotate import (annotate_documents, annotate_files, detect_verbs,
                       is_candidate_verb, merge_sidecar)
from .pipeline import Annotator, PipelineUnavailable

__all__ = ["annotate_documents", "annotate_files", "detect_verbs",
           "is_candidate_verb", "merge_sidecar", "Annotator",
           "PipelineUnavailable"]
