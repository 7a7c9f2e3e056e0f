"""Asset-model operations: validation, composition, signatures, documents."""

from .codec import (
    dump_descriptors,
    iter_descriptors,
    parse_descriptor,
    parse_document,
    read_documents,
    serialize_descriptor,
)
from .composition import compose_pipeline
from .signature import canonical_signature, logical_signature
from .validation import ValidationReport, Violation, share_tree_problems, validate_descriptor

__all__ = [
    "ValidationReport",
    "Violation",
    "canonical_signature",
    "compose_pipeline",
    "dump_descriptors",
    "iter_descriptors",
    "logical_signature",
    "parse_descriptor",
    "parse_document",
    "read_documents",
    "serialize_descriptor",
    "share_tree_problems",
    "validate_descriptor",
]
