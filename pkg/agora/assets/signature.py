"""
Logical signatures
Two assets are equivalence candidates iff their canonical signatures are
byte-identical.
"""

import json
from typing import Any, Dict

from agora.models.assets import AssetDescriptor, LogicalSignature, Schema, TypeRef


def _type_document(ref: TypeRef) -> Dict[str, Any]:
    if isinstance(ref, Schema):
        return {"columns": [[c.name, c.type.value] for c in ref.columns]}
    return {"category": ref.strip().lower()}


def canonical_signature(signature: LogicalSignature) -> bytes:
    document = {
        "goal": signature.goal.strip().lower(),
        "inputs": [_type_document(t) for t in signature.input_types],
        "output": _type_document(signature.output_type),
    }
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode(
        "ascii"
    )


def logical_signature(descriptor: AssetDescriptor) -> bytes:
    """Canonical bytes of goal plus input/output types; pure and order-independent."""
    return canonical_signature(descriptor.signature)


def same_type(a: TypeRef, b: TypeRef) -> bool:
    return _type_document(a) == _type_document(b)
