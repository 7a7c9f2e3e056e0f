"""
Descriptor documents
UTF-8 JSON, snake_case keys, money as integer micro-units.
"""

import json
from typing import Iterable, Iterator, List, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from agora.errors import DocumentSyntaxError, SchemaError
from agora.models.assets import AssetDescriptor


def schema_error(exc: ValidationError) -> SchemaError:
    """First pydantic error as a SchemaError naming the dotted field path."""
    first = exc.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or "$"
    return SchemaError(field, first["msg"])


Model = TypeVar("Model", bound=BaseModel)


def parse_descriptor(document: Union[bytes, str]) -> AssetDescriptor:
    return parse_document(document, AssetDescriptor)


def serialize_descriptor(descriptor: AssetDescriptor) -> bytes:
    document = descriptor.model_dump(mode="json")
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def iter_descriptors(lines: Iterable[Union[bytes, str]]) -> Iterator[AssetDescriptor]:
    """Parse newline-delimited descriptor documents, skipping blank lines."""
    for line in lines:
        if line.strip():
            yield parse_descriptor(line)


def dump_descriptors(descriptors: Iterable[AssetDescriptor]) -> bytes:
    return b"".join(serialize_descriptor(d) + b"\n" for d in descriptors)


def parse_document(document: Union[bytes, str], model: Type[Model]) -> Model:
    """Any document type through the same syntax and schema error mapping."""
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentSyntaxError(exc.start, "invalid UTF-8") from exc
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.pos, exc.msg) from exc
    if not isinstance(raw, dict):
        raise SchemaError("$", f"{model.__name__} must be a JSON object")
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        raise schema_error(exc) from exc


def read_documents(path: str, model: Type[Model]) -> List[Model]:
    """Newline-delimited documents of one type from a file."""
    with open(path, "rb") as handle:
        return [parse_document(line, model) for line in handle if line.strip()]
