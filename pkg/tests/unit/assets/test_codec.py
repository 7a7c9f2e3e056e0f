"""Unit tests for descriptor documents."""
import json

import pytest

from agora.assets import (
    dump_descriptors,
    iter_descriptors,
    parse_descriptor,
    serialize_descriptor,
)
from agora.errors import DocumentSyntaxError, SchemaError
from agora.models import NoOverlay, RevenueShareTree
from tests.factories import DataSourceFactory, DescriptorFactory


class TestDescriptorCodec:
    """Tests for parsing and serializing descriptor documents."""

    def test_serialized_form_is_canonical_json(self):
        """Test sorted keys, compact separators and money as micro-units."""
        descriptor = DataSourceFactory(id="listings", name="listings", provider="open-data")
        raw = serialize_descriptor(descriptor).decode("utf-8")
        assert json.loads(raw)["pricing"] == {"model": "pay_once", "price": 5_000_000}
        assert ", " not in raw and ": " not in raw

    def test_parse_restores_equal_descriptor(self):
        tree = RevenueShareTree(
            beneficiary="root",
            children=(
                RevenueShareTree(beneficiary="a", share="1/3"),
                RevenueShareTree(beneficiary="b", share="2/3"),
            ),
        )
        original = DescriptorFactory(usage_constraints=(NoOverlay(),), revenue_share=tree)
        assert parse_descriptor(serialize_descriptor(original)) == original

    def test_syntax_error_carries_position(self):
        with pytest.raises(DocumentSyntaxError) as excinfo:
            parse_descriptor('{"id": ')
        assert excinfo.value.position == 7

    def test_invalid_utf8_is_a_syntax_error(self):
        with pytest.raises(DocumentSyntaxError):
            parse_descriptor(b'{"id": "\xff"}')

    def test_schema_error_names_the_field(self):
        """Test that schema violations report a dotted field path."""
        document = json.loads(serialize_descriptor(DescriptorFactory()))
        document["pricing"] = {"model": "pay_once", "price": "five"}
        with pytest.raises(SchemaError) as excinfo:
            parse_descriptor(json.dumps(document))
        assert excinfo.value.field.startswith("pricing")

    def test_unknown_fields_are_rejected(self):
        document = json.loads(serialize_descriptor(DescriptorFactory()))
        document["colour"] = "blue"
        with pytest.raises(SchemaError) as excinfo:
            parse_descriptor(json.dumps(document))
        assert excinfo.value.field == "colour"

    def test_non_object_document(self):
        with pytest.raises(SchemaError):
            parse_descriptor("[1, 2]")

    def test_newline_delimited_stream_skips_blank_lines(self):
        first, second = DescriptorFactory(), DataSourceFactory()
        blob = dump_descriptors([first, second]) + b"\n  \n"
        assert list(iter_descriptors(blob.splitlines())) == [first, second]
