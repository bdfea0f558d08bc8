"""Access to the bundled fixtures: reference schema, suites, forms, pools."""

from __future__ import annotations

import json
from importlib import resources

from .fieldmap import ContextNode, FieldDescriptor, InputKind
from .schema import CanonicalSchema, load_schema


def _read(name: str) -> bytes:
    return resources.files("groundfill.fixtures").joinpath(name).read_bytes()


def reference_schema() -> CanonicalSchema:
    return load_schema(_read("reference_schema.json"))


def conditional_suite() -> list[dict]:
    return json.loads(_read("conditional_suite.json"))["cases"]


def mapping_fixture() -> list[dict]:
    return json.loads(_read("mapping_labeled.json"))["entries"]


def seed_name_pool() -> list[dict]:
    return json.loads(_read("seed_names.json"))["names"]


def school_pool() -> list[dict]:
    return json.loads(_read("schools.json"))["schools"]


def form_fixture(name: str) -> dict:
    return json.loads(_read(f"forms/{name}.json"))


def descriptor_from_dict(payload: dict) -> FieldDescriptor:
    ancestors = tuple(
        ContextNode(
            tag=node["tag"],
            id_attr=node.get("id_attr"),
            class_list=tuple(node.get("class_list", ())),
            heading_text=node.get("heading_text"),
        )
        for node in payload.get("ancestors", ())
    )
    return FieldDescriptor(
        element_id=payload.get("element_id"),
        name_attr=payload.get("name_attr"),
        label_text=payload.get("label_text"),
        placeholder=payload.get("placeholder"),
        aria_label=payload.get("aria_label"),
        nearby_text=tuple(payload.get("nearby_text", ())),
        input_kind=InputKind(payload.get("input_kind", "TextInput")),
        options=tuple(payload.get("options", ())),
        ancestors=ancestors,
    )
