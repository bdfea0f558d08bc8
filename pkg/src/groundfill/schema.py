"""Canonical form schema: types, strict JSON loading, and value validation.

The schema is the universal ontology every portal field gets mapped onto.
It is immutable after load and safe to share across threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Optional

from .textutil import normalize_text

_ID_SEGMENT_RE = re.compile(r"^[a-z0-9_]+$")


class SchemaError(Exception):
    """Base class for schema loading failures."""


class ParseError(SchemaError):
    """The document is not well-formed JSON / UTF-8."""


class ValidationError(SchemaError):
    """The document parses but violates a schema invariant."""

    def __init__(self, message: str, field_id: Optional[str] = None):
        self.field_id = field_id
        super().__init__(f"{field_id}: {message}" if field_id else message)


class DataType(str, Enum):
    TEXT = "Text"
    LONG_TEXT = "LongText"
    NUMBER = "Number"
    DATE = "Date"
    BOOLEAN = "Boolean"
    ENUM = "Enum"
    PHONE = "Phone"


class FormatKind(str, Enum):
    DATE_PATTERN = "DatePattern"
    NUMERIC_RANGE = "NumericRange"
    REGEX = "Regex"
    NONE = "None"


class Predicate(str, Enum):
    EQUALS = "Equals"
    NOT_EQUALS = "NotEquals"
    IN = "In"


class Effect(str, Enum):
    SHOW = "Show"
    HIDE = "Hide"
    REQUIRE = "Require"


# Default rendering/validation pattern for Date fields that carry no explicit one.
DEFAULT_DATE_PATTERN = "MM/DD/YYYY"


@dataclass(frozen=True)
class FormatRule:
    kind: FormatKind = FormatKind.NONE
    date_pattern: Optional[str] = None
    min_value: Optional[float] = None
    max_value: Optional[float] = None
    regex: Optional[str] = None

    def __post_init__(self):
        required = {
            FormatKind.DATE_PATTERN: ("date_pattern",),
            FormatKind.NUMERIC_RANGE: ("min_value", "max_value"),
            FormatKind.REGEX: ("regex",),
            FormatKind.NONE: (),
        }[self.kind]
        all_fields = ("date_pattern", "min_value", "max_value", "regex")
        for name in all_fields:
            value = getattr(self, name)
            if name in required and value is None:
                raise ValidationError(f"format kind {self.kind.value} requires {name}")
            if name not in required and value is not None:
                raise ValidationError(f"format kind {self.kind.value} forbids {name}")
        if self.kind is FormatKind.NUMERIC_RANGE and self.min_value > self.max_value:
            raise ValidationError("numeric range min exceeds max")


@dataclass(frozen=True)
class ConditionRule:
    controller_id: str
    predicate: Predicate
    values: tuple[str, ...]
    effect: Effect

    def __post_init__(self):
        if not self.values:
            raise ValidationError("condition values must be non-empty")
        if self.predicate in (Predicate.EQUALS, Predicate.NOT_EQUALS) and len(self.values) != 1:
            raise ValidationError(f"{self.predicate.value} takes exactly one value")


@dataclass(frozen=True)
class CanonicalField:
    id: str
    intent: str
    data_type: DataType
    keywords: tuple[str, ...]
    format: FormatRule = FormatRule()
    enum_options: tuple[str, ...] = ()
    conditions: tuple[ConditionRule, ...] = ()
    provenance_policy: tuple[str, ...] = ()
    char_limit: Optional[int] = None

    def __post_init__(self):
        segments = self.id.split(".")
        if not segments or any(not _ID_SEGMENT_RE.match(s) for s in segments):
            raise ValidationError(
                "id segments must be non-empty lowercase [a-z0-9_]", self.id
            )
        if not self.keywords:
            raise ValidationError("keywords must be non-empty", self.id)
        object.__setattr__(
            self, "keywords", tuple(normalize_text(k) for k in self.keywords)
        )
        if any(not k for k in self.keywords):
            raise ValidationError("keyword normalizes to empty string", self.id)
        if (self.data_type is DataType.ENUM) != bool(self.enum_options):
            raise ValidationError(
                "enum_options must be present iff data_type is Enum", self.id
            )
        if self.char_limit is not None and self.char_limit <= 0:
            raise ValidationError("char_limit must be positive", self.id)

    def normalized_keywords(self) -> list[str]:
        """Keywords lowercased and deduplicated, first-occurrence order."""
        seen: dict[str, None] = {}
        for k in self.keywords:
            seen.setdefault(k)
        return list(seen)


@dataclass(frozen=True)
class CanonicalSchema:
    version: str
    fields: dict[str, CanonicalField]

    def __post_init__(self):
        for fid, fld in self.fields.items():
            if fid != fld.id:
                raise ValidationError("field map key does not match field id", fid)
            for rule in fld.conditions:
                if rule.controller_id not in self.fields:
                    raise ValidationError(
                        f"condition controller {rule.controller_id!r} does not exist",
                        fid,
                    )
                if rule.controller_id == fid:
                    raise ValidationError("field conditions on itself", fid)


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    rule: Optional[str] = None
    message: Optional[str] = None


_SCHEMA_KEYS = {"version", "fields"}
_FIELD_KEYS = {
    "id",
    "intent",
    "data_type",
    "keywords",
    "format",
    "enum_options",
    "conditions",
    "provenance_policy",
    "char_limit",
}
_FORMAT_KEYS = {"kind", "date_pattern", "min", "max", "regex"}
_CONDITION_KEYS = {"controller_id", "predicate", "values", "effect"}


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(f"unknown keys in {where}: {sorted(unknown)}")


def _parse_format(obj: dict, fid: str) -> FormatRule:
    _reject_unknown(obj, _FORMAT_KEYS, f"format of {fid}")
    try:
        kind = FormatKind(obj.get("kind", "None"))
    except ValueError:
        raise ValidationError(f"unknown format kind {obj.get('kind')!r}", fid) from None
    return FormatRule(
        kind=kind,
        date_pattern=obj.get("date_pattern"),
        min_value=obj.get("min"),
        max_value=obj.get("max"),
        regex=obj.get("regex"),
    )


def _parse_condition(obj: dict, fid: str) -> ConditionRule:
    _reject_unknown(obj, _CONDITION_KEYS, f"condition of {fid}")
    try:
        predicate = Predicate(obj["predicate"])
        effect = Effect(obj["effect"])
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"bad condition rule: {exc}", fid) from None
    return ConditionRule(
        controller_id=obj.get("controller_id", ""),
        predicate=predicate,
        values=tuple(obj.get("values", ())),
        effect=effect,
    )


def load_schema(data: bytes | str) -> CanonicalSchema:
    """Parse and validate a schema document (strict: unknown keys rejected)."""
    try:
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(str(exc)) from exc
    if not isinstance(doc, dict):
        raise ParseError("schema document must be a JSON object")
    _reject_unknown(doc, _SCHEMA_KEYS, "schema")
    if not isinstance(doc.get("version"), str):
        raise ValidationError("version must be a string")
    entries = doc.get("fields")
    if not isinstance(entries, list):
        raise ValidationError("fields must be a list")

    fields: dict[str, CanonicalField] = {}
    for entry in entries:
        if not isinstance(entry, dict):
            raise ValidationError("field entry must be an object")
        _reject_unknown(entry, _FIELD_KEYS, f"field {entry.get('id')!r}")
        fid = entry.get("id")
        if not isinstance(fid, str):
            raise ValidationError("field id must be a string")
        if fid in fields:
            raise ValidationError("duplicate field id", fid)
        try:
            data_type = DataType(entry.get("data_type"))
        except ValueError:
            raise ValidationError(
                f"unknown data_type {entry.get('data_type')!r}", fid
            ) from None
        fields[fid] = CanonicalField(
            id=fid,
            intent=entry.get("intent", ""),
            data_type=data_type,
            keywords=tuple(entry.get("keywords", ())),
            format=_parse_format(entry.get("format", {}), fid),
            enum_options=tuple(entry.get("enum_options", ())),
            conditions=tuple(
                _parse_condition(c, fid) for c in entry.get("conditions", ())
            ),
            provenance_policy=tuple(entry.get("provenance_policy", ())),
            char_limit=entry.get("char_limit"),
        )
    return CanonicalSchema(version=doc["version"], fields=fields)


def serialize_schema(schema: CanonicalSchema) -> bytes:
    """Inverse of load_schema on valid schemas (round-trip identity)."""
    entries = []
    for fld in schema.fields.values():
        entry: dict = {
            "id": fld.id,
            "intent": fld.intent,
            "data_type": fld.data_type.value,
            "keywords": list(fld.keywords),
        }
        if fld.format.kind is not FormatKind.NONE:
            fmt: dict = {"kind": fld.format.kind.value}
            if fld.format.date_pattern is not None:
                fmt["date_pattern"] = fld.format.date_pattern
            if fld.format.min_value is not None:
                fmt["min"] = fld.format.min_value
            if fld.format.max_value is not None:
                fmt["max"] = fld.format.max_value
            if fld.format.regex is not None:
                fmt["regex"] = fld.format.regex
            entry["format"] = fmt
        if fld.enum_options:
            entry["enum_options"] = list(fld.enum_options)
        if fld.conditions:
            entry["conditions"] = [
                {
                    "controller_id": c.controller_id,
                    "predicate": c.predicate.value,
                    "values": list(c.values),
                    "effect": c.effect.value,
                }
                for c in fld.conditions
            ]
        if fld.provenance_policy:
            entry["provenance_policy"] = list(fld.provenance_policy)
        if fld.char_limit is not None:
            entry["char_limit"] = fld.char_limit
        entries.append(entry)
    doc = {"version": schema.version, "fields": entries}
    return json.dumps(doc, indent=2, sort_keys=False).encode("utf-8")


_NUMBER_RE = re.compile(r"^[-+]?\d+(\.\d+)?$")
_BOOLEAN_VALUES = {"yes", "no", "true", "false"}
_PHONE_ALLOWED_RE = re.compile(r"^[0-9+()\-. ]+$")


def _date_pattern_to_strptime(pattern: str) -> str:
    return pattern.replace("MM", "%m").replace("DD", "%d").replace("YYYY", "%Y")


def validate_value(fld: CanonicalField, value: str) -> ValidationReport:
    """Check one candidate value against a field's constraints.

    Deterministic and total over strings; the first violated rule is reported.
    Rules, in order: type shape, range, pattern, enum membership, char_limit.
    """

    def fail(rule: str, message: str) -> ValidationReport:
        return ValidationReport(False, rule, message)

    dt = fld.data_type
    if dt is DataType.NUMBER:
        if not _NUMBER_RE.match(value.strip()):
            return fail("type", f"{value!r} is not a number")
        number = float(value)
        if fld.format.kind is FormatKind.NUMERIC_RANGE and not (
            fld.format.min_value <= number <= fld.format.max_value
        ):
            return fail(
                "range",
                f"{number} outside [{fld.format.min_value}, {fld.format.max_value}]",
            )
    elif dt is DataType.DATE:
        pattern = (
            fld.format.date_pattern
            if fld.format.kind is FormatKind.DATE_PATTERN
            else DEFAULT_DATE_PATTERN
        )
        try:
            datetime.strptime(value.strip(), _date_pattern_to_strptime(pattern))
        except ValueError:
            return fail("type", f"{value!r} does not match {pattern}")
    elif dt is DataType.BOOLEAN:
        if value.strip().lower() not in _BOOLEAN_VALUES:
            return fail("type", f"{value!r} is not a yes/no value")
    elif dt is DataType.ENUM:
        options = {o.lower(): o for o in fld.enum_options}
        if value.strip().lower() not in options:
            return fail("enum", f"{value!r} is not an allowed option")
    elif dt is DataType.PHONE:
        stripped = value.strip()
        digits = sum(c.isdigit() for c in stripped)
        if not stripped or not _PHONE_ALLOWED_RE.match(stripped) or digits < 10:
            return fail("type", f"{value!r} is not a phone number")

    if fld.format.kind is FormatKind.REGEX and not re.fullmatch(
        fld.format.regex, value.strip()
    ):
        return fail("pattern", f"{value!r} does not match {fld.format.regex!r}")

    if (
        dt in (DataType.TEXT, DataType.LONG_TEXT)
        and fld.char_limit is not None
        and len(value) > fld.char_limit
    ):
        return fail("char_limit", f"length {len(value)} exceeds {fld.char_limit}")

    return ValidationReport(True)
