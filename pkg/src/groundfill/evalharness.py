"""Evaluation harness: conditional suite runner, mapping accuracy, metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import condlogic, resources
from .answer import FillReport
from .fieldmap import MappingCache, MappingConfig, map_field
from .index import LexicalIndex
from .schema import CanonicalSchema, load_schema


@dataclass
class SuiteOutcome:
    passed: int
    total: int
    failures: list[str] = field(default_factory=list)


def run_conditional_suite(cases: list[dict] | None = None) -> SuiteOutcome:
    """Replay each case's edit script and compare final visibility/required.

    Each case is also cross-checked against a from-scratch evaluation so the
    incremental path can never drift from the full one.
    """
    cases = cases if cases is not None else resources.conditional_suite()
    outcome = SuiteOutcome(passed=0, total=len(cases))
    for case in cases:
        name = case["name"]
        try:
            schema = load_schema(json.dumps(case["schema"]))
            graph = condlogic.build_dependency_graph(schema)
            state = condlogic.evaluate_visibility(graph, condlogic.FormState(), schema)
            for fid, value in case["edits"]:
                delta = condlogic.on_field_change(graph, state, fid, value, schema)
                state = delta.state
            scratch = condlogic.evaluate_visibility(graph, state, schema)
            ok = True
            for fid, expected in case["expected_visibility"].items():
                if state.visibility[fid].value != expected:
                    ok = False
                    outcome.failures.append(f"{name}: {fid} visibility != {expected}")
            for fid, expected in case.get("expected_required", {}).items():
                if state.required[fid] != expected:
                    ok = False
                    outcome.failures.append(f"{name}: {fid} required != {expected}")
            if state.visibility != scratch.visibility or state.required != scratch.required:
                ok = False
                outcome.failures.append(f"{name}: incremental != full re-evaluation")
            if ok:
                outcome.passed += 1
        except Exception as exc:
            outcome.failures.append(f"{name}: {exc}")
    return outcome


def run_mapping_fixture(
    schema: CanonicalSchema | None = None,
    entries: list[dict] | None = None,
    cfg: MappingConfig = MappingConfig(),
) -> tuple[float, list[dict]]:
    """Accuracy of map_field against the labeled descriptor fixture."""
    schema = schema or resources.reference_schema()
    entries = entries if entries is not None else resources.mapping_fixture()
    cache = MappingCache()
    rows = []
    correct = 0
    for entry in entries:
        descriptor = resources.descriptor_from_dict(entry["descriptor"])
        result = map_field(descriptor, schema, cfg, cache)
        ok = (
            result.field_id == entry["expected_field_id"]
            and result.tier.value == entry["expected_tier"]
        )
        correct += ok
        rows.append(
            {
                "expected": entry["expected_field_id"],
                "actual": result.field_id,
                "expected_tier": entry["expected_tier"],
                "actual_tier": result.tier.value,
                "ok": ok,
            }
        )
    return (correct / len(entries) if entries else 1.0), rows


def fill_report_to_dict(report: FillReport, form_name: str = "") -> dict:
    rows = []
    for row in report.rows:
        rows.append(
            {
                "question": row.question,
                "field_id": row.field_id,
                "status": row.status,
                "value": row.value,
                "answer_text": row.answer_text,
                "citations": list(row.citations),
                "violations": list(row.violations),
            }
        )
    return {
        "form": form_name,
        "visible": report.visible,
        "filled": report.filled,
        "fill_rate": report.fill_rate,
        "no_visible_fields": report.no_visible_fields,
        "rows": rows,
    }


def compute_metrics(report: dict, idx: LexicalIndex) -> dict:
    """EvalReport metrics over a serialized fill report plus bundled suites."""
    rows = report["rows"]
    answered = [r for r in rows if r["status"] in ("Filled", "Violation")]
    non_refused = [r for r in rows if r["status"] not in ("Refused", "Hidden")]
    visible = [r for r in rows if r["status"] != "Hidden"]

    filled = [r for r in rows if r["status"] == "Filled"]
    fill_rate = len(filled) / len(visible) if visible else None

    with_citation = [r for r in answered if r["citations"]]
    citation_present_rate = len(with_citation) / len(answered) if answered else 1.0

    total_citations = 0
    valid_citations = 0
    for row in answered:
        answer = (row.get("answer_text") or "").strip()
        import re as _re

        plain = _re.sub(r"\s*\[\d+\]", "", answer).strip()
        for cid in row["citations"]:
            total_citations += 1
            chunk = idx.get(cid)
            if chunk is not None and chunk.source_url and plain and plain in chunk.text:
                valid_citations += 1
    citation_valid_rate = (
        valid_citations / total_citations if total_citations else 1.0
    )

    type_conformity_rate = len(filled) / len(answered) if answered else 1.0

    suite = run_conditional_suite()
    mapping_accuracy, _ = run_mapping_fixture()

    return {
        "fill_rate": fill_rate,
        "citation_present_rate": citation_present_rate,
        "citation_valid_rate": citation_valid_rate,
        "type_conformity_rate": type_conformity_rate,
        "conditional_suite": {"passed": suite.passed, "total": suite.total},
        "mapping_accuracy": mapping_accuracy,
        "per_question": [
            {"question": r["question"], "status": r["status"], "field_id": r["field_id"]}
            for r in rows
        ],
    }


DEFAULT_FLOORS = {
    "fill_rate": 0.80,
    "citation_present_rate": 0.95,
    "citation_valid_rate": 1.0,
}


def floors_violated(metrics: dict, floors: dict | None = None) -> list[str]:
    floors = {**DEFAULT_FLOORS, **(floors or {})}
    violated = []
    for key, floor in floors.items():
        value = metrics.get(key)
        if value is None or value < floor:
            violated.append(f"{key} {value} < {floor}")
    suite = metrics["conditional_suite"]
    if suite["passed"] != suite["total"]:
        violated.append(f"conditional_suite {suite['passed']}/{suite['total']}")
    return violated
