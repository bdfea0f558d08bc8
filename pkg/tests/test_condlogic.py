"""Dependency graph construction and visibility evaluation."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groundfill import condlogic
from groundfill.condlogic import (
    CycleError,
    FormState,
    UnknownField,
    Visibility,
    build_dependency_graph,
    evaluate_visibility,
    on_field_change,
)
from groundfill.evalharness import run_conditional_suite
from groundfill.schema import ConditionRule, Effect, Predicate

from conftest import make_field, make_schema


def rule(controller, effect, values=("No",), predicate=Predicate.EQUALS):
    return ConditionRule(
        controller_id=controller,
        predicate=predicate,
        values=tuple(values),
        effect=effect,
    )


def citizenship_schema():
    return make_schema(
        make_field("citizenship", keywords=("citizenship",)),
        make_field("ssn", keywords=("ssn",), conditions=(rule("citizenship", Effect.HIDE),)),
        make_field(
            "visa_type",
            keywords=("visa",),
            conditions=(rule("citizenship", Effect.SHOW),),
        ),
    )


class TestBuildGraph:
    def test_no_conditions_gives_empty_edges(self):
        schema = make_schema(make_field("a", keywords=("a",)))
        graph = build_dependency_graph(schema)
        assert graph.edges == {}
        assert graph.topo_order == ["a"]

    def test_two_edges_from_one_controller(self):
        graph = build_dependency_graph(citizenship_schema())
        targets = {dep for dep, _ in graph.edges["citizenship"]}
        assert targets == {"ssn", "visa_type"}

    def test_two_cycle_raises(self):
        schema = make_schema(
            make_field("a", keywords=("a",), conditions=(rule("b", Effect.SHOW, ("Yes",)),)),
            make_field("b", keywords=("b",), conditions=(rule("a", Effect.SHOW, ("Yes",)),)),
        )
        with pytest.raises(CycleError) as err:
            build_dependency_graph(schema)
        assert set(err.value.cycle) >= {"a", "b"}

    def test_topo_order_respects_edges(self):
        schema = citizenship_schema()
        graph = build_dependency_graph(schema)
        order = {fid: i for i, fid in enumerate(graph.topo_order)}
        assert order["citizenship"] < order["ssn"]
        assert order["citizenship"] < order["visa_type"]


class TestEvaluateVisibility:
    def test_citizenship_no(self):
        schema = citizenship_schema()
        graph = build_dependency_graph(schema)
        state = evaluate_visibility(
            graph, FormState(values={"citizenship": "No"}), schema
        )
        assert state.visibility["ssn"] is Visibility.HIDDEN
        assert state.visibility["visa_type"] is Visibility.VISIBLE

    def test_defaults_with_no_values(self):
        schema = citizenship_schema()
        graph = build_dependency_graph(schema)
        state = evaluate_visibility(graph, FormState(), schema)
        assert state.visibility["citizenship"] is Visibility.VISIBLE
        assert state.visibility["ssn"] is Visibility.VISIBLE
        assert state.visibility["visa_type"] is Visibility.HIDDEN

    def test_chained_rehide_truth_table(self):
        schema = make_schema(
            make_field("dual_enrollment", keywords=("dual",)),
            make_field(
                "course_section",
                keywords=("section",),
                conditions=(rule("dual_enrollment", Effect.SHOW, ("Yes",)),),
            ),
        )
        graph = build_dependency_graph(schema)
        # Enumerated truth table: value -> expected course_section visibility.
        table = {
            None: Visibility.HIDDEN,
            "Yes": Visibility.VISIBLE,
            "No": Visibility.HIDDEN,
            "": Visibility.HIDDEN,
        }
        for value, expected in table.items():
            values = {} if value is None else {"dual_enrollment": value}
            state = evaluate_visibility(graph, FormState(values=values), schema)
            assert state.visibility["course_section"] is expected, value

    def test_idempotent(self):
        schema = citizenship_schema()
        graph = build_dependency_graph(schema)
        once = evaluate_visibility(graph, FormState(values={"citizenship": "No"}), schema)
        twice = evaluate_visibility(graph, once, schema)
        assert once.visibility == twice.visibility
        assert once.required == twice.required


class TestOnFieldChange:
    def test_no_dependents_empty_delta(self):
        schema = citizenship_schema()
        graph = build_dependency_graph(schema)
        state = evaluate_visibility(graph, FormState(), schema)
        delta = on_field_change(graph, state, "ssn", "123", schema)
        assert delta.is_empty()

    def test_citizenship_flip_delta(self):
        schema = citizenship_schema()
        graph = build_dependency_graph(schema)
        state = evaluate_visibility(graph, FormState(values={"citizenship": "Yes"}), schema)
        delta = on_field_change(graph, state, "citizenship", "No", schema)
        assert delta.visibility == {
            "ssn": Visibility.HIDDEN,
            "visa_type": Visibility.VISIBLE,
        }

    def test_same_value_empty_delta(self):
        schema = citizenship_schema()
        graph = build_dependency_graph(schema)
        state = evaluate_visibility(graph, FormState(values={"citizenship": "No"}), schema)
        delta = on_field_change(graph, state, "citizenship", "No", schema)
        assert delta.is_empty()

    def test_unknown_field_raises(self):
        schema = citizenship_schema()
        graph = build_dependency_graph(schema)
        state = evaluate_visibility(graph, FormState(), schema)
        with pytest.raises(UnknownField):
            on_field_change(graph, state, "nope", "x", schema)


def random_case(rng: random.Random):
    """Random acyclic schema (<=15 fields, <=10 rules) plus an edit script."""
    n_fields = rng.randint(2, 15)
    ids = [f"f{i:02d}" for i in range(n_fields)]
    fields = []
    n_rules = rng.randint(0, 10)
    rules_by_field: dict[str, list] = {fid: [] for fid in ids}
    for _ in range(n_rules):
        # Controller index strictly below dependent index keeps it acyclic.
        dep_i = rng.randrange(1, n_fields)
        ctrl_i = rng.randrange(0, dep_i)
        effect = rng.choice([Effect.SHOW, Effect.HIDE, Effect.REQUIRE])
        predicate = rng.choice([Predicate.EQUALS, Predicate.NOT_EQUALS, Predicate.IN])
        values = ("Yes",) if predicate is not Predicate.IN else ("Yes", "Maybe")
        rules_by_field[ids[dep_i]].append(
            ConditionRule(
                controller_id=ids[ctrl_i],
                predicate=predicate,
                values=values,
                effect=effect,
            )
        )
    for fid in ids:
        fields.append(
            make_field(fid, keywords=(fid,), conditions=tuple(rules_by_field[fid]))
        )
    schema = make_schema(*fields)
    edits = [
        (rng.choice(ids), rng.choice(["Yes", "No", "Maybe", ""]))
        for _ in range(rng.randint(0, 12))
    ]
    return schema, edits


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=150, deadline=None)
def test_incremental_equals_full_reevaluation(seed):
    rng = random.Random(seed)
    schema, edits = random_case(rng)
    graph = build_dependency_graph(schema)
    state = evaluate_visibility(graph, FormState(), schema)
    values: dict[str, str] = {}
    for fid, value in edits:
        delta = on_field_change(graph, state, fid, value, schema)
        state = delta.state
        values[fid] = value
        scratch = evaluate_visibility(graph, FormState(values=dict(values)), schema)
        assert state.visibility == scratch.visibility
        assert state.required == scratch.required


class TestBundledSuite:
    def test_twenty_cases_all_pass(self):
        outcome = run_conditional_suite()
        assert outcome.total == 20
        assert outcome.passed == 20, outcome.failures


class TestReferenceSchemaGraph:
    def test_reference_schema_builds_without_dangling_nodes(self, reference_schema):
        graph = build_dependency_graph(reference_schema)
        assert set(graph.topo_order) == set(reference_schema.fields)
        for controller, edges in graph.edges.items():
            assert controller in reference_schema.fields
            for dependent, _rule in edges:
                assert dependent in reference_schema.fields
