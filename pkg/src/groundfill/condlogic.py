"""Conditional-visibility engine: dependency graph over schema condition rules.

Conflict policy is fail-closed: Hide beats Show beats defaults, fields gated
only by Show rules stay Hidden until a rule fires, and a Hidden controller
contributes no value (its stored value is retained but inert).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .schema import CanonicalSchema, ConditionRule, Effect, Predicate


class CycleError(Exception):
    """The condition rules form a cycle; carries one cycle's field ids."""

    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__(f"condition cycle: {' -> '.join(cycle)}")


class UnknownField(Exception):
    pass


class Visibility(str, Enum):
    VISIBLE = "Visible"
    HIDDEN = "Hidden"


@dataclass(frozen=True)
class DepGraph:
    edges: dict[str, list[tuple[str, ConditionRule]]]
    topo_order: list[str]


@dataclass
class FormState:
    values: dict[str, str] = field(default_factory=dict)
    visibility: dict[str, Visibility] = field(default_factory=dict)
    required: dict[str, bool] = field(default_factory=dict)


@dataclass(frozen=True)
class VisibilityDelta:
    """Fields whose visibility or required flag changed, with new values."""

    visibility: dict[str, Visibility]
    required: dict[str, bool]
    state: FormState

    def is_empty(self) -> bool:
        return not self.visibility and not self.required


def build_dependency_graph(schema: CanonicalSchema) -> DepGraph:
    """One edge per ConditionRule, controller -> dependent; cycles rejected."""
    edges: dict[str, list[tuple[str, ConditionRule]]] = {}
    dependents: dict[str, set[str]] = {fid: set() for fid in schema.fields}
    for fid, fld in schema.fields.items():
        for rule in fld.conditions:
            edges.setdefault(rule.controller_id, []).append((fid, rule))
            dependents[rule.controller_id].add(fid)

    # Kahn's algorithm; deterministic order via sorted ready set.
    indegree = {fid: 0 for fid in schema.fields}
    for controller, deps in dependents.items():
        for dep in deps:
            indegree[dep] += 1
    ready = sorted(fid for fid, deg in indegree.items() if deg == 0)
    order: list[str] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        inserted = []
        for dep in dependents.get(node, ()):
            indegree[dep] -= 1
            if indegree[dep] == 0:
                inserted.append(dep)
        if inserted:
            ready = sorted(ready + inserted)
    if len(order) != len(schema.fields):
        raise CycleError(_find_cycle(dependents, set(schema.fields) - set(order)))
    return DepGraph(edges=edges, topo_order=order)


def _find_cycle(dependents: dict[str, set[str]], remaining: set[str]) -> list[str]:
    start = sorted(remaining)[0]
    path, seen = [start], {start}
    node = start
    while True:
        node = sorted(d for d in dependents.get(node, ()) if d in remaining)[0]
        if node in seen:
            return path[path.index(node):] + [node]
        path.append(node)
        seen.add(node)


def _rule_fires(rule: ConditionRule, controller_value: Optional[str]) -> bool:
    if controller_value is None or controller_value == "":
        return False
    if rule.predicate is Predicate.EQUALS:
        return controller_value == rule.values[0]
    if rule.predicate is Predicate.NOT_EQUALS:
        return controller_value != rule.values[0]
    return controller_value in rule.values


def evaluate_visibility(
    g: DepGraph, state: FormState, schema: CanonicalSchema
) -> FormState:
    """Recompute all visibility/required flags from the stored values.

    Idempotent; processes fields in topological order so a controller's
    effective value (absent when the controller is Hidden) is known before
    its dependents are decided.
    """
    visibility: dict[str, Visibility] = {}
    required: dict[str, bool] = {}

    def effective_value(fid: str) -> Optional[str]:
        if visibility.get(fid, Visibility.VISIBLE) is Visibility.HIDDEN:
            return None
        return state.values.get(fid)

    for fid in g.topo_order:
        rules = schema.fields[fid].conditions
        fired = {
            rule: _rule_fires(rule, effective_value(rule.controller_id))
            for rule in rules
        }
        show_rules = [r for r in rules if r.effect is Effect.SHOW]
        hide_fired = any(fired[r] for r in rules if r.effect is Effect.HIDE)
        if hide_fired:
            vis = Visibility.HIDDEN
        elif show_rules:
            vis = (
                Visibility.VISIBLE
                if any(fired[r] for r in show_rules)
                else Visibility.HIDDEN
            )
        else:
            vis = Visibility.VISIBLE
        visibility[fid] = vis
        required[fid] = vis is Visibility.VISIBLE and any(
            fired[r] for r in rules if r.effect is Effect.REQUIRE
        )

    return FormState(values=dict(state.values), visibility=visibility, required=required)


def on_field_change(
    g: DepGraph,
    state: FormState,
    field_id: str,
    new_value: str,
    schema: CanonicalSchema,
) -> VisibilityDelta:
    """Apply one edit and report exactly the fields whose flags changed.

    ``state`` must be an evaluated FormState (e.g. from evaluate_visibility);
    the result equals a full re-evaluation after the edit.
    """
    if field_id not in schema.fields:
        raise UnknownField(field_id)
    before = evaluate_visibility(g, state, schema) if not state.visibility else state
    edited = replace(before, values={**before.values, field_id: new_value})
    after = evaluate_visibility(g, edited, schema)
    vis_delta = {
        fid: after.visibility[fid]
        for fid in after.visibility
        if before.visibility.get(fid) != after.visibility[fid]
    }
    req_delta = {
        fid: after.required[fid]
        for fid in after.required
        if before.required.get(fid, False) != after.required[fid]
    }
    return VisibilityDelta(visibility=vis_delta, required=req_delta, state=after)
