/** Client-side conditional visibility, mirroring the service's semantics:
 * Hide beats Show, Show-gated fields default hidden, hidden controllers
 * contribute no value, Require applies only while visible. */

export interface ConditionRule {
  controller_id: string;
  predicate: "Equals" | "NotEquals" | "In";
  values: string[];
  effect: "Show" | "Hide" | "Require";
}

export interface SchemaField {
  id: string;
  conditions?: ConditionRule[];
}

export interface VisibilityState {
  visibility: Record<string, "Visible" | "Hidden">;
  required: Record<string, boolean>;
}

function topologicalOrder(fields: SchemaField[]): string[] {
  const ids = fields.map((f) => f.id);
  const dependents = new Map<string, Set<string>>(ids.map((id) => [id, new Set()]));
  const indegree = new Map<string, number>(ids.map((id) => [id, 0]));
  for (const field of fields) {
    for (const rule of field.conditions ?? []) {
      const deps = dependents.get(rule.controller_id);
      if (deps && !deps.has(field.id)) {
        deps.add(field.id);
        indegree.set(field.id, (indegree.get(field.id) ?? 0) + 1);
      }
    }
  }
  let ready = ids.filter((id) => (indegree.get(id) ?? 0) === 0).sort();
  const order: string[] = [];
  while (ready.length > 0) {
    const node = ready.shift()!;
    order.push(node);
    const inserted: string[] = [];
    for (const dep of dependents.get(node) ?? []) {
      const left = (indegree.get(dep) ?? 0) - 1;
      indegree.set(dep, left);
      if (left === 0) {
        inserted.push(dep);
      }
    }
    if (inserted.length > 0) {
      ready = ready.concat(inserted).sort();
    }
  }
  if (order.length !== ids.length) {
    throw new Error("condition rules form a cycle");
  }
  return order;
}

function ruleFires(rule: ConditionRule, value: string | undefined): boolean {
  if (value === undefined || value === "") {
    return false;
  }
  switch (rule.predicate) {
    case "Equals":
      return value === rule.values[0];
    case "NotEquals":
      return value !== rule.values[0];
    case "In":
      return rule.values.includes(value);
  }
}

export function evaluateVisibility(
  fields: SchemaField[],
  values: Record<string, string>,
): VisibilityState {
  const byId = new Map(fields.map((f) => [f.id, f]));
  const visibility: Record<string, "Visible" | "Hidden"> = {};
  const required: Record<string, boolean> = {};

  const effectiveValue = (id: string): string | undefined =>
    visibility[id] === "Hidden" ? undefined : values[id];

  for (const id of topologicalOrder(fields)) {
    const rules = byId.get(id)?.conditions ?? [];
    const fired = rules.map((rule) => ruleFires(rule, effectiveValue(rule.controller_id)));
    const showRules = rules.filter((r) => r.effect === "Show");
    const hideFired = rules.some((r, i) => r.effect === "Hide" && fired[i]);
    let visible: "Visible" | "Hidden";
    if (hideFired) {
      visible = "Hidden";
    } else if (showRules.length > 0) {
      visible = rules.some((r, i) => r.effect === "Show" && fired[i])
        ? "Visible"
        : "Hidden";
    } else {
      visible = "Visible";
    }
    visibility[id] = visible;
    required[id] =
      visible === "Visible" && rules.some((r, i) => r.effect === "Require" && fired[i]);
  }
  return { visibility, required };
}
