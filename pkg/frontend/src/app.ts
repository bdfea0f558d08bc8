/** Demo bootstrap: login, per-domain toggle, sample form selection. */

import { ApiClient } from "./api.js";
import type { SchemaField } from "./condlogic.js";
import { CopilotForm, type FormSpec } from "./forms.js";

const SAMPLE_FORMS = [
  "general_form",
  "school_01_riverbend",
  "conditional_form",
] as const;

const TOGGLE_KEY = "gf-enabled";

export function domainEnabled(storage: Storage, host: string): boolean {
  return storage.getItem(`${TOGGLE_KEY}:${host}`) !== "off";
}

export function setDomainEnabled(storage: Storage, host: string, enabled: boolean): void {
  storage.setItem(`${TOGGLE_KEY}:${host}`, enabled ? "on" : "off");
}

async function fetchJson<T>(path: string): Promise<T> {
  const response = await fetch(path);
  if (!response.ok) {
    throw new Error(`failed to load ${path}`);
  }
  return (await response.json()) as T;
}

export async function bootstrap(doc: Document): Promise<void> {
  const root = doc.getElementById("app");
  if (!root) {
    return;
  }
  const api = new ApiClient("");
  const host = doc.defaultView?.location.host ?? "demo";
  const storage = doc.defaultView!.localStorage;

  const loginForm = doc.createElement("form");
  loginForm.innerHTML = `
    <input name="user" placeholder="user id" value="student">
    <input name="secret" type="password" placeholder="secret" value="open-sesame">
    <button type="submit">Sign in</button>
    <label><input type="checkbox" id="gf-toggle"> copilot enabled here</label>
  `;
  root.appendChild(loginForm);

  const toggle = loginForm.querySelector<HTMLInputElement>("#gf-toggle")!;
  toggle.checked = domainEnabled(storage, host);
  toggle.addEventListener("change", () => {
    setDomainEnabled(storage, host, toggle.checked);
    active?.setEnabled(toggle.checked);
  });

  const formArea = doc.createElement("div");
  root.appendChild(formArea);
  let active: CopilotForm | null = null;

  loginForm.addEventListener("submit", (event) => {
    event.preventDefault();
    void (async () => {
      const user = loginForm.querySelector<HTMLInputElement>("[name=user]")!.value;
      const secret = loginForm.querySelector<HTMLInputElement>("[name=secret]")!.value;
      await api.login(user, secret);

      const schema = await fetchJson<{ fields: SchemaField[] }>(
        "./fixtures/reference_schema.json",
      );
      formArea.replaceChildren();
      for (const name of SAMPLE_FORMS) {
        const spec = await fetchJson<FormSpec>(`./fixtures/forms/${name}.json`);
        const heading = doc.createElement("h2");
        heading.textContent = spec.name;
        formArea.appendChild(heading);
        const copilot = new CopilotForm(doc, api, spec, schema.fields, undefined, {
          enabled: domainEnabled(storage, host),
        });
        active = copilot;
        formArea.appendChild(copilot.form);
      }
    })();
  });
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void bootstrap(document);
}
