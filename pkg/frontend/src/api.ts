/** Thin client for the /v1 endpoints; fetch is injectable for tests. */

export interface FieldDescriptorPayload {
  element_id?: string;
  name_attr?: string;
  label_text?: string;
  placeholder?: string;
  aria_label?: string;
  nearby_text?: string[];
  input_kind?: string;
  options?: string[];
  ancestors?: Array<{
    tag: string;
    id_attr?: string;
    class_list?: string[];
    heading_text?: string;
  }>;
}

export interface MappingResult {
  field_id: string | null;
  tier: "Direct" | "Contextual" | "Similarity" | "Unmapped";
  confidence: number;
  evidence: string;
}

export interface Candidate {
  value: string;
  citations: string[];
  source_type: string;
}

export interface SuggestResponse {
  status: "Suggestions" | "NoData" | "Unmapped";
  candidates: Candidate[];
  field_id: string | null;
}

export interface DiffOp {
  op: "keep" | "del" | "ins";
  text: string;
}

export interface EditResponse {
  original: string;
  revised_text: string;
  diff: DiffOp[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorCode: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private token: string | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  get authenticated(): boolean {
    return this.token !== null;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const record = payload as { error_code?: string; message?: string };
      throw new ApiError(
        response.status,
        record.error_code ?? "unknown",
        record.message ?? `request failed with ${response.status}`,
      );
    }
    return payload as T;
  }

  async login(userId: string, secret: string): Promise<void> {
    const body = await this.request<{ token: string }>("POST", "/v1/auth/login", {
      user_id: userId,
      secret,
    });
    this.token = body.token;
  }

  logout(): void {
    this.token = null;
  }

  async mapField(descriptor: FieldDescriptorPayload): Promise<MappingResult> {
    const body = await this.request<{ mapping_result: MappingResult }>(
      "POST",
      "/v1/map",
      { field_descriptor: descriptor },
    );
    return body.mapping_result;
  }

  async suggest(
    descriptor: FieldDescriptorPayload,
    contextValues: Record<string, string>,
  ): Promise<SuggestResponse> {
    return this.request<SuggestResponse>("POST", "/v1/suggest", {
      field: descriptor,
      form_context: { values: contextValues },
    });
  }

  async edit(selectedText: string, instruction: string): Promise<EditResponse> {
    return this.request<EditResponse>("POST", "/v1/edit", {
      selected_text: selectedText,
      instruction,
    });
  }

  async uploadDocument(docName: string, text: string): Promise<number> {
    const body = await this.request<{ chunks_indexed: number }>(
      "POST",
      "/v1/documents",
      { doc_name: docName, text },
    );
    return body.chunks_indexed;
  }

  async listDocuments(): Promise<Array<{ doc_name: string; status: string }>> {
    const body = await this.request<{ documents: Array<{ doc_name: string; status: string }> }>(
      "GET",
      "/v1/documents",
    );
    return body.documents;
  }
}
