// Minimal fetch wrapper: gateway base URL, bearer token, JSON bodies.

export interface ApiResponse<T = any> {
  status: number;
  body: T;
}

export type TokenSource = () => string | null;

export class HttpClient {
  constructor(
    public baseUrl: string,
    private readonly tokenSource: TokenSource = () => null,
  ) {}

  async request(method: string, path: string, body?: unknown): Promise<ApiResponse> {
    const headers: Record<string, string> = {};
    const token = this.tokenSource();
    if (token) headers["Authorization"] = `Bearer ${token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let parsed: any = null;
    const text = await response.text();
    if (text) {
      try {
        parsed = JSON.parse(text);
      } catch {
        parsed = { error: "BadResponse", raw: text };
      }
    }
    return { status: response.status, body: parsed };
  }
}
