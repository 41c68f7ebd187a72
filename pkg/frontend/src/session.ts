// Session state: the bearer token plus the principal decoded from it.
// An expired token clears the session; the router then redirects to /login.

export interface Principal {
  user_id: string;
  roles: string[];
  exp_ms: number;
}

export interface SessionStore {
  get(key: string): string | null;
  set(key: string, value: string): void;
  remove(key: string): void;
}

export class MemoryStore implements SessionStore {
  private data = new Map<string, string>();
  get(key: string) {
    return this.data.get(key) ?? null;
  }
  set(key: string, value: string) {
    this.data.set(key, value);
  }
  remove(key: string) {
    this.data.delete(key);
  }
}

const TOKEN_KEY = "hacknizer.token";

export function decodePrincipal(token: string): Principal | null {
  const parts = token.split(".");
  if (parts.length !== 3) return null;
  try {
    const pad = "=".repeat((4 - (parts[1]!.length % 4)) % 4);
    const raw = atob(parts[1]!.replace(/-/g, "+").replace(/_/g, "/") + pad);
    const claims = JSON.parse(raw);
    if (typeof claims.user_id !== "string" || typeof claims.exp_ms !== "number") return null;
    return { user_id: claims.user_id, roles: claims.roles ?? [], exp_ms: claims.exp_ms };
  } catch {
    return null;
  }
}

export class Session {
  constructor(
    private readonly store: SessionStore,
    private readonly now: () => number = () => Date.now(),
  ) {}

  login(token: string): Principal | null {
    const principal = decodePrincipal(token);
    if (principal === null) return null;
    this.store.set(TOKEN_KEY, token);
    return principal;
  }

  logout(): void {
    this.store.remove(TOKEN_KEY);
  }

  /** Returns the live token, clearing the session when it has expired. */
  token(): string | null {
    const token = this.store.get(TOKEN_KEY);
    if (token === null) return null;
    const principal = decodePrincipal(token);
    if (principal === null || principal.exp_ms <= this.now()) {
      this.logout();
      return null;
    }
    return token;
  }

  principal(): Principal | null {
    const token = this.token();
    return token === null ? null : decodePrincipal(token);
  }

  hasRole(role: string): boolean {
    const principal = this.principal();
    return principal !== null && (principal.roles.includes(role) || principal.roles.includes("admin"));
  }
}
