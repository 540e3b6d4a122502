// Thin typed client over the snapshot API. Requests carrying a cancel key
// abort any in-flight request with the same key, so stale responses never
// clobber fresher view state.

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  private inflight = new Map<string, AbortController>();

  constructor(private readonly base: string = "") {}

  async get<T>(path: string, cancelKey?: string): Promise<T> {
    let signal: AbortSignal | undefined;
    if (cancelKey !== undefined) {
      this.inflight.get(cancelKey)?.abort();
      const controller = new AbortController();
      this.inflight.set(cancelKey, controller);
      signal = controller.signal;
    }
    const resp = await fetch(this.base + path, { signal });
    if (!resp.ok) {
      let code = "error";
      let message = `HTTP ${resp.status}`;
      try {
        const body = (await resp.json()) as { error?: { code?: string; message?: string } };
        code = body.error?.code ?? code;
        message = body.error?.message ?? message;
      } catch {
        // non-JSON error body; keep the HTTP status message
      }
      throw new ApiError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }
}

export function mediaUrl(base: string, groupId: string, file: string): string {
  return `${base}/media/${groupId}/${file}`;
}
