// Pending-command tracking: every mutating action is acknowledged with a
// command_id (saga routes add a saga_id) and rendered as in-flight until the
// poll of GET /api/commands/{id} (or /api/sagas/{id}) resolves it. A command
// the read side has not seen yet answers 404; that still counts as pending.

import type { ApiClient } from "./gen/api-client.js";

export type CommandState = "pending" | "succeeded" | "failed";
export type SagaState = "pending" | "Running" | "Compensating" | "Completed" | "Aborted";

export interface Tracked {
  key: string; // UI action key, e.g. "create-hackathon"; blocks double submit
  commandId: string;
  sagaId?: string;
  state: CommandState;
  sagaState?: SagaState;
  result?: any;
  error?: any;
  abortReason?: any;
  failedStep?: string;
}

export class PendingTracker {
  private entries = new Map<string, Tracked>();
  private listeners: Array<(entry: Tracked) => void> = [];

  constructor(private readonly client: ApiClient) {}

  onChange(listener: (entry: Tracked) => void): void {
    this.listeners.push(listener);
  }

  private emit(entry: Tracked): void {
    for (const listener of this.listeners) listener(entry);
  }

  /** True while an action with this key is unresolved (disables its button). */
  isBusy(key: string): boolean {
    for (const entry of this.entries.values()) {
      if (entry.key === key && entry.state === "pending") return true;
    }
    return false;
  }

  track(key: string, ack: { command_id: string; saga_id?: string; correlation_id?: string }): Tracked {
    const entry: Tracked = {
      key,
      commandId: ack.command_id,
      sagaId: ack.saga_id,
      state: "pending",
    };
    this.entries.set(ack.command_id, entry);
    this.emit(entry);
    return entry;
  }

  pending(): Tracked[] {
    return [...this.entries.values()].filter((e) => e.state === "pending");
  }

  get(commandId: string): Tracked | undefined {
    return this.entries.get(commandId);
  }

  /** One poll round; resolves what it can, leaves the rest pending. */
  async poll(): Promise<void> {
    for (const entry of this.pending()) {
      if (entry.sagaId) {
        await this.pollSaga(entry);
      } else {
        await this.pollCommand(entry);
      }
    }
  }

  private async pollCommand(entry: Tracked): Promise<void> {
    const response = await this.client.getCommand(entry.commandId);
    if (response.status !== 200) return; // 404: not visible yet, keep waiting
    const doc = response.body;
    if (doc.status === "succeeded") {
      entry.state = "succeeded";
      entry.result = doc.result;
      this.emit(entry);
    } else if (doc.status === "failed") {
      entry.state = "failed";
      entry.error = doc.error;
      this.emit(entry);
    }
  }

  private async pollSaga(entry: Tracked): Promise<void> {
    const response = await this.client.getSaga(entry.sagaId!);
    if (response.status !== 200) return;
    const saga = response.body;
    entry.sagaState = saga.status;
    if (saga.status === "Completed") {
      entry.state = "succeeded";
      entry.result = saga;
      this.emit(entry);
    } else if (saga.status === "Aborted") {
      entry.state = "failed";
      entry.abortReason = saga.abort_reason;
      entry.failedStep = saga.steps?.find((s: any) => s.status === "failed")?.name;
      entry.error = saga.abort_reason;
      this.emit(entry);
    }
  }

  /** Polls every intervalMs until the command resolves; returns the entry. */
  async waitFor(entry: Tracked, intervalMs = 1000, timeoutMs = 30_000): Promise<Tracked> {
    const deadline = Date.now() + timeoutMs;
    while (entry.state === "pending") {
      if (Date.now() > deadline) throw new Error(`timed out waiting for ${entry.commandId}`);
      await this.poll();
      if (entry.state !== "pending") break;
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
    return entry;
  }

  startPolling(intervalMs = 1000): () => void {
    const timer = setInterval(() => {
      void this.poll();
    }, intervalMs);
    return () => clearInterval(timer);
  }
}
