import { ApiClient, ApiError } from "./api.js";
import { ConsoleState, initialState, projectState } from "./state.js";
import { buildSkeleton, render } from "./views.js";
import { SessionState } from "./types.js";

export interface SessionStore {
  load(): string | null;
  save(id: string): void;
}

export class ConsoleApp {
  state: ConsoleState = initialState();

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private store: SessionStore,
  ) {
    this.root.innerHTML = buildSkeleton();
    this.wire();
    this.render();
  }

  private wire(): void {
    this.byId<HTMLButtonElement>("next-btn").addEventListener("click", () =>
      void this.next(),
    );
    this.byId<HTMLButtonElement>("teach-btn").addEventListener("click", () =>
      void this.submitLabel("teach"),
    );
    this.byId<HTMLButtonElement>("correct-btn").addEventListener("click", () =>
      void this.submitLabel("correct"),
    );
    // keyboard-first labeling: Enter teaches unknowns, corrects mistakes
    this.byId<HTMLFormElement>("label-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      const action =
        this.state.current?.prediction.label === null ? "teach" : "correct";
      void this.submitLabel(action);
    });
    // clicking an image placeholder refetches the state (retry)
    this.byId<HTMLElement>("object-panel").addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      if (target.dataset?.placeholder === "1" && this.state.sessionId) {
        void this.refresh(this.state.sessionId);
      }
    });
  }

  private byId<T extends HTMLElement>(id: string): T {
    return this.root.querySelector(`#${id}`) as T;
  }

  private render(): void {
    render(this.root, this.state);
  }

  async start(): Promise<void> {
    const existing = this.store.load();
    if (existing) {
      try {
        await this.refresh(existing);
        return;
      } catch (err) {
        if (!(err instanceof ApiError && err.status === 404)) throw err;
        // stale session id: fall through and create a fresh session
      }
    }
    const created = await this.api.createSession();
    this.store.save(created.id);
    await this.refresh(created.id);
  }

  /** Rebuild the whole console from GET endpoints only. */
  async refresh(sessionId: string): Promise<void> {
    const [server, log] = await Promise.all([
      this.api.getState(sessionId),
      this.api.log(sessionId),
    ]);
    this.state = projectState(this.state, server, log.events);
    this.render();
  }

  private async applyServerState(server: SessionState): Promise<void> {
    const log = await this.api.log(server.id);
    this.state = projectState(this.state, server, log.events);
  }

  private async mutate(call: () => Promise<SessionState>): Promise<void> {
    if (this.state.busy) return;
    this.state = { ...this.state, busy: true };
    this.render();
    try {
      await this.applyServerState(await call());
      this.state = { ...this.state, busy: false, banner: null };
    } catch (err) {
      this.state = { ...this.state, busy: false };
      if (err instanceof ApiError && err.code === "end_of_data") {
        this.state = { ...this.state, banner: "End of dataset reached." };
      } else if (err instanceof ApiError) {
        // surface inline; the typed label stays in the input
        this.state = { ...this.state, error: `${err.code}: ${err.message}` };
      } else {
        throw err;
      }
    }
    this.render();
  }

  async next(): Promise<void> {
    const id = this.state.sessionId;
    if (!id) return;
    await this.mutate(() => this.api.next(id));
  }

  async submitLabel(action: "teach" | "correct"): Promise<void> {
    const id = this.state.sessionId;
    if (!id) return;
    const input = this.byId<HTMLInputElement>("label-input");
    const label = input.value.trim();
    if (!label) {
      this.state = { ...this.state, error: "type a category label first" };
      this.render();
      return;
    }
    await this.mutate(() =>
      action === "teach" ? this.api.teach(id, label) : this.api.correct(id, label),
    );
    if (this.state.error === null) input.value = "";
  }
}
