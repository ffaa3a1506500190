import { ApiClient } from "./api.js";
import { ConsoleApp, SessionStore } from "./app.js";

// Session id lives in the URL hash so a reload reconstructs the console
// from the GET endpoints alone.
class HashSessionStore implements SessionStore {
  load(): string | null {
    const match = window.location.hash.match(/session=([0-9a-f]+)/);
    return match ? match[1] : null;
  }

  save(id: string): void {
    window.location.hash = `session=${id}`;
  }
}

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "http://127.0.0.1:8321";
}

const root = document.getElementById("app");
if (root) {
  const app = new ConsoleApp(root, new ApiClient(apiBase()), new HashSessionStore());
  app.start().catch((err) => {
    const banner = document.getElementById("banner");
    if (banner) {
      banner.hidden = false;
      banner.textContent =
        `Cannot start a session (${err}). Is the learner service running, ` +
        `and does it have a --dataset configured?`;
    }
  });
}
