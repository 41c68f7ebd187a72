// Console bootstrap. Gateway base URL comes from ?gateway=..., then
// localStorage, then same-origin.

import { createApp } from "./app.js";
import { route } from "./router.js";

function gatewayUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("gateway");
  if (fromQuery) {
    window.localStorage.setItem("hacknizer.gateway", fromQuery);
    return fromQuery;
  }
  return window.localStorage.getItem("hacknizer.gateway") ?? "";
}

const browserStore = {
  get: (key: string) => window.localStorage.getItem(key),
  set: (key: string, value: string) => window.localStorage.setItem(key, value),
  remove: (key: string) => window.localStorage.removeItem(key),
};

const root = document.getElementById("app")!;
const app = createApp(gatewayUrl(), browserStore, (hash) => {
  window.location.hash = hash;
});

window.addEventListener("hashchange", () => route(app, root, window.location.hash));
route(app, root, window.location.hash || "#/hackathons");
app.tracker.startPolling(1000);
