import { EngineClient } from "./api";
import { renderApp } from "./render";
import { SessionStore } from "./state";

declare global {
  interface Window {
    KH_API_BASE?: string;
  }
}

async function boot(): Promise<void> {
  const base = window.KH_API_BASE ?? "http://127.0.0.1:8750";
  const store = new SessionStore(new EngineClient(base));
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  renderApp(store, root);
  await store.loadModel();
  renderApp(store, root);
}

window.addEventListener("DOMContentLoaded", () => {
  void boot();
});
