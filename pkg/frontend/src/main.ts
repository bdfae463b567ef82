import { ApiClient } from "./api.js";
import { Dashboard } from "./dashboard.js";
import { EventStream } from "./stream.js";

const PEER_REFRESH_MS = 5000;

function boot(): void {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  const api = new ApiClient("");
  const dashboard = new Dashboard(root, api, (onEvent, onState) => {
    return new EventStream({ onEvent, onState });
  });
  void dashboard.refresh();
  setInterval(() => void dashboard.refresh(), PEER_REFRESH_MS);
}

document.addEventListener("DOMContentLoaded", boot);
