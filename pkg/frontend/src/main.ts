// Entry point: one static page serves everyone; the token's role decides
// whether it becomes the annotation screen or the manager dashboard.

import { ApiClient, tokenFromUrl } from "./api";
import { runAnnotator } from "./annotate";
import { DashboardScreen } from "./dashboard";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const token = tokenFromUrl();
  if (!token) {
    root.textContent = "Missing token: open the magic link you were given.";
    return;
  }
  const api = new ApiClient(token);
  try {
    const session = await api.session();
    if (session.role === "manager") {
      await new DashboardScreen(root, api).load();
    } else {
      await runAnnotator(root, api);
    }
  } catch (error) {
    root.textContent = `Could not start session: ${(error as Error).message}`;
  }
}

void boot();
