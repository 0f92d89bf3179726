// Browser entry point. Configuration is limited to the gateway base URL
// and an optional bearer token, read from the query string or storage.

import { GatewayClient } from "./api.js";
import { render } from "./dom.js";
import { ConsoleViewModel } from "./viewmodel.js";

function setting(name: string, fallback: string): string {
  const fromQuery = new URLSearchParams(window.location.search).get(name);
  if (fromQuery) {
    window.localStorage.setItem(`courseforge.${name}`, fromQuery);
    return fromQuery;
  }
  return window.localStorage.getItem(`courseforge.${name}`) ?? fallback;
}

const baseUrl = setting("gateway", "http://127.0.0.1:8075");
const token = setting("token", "");

const client = new GatewayClient(baseUrl, token || undefined);
const vm = new ConsoleViewModel(client);
const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

vm.subscribe(() => render(root, vm));
void vm.refreshRuns();
window.setInterval(() => void vm.refreshRuns(), 5000);
render(root, vm);
