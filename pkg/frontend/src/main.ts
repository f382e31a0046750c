import { SessionApi } from "./api.js";
import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8787";

const mount = document.getElementById("app");
if (!mount) throw new Error("missing #app mount point");

const app = new App(document, mount, new SessionApi(baseUrl));
void app.start();
