import { mount } from "./app.js";

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get("service") ?? window.location.origin;

window.addEventListener("DOMContentLoaded", () => {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  mount(root, serviceUrl, window.sessionStorage).catch((error) => {
    root.textContent = `failed to reach the forecast service at ${serviceUrl}: ${error}`;
  });
});
