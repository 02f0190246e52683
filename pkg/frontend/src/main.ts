/** Browser bootstrap: mount the explorer on #app against the same origin. */

import { ApiClient } from "./api.js";
import { App } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = new App(root, new ApiClient(""));
  app.showDemos();
}
