// Hash router for the single-page console.
//   #/login  #/hackathons  #/hackathons/{id}/manage
//   #/hackathons/{id}/page-editor  #/h/{id}  #/teams

import { App } from "./app.js";
import { loginView } from "./views/login.js";
import { hackathonsView } from "./views/hackathons.js";
import { manageView } from "./views/manage.js";
import { pageEditorView } from "./views/pageEditor.js";
import { publicPageView } from "./views/publicPage.js";
import { teamsView } from "./views/teams.js";

export function route(app: App, root: HTMLElement, hash: string): void {
  const segments = hash.replace(/^#\/?/, "").split("/").filter(Boolean);
  const publicRoute = segments[0] === "h" || segments.length === 0;

  if (!publicRoute && app.session.token() === null && segments[0] !== "login") {
    app.navigate("#/login"); // expired or missing session
    return;
  }

  if (segments[0] === "login") {
    loginView(app, root);
  } else if (segments[0] === "h" && segments[1]) {
    void publicPageView(app, root, segments[1]);
  } else if (segments[0] === "hackathons" && segments[1] && segments[2] === "manage") {
    void manageView(app, root, segments[1]);
  } else if (segments[0] === "hackathons" && segments[1] && segments[2] === "page-editor") {
    void pageEditorView(app, root, segments[1]);
  } else if (segments[0] === "teams") {
    void teamsView(app, root);
  } else {
    void hackathonsView(app, root);
  }
}
