import { App } from "../app.js";
import { el, errorBox, clear } from "../dom.js";

export function loginView(app: App, root: HTMLElement): void {
  const email = el("input", { type: "email", placeholder: "email", id: "login-email" });
  const password = el("input", { type: "password", placeholder: "password", id: "login-password" });
  const message = el("div", { class: "messages" });

  const submit = async (register: boolean) => {
    clear(message);
    if (register) {
      const display = el("input");
      const name = prompt("Display name?") ?? email.value;
      void display;
      const ack = await app.client.registerUser({
        email: email.value, display_name: name, password: password.value,
      });
      if (ack.status !== 202) {
        message.append(errorBox(`${ack.body.error}: ${ack.body.field ?? ack.body.message ?? ""}`));
        return;
      }
      const entry = app.tracker.track("register", ack.body);
      await app.tracker.waitFor(entry);
      if (entry.state === "failed") {
        message.append(errorBox(entry.error?.code ?? "registration failed"));
        return;
      }
    }
    const login = await app.client.login({ email: email.value, password: password.value });
    if (login.status !== 200) {
      message.append(errorBox(login.body.error ?? "login failed"));
      return;
    }
    app.session.login(login.body.token);
    app.navigate("#/hackathons");
  };

  clear(root).append(
    el("h1", {}, "Hacknizer"),
    el("form", { class: "card", onsubmit: (e: Event) => { e.preventDefault(); void submit(false); } },
      email,
      password,
      el("button", { type: "submit", id: "login-submit" }, "Log in"),
      el("button", { type: "button", id: "register-submit", onclick: () => void submit(true) },
        "Register + log in"),
      message,
    ),
  );
}
