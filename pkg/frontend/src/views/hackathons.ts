// Hackathon list plus the organizer's creation wizard.

import { App } from "../app.js";
import { el, errorBox, clear } from "../dom.js";

export async function hackathonsView(app: App, root: HTMLElement): Promise<void> {
  const listing = await app.client.listHackathons();
  const rows = (listing.body.hackathons ?? []).map((hk: any) =>
    el("tr", {},
      el("td", {}, el("a", { href: `#/hackathons/${hk.hackathon_id}/manage` }, hk.title)),
      el("td", {}, hk.state),
      el("td", {}, `${hk.participant_count}/${hk.capacity}`),
      el("td", {}, el("a", { href: `#/h/${hk.hackathon_id}` }, "public page")),
      el("td", {},
        hk.state === "RegistrationOpen"
          ? el("button", {
              id: `register-${hk.hackathon_id}`,
              disabled: app.tracker.isBusy(`register-${hk.hackathon_id}`),
              onclick: () => void register(hk.hackathon_id),
            }, "Register")
          : null,
      ),
    ),
  );

  const message = el("div", { class: "messages" });

  const register = async (hackathonId: string) => {
    const ack = await app.client.registerParticipant(hackathonId);
    if (ack.status !== 202) {
      message.append(errorBox(ack.body.error ?? "registration refused"));
      return;
    }
    const entry = app.tracker.track(`register-${hackathonId}`, ack.body);
    render(); // button now disabled: command pending
    await app.tracker.waitFor(entry);
    if (entry.state === "failed") {
      message.append(errorBox(
        `registration saga aborted at ${entry.failedStep ?? "?"}: ${entry.abortReason?.code ?? "unknown"}`,
      ));
    }
    render();
  };

  const wizard = app.session.hasRole("organizer") ? creationWizard(app, message) : null;

  const render = () => {
    clear(root).append(
      el("h1", {}, "Hackathons"),
      el("table", { class: "list" },
        el("thead", {}, el("tr", {},
          el("th", {}, "title"), el("th", {}, "state"), el("th", {}, "slots"),
          el("th", {}, ""), el("th", {}, ""))),
        el("tbody", {}, ...rows),
      ),
      ...(wizard ? [wizard] : []),
      message,
      el("p", {}, el("a", { href: "#/teams" }, "my dashboard")),
    );
  };
  render();
}

function creationWizard(app: App, message: HTMLElement): HTMLElement {
  const title = el("input", { placeholder: "title", id: "wizard-title" });
  const description = el("input", { placeholder: "description", id: "wizard-description" });
  const start = el("input", { type: "datetime-local", id: "wizard-start" });
  const end = el("input", { type: "datetime-local", id: "wizard-end" });
  const capacity = el("input", { type: "number", value: "100", id: "wizard-capacity" });
  const submit = el("button", { id: "wizard-submit" }, "Create hackathon");

  submit.onclick = async () => {
    if (app.tracker.isBusy("create-hackathon")) return;
    const body = {
      title: title.value,
      description: description.value,
      start_ms: new Date(start.value).getTime(),
      end_ms: new Date(end.value).getTime(),
      capacity: Number(capacity.value),
    };
    const ack = await app.client.createHackathon(body);
    if (ack.status !== 202) {
      message.append(errorBox(
        ack.body.error === "SchemaViolation"
          ? `missing field: ${ack.body.field}`
          : `${ack.body.error}`,
      ));
      return;
    }
    const entry = app.tracker.track("create-hackathon", ack.body);
    submit.disabled = true;
    await app.tracker.waitFor(entry);
    submit.disabled = false;
    if (entry.state === "failed") {
      message.append(errorBox(entry.error?.code ?? "creation failed"));
    } else {
      app.navigate(`#/hackathons/${entry.result.hackathon_id}/manage`);
    }
  };

  return el("fieldset", { class: "card wizard" },
    el("legend", {}, "New hackathon"),
    title, description, start, end, capacity, submit,
  );
}
