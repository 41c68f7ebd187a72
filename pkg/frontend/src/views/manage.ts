// Organizer console for one hackathon: sponsors, awards, lifecycle, winner.

import { App } from "../app.js";
import { el, errorBox, clear } from "../dom.js";

export async function manageView(app: App, root: HTMLElement, hackathonId: string): Promise<void> {
  const overview = await app.client.getHackathon(hackathonId);
  if (overview.status !== 200) {
    clear(root).append(errorBox("hackathon not found"));
    return;
  }
  const hk = overview.body;
  const message = el("div", { class: "messages" });

  const act = async (key: string, ack: { status: number; body: any }) => {
    if (ack.status !== 202) {
      message.append(errorBox(`${ack.body.error}${ack.body.field ? `: ${ack.body.field}` : ""}`));
      return null;
    }
    const entry = app.tracker.track(key, ack.body);
    await app.tracker.waitFor(entry);
    if (entry.state === "failed") {
      message.append(errorBox(entry.error?.code ?? `${key} failed`));
      return null;
    }
    return entry;
  };

  const refresh = () => manageView(app, root, hackathonId);

  const sponsorName = el("input", { placeholder: "sponsor name", id: "sponsor-name" });
  const awardTitle = el("input", { placeholder: "award title", id: "award-title" });

  const lifecycle = el("div", { class: "row" },
    ...["open_registration", "start", "end"].map((action) =>
      el("button", {
        id: `transition-${action}`,
        disabled: app.tracker.isBusy("transition"),
        onclick: async () => {
          const outcome = await act("transition", await app.client.transitionHackathon(hackathonId, { action }));
          if (outcome) void refresh();
        },
      }, action),
    ),
  );

  const winnerTeam = el("input", { placeholder: "team id", id: "winner-team" });
  const winnerAward = el("select", { id: "winner-award" },
    ...hk.awards.map((award: any) => el("option", { value: award.award_id }, award.title)));
  const sagaProgress = el("div", { id: "winner-progress" });

  const declareWinner = async () => {
    const ack = await app.client.declareWinner(hackathonId, {
      team_id: winnerTeam.value, award_id: (winnerAward as HTMLSelectElement).value,
    });
    if (ack.status !== 202) {
      message.append(errorBox(ack.body.error ?? "refused"));
      return;
    }
    const entry = app.tracker.track("declare-winner", ack.body);
    sagaProgress.textContent = "saga running...";
    await app.tracker.waitFor(entry);
    if (entry.state === "failed") {
      sagaProgress.textContent = `Aborted at "${entry.failedStep}": ${entry.abortReason?.code}`;
    } else {
      sagaProgress.textContent = "Completed";
      void refresh();
    }
  };

  clear(root).append(
    el("h1", {}, `${hk.title} `, el("small", {}, hk.state)),
    el("p", {}, `capacity ${hk.participant_count}/${hk.capacity}, teams: ${hk.team_count}`),
    el("div", { class: "card" },
      el("h2", {}, "Sponsors & awards"),
      el("ul", {}, ...hk.sponsors.map((s: any) => el("li", {}, `${s.name} (${s.tier})`))),
      el("div", { class: "row" },
        sponsorName,
        el("button", {
          id: "add-sponsor",
          onclick: async () => {
            const outcome = await act("add-sponsor", await app.client.addSponsor(
              hackathonId, { sponsor: { name: sponsorName.value } }));
            if (outcome) void refresh();
          },
        }, "Add sponsor"),
      ),
      el("ul", {}, ...hk.awards.map((a: any) => el("li", {}, a.title))),
      el("div", { class: "row" },
        awardTitle,
        el("button", {
          id: "add-award",
          onclick: async () => {
            const outcome = await act("add-award", await app.client.addAward(
              hackathonId, { award: { title: awardTitle.value } }));
            if (outcome) void refresh();
          },
        }, "Add award"),
      ),
    ),
    el("div", { class: "card" }, el("h2", {}, "Lifecycle"), lifecycle),
    el("div", { class: "card" },
      el("h2", {}, "Winner"),
      hk.winner
        ? el("p", {}, `Winner: ${hk.winner.team_name} (${hk.winner.award_title})`)
        : el("div", { class: "row" },
            winnerTeam, winnerAward,
            el("button", { id: "declare-winner", onclick: () => void declareWinner() }, "Declare"),
            sagaProgress,
          ),
    ),
    el("p", {}, el("a", { href: `#/hackathons/${hackathonId}/page-editor` }, "page editor")),
    message,
  );
}
