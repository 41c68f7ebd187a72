// Participant dashboard: registrations, team create/join/leave, submission.

import { App } from "../app.js";
import { el, errorBox, clear } from "../dom.js";

export async function teamsView(app: App, root: HTMLElement): Promise<void> {
  const dashboard = await app.client.getDashboard();
  if (dashboard.status !== 200) {
    clear(root).append(errorBox("log in to see your dashboard"));
    return;
  }
  const message = el("div", { class: "messages" });

  const act = async (key: string, ack: { status: number; body: any }): Promise<boolean> => {
    if (ack.status !== 202) {
      message.append(errorBox(ack.body.error ?? "refused"));
      return false;
    }
    const entry = app.tracker.track(key, ack.body);
    await app.tracker.waitFor(entry);
    if (entry.state === "failed") {
      message.append(errorBox(entry.error?.code ?? `${key} failed`));
      return false;
    }
    return true;
  };

  const refresh = () => teamsView(app, root, );

  const cards = await Promise.all((dashboard.body.hackathons ?? []).map(async (entry: any) => {
    const teamName = el("input", { placeholder: "team name", id: `team-name-${entry.hackathon_id}` });
    const joinId = el("input", { placeholder: "team id to join", id: `join-id-${entry.hackathon_id}` });
    const projectTitle = el("input", { placeholder: "project title", id: `project-title-${entry.hackathon_id}` });
    const repoUrl = el("input", { placeholder: "repository url", id: `repo-${entry.hackathon_id}` });

    let roster: HTMLElement | null = null;
    if (entry.team) {
      const rosterResponse = await app.client.getRoster(entry.team.team_id);
      if (rosterResponse.status === 200) {
        roster = el("ul", {}, ...rosterResponse.body.members.map((m: any) =>
          el("li", {}, m.display_name || m.user_id)));
      }
    }

    return el("div", { class: "card" },
      el("h2", {}, `${entry.title} `, el("small", {}, entry.state)),
      entry.team
        ? el("div", {},
            el("p", {}, `team: ${entry.team.name} (submission: ${entry.submission_state})`),
            roster,
            el("div", { class: "row" },
              projectTitle, repoUrl,
              el("button", {
                id: `submit-${entry.hackathon_id}`,
                disabled: app.tracker.isBusy("submit-project"),
                onclick: async () => {
                  const done = await act("submit-project", await app.client.submitProject(
                    entry.team.team_id,
                    { project: { title: projectTitle.value, repo_url: repoUrl.value } },
                  ));
                  if (done) void refresh();
                },
              }, "Submit project"),
              el("button", {
                id: `leave-${entry.hackathon_id}`,
                onclick: async () => {
                  const done = await act("leave-team", await app.client.leaveTeam(
                    entry.team.team_id, entry.participant_id, {}));
                  if (done) void refresh();
                },
              }, "Leave team"),
            ),
          )
        : el("div", { class: "row" },
            teamName,
            el("button", {
              id: `create-team-${entry.hackathon_id}`,
              disabled: app.tracker.isBusy("create-team"),
              onclick: async () => {
                const done = await act("create-team", await app.client.createTeam(
                  { hackathon_id: entry.hackathon_id, name: teamName.value }));
                if (done) void refresh();
              },
            }, "Create team"),
            joinId,
            el("button", {
              id: `join-team-${entry.hackathon_id}`,
              onclick: async () => {
                const done = await act("join-team", await app.client.joinTeam(joinId.value, {}));
                if (done) void refresh();
              },
            }, "Join team"),
          ),
    );
  }));

  clear(root).append(
    el("h1", {}, "My hackathons"),
    ...(cards.length ? cards : [el("p", {}, "No registrations yet.")]),
    message,
    el("p", {}, el("a", { href: "#/hackathons" }, "all hackathons")),
  );
}
