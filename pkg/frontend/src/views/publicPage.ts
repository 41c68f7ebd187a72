// Public page render at /h/{id}; served anonymously once published.

import { App } from "../app.js";
import { el, errorBox, clear } from "../dom.js";

export async function publicPageView(app: App, root: HTMLElement, hackathonId: string): Promise<void> {
  const response = await app.client.getPublicPage(hackathonId);
  if (response.status !== 200) {
    clear(root).append(errorBox(
      response.body?.error === "NotPublished" ? "This page is not published yet." : "No such page.",
    ));
    return;
  }
  const page = response.body;
  const container = el("article", { class: "public-page" });
  container.style.setProperty("--primary", page.theme.primary_color);
  container.style.setProperty("--accent", page.theme.accent_color);
  container.append(el("h1", {}, page.title));
  for (const section of page.sections) {
    const block = el("section", { "data-kind": section.kind });
    if (section.kind === "markdown") {
      block.append(el("pre", {}, section.body ?? ""));
    } else if (section.kind === "sponsors") {
      block.append(el("h2", {}, "Sponsors"),
        el("ul", {}, ...section.sponsors.map((s: any) => el("li", {}, `${s.name} (${s.tier})`))));
    } else if (section.kind === "awards") {
      block.append(el("h2", {}, "Awards"),
        el("ul", {}, ...section.awards.map((a: any) => el("li", {}, a.title))));
    } else if (section.kind === "schedule") {
      block.append(el("h2", {}, "Schedule"),
        el("p", {}, `${new Date(section.schedule.start_ms).toISOString()} to ${new Date(section.schedule.end_ms).toISOString()}`));
    } else if (section.kind === "winner") {
      block.append(el("h2", {}, "Winner"),
        el("p", {}, section.winner
          ? `${section.winner.team_name} wins ${section.winner.award_title}`
          : "Not decided yet"));
    }
    container.append(block);
  }
  clear(root).append(container);
}
