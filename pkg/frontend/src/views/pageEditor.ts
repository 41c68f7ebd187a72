// Page customizer: theme pickers and a section editor with live local
// preview (no gateway call per keystroke), undo, and publish.

import { App } from "../app.js";
import { el, errorBox, clear } from "../dom.js";
import {
  DraftEditor, PageDraft, RenderContext, SectionKind, SECTION_KINDS,
  isValidHexColor, renderPreview,
} from "../preview.js";

export async function pageEditorView(app: App, root: HTMLElement, hackathonId: string): Promise<void> {
  const [overviewResponse, pageResponse] = await Promise.all([
    app.client.getHackathon(hackathonId),
    app.client.getPublicPage(hackathonId),
  ]);
  const overview = overviewResponse.status === 200 ? overviewResponse.body : null;
  // For an unpublished page the editor starts from the default draft; the
  // server document is authoritative once published.
  const draft: PageDraft = pageResponse.status === 200
    ? {
        hackathon_id: hackathonId,
        theme: pageResponse.body.theme,
        sections: pageResponse.body.sections.map((s: any) => ({
          section_id: s.section_id, kind: s.kind, ...(s.body !== undefined ? { body: s.body } : {}),
        })),
        published: true,
        revision: pageResponse.body.revision,
      }
    : {
        hackathon_id: hackathonId,
        theme: { primary_color: "#1f6feb", accent_color: "#f0b429", logo_url: "" },
        sections: [{ section_id: "about", kind: "markdown", body: "# About\n" }],
        published: false,
        revision: 1,
      };
  const editor = new DraftEditor(draft);
  const message = el("div", { class: "messages" });
  const preview = el("div", { id: "preview", class: "card preview" });

  const context: RenderContext = {
    sponsors: overview?.sponsors ?? [],
    awards: overview?.awards ?? [],
    schedule: overview?.schedule ?? {},
    winner: overview?.winner ?? null,
  };

  const renderPreviewPane = () => {
    clear(preview);
    preview.style.borderColor = editor.draft.theme.primary_color;
    for (const section of renderPreview(editor.draft, context)) {
      preview.append(
        el("section", { "data-kind": section.kind, "data-id": section.section_id },
          el("h3", {}, section.section_id),
          section.kind === "markdown" ? el("pre", {}, section.body ?? "") :
            el("pre", {}, JSON.stringify(section[section.kind] ?? null)),
        ),
      );
    }
  };

  const primary = el("input", { type: "color", value: editor.draft.theme.primary_color, id: "theme-primary" });
  const accent = el("input", { type: "color", value: editor.draft.theme.accent_color, id: "theme-accent" });
  const applyTheme = () => {
    if (!isValidHexColor(primary.value) || !isValidHexColor(accent.value)) {
      message.append(errorBox("InvalidColor"));
      return;
    }
    editor.setTheme({ primary_color: primary.value, accent_color: accent.value });
    renderPreviewPane();
  };
  primary.oninput = applyTheme;
  accent.oninput = applyTheme;

  const sectionId = el("input", { placeholder: "section id", id: "section-id" });
  const sectionKind = el("select", { id: "section-kind" },
    ...SECTION_KINDS.map((kind) => el("option", { value: kind }, kind)));
  const sectionBody = el("textarea", { placeholder: "markdown body", id: "section-body" });

  const addSection = () => {
    try {
      editor.edit([{
        op: "add",
        section: {
          section_id: sectionId.value,
          kind: (sectionKind as HTMLSelectElement).value as SectionKind,
          ...(sectionBody.value ? { body: sectionBody.value } : {}),
        },
      }]);
      renderPreviewPane();
    } catch (err) {
      message.append(errorBox(String(err)));
    }
  };

  const undoButton = el("button", { id: "undo", onclick: () => { editor.undo(); renderPreviewPane(); } }, "Undo");

  const push = async () => {
    if (app.tracker.isBusy("push-page")) return;
    const themeAck = await app.client.updateTheme(hackathonId, { theme: editor.draft.theme });
    if (themeAck.status !== 202) {
      message.append(errorBox(themeAck.body.error ?? "theme rejected"));
      return;
    }
    await app.tracker.waitFor(app.tracker.track("push-page", themeAck.body));
    message.append(el("div", {}, "theme pushed"));
  };

  const publish = async () => {
    if (app.tracker.isBusy("publish-page")) return;
    const ack = await app.client.publishPage(hackathonId, {});
    if (ack.status !== 202) {
      message.append(errorBox(ack.body.error ?? "publish refused"));
      return;
    }
    const entry = app.tracker.track("publish-page", ack.body);
    await app.tracker.waitFor(entry);
    message.append(el("div", {},
      entry.state === "succeeded" ? "published" : `publish failed: ${entry.error?.code}`));
  };

  clear(root).append(
    el("h1", {}, "Page editor"),
    el("div", { class: "card" },
      el("h2", {}, "Theme"),
      el("div", { class: "row" }, primary, accent),
      el("h2", {}, "Sections"),
      el("div", { class: "row" }, sectionId, sectionKind, sectionBody,
        el("button", { id: "add-section", onclick: addSection }, "Add section"), undoButton),
      el("div", { class: "row" },
        el("button", { id: "push-page", onclick: () => void push() }, "Push theme"),
        el("button", { id: "publish-page", onclick: () => void publish() }, "Publish")),
    ),
    el("h2", {}, "Live preview"),
    preview,
    message,
  );
  renderPreviewPane();
}
