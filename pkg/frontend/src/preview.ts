// Page draft model for the customizer: section edit ops applied locally with
// undo, plus a preview renderer producing the same structure the gateway
// serves for a published page. Edits preview instantly with no gateway call;
// after publish, the served page must equal the preview for that revision.

export const SECTION_KINDS = ["markdown", "sponsors", "awards", "schedule", "winner"] as const;
export type SectionKind = (typeof SECTION_KINDS)[number];

export interface Section {
  section_id: string;
  kind: SectionKind;
  body?: string;
}

export interface Theme {
  primary_color: string;
  accent_color: string;
  logo_url: string;
}

export interface PageDraft {
  hackathon_id: string;
  theme: Theme;
  sections: Section[];
  published: boolean;
  revision: number;
}

export type SectionOp =
  | { op: "add"; section: Section; at?: number }
  | { op: "remove"; section_id: string }
  | { op: "move"; section_id: string; to: number }
  | { op: "replace"; section_id: string; section: Omit<Section, "section_id"> };

export function isValidHexColor(value: string): boolean {
  return /^#[0-9a-fA-F]{6}$/.test(value);
}

/** Mirrors the page service: ops apply in order, the whole batch or nothing. */
export function applySectionOps(sections: Section[], ops: SectionOp[]): Section[] {
  const result = sections.map((s) => ({ ...s }));
  const locate = (sectionId: string): number => {
    const index = result.findIndex((s) => s.section_id === sectionId);
    if (index === -1) throw new Error(`SectionNotFound: ${sectionId}`);
    return index;
  };
  for (const op of ops) {
    if (op.op === "add") {
      if (!SECTION_KINDS.includes(op.section.kind)) throw new Error(`InvalidSection: ${op.section.kind}`);
      if (!op.section.section_id) throw new Error("InvalidSection: missing section_id");
      if (result.some((s) => s.section_id === op.section.section_id)) {
        throw new Error(`SectionExists: ${op.section.section_id}`);
      }
      const at = op.at ?? result.length;
      result.splice(Math.max(0, Math.min(at, result.length)), 0, { ...op.section });
    } else if (op.op === "remove") {
      result.splice(locate(op.section_id), 1);
    } else if (op.op === "move") {
      const [section] = result.splice(locate(op.section_id), 1);
      const to = Math.max(0, Math.min(op.to, result.length));
      result.splice(to, 0, section!);
    } else {
      const index = locate(op.section_id);
      if (!SECTION_KINDS.includes(op.section.kind)) throw new Error(`InvalidSection: ${op.section.kind}`);
      result[index] = { ...op.section, section_id: op.section_id };
    }
  }
  return result;
}

/** Context the data-driven section kinds resolve from (read-model queries). */
export interface RenderContext {
  sponsors: unknown[];
  awards: unknown[];
  schedule: Record<string, unknown>;
  winner: unknown | null;
}

export interface RenderedSection {
  section_id: string;
  kind: SectionKind;
  body?: string;
  sponsors?: unknown[];
  awards?: unknown[];
  schedule?: Record<string, unknown>;
  winner?: unknown | null;
}

/** Same shape the gateway returns for GET /api/pages/{id}. */
export function renderPreview(draft: PageDraft, context: RenderContext): RenderedSection[] {
  return draft.sections.map((section) => {
    const rendered: RenderedSection = { section_id: section.section_id, kind: section.kind };
    if (section.kind === "markdown") rendered.body = section.body ?? "";
    else if (section.kind === "sponsors") rendered.sponsors = context.sponsors;
    else if (section.kind === "awards") rendered.awards = context.awards;
    else if (section.kind === "schedule") rendered.schedule = context.schedule;
    else rendered.winner = context.winner;
    return rendered;
  });
}

/** Draft editing with an undo stack; edits are local until pushed. */
export class DraftEditor {
  private history: PageDraft[] = [];

  constructor(public draft: PageDraft) {}

  private snapshot(): void {
    this.history.push(structuredClone(this.draft));
  }

  setTheme(theme: Partial<Theme>): void {
    const merged = { ...this.draft.theme, ...theme };
    if (!isValidHexColor(merged.primary_color) || !isValidHexColor(merged.accent_color)) {
      throw new Error("InvalidColor");
    }
    this.snapshot();
    this.draft = { ...this.draft, theme: merged };
  }

  edit(ops: SectionOp[]): void {
    const next = applySectionOps(this.draft.sections, ops); // validates atomically
    this.snapshot();
    this.draft = { ...this.draft, sections: next };
  }

  undo(): boolean {
    const previous = this.history.pop();
    if (previous === undefined) return false;
    this.draft = previous;
    return true;
  }

  canUndo(): boolean {
    return this.history.length > 0;
  }
}
