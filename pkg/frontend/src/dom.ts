// Vanilla DOM rendering for the console. One render pass per state
// change; handlers delegate to the view model.

import { catalogFields, catalogFromValues, valuesFromCatalog } from "./catalogForm.js";
import { escapeHtml, renderMarkdown } from "./markdown.js";
import type { ConsoleViewModel } from "./viewmodel.js";
import type { ProgressEvent, RunSummary } from "./types.js";

function el(html: string): HTMLElement {
  const template = document.createElement("template");
  template.innerHTML = html.trim();
  return template.content.firstElementChild as HTMLElement;
}

function renderRunRow(run: RunSummary, onOpen: (runId: string) => void): HTMLElement {
  const badge = run.closed ? "done" : run.pending_pause ? "paused" : run.busy ? "running" : "idle";
  const row = el(`
    <div class="run-row" data-run="${run.run_id}">
      <span class="run-id">${escapeHtml(run.run_id)}</span>
      <span class="run-title">${escapeHtml(run.course.course_title)}</span>
      <span class="run-mode">${escapeHtml(run.mode)}</span>
      <span class="badge badge-${badge}">${badge}</span>
      <span class="run-progress">${run.completed.length}/9</span>
    </div>`);
  row.addEventListener("click", () => onOpen(run.run_id));
  return row;
}

function renderEvents(events: ProgressEvent[]): HTMLElement {
  const feed = el('<div class="event-feed"></div>');
  for (const event of events) {
    const subtask = typeof event.payload["subtask"] === "string" ? ` ${event.payload["subtask"]}` : "";
    feed.appendChild(
      el(
        `<div class="event-line" data-seq="${event.sequence}">` +
          `<span class="event-seq">#${event.sequence}</span> ` +
          `<span class="event-kind">${event.kind}</span>` +
          `<span class="event-detail">${escapeHtml(subtask)}</span></div>`,
      ),
    );
  }
  return feed;
}

function renderPauseBanner(vm: ConsoleViewModel): HTMLElement {
  const pause = vm.pause;
  if (!pause) {
    return el('<div class="pause-banner pause-none">No pause pending; decisions are disabled.</div>');
  }
  const banner = el(`
    <div class="pause-banner pause-active">
      <h3>Paused after ${escapeHtml(pause.subtask)}</h3>
      <div class="previews"></div>
      <div class="decision-form">
        <button class="btn-approve">Approve</button>
        <input class="decision-text" placeholder="modification or guidance text" />
        <button class="btn-modify">Request changes</button>
        <button class="btn-guide">Guide next step</button>
      </div>
    </div>`);
  const previews = banner.querySelector(".previews")!;
  for (const [name, excerpt] of Object.entries(pause.artifacts_preview)) {
    const card = el(`
      <details class="preview-card">
        <summary>${escapeHtml(name)}</summary>
        <div class="preview-rendered">${renderMarkdown(excerpt)}</div>
        <pre class="preview-raw hidden">${escapeHtml(excerpt)}</pre>
        <button class="btn-toggle-raw">raw source</button>
      </details>`);
    card.querySelector(".btn-toggle-raw")!.addEventListener("click", () => {
      card.querySelector(".preview-rendered")!.classList.toggle("hidden");
      card.querySelector(".preview-raw")!.classList.toggle("hidden");
    });
    previews.appendChild(card);
  }
  const textInput = banner.querySelector(".decision-text") as HTMLInputElement;
  banner.querySelector(".btn-approve")!.addEventListener("click", () => void vm.approve());
  banner.querySelector(".btn-modify")!.addEventListener("click", () => {
    if (textInput.value.trim()) void vm.modify(textInput.value.trim());
  });
  banner.querySelector(".btn-guide")!.addEventListener("click", () => {
    if (textInput.value.trim()) void vm.guide(textInput.value.trim());
  });
  for (const button of banner.querySelectorAll("button")) {
    if (!vm.canDecide() && !button.classList.contains("btn-toggle-raw")) {
      (button as HTMLButtonElement).disabled = true;
    }
  }
  return banner;
}

function renderCatalogEditor(vm: ConsoleViewModel): HTMLElement {
  const editor = el('<form class="catalog-editor"><h3>Educator catalog</h3></form>');
  const values = vm.catalog ? valuesFromCatalog(vm.catalog) : {};
  const writable = vm.canEditCatalog();
  for (const field of catalogFields()) {
    const fieldKey =
      field.category === "prior_feedback" ? "prior_feedback" : `${field.category}.${field.field}`;
    const row = el(`
      <label class="catalog-row">
        <span>${escapeHtml(field.label)}</span>
        <input name="${fieldKey}" type="${field.kind === "integer" ? "number" : "text"}"
               value="${escapeHtml(values[fieldKey] ?? "")}" ${writable ? "" : "disabled"} />
      </label>`);
    editor.appendChild(row);
  }
  const save = el(
    `<button type="submit" class="btn-save-catalog" ${writable ? "" : "disabled"}>Save catalog</button>`,
  );
  editor.appendChild(save);
  editor.addEventListener("submit", (event) => {
    event.preventDefault();
    const form = new FormData(editor as HTMLFormElement);
    const collected: Record<string, string> = {};
    for (const [name, value] of form.entries()) collected[name] = String(value);
    void vm.saveCatalog(catalogFromValues(collected));
  });
  return editor;
}

function renderFeedbackComposer(vm: ConsoleViewModel): HTMLElement {
  const completed = vm.run?.completed ?? [];
  const options = completed
    .map((subtask) => `<option value="${subtask}">${subtask}</option>`)
    .join("");
  const composer = el(`
    <form class="feedback-composer">
      <h3>Targeted feedback</h3>
      <select name="subtask">${options}</select>
      <input name="suggestion" placeholder="suggestion for the rerun" />
      <button type="submit" ${completed.length && !vm.run?.busy ? "" : "disabled"}>Rerun subtask</button>
    </form>`);
  composer.addEventListener("submit", (event) => {
    event.preventDefault();
    const form = new FormData(composer as HTMLFormElement);
    const subtask = String(form.get("subtask") ?? "");
    const suggestion = String(form.get("suggestion") ?? "").trim();
    if (subtask && suggestion) void vm.sendFeedback(subtask, suggestion);
  });
  return composer;
}

export function render(root: HTMLElement, vm: ConsoleViewModel): void {
  root.textContent = "";
  const layout = el('<div class="console"></div>');

  const list = el('<section class="run-list"><h2>Runs</h2></section>');
  for (const run of vm.runs) {
    list.appendChild(renderRunRow(run, (runId) => void vm.openRun(runId)));
  }
  layout.appendChild(list);

  if (vm.run) {
    const detail = el(`
      <section class="run-detail">
        <h2>${escapeHtml(vm.run.run_id)}</h2>
        <p class="run-course">${escapeHtml(vm.run.course.course_title)} (${escapeHtml(vm.run.mode)})</p>
        <p class="run-state">completed: ${vm.run.completed.length}/9; next: ${escapeHtml(vm.run.next_subtask ?? "-")}</p>
      </section>`);
    if (vm.notice) {
      detail.appendChild(el(`<div class="notice">${escapeHtml(vm.notice)}</div>`));
    }
    detail.appendChild(renderPauseBanner(vm));
    detail.appendChild(renderCatalogEditor(vm));
    detail.appendChild(renderFeedbackComposer(vm));
    detail.appendChild(renderEvents(vm.events));
    layout.appendChild(detail);
  }
  root.appendChild(layout);
}
