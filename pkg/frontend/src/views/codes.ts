// Codes panel: submissions of the searched group (left) next to the
// comparison group (right), each with its rubric score, rationale and
// red deficiency hints.

import { el, clear, fmt } from "../dom.js";
import type { CodesDoc, CodesQuestion } from "../types.js";

function questionCard(question: CodesQuestion): HTMLElement {
  const card = el("article", {
    class: "code-card",
    "data-question": question.question_id,
  });
  card.append(el("h4", { text: `Question ${question.question_id}` }));
  card.append(el("pre", { class: "code", text: question.source }));
  const score = question.score;
  if (score) {
    card.append(
      el("p", { class: "score", "data-testid": "code-score" }, [
        `Score ${fmt(score.weighted_total)} / 5 `,
        el("small", {
          text:
            `(PS ${fmt(score.problem_solving, 1)}, CI ${fmt(score.code_integrity, 1)}, ` +
            `CA ${fmt(score.code_accuracy, 1)}, AI ${fmt(score.algorithm_innovation, 1)}, ` +
            `n=${score.n_samples})`,
        }),
      ]),
      el("p", { class: "rationale", text: score.rationale }),
    );
    for (const demerit of score.demerits) {
      card.append(el("p", { class: "hint deficiency", text: demerit }));
    }
  } else {
    card.append(el("p", { class: "placeholder", text: "No score available." }));
  }
  return card;
}

export function renderCodes(
  container: HTMLElement,
  left: { id: string; doc: CodesDoc } | null,
  right: { id: string; doc: CodesDoc } | null,
): void {
  clear(container);
  container.classList.add("codes-panel");
  const columns = el("div", { class: right ? "columns two" : "columns one" });
  for (const side of [left, right]) {
    if (!side) continue;
    const column = el("div", { class: "code-column", "data-group": side.id });
    column.append(el("h3", { text: side.id }));
    for (const question of side.doc.questions) column.append(questionCard(question));
    columns.append(column);
  }
  if (!left && !right) {
    columns.append(el("p", { class: "placeholder", text: "Code documents unavailable." }));
  }
  container.append(columns);
}
