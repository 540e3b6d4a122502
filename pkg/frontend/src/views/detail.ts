// Detail view: the session recording (when present) and the raw transcript,
// scrolled to the utterance the timeline click focused. Sessions without
// media degrade to transcript-only with a notice.

import { SCAFFOLD_COLORS } from "../colors.js";
import { el, clear, fmt } from "../dom.js";
import type { DetailFocus } from "../state.js";
import type { TranscriptDoc } from "../types.js";

export function renderDetail(
  container: HTMLElement,
  transcript: TranscriptDoc,
  focus: DetailFocus | null,
  scaffoldKind: string | null,
  mediaBase = "",
): void {
  clear(container);
  container.classList.add("detail-view");

  const header = el("header", { class: "detail-header" }, [
    el("h3", { text: `Group ${transcript.group_id}` }),
  ]);
  if (scaffoldKind) {
    const badge = el("span", {
      class: "scaffold-badge",
      "data-kind": scaffoldKind,
      text: scaffoldKind,
    });
    badge.style.background = SCAFFOLD_COLORS[scaffoldKind] ?? "#333333";
    header.append(badge);
  }
  container.append(header);

  if (transcript.media) {
    const video = el("video", {
      class: "session-video",
      controls: true,
      src: `${mediaBase}/media/${transcript.group_id}/${transcript.media}`,
    });
    if (focus) video.currentTime = focus.t;
    container.append(video);
  } else {
    container.append(
      el("p", { class: "notice", text: "No recording for this session; transcript only." }),
    );
  }

  const list = el("div", { class: "transcript", "data-testid": "transcript" });
  for (const question of transcript.questions) {
    list.append(
      el("h4", {
        text:
          `Question ${question.question_id}` +
          (question.driver ? ` (driver ${question.driver})` : ""),
      }),
    );
    for (const utterance of question.utterances) {
      const row = el("p", {
        class: utterance.focus ? "utterance focus" : "utterance",
        "data-start": utterance.start,
        "data-speaker": utterance.speaker,
      }, [
        el("span", { class: "time", text: `${fmt(utterance.start, 1)}s` }),
        el("span", {
          class: utterance.speaker === "0000" ? "speaker instructor" : "speaker",
          text: utterance.speaker,
        }),
        el("span", { class: "text", text: utterance.text }),
      ]);
      list.append(row);
    }
  }
  container.append(list);
  const focused = list.querySelector<HTMLElement>(".utterance.focus");
  if (focused && typeof focused.scrollIntoView === "function") {
    focused.scrollIntoView({ block: "center" });
  }
}
