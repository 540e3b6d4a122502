// Student projection: every student in the cohort as a small flower; the
// searched group's members are linked with dashed lines, the comparison
// group's members highlighted, everyone else dimmed.

import { el, svg, clear, fmt } from "../dom.js";
import { flowerNode } from "../glyph.js";
import { linearScale, extent } from "../scales.js";
import type { StudentEntry } from "../types.js";

const WIDTH = 420;
const HEIGHT = 300;

export function renderStudentProjection(
  container: HTMLElement,
  students: StudentEntry[],
  searchGroup: string | null,
  compareGroup: string | null,
): void {
  clear(container);
  container.classList.add("student-projection");
  const placed = students.filter((s) => s.projection_xy);
  if (!placed.length) {
    container.append(el("p", { class: "placeholder", text: "Student projection unavailable." }));
    return;
  }
  const canvas = svg("svg", {
    class: "students",
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: WIDTH,
    height: HEIGHT,
  });
  const sx = linearScale(extent(placed.map((s) => s.projection_xy![0]), 0.12), [20, WIDTH - 20]);
  const sy = linearScale(extent(placed.map((s) => s.projection_xy![1]), 0.12), [HEIGHT - 20, 20]);
  const tooltip = el("div", { class: "tooltip", hidden: true });

  const searchMembers = placed.filter((s) => s.group_id === searchGroup);
  if (searchMembers.length > 1) {
    const points = searchMembers
      .map((s) => `${fmt(sx(s.projection_xy![0]))},${fmt(sy(s.projection_xy![1]))}`)
      .join(" ");
    canvas.append(
      svg("polyline", {
        class: "group-link",
        points,
        fill: "none",
        stroke: "#555555",
        "stroke-dasharray": "4 3",
      }),
    );
  }

  for (const student of placed) {
    const flower = flowerNode(
      {
        student_id: student.student_id,
        petal_size: student.behavioral_mean,
        stamen_size: student.cognitive_mean,
        flower_color: student.modal_role,
      },
      22,
    );
    const inSearch = student.group_id === searchGroup;
    const inCompare = student.group_id === compareGroup;
    flower.classList.add(inSearch ? "search" : inCompare ? "highlight" : "dimmed");
    flower.setAttribute(
      "transform",
      `translate(${fmt(sx(student.projection_xy![0]))} ${fmt(sy(student.projection_xy![1]))})`,
    );
    flower.addEventListener("mouseenter", () => {
      tooltip.textContent =
        `${student.student_id} (${student.group_id}): major ${student.major}, ` +
        `prior ${student.prior_score}, role ${student.modal_role}`;
      tooltip.hidden = false;
    });
    flower.addEventListener("mouseleave", () => {
      tooltip.hidden = true;
    });
    canvas.append(flower);
  }
  container.append(canvas, tooltip);
}
