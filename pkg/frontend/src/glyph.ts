// Parametric flower glyphs: petals encode behavioral engagement, the stamen
// encodes cognitive engagement, the flower color the student's modal role.
// A group renders as a bouquet with leaves (scaffolding tier), butterflies
// (quality bin), an outer duration arc and a prior-performance base.

import { leafColor, priorColor, ROLE_COLORS } from "./colors.js";
import { svg } from "./dom.js";
import type { FlowerDoc, GlyphDoc } from "./types.js";

const PETALS = 6;

export function flowerNode(flower: FlowerDoc, size = 36): SVGGElement {
  const group = svg("g", {
    class: "flower",
    "data-student": flower.student_id,
    "data-petal-size": flower.petal_size.toFixed(3),
    "data-stamen-size": flower.stamen_size.toFixed(3),
    "data-role": flower.flower_color,
  });
  const color = ROLE_COLORS[flower.flower_color] ?? "#999999";
  const petalLength = (size / 2) * Math.max(0.05, flower.petal_size);
  for (let i = 0; i < PETALS; i++) {
    const angle = (360 / PETALS) * i;
    group.append(
      svg("ellipse", {
        class: "petal",
        cx: 0,
        cy: -petalLength / 2,
        rx: petalLength / 2.6,
        ry: petalLength / 2,
        fill: color,
        "fill-opacity": 0.75,
        transform: `rotate(${angle})`,
      }),
    );
  }
  group.append(
    svg("circle", {
      class: "stamen",
      r: (size / 4) * Math.max(0.08, flower.stamen_size),
      fill: "#7a5c00",
    }),
  );
  return group;
}

export function bouquetNode(glyph: GlyphDoc, size = 48): SVGGElement {
  const group = svg("g", {
    class: "bouquet",
    "data-group": glyph.group_id,
    "data-butterflies": glyph.butterfly_count,
    "data-leaf-level": glyph.leaf_color_level,
    "data-shape": glyph.shape,
    "data-arc": glyph.arc_fraction.toFixed(3),
  });
  group.append(
    svg("circle", {
      class: "base",
      r: size * 0.9,
      fill: priorColor(glyph.base_color),
      "fill-opacity": 0.35,
    }),
  );
  // Outer duration arc.
  const radius = size * 0.95;
  const circumference = 2 * Math.PI * radius;
  group.append(
    svg("circle", {
      class: "arc",
      r: radius,
      fill: "none",
      stroke: "#555555",
      "stroke-width": 2,
      "stroke-dasharray": `${(glyph.arc_fraction * circumference).toFixed(2)} ${circumference.toFixed(2)}`,
      transform: "rotate(-90)",
    }),
  );
  for (let i = 0; i <= glyph.leaf_color_level; i++) {
    group.append(
      svg("ellipse", {
        class: "leaf",
        cx: -size * 0.45 + i * 10,
        cy: size * 0.62,
        rx: 9,
        ry: 4,
        fill: leafColor(glyph.leaf_color_level),
        transform: `rotate(${-20 + i * 18} ${-size * 0.45 + i * 10} ${size * 0.62})`,
      }),
    );
  }
  glyph.flowers.forEach((flower, i) => {
    const node = flowerNode(flower, size * 0.55);
    const offset = (i - (glyph.flowers.length - 1) / 2) * size * 0.62;
    node.setAttribute("transform", `translate(${offset} ${i === 1 ? -size * 0.18 : 0})`);
    group.append(node);
  });
  for (let i = 0; i < glyph.butterfly_count; i++) {
    const bx = -size * 0.55 + i * (size * 0.55);
    const by = -size * 0.75;
    group.append(
      svg("path", {
        class: "butterfly",
        d: `M ${bx} ${by} c -6 -7 -14 0 -4 5 c -10 5 -2 12 4 5 c 6 7 14 0 4 -5 c 10 -5 2 -12 -4 -5 z`,
        fill: "#e8a4c9",
        stroke: "#99527b",
        "stroke-width": 0.6,
      }),
    );
  }
  return group;
}

// Filter-view marker: groups appear as points or rectangles depending on
// whether they received scaffolding, tinted by prior performance, wrapped
// with the duration arc.
export function projectionMarker(glyph: GlyphDoc): SVGGElement {
  const group = svg("g", {
    class: "marker",
    "data-group": glyph.group_id,
    "data-shape": glyph.shape,
  });
  const fill = priorColor(glyph.base_color);
  if (glyph.shape === "rectangle") {
    group.append(
      svg("rect", { x: -6, y: -6, width: 12, height: 12, fill, stroke: "#333333" }),
    );
  } else {
    group.append(svg("circle", { r: 6, fill, stroke: "#333333" }));
  }
  const radius = 10;
  const circumference = 2 * Math.PI * radius;
  group.append(
    svg("circle", {
      class: "arc",
      r: radius,
      fill: "none",
      stroke: "#777777",
      "stroke-width": 2,
      "stroke-dasharray": `${(glyph.arc_fraction * circumference).toFixed(2)} ${circumference.toFixed(2)}`,
      transform: "rotate(-90)",
    }),
  );
  return group;
}
