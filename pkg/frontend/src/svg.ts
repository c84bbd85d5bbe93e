/**
 * Deterministic SVG line charts: fixed canvas, fixed per-scheme styling,
 * fixed-precision coordinates, no timestamps — the same data always
 * serializes to the same bytes.
 */

export interface Series {
  name: string;
  points: Array<{ x: number; y: number; err?: number }>;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  errorBars?: boolean;
}

const WIDTH = 640;
const HEIGHT = 440;
const MARGIN = { top: 44, right: 24, bottom: 52, left: 76 };

/** One visual identity per scheme so figures stay comparable across runs. */
export const SCHEME_STYLES: Record<string, { color: string; dash: string; marker: string }> = {
  "ris-n": { color: "#1f77b4", dash: "", marker: "circle" },
  "ris-n-minus-k": { color: "#17becf", dash: "6 3", marker: "circle" },
  "hrris-fixed": { color: "#ff7f0e", dash: "", marker: "square" },
  "hrris-dynamic": { color: "#d62728", dash: "", marker: "diamond" },
  relay: { color: "#2ca02c", dash: "3 3", marker: "triangle" },
};

const FALLBACK_STYLE = { color: "#7f7f7f", dash: "2 2", marker: "circle" };

function styleFor(name: string) {
  return SCHEME_STYLES[name] ?? FALLBACK_STYLE;
}

const fmt = (v: number): string => v.toFixed(2);

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = step * mult;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / s) * s; t <= hi + 1e-12 * span; t += s) {
    ticks.push(t);
  }
  return ticks;
}

function tickLabel(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e5 || Math.abs(v) < 1e-3)) {
    return v.toExponential(1);
  }
  return Number(v.toPrecision(6)).toString();
}

function markerSvg(kind: string, cx: number, cy: number, color: string): string {
  const r = 3.5;
  switch (kind) {
    case "square":
      return `<rect x="${fmt(cx - r)}" y="${fmt(cy - r)}" width="${fmt(2 * r)}" height="${fmt(2 * r)}" fill="${color}"/>`;
    case "diamond":
      return `<path d="M${fmt(cx)} ${fmt(cy - r - 1)}L${fmt(cx + r + 1)} ${fmt(cy)}L${fmt(cx)} ${fmt(cy + r + 1)}L${fmt(cx - r - 1)} ${fmt(cy)}Z" fill="${color}"/>`;
    case "triangle":
      return `<path d="M${fmt(cx)} ${fmt(cy - r - 1)}L${fmt(cx + r + 1)} ${fmt(cy + r)}L${fmt(cx - r - 1)} ${fmt(cy + r)}Z" fill="${color}"/>`;
    default:
      return `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" fill="${color}"/>`;
  }
}

export function renderLineChart(series: Series[], opts: ChartOptions): string {
  if (series.length === 0 || series.every((s) => s.points.length === 0)) {
    throw new Error("nothing to plot: no series with points");
  }
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ysLo = series.flatMap((s) =>
    s.points.map((p) => p.y - (opts.errorBars ? p.err ?? 0 : 0)),
  );
  const ysHi = series.flatMap((s) =>
    s.points.map((p) => p.y + (opts.errorBars ? p.err ?? 0 : 0)),
  );
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  let yLo = Math.min(...ysLo);
  let yHi = Math.max(...ysHi);
  const pad = (yHi - yLo || Math.abs(yHi) || 1) * 0.08;
  yLo -= pad;
  yHi += pad;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const px = (x: number) =>
    MARGIN.left + (xHi === xLo ? plotW / 2 : ((x - xLo) / (xHi - xLo)) * plotW);
  const py = (y: number) => MARGIN.top + plotH - ((y - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">${opts.title}</text>`,
  );

  // axes + grid
  for (const t of niceTicks(yLo, yHi)) {
    const y = py(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${WIDTH - MARGIN.right}" y2="${fmt(y)}" stroke="#e0e0e0" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  for (const t of niceTicks(xLo, xHi, 8).filter((v) => Number.isInteger(v))) {
    const x = px(t);
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top}" x2="${fmt(x)}" y2="${HEIGHT - MARGIN.bottom}" stroke="#f0f0f0" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${fmt(x)}" y="${HEIGHT - MARGIN.bottom + 18}" text-anchor="middle" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#444444" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-size="13">${opts.xLabel}</text>`,
  );
  parts.push(
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${opts.yLabel}</text>`,
  );

  // series (stable order: as given)
  for (const s of series) {
    const style = styleFor(s.name);
    const coords = s.points.map((p) => `${fmt(px(p.x))},${fmt(py(p.y))}`).join(" ");
    const dash = style.dash ? ` stroke-dasharray="${style.dash}"` : "";
    parts.push(
      `<polyline data-series="${s.name}" points="${coords}" fill="none" stroke="${style.color}" stroke-width="2"${dash}/>`,
    );
    if (opts.errorBars) {
      for (const p of s.points) {
        if (!p.err) continue;
        const x = px(p.x);
        parts.push(
          `<line x1="${fmt(x)}" y1="${fmt(py(p.y - p.err))}" x2="${fmt(x)}" y2="${fmt(py(p.y + p.err))}" stroke="${style.color}" stroke-width="1.5"/>`,
        );
        for (const end of [p.y - p.err, p.y + p.err]) {
          parts.push(
            `<line x1="${fmt(x - 3)}" y1="${fmt(py(end))}" x2="${fmt(x + 3)}" y2="${fmt(py(end))}" stroke="${style.color}" stroke-width="1.5"/>`,
          );
        }
      }
    }
    for (const p of s.points) {
      parts.push(markerSvg(style.marker, px(p.x), py(p.y), style.color));
    }
  }

  // legend
  let ly = MARGIN.top + 10;
  for (const s of series) {
    const style = styleFor(s.name);
    const lx = WIDTH - MARGIN.right - 150;
    const dash = style.dash ? ` stroke-dasharray="${style.dash}"` : "";
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 26}" y2="${ly}" stroke="${style.color}" stroke-width="2"${dash}/>`,
    );
    parts.push(markerSvg(style.marker, lx + 13, ly, style.color));
    parts.push(
      `<text x="${lx + 32}" y="${ly + 4}" font-size="12">${s.name}</text>`,
    );
    ly += 18;
  }

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
