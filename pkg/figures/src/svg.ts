/** Deterministic SVG assembly.
 *
 * Every coordinate goes through fmt(), so identical inputs produce
 * identical text; attribute order is the literal insertion order.
 */

/** Fixed two-decimal coordinate format; "-0.00" normalizes to "0.00". */
export function fmt(value: number): string {
  if (!Number.isFinite(value)) return "0.00";
  const text = value.toFixed(2);
  return text === "-0.00" ? "0.00" : text;
}

/** Escape text content for SVG. */
export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** One element as a string; attribute values are used verbatim. */
export function el(
  tag: string,
  attrs: Record<string, string>,
  content?: string,
): string {
  const parts = Object.entries(attrs).map(([key, value]) => `${key}="${value}"`);
  const head = parts.length > 0 ? `<${tag} ${parts.join(" ")}` : `<${tag}`;
  if (content === undefined) return `${head}/>`;
  return `${head}>${content}</${tag}>`;
}

export interface TextOptions {
  anchor?: "start" | "middle" | "end";
  size?: number;
  fill?: string;
  rotate?: number;
  bold?: boolean;
}

/** A text label at (x, y). */
export function text(
  x: number,
  y: number,
  content: string,
  font: { family: string; size: number; color: string },
  options: TextOptions = {},
): string {
  const attrs: Record<string, string> = {
    x: fmt(x),
    y: fmt(y),
    "font-family": esc(font.family),
    "font-size": String(options.size ?? font.size),
    fill: options.fill ?? font.color,
  };
  if (options.anchor) attrs["text-anchor"] = options.anchor;
  if (options.bold) attrs["font-weight"] = "bold";
  if (options.rotate !== undefined) {
    attrs.transform = `rotate(${fmt(options.rotate)} ${fmt(x)} ${fmt(y)})`;
  }
  return el("text", attrs, esc(content));
}

/** Whole document: fixed header, background rect, body lines. */
export function document(
  width: number,
  height: number,
  background: string,
  body: readonly string[],
): string {
  const head = el("svg", {
    xmlns: "http://www.w3.org/2000/svg",
    width: String(width),
    height: String(height),
    viewBox: `0 0 ${width} ${height}`,
  }).replace("/>", ">");
  const bg = el("rect", {
    x: "0",
    y: "0",
    width: String(width),
    height: String(height),
    fill: background,
  });
  return [head, bg, ...body, "</svg>", ""].join("\n");
}
