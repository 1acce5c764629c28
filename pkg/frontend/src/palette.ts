/**
 * Deterministic cluster colors: the hue walks the golden-ratio sequence from
 * the cluster id, so colors are stable across reloads and well separated for
 * neighboring ids. Noise points render dim gray.
 */

const GOLDEN = 0.6180339887498949;

export const NOISE_COLOR: [number, number, number] = [0.35, 0.35, 0.35];

export function clusterColor(id: number): [number, number, number] {
  if (id < 0) return NOISE_COLOR;
  const hue = (0.13 + id * GOLDEN) % 1.0;
  return hslToRgb(hue, 0.65, 0.55);
}

export function highlightColor(id: number): [number, number, number] {
  const [r, g, b] = clusterColor(id);
  return [Math.min(1, r * 1.35 + 0.15), Math.min(1, g * 1.35 + 0.15), Math.min(1, b * 1.35 + 0.15)];
}

function hslToRgb(h: number, s: number, l: number): [number, number, number] {
  const q = l < 0.5 ? l * (1 + s) : l + s - l * s;
  const p = 2 * l - q;
  const component = (t: number): number => {
    t = ((t % 1) + 1) % 1;
    if (t < 1 / 6) return p + (q - p) * 6 * t;
    if (t < 1 / 2) return q;
    if (t < 2 / 3) return p + (q - p) * (2 / 3 - t) * 6;
    return p;
  };
  return [component(h + 1 / 3), component(h), component(h - 1 / 3)];
}
