/**
 * Over-threshold window measurement from sampled pair data.
 *
 * Mirrors the simulator's rule: the Lebesgue measure of {t : v_net > v_tp}
 * with linear interpolation of the threshold crossings between samples, so
 * the number printed in the pair figure's legend agrees with the
 * simulator-reported window to well under one sample period.
 */
export function overThresholdWindow(t: number[], vNet: number[], vTp: number): number {
  let total = 0;
  for (let i = 0; i + 1 < t.length; i++) {
    const f0 = vNet[i] - vTp;
    const f1 = vNet[i + 1] - vTp;
    const h = t[i + 1] - t[i];
    const a0 = f0 > 0;
    const a1 = f1 > 0;
    if (a0 && a1) {
      total += h;
    } else if (!a0 && a1) {
      total += h * (f1 / (f1 - f0));
    } else if (a0 && !a1) {
      total += h * (f0 / (f0 - f1));
    }
  }
  return total;
}

/** Contiguous [start, end] time spans where v_net exceeds the threshold. */
export function overThresholdSpans(
  t: number[],
  vNet: number[],
  vTp: number,
): Array<[number, number]> {
  const spans: Array<[number, number]> = [];
  let start: number | null = null;
  for (let i = 0; i + 1 < t.length; i++) {
    const f0 = vNet[i] - vTp;
    const f1 = vNet[i + 1] - vTp;
    if (f0 <= 0 && f1 > 0) {
      start = t[i] + (t[i + 1] - t[i]) * (-f0 / (f1 - f0));
    } else if (f0 > 0 && f1 <= 0 && start !== null) {
      spans.push([start, t[i] + (t[i + 1] - t[i]) * (f0 / (f0 - f1))]);
      start = null;
    } else if (i === 0 && f0 > 0) {
      start = t[0];
    }
  }
  if (start !== null) {
    spans.push([start, t[t.length - 1]]);
  }
  return spans;
}
