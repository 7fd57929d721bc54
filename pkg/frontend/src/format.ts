// Readout helpers. Displayed text is a fixed-decimal rendering; the exact
// payload value always rides along in data-value so nothing on screen ever
// drifts from what the service sent.

export function formatNumber(value: number, decimals = 3): string {
  if (!Number.isFinite(value)) return "n/a";
  return value.toFixed(decimals);
}

export function setReadout(element: HTMLElement, value: number, decimals = 3): void {
  element.textContent = formatNumber(value, decimals);
  element.dataset.value = String(value);
}

/** Index of the grid point closest to t (grids are sorted ascending). */
export function nearestIndex(grid: number[], t: number): number {
  let best = 0;
  for (let i = 1; i < grid.length; i++) {
    if (Math.abs(grid[i] - t) < Math.abs(grid[best] - t)) best = i;
  }
  return best;
}
