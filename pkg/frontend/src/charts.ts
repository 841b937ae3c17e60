/**
 * Minimal SVG line charts. Point computation is a pure function so the
 * rendering is deterministic and unit-testable without a DOM.
 */

export interface ChartGeometry {
  width: number;
  height: number;
  pad: number;
}

export const DEFAULT_GEOMETRY: ChartGeometry = { width: 360, height: 140, pad: 10 };

/**
 * Map a series to SVG polyline points. A single sample renders as a
 * centered dot-width segment; an empty series renders nothing.
 */
export function polylinePoints(
  xs: number[],
  ys: number[],
  geo: ChartGeometry = DEFAULT_GEOMETRY
): string {
  if (xs.length === 0 || xs.length !== ys.length) {
    return '';
  }
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const w = geo.width - 2 * geo.pad;
  const h = geo.height - 2 * geo.pad;
  return xs
    .map((x, i) => {
      const px = geo.pad + ((x - xMin) / xSpan) * w;
      const py = geo.pad + h - ((ys[i] - yMin) / ySpan) * h;
      return `${px.toFixed(2)},${py.toFixed(2)}`;
    })
    .join(' ');
}

export function renderChart(
  container: HTMLElement,
  title: string,
  xs: number[],
  ys: number[],
  geo: ChartGeometry = DEFAULT_GEOMETRY
): void {
  const points = polylinePoints(xs, ys, geo);
  const last = ys.length > 0 ? ys[ys.length - 1] : null;
  container.innerHTML = `
    <h3>${title}</h3>
    <svg viewBox="0 0 ${geo.width} ${geo.height}" preserveAspectRatio="none">
      <polyline fill="none" stroke="currentColor" stroke-width="1.5" points="${points}" />
    </svg>
    <span class="chart-last">${last === null ? '—' : formatLast(last)}</span>
  `;
}

function formatLast(value: number): string {
  if (Math.abs(value) >= 1000) {
    return value.toLocaleString('en-US', { maximumFractionDigits: 0 });
  }
  return value.toFixed(3);
}
