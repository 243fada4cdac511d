/** Display-only axis transforms; the server always sends raw values. */

export interface Scale {
  (value: number): number;
  ticks(): number[];
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain.map(Math.log10);
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) =>
    r0 + ((Math.log10(value) - d0) / span) * (r1 - r0)) as Scale;
  scale.ticks = () => {
    const ticks: number[] = [];
    for (let e = Math.ceil(d0); e <= Math.floor(d1); e++) {
      ticks.push(10 ** e);
    }
    return ticks;
  };
  return scale;
}

export function linearScale(domain: [number, number], range: [number, number]): (v: number) => number {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (value: number) => r0 + ((value - d0) / span) * (r1 - r0);
}

export function formatNumber(value: number): string {
  if (Number.isInteger(value)) {
    return value.toLocaleString("en-US");
  }
  if (value !== 0 && (Math.abs(value) < 1e-3 || Math.abs(value) >= 1e6)) {
    return value.toExponential(2);
  }
  return value.toPrecision(4);
}
