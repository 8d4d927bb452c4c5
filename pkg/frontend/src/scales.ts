/** Minimal linear/log scales with deterministic tick generation. */

export interface Scale {
  (value: number): number;
  ticks(): number[];
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    d0 -= 1;
    d1 += 1;
  }
  const f = ((value: number) =>
    range[0] + ((value - d0) / (d1 - d0)) * (range[1] - range[0])) as Scale;
  f.domain = [d0, d1];
  f.ticks = () => {
    const span = d1 - d0;
    const step = niceStep(span / 5);
    const start = Math.ceil(d0 / step) * step;
    const out: number[] = [];
    for (let v = start; v <= d1 + step * 1e-9; v += step) out.push(roundTo(v, step));
    return out;
  };
  return f;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) throw new Error("log scale needs positive domain");
  if (d0 === d1) {
    d0 /= 10;
    d1 *= 10;
  }
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const f = ((value: number) =>
    range[0] + ((Math.log10(value) - l0) / (l1 - l0)) * (range[1] - range[0])) as Scale;
  f.domain = [d0, d1];
  f.ticks = () => {
    const out: number[] = [];
    for (let e = Math.ceil(l0 - 1e-9); e <= Math.floor(l1 + 1e-9); e++) {
      out.push(Math.pow(10, e));
    }
    return out.length >= 2 ? out : [d0, d1];
  };
  return f;
}

function niceStep(raw: number): number {
  const power = Math.pow(10, Math.floor(Math.log10(raw)));
  const unit = raw / power;
  const nice = unit < 1.5 ? 1 : unit < 3.5 ? 2 : unit < 7.5 ? 5 : 10;
  return nice * power;
}

function roundTo(value: number, step: number): number {
  const digits = Math.max(0, -Math.floor(Math.log10(step)) + 1);
  return Number(value.toFixed(digits));
}

/** Fixed formatting so output never depends on the host locale. */
export function formatTick(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1e6 || abs < 1e-3) return value.toExponential(0).replace("+", "");
  return Number(value.toPrecision(6)).toString();
}

export function formatCount(value: number): string {
  const digits = Math.trunc(value).toString();
  return digits.replace(/\B(?=(\d{3})+(?!\d))/g, ",");
}
