/** Exact arithmetic over the fraction strings the service emits.
 *
 * Costs, totals, and sizes arrive as canonical fraction strings such
 * as "43/2" or "6".  Comparing them through floating point would lose
 * exactness, so comparisons cross-multiply BigInts instead.
 */

export interface Frac {
  readonly num: bigint;
  readonly den: bigint;
}

const FRACTION_RE = /^(-?\d+)(?:\/(\d+))?$/;

/** Parse "p", "-p", or "p/q" (q > 0). */
export function parseFraction(text: string): Frac {
  const match = FRACTION_RE.exec(text.trim());
  if (!match) {
    throw new Error(`not a fraction: ${JSON.stringify(text)}`);
  }
  const num = BigInt(match[1]);
  const den = match[2] === undefined ? 1n : BigInt(match[2]);
  if (den === 0n) {
    throw new Error(`zero denominator: ${JSON.stringify(text)}`);
  }
  return { num, den };
}

export function compareFractions(a: Frac, b: Frac): -1 | 0 | 1 {
  const left = a.num * b.den;
  const right = b.num * a.den;
  if (left < right) return -1;
  if (left > right) return 1;
  return 0;
}

/** The smaller of two fraction strings; ties keep the first. */
export function minFractionText(a: string, b: string): string {
  return compareFractions(parseFraction(a), parseFraction(b)) <= 0 ? a : b;
}

function gcd(a: bigint, b: bigint): bigint {
  let x = a < 0n ? -a : a;
  let y = b < 0n ? -b : b;
  while (y !== 0n) {
    [x, y] = [y, x % y];
  }
  return x === 0n ? 1n : x;
}

function formatFraction(num: bigint, den: bigint): string {
  const divisor = gcd(num, den);
  const n = num / divisor;
  const d = den / divisor;
  return d === 1n ? n.toString() : `${n}/${d}`;
}

/** Exact quotient of two fraction strings, in lowest terms. */
export function divideFractionText(a: string, b: string): string {
  const left = parseFraction(a);
  const right = parseFraction(b);
  if (right.num === 0n) {
    throw new Error("division by zero");
  }
  let num = left.num * right.den;
  let den = left.den * right.num;
  if (den < 0n) {
    num = -num;
    den = -den;
  }
  return formatFraction(num, den);
}

/** Approximate numeric value, for chart scaling only. */
export function fractionToNumber(text: string): number {
  const { num, den } = parseFraction(text);
  return Number(num) / Number(den);
}
