/**
 * Central finite-difference gradient check.
 *
 * Samples parameter entries at random, perturbs each by ±h, and compares the
 * analytic gradient against (f(x+h) - f(x-h)) / 2h.
 */

import { Tensor } from "./tensor.js";
import { Rng } from "./rng.js";

export interface GradCheckResult {
  maxRelError: number;
  checked: number;
}

/**
 * `lossFn` must rebuild the graph from the current parameter values and
 * return the scalar loss tensor. `params` are the tensors the loss depends
 * on; `samples` entries are drawn across all of them.
 */
export function gradCheck(
  lossFn: () => Tensor,
  params: [string, Tensor][],
  samples = 60,
  h = 1e-5,
  seed = 99
): GradCheckResult {
  for (const [, t] of params) t.zeroGrad();
  const loss = lossFn();
  loss.backward();
  const analytic = new Map<string, Float64Array>();
  for (const [name, t] of params) analytic.set(name, (t.grad ?? new Float64Array(t.size)).slice());

  const rng = new Rng(seed);
  let maxRelError = 0;
  let checked = 0;
  while (checked < samples) {
    const [name, t] = params[rng.randrange(params.length)];
    const idx = rng.randrange(t.size);
    const saved = t.data[idx];
    t.data[idx] = saved + h;
    const up = lossFn().item();
    t.data[idx] = saved - h;
    const down = lossFn().item();
    t.data[idx] = saved;
    const numeric = (up - down) / (2 * h);
    const exact = analytic.get(name)![idx];
    const scale = Math.max(Math.abs(numeric), Math.abs(exact), 1e-8);
    maxRelError = Math.max(maxRelError, Math.abs(numeric - exact) / scale);
    checked++;
  }
  for (const [, t] of params) t.zeroGrad();
  return { maxRelError, checked };
}
