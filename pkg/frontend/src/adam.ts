/** Adam optimizer over named parameter tensors, with optional per-group learning rates. */

import { Tensor } from "./tensor.js";

export interface AdamOptions {
  lr: number;
  beta1?: number;
  beta2?: number;
  eps?: number;
}

interface Slot {
  tensor: Tensor;
  lr: number;
  m: Float64Array;
  v: Float64Array;
}

export class Adam {
  private slots: Slot[] = [];
  private beta1: number;
  private beta2: number;
  private eps: number;
  private t = 0;

  constructor(opts: AdamOptions) {
    this.beta1 = opts.beta1 ?? 0.9;
    this.beta2 = opts.beta2 ?? 0.999;
    this.eps = opts.eps ?? 1e-8;
    this.defaultLr = opts.lr;
  }

  private defaultLr: number;

  addParams(params: Iterable<[string, Tensor]>, lr?: number): void {
    for (const [, tensor] of params) {
      this.slots.push({
        tensor,
        lr: lr ?? this.defaultLr,
        m: new Float64Array(tensor.size),
        v: new Float64Array(tensor.size),
      });
    }
  }

  step(): void {
    this.t++;
    const c1 = 1 - Math.pow(this.beta1, this.t);
    const c2 = 1 - Math.pow(this.beta2, this.t);
    for (const slot of this.slots) {
      const g = slot.tensor.grad;
      if (!g) continue;
      const { m, v, tensor, lr } = slot;
      for (let i = 0; i < tensor.size; i++) {
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g[i];
        v[i] = this.beta2 * v[i] + (1 - this.beta2) * g[i] * g[i];
        tensor.data[i] -= (lr * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + this.eps);
      }
    }
  }

  zeroGrads(): void {
    for (const slot of this.slots) slot.tensor.zeroGrad();
  }
}
