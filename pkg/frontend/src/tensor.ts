/**
 * Minimal reverse-mode autodiff over dense 2-D Float64 tensors.
 *
 * Everything is double precision so finite-difference gradient checks can
 * resolve 1e-4 relative error. Shapes are [rows, cols]; sequences are
 * [seqLen, width] and scalars are [1, 1].
 */

export class Tensor {
  data: Float64Array;
  rows: number;
  cols: number;
  grad: Float64Array | null = null;
  requiresGrad: boolean;
  parents: Tensor[] = [];
  backwardFn: (() => void) | null = null;

  constructor(rows: number, cols: number, data?: Float64Array, requiresGrad = false) {
    this.rows = rows;
    this.cols = cols;
    this.data = data ?? new Float64Array(rows * cols);
    if (data && data.length !== rows * cols) {
      throw new Error(`data length ${data.length} != ${rows}x${cols}`);
    }
    this.requiresGrad = requiresGrad;
  }

  get size(): number {
    return this.rows * this.cols;
  }

  ensureGrad(): Float64Array {
    if (!this.grad) this.grad = new Float64Array(this.size);
    return this.grad;
  }

  zeroGrad(): void {
    if (this.grad) this.grad.fill(0);
  }

  at(r: number, c: number): number {
    return this.data[r * this.cols + c];
  }

  item(): number {
    if (this.size !== 1) throw new Error("item() on non-scalar");
    return this.data[0];
  }

  /** Backpropagate from this (scalar) tensor through the whole graph. */
  backward(): void {
    if (this.size !== 1) throw new Error("backward() from non-scalar");
    const topo: Tensor[] = [];
    const seen = new Set<Tensor>();
    const visit = (t: Tensor) => {
      if (seen.has(t)) return;
      seen.add(t);
      for (const p of t.parents) visit(p);
      topo.push(t);
    };
    visit(this);
    this.ensureGrad()[0] = 1;
    for (let i = topo.length - 1; i >= 0; i--) {
      const node = topo[i];
      if (node.backwardFn && node.grad) node.backwardFn();
    }
  }
}

function out(rows: number, cols: number, parents: Tensor[]): Tensor {
  const t = new Tensor(rows, cols);
  t.parents = parents.filter((p) => p.requiresGrad || p.parents.length > 0);
  t.requiresGrad = t.parents.length > 0;
  return t;
}

export function param(rows: number, cols: number, init: (i: number) => number): Tensor {
  const t = new Tensor(rows, cols, undefined, true);
  for (let i = 0; i < t.size; i++) t.data[i] = init(i);
  return t;
}

export function matmul(a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.rows) throw new Error(`matmul ${a.rows}x${a.cols} @ ${b.rows}x${b.cols}`);
  const m = a.rows, k = a.cols, n = b.cols;
  const y = out(m, n, [a, b]);
  const ad = a.data, bd = b.data, yd = y.data;
  for (let i = 0; i < m; i++) {
    for (let p = 0; p < k; p++) {
      const av = ad[i * k + p];
      if (av === 0) continue;
      const bo = p * n, yo = i * n;
      for (let j = 0; j < n; j++) yd[yo + j] += av * bd[bo + j];
    }
  }
  y.backwardFn = () => {
    const gy = y.grad!;
    if (a.requiresGrad || a.parents.length) {
      const ga = a.ensureGrad();
      for (let i = 0; i < m; i++) {
        for (let p = 0; p < k; p++) {
          let acc = 0;
          const bo = p * n, yo = i * n;
          for (let j = 0; j < n; j++) acc += gy[yo + j] * bd[bo + j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (b.requiresGrad || b.parents.length) {
      const gb = b.ensureGrad();
      for (let i = 0; i < m; i++) {
        const yo = i * n;
        for (let p = 0; p < k; p++) {
          const av = ad[i * k + p];
          if (av === 0) continue;
          const bo = p * n;
          for (let j = 0; j < n; j++) gb[bo + j] += av * gy[yo + j];
        }
      }
    }
  };
  return y;
}

export function transpose(a: Tensor): Tensor {
  const y = out(a.cols, a.rows, [a]);
  for (let i = 0; i < a.rows; i++)
    for (let j = 0; j < a.cols; j++) y.data[j * a.rows + i] = a.data[i * a.cols + j];
  y.backwardFn = () => {
    const ga = a.ensureGrad();
    const gy = y.grad!;
    for (let i = 0; i < a.rows; i++)
      for (let j = 0; j < a.cols; j++) ga[i * a.cols + j] += gy[j * a.rows + i];
  };
  return y;
}

export function add(a: Tensor, b: Tensor): Tensor {
  if (a.rows !== b.rows || a.cols !== b.cols) throw new Error("add shape mismatch");
  const y = out(a.rows, a.cols, [a, b]);
  for (let i = 0; i < y.size; i++) y.data[i] = a.data[i] + b.data[i];
  y.backwardFn = () => {
    const gy = y.grad!;
    if (a.requiresGrad || a.parents.length) {
      const ga = a.ensureGrad();
      for (let i = 0; i < y.size; i++) ga[i] += gy[i];
    }
    if (b.requiresGrad || b.parents.length) {
      const gb = b.ensureGrad();
      for (let i = 0; i < y.size; i++) gb[i] += gy[i];
    }
  };
  return y;
}

/** Add a [1, n] bias row to every row of x. */
export function addRowBias(x: Tensor, bias: Tensor): Tensor {
  if (bias.rows !== 1 || bias.cols !== x.cols) throw new Error("bias shape mismatch");
  const y = out(x.rows, x.cols, [x, bias]);
  for (let i = 0; i < x.rows; i++)
    for (let j = 0; j < x.cols; j++) y.data[i * x.cols + j] = x.data[i * x.cols + j] + bias.data[j];
  y.backwardFn = () => {
    const gy = y.grad!;
    if (x.requiresGrad || x.parents.length) {
      const gx = x.ensureGrad();
      for (let i = 0; i < y.size; i++) gx[i] += gy[i];
    }
    if (bias.requiresGrad || bias.parents.length) {
      const gb = bias.ensureGrad();
      for (let i = 0; i < x.rows; i++)
        for (let j = 0; j < x.cols; j++) gb[j] += gy[i * x.cols + j];
    }
  };
  return y;
}

export function scale(x: Tensor, c: number): Tensor {
  const y = out(x.rows, x.cols, [x]);
  for (let i = 0; i < x.size; i++) y.data[i] = x.data[i] * c;
  y.backwardFn = () => {
    const gx = x.ensureGrad();
    const gy = y.grad!;
    for (let i = 0; i < x.size; i++) gx[i] += gy[i] * c;
  };
  return y;
}

export function relu(x: Tensor): Tensor {
  const y = out(x.rows, x.cols, [x]);
  for (let i = 0; i < x.size; i++) y.data[i] = x.data[i] > 0 ? x.data[i] : 0;
  y.backwardFn = () => {
    const gx = x.ensureGrad();
    const gy = y.grad!;
    for (let i = 0; i < x.size; i++) if (x.data[i] > 0) gx[i] += gy[i];
  };
  return y;
}

/** Row-wise layer normalization with learned gain and bias ([1, n] each). */
export function layerNorm(x: Tensor, gain: Tensor, bias: Tensor, eps = 1e-5): Tensor {
  const n = x.cols;
  const y = out(x.rows, n, [x, gain, bias]);
  const means = new Float64Array(x.rows);
  const invStd = new Float64Array(x.rows);
  const xhat = new Float64Array(x.size);
  for (let i = 0; i < x.rows; i++) {
    let mean = 0;
    for (let j = 0; j < n; j++) mean += x.data[i * n + j];
    mean /= n;
    let variance = 0;
    for (let j = 0; j < n; j++) {
      const d = x.data[i * n + j] - mean;
      variance += d * d;
    }
    variance /= n;
    const inv = 1 / Math.sqrt(variance + eps);
    means[i] = mean;
    invStd[i] = inv;
    for (let j = 0; j < n; j++) {
      const h = (x.data[i * n + j] - mean) * inv;
      xhat[i * n + j] = h;
      y.data[i * n + j] = h * gain.data[j] + bias.data[j];
    }
  }
  y.backwardFn = () => {
    const gy = y.grad!;
    const gGain = gain.requiresGrad || gain.parents.length ? gain.ensureGrad() : null;
    const gBias = bias.requiresGrad || bias.parents.length ? bias.ensureGrad() : null;
    const gx = x.requiresGrad || x.parents.length ? x.ensureGrad() : null;
    for (let i = 0; i < x.rows; i++) {
      let sumDh = 0;
      let sumDhXhat = 0;
      for (let j = 0; j < n; j++) {
        const g = gy[i * n + j];
        const h = xhat[i * n + j];
        if (gGain) gGain[j] += g * h;
        if (gBias) gBias[j] += g;
        const dh = g * gain.data[j];
        sumDh += dh;
        sumDhXhat += dh * h;
      }
      if (gx) {
        for (let j = 0; j < n; j++) {
          const dh = gy[i * n + j] * gain.data[j];
          gx[i * n + j] +=
            invStd[i] * (dh - sumDh / n - (xhat[i * n + j] * sumDhXhat) / n);
        }
      }
    }
  };
  return y;
}

/** Row-wise softmax with an optional additive (non-differentiated) mask. */
export function softmaxRows(x: Tensor, addMask: Float64Array | null = null): Tensor {
  const n = x.cols;
  const y = out(x.rows, n, [x]);
  for (let i = 0; i < x.rows; i++) {
    let max = -Infinity;
    for (let j = 0; j < n; j++) {
      const v = x.data[i * n + j] + (addMask ? addMask[i * n + j] : 0);
      if (v > max) max = v;
    }
    let total = 0;
    for (let j = 0; j < n; j++) {
      const v = Math.exp(x.data[i * n + j] + (addMask ? addMask[i * n + j] : 0) - max);
      y.data[i * n + j] = v;
      total += v;
    }
    for (let j = 0; j < n; j++) y.data[i * n + j] /= total;
  }
  y.backwardFn = () => {
    const gx = x.ensureGrad();
    const gy = y.grad!;
    for (let i = 0; i < x.rows; i++) {
      let dot = 0;
      for (let j = 0; j < n; j++) dot += gy[i * n + j] * y.data[i * n + j];
      for (let j = 0; j < n; j++)
        gx[i * n + j] += y.data[i * n + j] * (gy[i * n + j] - dot);
    }
  };
  return y;
}

/**
 * Mean per-position negative log-likelihood from logits [T, V].
 * Positions with target < 0 are ignored (padding).
 */
export function crossEntropy(logits: Tensor, targets: Int32Array): Tensor {
  const V = logits.cols;
  if (targets.length !== logits.rows) throw new Error("targets length mismatch");
  const y = out(1, 1, [logits]);
  const probs = new Float64Array(logits.size);
  let count = 0;
  let total = 0;
  for (let i = 0; i < logits.rows; i++) {
    if (targets[i] < 0) continue;
    count++;
    let max = -Infinity;
    for (let j = 0; j < V; j++) if (logits.data[i * V + j] > max) max = logits.data[i * V + j];
    let z = 0;
    for (let j = 0; j < V; j++) z += Math.exp(logits.data[i * V + j] - max);
    const logZ = max + Math.log(z);
    for (let j = 0; j < V; j++) probs[i * V + j] = Math.exp(logits.data[i * V + j] - logZ);
    total += logZ - logits.data[i * V + targets[i]];
  }
  if (count === 0) throw new Error("no unmasked target positions");
  y.data[0] = total / count;
  y.backwardFn = () => {
    const g = y.grad![0] / count;
    const gl = logits.ensureGrad();
    for (let i = 0; i < logits.rows; i++) {
      if (targets[i] < 0) continue;
      for (let j = 0; j < V; j++) gl[i * V + j] += g * probs[i * V + j];
      gl[i * V + targets[i]] -= g;
    }
  };
  return y;
}

export function sliceCols(x: Tensor, start: number, end: number): Tensor {
  const n = end - start;
  const y = out(x.rows, n, [x]);
  for (let i = 0; i < x.rows; i++)
    for (let j = 0; j < n; j++) y.data[i * n + j] = x.data[i * x.cols + start + j];
  y.backwardFn = () => {
    const gx = x.ensureGrad();
    const gy = y.grad!;
    for (let i = 0; i < x.rows; i++)
      for (let j = 0; j < n; j++) gx[i * x.cols + start + j] += gy[i * n + j];
  };
  return y;
}

export function concatCols(parts: Tensor[]): Tensor {
  const rows = parts[0].rows;
  if (parts.some((p) => p.rows !== rows)) throw new Error("concatCols row mismatch");
  const cols = parts.reduce((acc, p) => acc + p.cols, 0);
  const y = out(rows, cols, parts);
  let offset = 0;
  for (const p of parts) {
    for (let i = 0; i < rows; i++)
      for (let j = 0; j < p.cols; j++) y.data[i * cols + offset + j] = p.data[i * p.cols + j];
    offset += p.cols;
  }
  y.backwardFn = () => {
    const gy = y.grad!;
    let off = 0;
    for (const p of parts) {
      if (p.requiresGrad || p.parents.length) {
        const gp = p.ensureGrad();
        for (let i = 0; i < rows; i++)
          for (let j = 0; j < p.cols; j++) gp[i * p.cols + j] += gy[i * cols + off + j];
      }
      off += p.cols;
    }
  };
  return y;
}

/** Embedding lookup: rows of `table` selected by ids, with scatter-add grad. */
export function gatherRows(table: Tensor, ids: Int32Array): Tensor {
  const d = table.cols;
  const y = out(ids.length, d, [table]);
  for (let i = 0; i < ids.length; i++) {
    if (ids[i] < 0 || ids[i] >= table.rows) throw new Error(`id ${ids[i]} out of range`);
    for (let j = 0; j < d; j++) y.data[i * d + j] = table.data[ids[i] * d + j];
  }
  y.backwardFn = () => {
    const gt = table.ensureGrad();
    const gy = y.grad!;
    for (let i = 0; i < ids.length; i++)
      for (let j = 0; j < d; j++) gt[ids[i] * d + j] += gy[i * d + j];
  };
  return y;
}

export function pickRow(x: Tensor, row: number): Tensor {
  const y = out(1, x.cols, [x]);
  for (let j = 0; j < x.cols; j++) y.data[j] = x.data[row * x.cols + j];
  y.backwardFn = () => {
    const gx = x.ensureGrad();
    const gy = y.grad!;
    for (let j = 0; j < x.cols; j++) gx[row * x.cols + j] += gy[j];
  };
  return y;
}

/** Non-differentiable constant wrapper. */
export function constant(rows: number, cols: number, data: Float64Array): Tensor {
  return new Tensor(rows, cols, data, false);
}
