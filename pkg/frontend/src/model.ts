/**
 * Tiny pre-LN transformer encoder-decoder for verifying emitted batches.
 *
 * Defaults: 2 encoder + 2 decoder layers, width 64, 4 heads. The output
 * projection starts at zero so the untrained model predicts the uniform
 * distribution (per-token loss exactly ln(vocabSize)).
 */

import {
  Tensor,
  add,
  addRowBias,
  concatCols,
  constant,
  crossEntropy,
  gatherRows,
  layerNorm,
  matmul,
  param,
  pickRow,
  relu,
  scale,
  sliceCols,
  softmaxRows,
  transpose,
} from "./tensor.js";
import { Rng } from "./rng.js";

export interface TinyModelConfig {
  vocabSize: number;
  width: number;
  heads: number;
  encLayers: number;
  decLayers: number;
  ffWidth: number;
  maxLen: number;
  initStd: number;
  seed: number;
}

export function defaultConfig(vocabSize: number, maxLen: number): TinyModelConfig {
  return {
    vocabSize,
    width: 64,
    heads: 4,
    encLayers: 2,
    decLayers: 2,
    ffWidth: 128,
    maxLen,
    initStd: 0.08,
    seed: 1234,
  };
}

interface AttentionParams {
  wq: Tensor;
  wk: Tensor;
  wv: Tensor;
  wo: Tensor;
  bo: Tensor;
}

interface LayerNormParams {
  gain: Tensor;
  bias: Tensor;
}

interface EncLayer {
  ln1: LayerNormParams;
  attn: AttentionParams;
  ln2: LayerNormParams;
  w1: Tensor;
  b1: Tensor;
  w2: Tensor;
  b2: Tensor;
}

interface DecLayer extends EncLayer {
  lnCross: LayerNormParams;
  cross: AttentionParams;
}

function causalMask(rows: number, cols: number): Float64Array {
  const m = new Float64Array(rows * cols);
  for (let i = 0; i < rows; i++)
    for (let j = 0; j < cols; j++) if (j > i) m[i * cols + j] = -1e30;
  return m;
}

export class TinyTransformer {
  cfg: TinyModelConfig;
  params = new Map<string, Tensor>();
  private posTable: Float64Array;

  constructor(cfg: TinyModelConfig) {
    if (cfg.width % cfg.heads !== 0) throw new Error("width must be divisible by heads");
    this.cfg = cfg;
    const rng = new Rng(cfg.seed);
    const normal = (std: number) => () => rng.gauss() * std;
    const d = cfg.width;

    this.addParam("embed", param(cfg.vocabSize, d, normal(cfg.initStd)));
    // zero output projection => exact uniform predictions at init
    this.addParam("out.w", param(d, cfg.vocabSize, () => 0));
    this.addParam("out.b", param(1, cfg.vocabSize, () => 0));
    for (let l = 0; l < cfg.encLayers; l++) this.makeLayer(`enc.${l}`, false, normal);
    for (let l = 0; l < cfg.decLayers; l++) this.makeLayer(`dec.${l}`, true, normal);
    this.addParam("enc.lnf.gain", param(1, d, () => 1));
    this.addParam("enc.lnf.bias", param(1, d, () => 0));
    this.addParam("dec.lnf.gain", param(1, d, () => 1));
    this.addParam("dec.lnf.bias", param(1, d, () => 0));

    // fixed sinusoidal positions
    this.posTable = new Float64Array(cfg.maxLen * d);
    for (let pos = 0; pos < cfg.maxLen; pos++) {
      for (let i = 0; i < d / 2; i++) {
        const angle = pos / Math.pow(10000, (2 * i) / d);
        this.posTable[pos * d + 2 * i] = Math.sin(angle);
        this.posTable[pos * d + 2 * i + 1] = Math.cos(angle);
      }
    }
  }

  private addParam(name: string, t: Tensor): void {
    this.params.set(name, t);
  }

  private makeLayer(prefix: string, withCross: boolean, normal: (s: number) => () => number) {
    const { width: d, ffWidth, initStd } = this.cfg;
    const attnNames = withCross ? ["self", "cross"] : ["self"];
    for (const a of attnNames) {
      for (const w of ["wq", "wk", "wv", "wo"]) {
        this.addParam(`${prefix}.${a}.${w}`, param(d, d, normal(initStd)));
      }
      this.addParam(`${prefix}.${a}.bo`, param(1, d, () => 0));
    }
    const lnNames = withCross ? ["ln1", "lnCross", "ln2"] : ["ln1", "ln2"];
    for (const ln of lnNames) {
      this.addParam(`${prefix}.${ln}.gain`, param(1, d, () => 1));
      this.addParam(`${prefix}.${ln}.bias`, param(1, d, () => 0));
    }
    this.addParam(`${prefix}.ff.w1`, param(d, ffWidth, normal(initStd)));
    this.addParam(`${prefix}.ff.b1`, param(1, ffWidth, () => 0));
    this.addParam(`${prefix}.ff.w2`, param(ffWidth, d, normal(initStd)));
    this.addParam(`${prefix}.ff.b2`, param(1, d, () => 0));
  }

  p(name: string): Tensor {
    const t = this.params.get(name);
    if (!t) throw new Error(`unknown parameter ${name}`);
    return t;
  }

  parameterList(): [string, Tensor][] {
    return [...this.params.entries()];
  }

  private ln(prefix: string, x: Tensor): Tensor {
    return layerNorm(x, this.p(`${prefix}.gain`), this.p(`${prefix}.bias`));
  }

  private attention(
    prefix: string,
    queries: Tensor,
    keysValues: Tensor,
    mask: Float64Array | null
  ): Tensor {
    const { heads, width: d } = this.cfg;
    const hd = d / heads;
    const q = matmul(queries, this.p(`${prefix}.wq`));
    const k = matmul(keysValues, this.p(`${prefix}.wk`));
    const v = matmul(keysValues, this.p(`${prefix}.wv`));
    const outputs: Tensor[] = [];
    for (let h = 0; h < heads; h++) {
      const qh = sliceCols(q, h * hd, (h + 1) * hd);
      const kh = sliceCols(k, h * hd, (h + 1) * hd);
      const vh = sliceCols(v, h * hd, (h + 1) * hd);
      const scores = scale(matmul(qh, transpose(kh)), 1 / Math.sqrt(hd));
      const attn = softmaxRows(scores, mask);
      outputs.push(matmul(attn, vh));
    }
    return addRowBias(matmul(concatCols(outputs), this.p(`${prefix}.wo`)), this.p(`${prefix}.bo`));
  }

  private feedForward(prefix: string, x: Tensor): Tensor {
    const h = relu(addRowBias(matmul(x, this.p(`${prefix}.w1`)), this.p(`${prefix}.b1`)));
    return addRowBias(matmul(h, this.p(`${prefix}.w2`)), this.p(`${prefix}.b2`));
  }

  private embed(ids: Int32Array): Tensor {
    const d = this.cfg.width;
    if (ids.length > this.cfg.maxLen) throw new Error(`sequence length ${ids.length} > maxLen`);
    const pos = constant(ids.length, d, this.posTable.slice(0, ids.length * d));
    return add(gatherRows(this.p("embed"), ids), pos);
  }

  encode(srcIds: Int32Array): Tensor {
    let x = this.embed(srcIds);
    for (let l = 0; l < this.cfg.encLayers; l++) {
      const pre = `enc.${l}`;
      const normed = this.ln(`${pre}.ln1`, x);
      x = add(x, this.attention(`${pre}.self`, normed, normed, null));
      x = add(x, this.feedForward(`${pre}.ff`, this.ln(`${pre}.ln2`, x)));
    }
    return this.ln("enc.lnf", x);
  }

  decode(decInIds: Int32Array, memory: Tensor): Tensor {
    let x = this.embed(decInIds);
    const mask = causalMask(decInIds.length, decInIds.length);
    for (let l = 0; l < this.cfg.decLayers; l++) {
      const pre = `dec.${l}`;
      const normed = this.ln(`${pre}.ln1`, x);
      x = add(x, this.attention(`${pre}.self`, normed, normed, mask));
      x = add(x, this.attention(`${pre}.cross`, this.ln(`${pre}.lnCross`, x), memory, null));
      x = add(x, this.feedForward(`${pre}.ff`, this.ln(`${pre}.ln2`, x)));
    }
    return this.ln("dec.lnf", x);
  }

  /** Logits [T, V] for next-token prediction given decoder inputs. */
  forward(srcIds: Int32Array, decInIds: Int32Array): Tensor {
    const memory = this.encode(srcIds);
    const hidden = this.decode(decInIds, memory);
    return addRowBias(matmul(hidden, this.p("out.w")), this.p("out.b"));
  }

  /** Hidden states for classification: encoder and decoder both read `ids`. */
  representations(ids: Int32Array): { encoder: Tensor; decoder: Tensor } {
    const memory = this.encode(ids);
    return { encoder: memory, decoder: this.decode(ids, memory) };
  }

  zeroGrads(): void {
    for (const [, t] of this.params) t.zeroGrad();
  }

  /** Copy of all parameter values, keyed by name. */
  snapshot(): Map<string, Float64Array> {
    const snap = new Map<string, Float64Array>();
    for (const [name, t] of this.params) snap.set(name, t.data.slice());
    return snap;
  }

  restore(snap: Map<string, Float64Array>): void {
    for (const [name, t] of this.params) {
      const saved = snap.get(name);
      if (!saved || saved.length !== t.data.length) throw new Error(`bad snapshot entry ${name}`);
      t.data.set(saved);
    }
  }
}

/**
 * Teacher-forced mean per-token NLL of `targetIds` given `srcIds`.
 * Decoder input is BOS followed by the target shifted right.
 */
export function nllLoss(
  model: TinyTransformer,
  srcIds: Int32Array,
  targetIds: Int32Array,
  bosId: number
): Tensor {
  for (const id of [...srcIds, ...targetIds]) {
    if (id < 0 || id >= model.cfg.vocabSize) throw new Error(`token id ${id} out of range`);
  }
  const decIn = new Int32Array(targetIds.length);
  decIn[0] = bosId;
  decIn.set(targetIds.subarray(0, targetIds.length - 1), 1);
  const logits = model.forward(srcIds, decIn);
  return crossEntropy(logits, targetIds);
}

export type HeadVariant = "ENCODER_ONLY" | "DECODER_ONLY" | "CONCAT";

export class ClassifierHead {
  variant: HeadVariant;
  w: Tensor;
  b: Tensor;

  constructor(variant: HeadVariant, width: number, numLabels: number, seed = 7) {
    this.variant = variant;
    const inWidth = variant === "CONCAT" ? 2 * width : width;
    const rng = new Rng(seed);
    this.w = param(inWidth, numLabels, () => rng.gauss() * 0.05);
    this.b = param(1, numLabels, () => 0);
  }

  parameterList(): [string, Tensor][] {
    return [
      [`head.${this.variant}.w`, this.w],
      [`head.${this.variant}.b`, this.b],
    ];
  }

  zeroGrads(): void {
    this.w.zeroGrad();
    this.b.zeroGrad();
  }

  /**
   * Label logits for a sequence framed as BOS ... EOS. Pools the encoder at
   * the leading BOS and the decoder at the final EOS position.
   */
  logits(model: TinyTransformer, ids: Int32Array): Tensor {
    const { encoder, decoder } = model.representations(ids);
    let pooled: Tensor;
    if (this.variant === "ENCODER_ONLY") {
      pooled = pickRow(encoder, 0);
    } else if (this.variant === "DECODER_ONLY") {
      pooled = pickRow(decoder, ids.length - 1);
    } else {
      pooled = concatCols([pickRow(encoder, 0), pickRow(decoder, ids.length - 1)]);
    }
    return addRowBias(matmul(pooled, this.w), this.b);
  }
}
