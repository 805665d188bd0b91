/**
 * Classification finetuning: attach a head variant to a shared checkpoint,
 * train head (fast) + backbone (slow) on a labeled toy set, report held-out
 * accuracy per variant as JSON.
 */

import * as fs from "node:fs";

import { Adam } from "./adam.js";
import { Vocab } from "./data.js";
import { ClassifierHead, HeadVariant, TinyTransformer } from "./model.js";
import { Rng } from "./rng.js";
import { crossEntropy, scale } from "./tensor.js";

export interface LabeledExample {
  ids: Int32Array;
  label: number;
}

export interface ToyDataset {
  train: LabeledExample[];
  heldout: LabeledExample[];
  numLabels: number;
}

/**
 * Linearly separable binary task: the token right after BOS is one of two
 * class markers; the rest is random filler. Sequences end with EOS.
 */
export function makeToyClassificationData(
  vocab: Vocab,
  opts: { train: number; heldout: number; seqLen?: number; seed?: number }
): ToyDataset {
  const seqLen = opts.seqLen ?? 10;
  const rng = new Rng(opts.seed ?? 31);
  const firstWord = vocab.tokens.findIndex((t) => !t.startsWith("<"));
  if (firstWord < 0 || vocab.size - firstWord < 3) throw new Error("vocab too small for toy task");
  const markers = [firstWord, firstWord + 1];
  const fillerLow = firstWord + 2;

  const make = (): LabeledExample => {
    const label = rng.randrange(2);
    const ids = new Int32Array(seqLen);
    ids[0] = vocab.bosId;
    ids[1] = markers[label];
    for (let i = 2; i < seqLen - 1; i++)
      ids[i] = fillerLow + rng.randrange(vocab.size - fillerLow);
    ids[seqLen - 1] = vocab.eosId;
    return { ids, label };
  };
  return {
    train: Array.from({ length: opts.train }, make),
    heldout: Array.from({ length: opts.heldout }, make),
    numLabels: 2,
  };
}

export interface FinetuneOptions {
  steps?: number;
  batchSize?: number;
  headLr?: number;
  backboneLr?: number;
  seed?: number;
}

export interface VariantReport {
  variant: HeadVariant;
  accuracy: number;
  heldoutSize: number;
}

export function finetuneHead(
  model: TinyTransformer,
  variant: HeadVariant,
  data: ToyDataset,
  opts: FinetuneOptions = {}
): VariantReport {
  const head = new ClassifierHead(variant, model.cfg.width, data.numLabels, opts.seed ?? 7);
  const optimizer = new Adam({ lr: opts.headLr ?? 1e-2 });
  optimizer.addParams(head.parameterList());
  optimizer.addParams(model.parameterList(), opts.backboneLr ?? 1.5e-3);

  const rng = new Rng(opts.seed ?? 7);
  const batchSize = opts.batchSize ?? 4;
  const order = [...data.train];
  let cursor = 0;
  for (let step = 0; step < (opts.steps ?? 300); step++) {
    if (cursor === 0) rng.shuffle(order);
    model.zeroGrads();
    head.zeroGrads();
    for (let b = 0; b < batchSize; b++) {
      const ex = order[cursor];
      cursor = (cursor + 1) % order.length;
      const logits = head.logits(model, ex.ids);
      const loss = crossEntropy(logits, Int32Array.of(ex.label));
      scale(loss, 1 / batchSize).backward();
    }
    optimizer.step();
  }

  let correct = 0;
  for (const ex of data.heldout) {
    const logits = head.logits(model, ex.ids);
    let best = 0;
    for (let j = 1; j < data.numLabels; j++) if (logits.data[j] > logits.data[best]) best = j;
    if (best === ex.label) correct++;
  }
  return { variant, accuracy: correct / data.heldout.length, heldoutSize: data.heldout.length };
}

/** Run all three variants from the same checkpoint; optionally write a JSON report. */
export function headParityReport(
  model: TinyTransformer,
  data: ToyDataset,
  opts: FinetuneOptions = {},
  reportPath?: string
): VariantReport[] {
  const checkpoint = model.snapshot();
  const reports: VariantReport[] = [];
  for (const variant of ["ENCODER_ONLY", "DECODER_ONLY", "CONCAT"] as HeadVariant[]) {
    model.restore(checkpoint);
    reports.push(finetuneHead(model, variant, data, opts));
  }
  model.restore(checkpoint);
  if (reportPath) fs.writeFileSync(reportPath, JSON.stringify(reports, null, 2) + "\n");
  return reports;
}
