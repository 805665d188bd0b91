/**
 * Training loop over an emitted batch directory.
 *
 * Each optimizer step averages gradients over a small group of records drawn
 * round-robin from a seeded shuffle of the emission. Per-record losses are
 * logged to losses.csv as (step, task, loss) and kept per task in memory.
 */

import * as fs from "node:fs";

import { Adam } from "./adam.js";
import { Emission, TaskName, TrainingRecord } from "./data.js";
import { TinyTransformer, defaultConfig, nllLoss } from "./model.js";
import { Rng } from "./rng.js";
import { scale } from "./tensor.js";

export interface TrainOptions {
  steps: number;
  batchSize?: number;
  lr?: number;
  seed?: number;
  /** No-signal control: resample every target token uniformly at random. */
  scrambleTargets?: boolean;
  lossCsvPath?: string;
  model?: TinyTransformer;
}

export interface TrainResult {
  model: TinyTransformer;
  uniformLoss: number;
  perTaskLosses: Record<TaskName, number[]>;
  finalLoss(task: TaskName): number;
  reduction(task: TaskName): number;
}

const TASKS: TaskName[] = ["mono", "dict", "bitext"];

function meanTail(losses: number[], fraction = 0.25): number {
  if (losses.length === 0) throw new Error("no losses recorded for task");
  const tail = losses.slice(Math.floor(losses.length * (1 - fraction)));
  return tail.reduce((a, b) => a + b, 0) / tail.length;
}

export function train(emission: Emission, opts: TrainOptions): TrainResult {
  const batchSize = opts.batchSize ?? 4;
  const seed = opts.seed ?? 17;
  const vocab = emission.vocab;
  const model =
    opts.model ?? new TinyTransformer(defaultConfig(vocab.size, emission.maxLen + 1));

  const rng = new Rng(seed);
  const records = [...emission.records];
  rng.shuffle(records);
  if (opts.scrambleTargets) {
    for (let i = 0; i < records.length; i++) {
      records[i] = {
        ...records[i],
        target_ids: records[i].target_ids.map(() => 1 + rng.randrange(vocab.size - 1)),
      };
    }
  }

  const optimizer = new Adam({ lr: opts.lr ?? 2e-3 });
  optimizer.addParams(model.parameterList());

  const perTaskLosses: Record<TaskName, number[]> = { mono: [], dict: [], bitext: [] };
  const csvRows: string[] = ["step,task,loss"];
  let cursor = 0;
  const nextRecord = (): TrainingRecord => {
    const rec = records[cursor];
    cursor = (cursor + 1) % records.length;
    return rec;
  };

  for (let step = 0; step < opts.steps; step++) {
    model.zeroGrads();
    for (let b = 0; b < batchSize; b++) {
      const rec = nextRecord();
      const loss = nllLoss(
        model,
        Int32Array.from(rec.source_ids),
        Int32Array.from(rec.target_ids),
        vocab.bosId
      );
      scale(loss, 1 / batchSize).backward();
      perTaskLosses[rec.task].push(loss.item());
      csvRows.push(`${step},${rec.task},${loss.item().toFixed(6)}`);
    }
    optimizer.step();
  }

  if (opts.lossCsvPath) fs.writeFileSync(opts.lossCsvPath, csvRows.join("\n") + "\n");

  const uniformLoss = Math.log(vocab.size);
  return {
    model,
    uniformLoss,
    perTaskLosses,
    finalLoss: (task) => meanTail(perTaskLosses[task]),
    reduction: (task) => 1 - meanTail(perTaskLosses[task]) / uniformLoss,
  };
}

export { TASKS };
