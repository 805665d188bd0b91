/**
 * Reader for an emitted batch directory: manifest.json, the vocab JSON it
 * points at, and batch-*.jsonl record files.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export type TaskName = "mono" | "dict" | "bitext";

export interface TrainingRecord {
  task: TaskName;
  src_lang: string;
  tgt_lang: string;
  source_ids: number[];
  target_ids: number[];
  provenance: Record<string, unknown>;
  truncated: boolean;
}

export interface Vocab {
  tokens: string[];
  langs: string[];
  size: number;
  padId: number;
  unkId: number;
  bosId: number;
  eosId: number;
  maskId: number;
}

export interface Emission {
  dir: string;
  manifest: Record<string, any>;
  vocab: Vocab;
  maxLen: number;
  records: TrainingRecord[];
}

export function loadVocab(vocabPath: string): Vocab {
  const raw = JSON.parse(fs.readFileSync(vocabPath, "utf-8"));
  const tokens: string[] = raw.tokens;
  const id = (tok: string) => {
    const i = tokens.indexOf(tok);
    if (i < 0) throw new Error(`vocab missing special token ${tok}`);
    return i;
  };
  return {
    tokens,
    langs: raw.langs,
    size: tokens.length,
    padId: id("<pad>"),
    unkId: id("<unk>"),
    bosId: id("<s>"),
    eosId: id("</s>"),
    maskId: id("<mask>"),
  };
}

export function loadEmission(dir: string): Emission {
  const manifest = JSON.parse(fs.readFileSync(path.join(dir, "manifest.json"), "utf-8"));
  const vocab = loadVocab(manifest.config.vocab_path);
  const records: TrainingRecord[] = [];
  const batchFiles = fs
    .readdirSync(dir)
    .filter((f) => /^batch-\d+\.jsonl$/.test(f))
    .sort();
  if (batchFiles.length === 0) throw new Error(`no batch files in ${dir}`);
  for (const file of batchFiles) {
    const text = fs.readFileSync(path.join(dir, file), "utf-8");
    for (const line of text.split("\n")) {
      if (!line.trim()) continue;
      const rec = JSON.parse(line) as TrainingRecord;
      for (const id of [...rec.source_ids, ...rec.target_ids]) {
        if (!Number.isInteger(id) || id < 0 || id >= vocab.size) {
          throw new Error(`record in ${file} has out-of-range token id ${id}`);
        }
      }
      records.push(rec);
    }
  }
  return { dir, manifest, vocab, maxLen: manifest.config.max_len, records };
}
