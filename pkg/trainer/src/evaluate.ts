/**
 * Metric evaluation is delegated to the dataset toolkit's CLI so there is a
 * single source of metric truth; this module shells out and parses the
 * machine-readable final stdout line.
 */

import { spawnSync } from 'node:child_process';

export interface MeanScores {
  iou: number;
  precision: number;
  recall: number;
  hausdorff_m: number;
  chamfer_m: number;
}

export interface EvalReport {
  n_maps: number;
  mean: MeanScores;
  per_map: Record<string, MeanScores>;
}

export function evaluateWithCli(
  predDir: string,
  gtDir: string,
  sideM: number,
  python = 'python3'
): EvalReport {
  const res = spawnSync(
    python,
    ['-m', 'rfmap.cli', 'evaluate', '--pred', predDir, '--gt', gtDir,
     '--side-m', String(sideM)],
    { encoding: 'utf-8', maxBuffer: 64 * 1024 * 1024 }
  );
  if (res.status !== 0) {
    throw new Error(
      `evaluate failed (exit ${res.status}): ${res.stderr || res.stdout}`
    );
  }
  const lines = res.stdout.trim().split('\n');
  return JSON.parse(lines[lines.length - 1]) as EvalReport;
}
