import { spawnSync } from 'node:child_process';
import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

/** Build an rfmap dataset through the primary CLI; returns its root. */
export function generateDataset(opts: {
  seed: number;
  scenes: number;
  gridPx: number;
  ues: number;
  bss: number;
  split: string;
  dir?: string;
}): string {
  const root =
    opts.dir ?? fs.mkdtempSync(path.join(os.tmpdir(), 'rfmap-trainer-'));
  const res = spawnSync(
    'python3',
    [
      '-m', 'rfmap.cli', 'generate',
      '--seed', String(opts.seed),
      '--scenes', String(opts.scenes),
      '--grid-px', String(opts.gridPx),
      '--ues', String(opts.ues),
      '--bss', String(opts.bss),
      '--split', opts.split,
      '--out', root,
    ],
    { encoding: 'utf-8', maxBuffer: 16 * 1024 * 1024 }
  );
  if (res.status !== 0) {
    throw new Error(`dataset generation failed: ${res.stderr || res.stdout}`);
  }
  return root;
}

export function rmrf(dir: string): void {
  fs.rmSync(dir, { recursive: true, force: true });
}
