#!/usr/bin/env node
/** Trainer CLI: train, predict, evaluate (via the dataset toolkit). */

import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { evaluateWithCli } from './evaluate.js';
import { predictSplit } from './predict.js';
import { DEFAULTS, train } from './train.js';

await yargs(hideBin(process.argv))
  .command(
    'train',
    'train the U-Net on an rfmap dataset',
    (y) =>
      y
        .option('data', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true })
        .option('epochs', { type: 'number', default: DEFAULTS.epochs })
        .option('batch-size', { type: 'number', default: DEFAULTS.batchSize })
        .option('lr', { type: 'number', default: DEFAULTS.lr })
        .option('seed', { type: 'number', default: DEFAULTS.seed })
        .option('base-filters', { type: 'number', default: DEFAULTS.baseFilters })
        .option('subsample', { type: 'boolean', default: DEFAULTS.subsample }),
    (argv) => {
      const result = train({
        datasetRoot: argv.data,
        outDir: argv.out,
        epochs: argv.epochs,
        batchSize: argv['batch-size'],
        lr: argv.lr,
        seed: argv.seed,
        subsample: argv.subsample,
        baseFilters: argv['base-filters'],
        levels: DEFAULTS.levels,
      });
      console.log(`best epoch ${result.bestEpoch}; checkpoint ${result.checkpointPath}`);
    }
  )
  .command(
    'predict',
    'write binarized predictions for one split',
    (y) =>
      y
        .option('checkpoint', { type: 'string', demandOption: true })
        .option('data', { type: 'string', demandOption: true })
        .option('split', {
          type: 'string',
          default: 'test',
          choices: ['train', 'val', 'test'] as const,
        })
        .option('out', { type: 'string', demandOption: true }),
    (argv) => {
      predictSplit(
        argv.checkpoint,
        argv.data,
        argv.split as 'train' | 'val' | 'test',
        argv.out
      );
    }
  )
  .command(
    'evaluate',
    'score predictions with the dataset toolkit CLI',
    (y) =>
      y
        .option('pred', { type: 'string', demandOption: true })
        .option('gt', { type: 'string', demandOption: true })
        .option('side-m', { type: 'number', default: 200.0 }),
    (argv) => {
      const report = evaluateWithCli(argv.pred, argv.gt, argv['side-m']);
      console.log(JSON.stringify(report.mean));
    }
  )
  .demandCommand(1)
  .strict()
  .help()
  .parseAsync();
