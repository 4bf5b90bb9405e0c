/** Reader for RFT1 tensor files and their JSON sidecars (little-endian). */

import * as fs from 'node:fs';

export interface ChannelLabel {
  role: 'aoa' | 'aod';
  ue: number;
  bs?: number;
}

export interface GridInfo {
  width_px: number;
  height_px: number;
  side_m: number;
}

export interface RayTensor {
  channels: number;
  height: number;
  width: number;
  data: Float32Array; // channel-major, row-major
  labels: ChannelLabel[];
  grid: GridInfo;
}

export function readRft(path: string): RayTensor {
  const buf = fs.readFileSync(path);
  if (buf.length < 16 || buf.toString('latin1', 0, 4) !== 'RFT1') {
    throw new Error(`${path}: not an RFT1 file`);
  }
  const channels = buf.readUInt32LE(4);
  const height = buf.readUInt32LE(8);
  const width = buf.readUInt32LE(12);
  const n = channels * height * width;
  const expected = 16 + 4 * n;
  if (buf.length !== expected) {
    throw new Error(`${path}: expected ${expected} bytes, got ${buf.length}`);
  }
  // copy to a fresh (aligned) buffer before viewing as float32
  const body = buf.buffer.slice(buf.byteOffset + 16, buf.byteOffset + expected);
  const data = new Float32Array(body);

  const sidecar = JSON.parse(fs.readFileSync(path + '.json', 'utf-8'));
  const labels = sidecar.channel_labels as ChannelLabel[];
  const grid = sidecar.grid as GridInfo;
  if (labels.length !== channels) {
    throw new Error(`${path}: sidecar declares ${labels.length} labels for ${channels} channels`);
  }
  if (grid.height_px !== height || grid.width_px !== width) {
    throw new Error(`${path}: sidecar grid does not match tensor dimensions`);
  }
  return { channels, height, width, data, labels, grid };
}
