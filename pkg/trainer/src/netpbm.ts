/** Binary PBM (P4) read/write, byte-compatible with the evaluation CLI. */

import * as fs from 'node:fs';

export interface Bitmap {
  width: number;
  height: number;
  bits: Uint8Array; // one byte per pixel, 0 or 1, row-major
}

export function writePbm(path: string, bm: Bitmap): void {
  const rowBytes = (bm.width + 7) >> 3;
  const raster = new Uint8Array(rowBytes * bm.height);
  for (let y = 0; y < bm.height; y++) {
    for (let x = 0; x < bm.width; x++) {
      if (bm.bits[y * bm.width + x]) {
        raster[y * rowBytes + (x >> 3)] |= 0x80 >> (x & 7);
      }
    }
  }
  const header = Buffer.from(`P4\n${bm.width} ${bm.height}\n`, 'latin1');
  fs.writeFileSync(path, Buffer.concat([header, Buffer.from(raster)]));
}

export function readPbm(path: string): Bitmap {
  const buf = fs.readFileSync(path);
  if (buf.toString('latin1', 0, 2) !== 'P4') {
    throw new Error(`${path}: not a binary PBM`);
  }
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 2) {
    while (pos < buf.length && /\s/.test(String.fromCharCode(buf[pos]))) pos++;
    if (buf[pos] === 0x23) {
      while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      continue;
    }
    const start = pos;
    while (pos < buf.length && !/\s/.test(String.fromCharCode(buf[pos]))) pos++;
    fields.push(parseInt(buf.toString('latin1', start, pos), 10));
  }
  pos += 1; // single whitespace separates header from raster
  const [width, height] = fields;
  const rowBytes = (width + 7) >> 3;
  if (buf.length - pos !== rowBytes * height) {
    throw new Error(
      `${path}: expected ${rowBytes * height} raster bytes, got ${buf.length - pos}`
    );
  }
  const bits = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const byte = buf[pos + y * rowBytes + (x >> 3)];
      bits[y * width + x] = (byte >> (7 - (x & 7))) & 1;
    }
  }
  return { width, height, bits };
}
