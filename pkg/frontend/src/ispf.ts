/**
 * ISPF v1 binary feature files (little-endian):
 * magic "ISPF", u32 version = 1, f64 hop_seconds, f64 start_time_s,
 * u32 dim, u64 n_frames, then n_frames x dim float32 values row-major.
 */

export const ISPF_MAGIC = "ISPF";
export const ISPF_VERSION = 1;
const HEADER_BYTES = 36;

export interface FeatureData {
  hopSeconds: number;
  startTimeS: number;
  dim: number;
  /** Row-major float32 values, length nFrames * dim. */
  values: Float32Array;
}

export function featureFrameCount(data: FeatureData): number {
  return data.values.length / data.dim;
}

export function writeIspf(data: FeatureData): Buffer {
  if (data.dim < 1 || data.values.length % data.dim !== 0) {
    throw new Error("values length must be a multiple of dim");
  }
  const nFrames = featureFrameCount(data);
  const buf = Buffer.alloc(HEADER_BYTES + 4 * data.values.length);
  buf.write(ISPF_MAGIC, 0, "ascii");
  buf.writeUInt32LE(ISPF_VERSION, 4);
  buf.writeDoubleLE(data.hopSeconds, 8);
  buf.writeDoubleLE(data.startTimeS, 16);
  buf.writeUInt32LE(data.dim, 24);
  buf.writeBigUInt64LE(BigInt(nFrames), 28);
  for (let i = 0; i < data.values.length; i++) {
    buf.writeFloatLE(data.values[i], HEADER_BYTES + 4 * i);
  }
  return buf;
}

export function readIspf(buf: Buffer): FeatureData {
  if (buf.length < HEADER_BYTES) {
    throw new Error(`truncated header (${buf.length} bytes)`);
  }
  const magic = buf.toString("ascii", 0, 4);
  if (magic !== ISPF_MAGIC) {
    throw new Error(`bad magic ${JSON.stringify(magic)}`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== ISPF_VERSION) {
    throw new Error(`unsupported version ${version}`);
  }
  const hopSeconds = buf.readDoubleLE(8);
  const startTimeS = buf.readDoubleLE(16);
  const dim = buf.readUInt32LE(24);
  const nFrames = Number(buf.readBigUInt64LE(28));
  const expected = HEADER_BYTES + 4 * dim * nFrames;
  if (buf.length !== expected) {
    throw new Error(`payload size mismatch, expected ${expected} bytes, got ${buf.length}`);
  }
  const values = new Float32Array(dim * nFrames);
  for (let i = 0; i < values.length; i++) {
    values[i] = buf.readFloatLE(HEADER_BYTES + 4 * i);
  }
  return { hopSeconds, startTimeS, dim, values };
}
