export { hann, fft, frameCount, frameSignal, frameEnergyDb, magnitudeSpectrum, melFilterbank, nextPowerOfTwo, spectralCentroid } from "./dsp.js";
export { readWav, writeWavPcm16, type AudioClip } from "./wav.js";
export { readIspf, writeIspf, featureFrameCount, ISPF_MAGIC, ISPF_VERSION, type FeatureData } from "./ispf.js";
export { estimatePitch, type PitchFrame, type PitchOptions } from "./pitch.js";
export { loadFeatureModel, SpectralEmbedder, type FeatureModel } from "./embed.js";
export { recognizePhones, ipaToXsampa, type PhoneRow } from "./phones.js";
export { formatPitchCsv, formatPhonesCsv, PITCH_HEADER, PHONES_HEADER } from "./csv.js";
export { runExport, outputPath, type ExportKind, type ExportOptions } from "./export.js";
