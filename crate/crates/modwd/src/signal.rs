//! PCM WAV I/O and SNR-controlled mixing.
//!
//! Reads RIFF/WAVE containers holding mono 16-bit PCM or 32-bit IEEE float
//! data and normalizes samples to `[-1, 1]`. Writes mono PCM16 little-endian
//! by default, float32 behind a flag.

use crate::error::{Error, Result};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

/// Mono time-domain signal with amplitudes nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcmSignal {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl PcmSignal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        Self { samples, sample_rate_hz }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean squared amplitude.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }
}

/// Sample encoding used by [`write_wav_format`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn read_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

/// Read a mono PCM16 or float32 WAV file, normalizing to `[-1, 1]`.
pub fn read_wav(path: &Path) -> Result<PcmSignal> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedHeader(path.display().to_string()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format tag, channels, rate, bits)
    let mut data: Option<(usize, usize)> = None; // (offset, len)
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(&bytes, pos + 4) as usize;
        let body = pos + 8;
        if body + size > bytes.len() {
            return Err(Error::MalformedHeader(format!(
                "chunk {:?} overruns file",
                String::from_utf8_lossy(id)
            )));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::MalformedHeader("fmt chunk too small".into()));
                }
                fmt = Some((
                    read_u16(&bytes, body),
                    read_u16(&bytes, body + 2),
                    read_u32(&bytes, body + 4),
                    read_u16(&bytes, body + 14),
                ));
            }
            b"data" => data = Some((body, size)),
            _ => {}
        }
        pos = body + size + (size & 1); // chunks are word-aligned
    }

    let (tag, channels, rate, bits) =
        fmt.ok_or_else(|| Error::MalformedHeader("missing fmt chunk".into()))?;
    if channels != 1 {
        return Err(Error::UnsupportedFormat(format!("{channels} channels, need mono")));
    }
    let (off, len) = data.ok_or_else(|| Error::MalformedHeader("missing data chunk".into()))?;
    if len == 0 {
        return Err(Error::EmptyAudio);
    }
    let body = &bytes[off..off + len];
    let samples = match (tag, bits) {
        (1, 16) => body
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0)
            .collect(),
        (3, 32) => body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        _ => {
            return Err(Error::UnsupportedFormat(format!(
                "format tag {tag} with {bits} bits"
            )))
        }
    };
    Ok(PcmSignal::new(samples, rate))
}

/// Write a mono PCM16 WAV file. Out-of-range amplitudes are hard-clipped;
/// returns the clip count.
pub fn write_wav(path: &Path, signal: &PcmSignal) -> Result<usize> {
    write_wav_format(path, signal, WavEncoding::Pcm16)
}

pub fn write_wav_format(path: &Path, signal: &PcmSignal, enc: WavEncoding) -> Result<usize> {
    if signal.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let mut clipped = 0usize;
    let body: Vec<u8> = match enc {
        WavEncoding::Pcm16 => {
            let mut out = Vec::with_capacity(signal.len() * 2);
            for &s in &signal.samples {
                if !(-1.0..=1.0).contains(&s) {
                    clipped += 1;
                }
                let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                out.extend_from_slice(&q.to_le_bytes());
            }
            out
        }
        WavEncoding::Float32 => {
            let mut out = Vec::with_capacity(signal.len() * 4);
            for &s in &signal.samples {
                out.extend_from_slice(&(s as f32).to_le_bytes());
            }
            out
        }
    };
    if clipped == signal.len() {
        return Err(Error::AllSamplesClipped);
    }

    let (tag, bits): (u16, u16) = match enc {
        WavEncoding::Pcm16 => (1, 16),
        WavEncoding::Float32 => (3, 32),
    };
    let block_align = (bits / 8) as u32;
    let mut hdr = Vec::with_capacity(44);
    hdr.extend_from_slice(b"RIFF");
    hdr.extend_from_slice(&(36 + body.len() as u32).to_le_bytes());
    hdr.extend_from_slice(b"WAVEfmt ");
    hdr.extend_from_slice(&16u32.to_le_bytes());
    hdr.extend_from_slice(&tag.to_le_bytes());
    hdr.extend_from_slice(&1u16.to_le_bytes());
    hdr.extend_from_slice(&signal.sample_rate_hz.to_le_bytes());
    hdr.extend_from_slice(&(signal.sample_rate_hz * block_align).to_le_bytes());
    hdr.extend_from_slice(&(block_align as u16).to_le_bytes());
    hdr.extend_from_slice(&bits.to_le_bytes());
    hdr.extend_from_slice(b"data");
    hdr.extend_from_slice(&(body.len() as u32).to_le_bytes());

    let mut f = File::create(path)?;
    f.write_all(&hdr)?;
    f.write_all(&body)?;
    Ok(clipped)
}

/// Add `noise` to `clean` scaled so the mixture has the requested SNR.
///
/// Noise shorter than the clean signal is tiled end-to-end. `snr_db` of
/// `f64::INFINITY` is the no-mix sentinel and returns the clean signal.
pub fn mix_at_snr(clean: &PcmSignal, noise: &PcmSignal, snr_db: f64) -> Result<PcmSignal> {
    if clean.sample_rate_hz != noise.sample_rate_hz {
        return Err(Error::SampleRateMismatch { a: clean.sample_rate_hz, b: noise.sample_rate_hz });
    }
    if snr_db.is_infinite() && snr_db > 0.0 {
        return Ok(clean.clone());
    }
    if clean.is_empty() || noise.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let n = clean.len();
    let tiled: Vec<f64> = (0..n).map(|i| noise.samples[i % noise.len()]).collect();
    let p_clean = clean.power();
    let p_noise = tiled.iter().map(|s| s * s).sum::<f64>() / n as f64;
    if p_clean == 0.0 || p_noise == 0.0 {
        return Err(Error::SilentInput);
    }
    let gain = (p_clean / (p_noise * 10f64.powf(snr_db / 10.0))).sqrt();
    let samples = clean
        .samples
        .iter()
        .zip(&tiled)
        .map(|(c, nz)| c + gain * nz)
        .collect();
    Ok(PcmSignal::new(samples, clean.sample_rate_hz))
}
