//! Temporal-axis wavelet denoising of the magnitude spectrogram.
//!
//! Each acoustic-frequency row of the magnitude plane is decomposed by a
//! one-level DWT along the frame axis, the detail coefficients are scaled by
//! `alpha`, and the rows are reconstructed and resynthesized with the
//! original phase. `alpha = 1` is the unprocessed baseline and is passed
//! through the plain STFT round trip; `alpha = 0` keeps only the
//! approximation half and matches the transmission payload bit for bit.

use crate::dwt::{dwt1, idwt1, make_bior37, BiorFilterBank, WaveletPair};
use crate::error::{Error, Result};
use crate::signal::PcmSignal;
use crate::stft::{istft, stft, FrameParams, MagPhase};

/// ModWD parameters. `alpha` scales the detail coefficients and lies in
/// `[0, 1]`; the evaluation sweep uses {0, 0.25, 0.5, 0.75} plus the
/// baseline 1.
#[derive(Debug, Clone)]
pub struct ModwdConfig {
    pub alpha: f64,
    pub frame_params: FrameParams,
    pub bank: BiorFilterBank,
}

impl ModwdConfig {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, frame_params: FrameParams::default(), bank: make_bior37() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        self.frame_params.validate()
    }
}

/// Per-row wavelet coefficients of a magnitude plane: one [`WaveletPair`]
/// per acoustic frequency index.
#[derive(Debug, Clone)]
pub struct WaveletSpectrogram {
    pub rows: Vec<WaveletPair>,
    pub params: FrameParams,
}

impl WaveletSpectrogram {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn coeff_len(&self) -> usize {
        self.rows.first().map_or(0, |r| r.approx.len())
    }

    pub fn original_len(&self) -> usize {
        self.rows.first().map_or(0, |r| r.original_len)
    }
}

/// Decompose each frequency row's temporal magnitude sequence.
pub fn decompose_rows(
    magnitude: &[Vec<f64>],
    params: &FrameParams,
    bank: &BiorFilterBank,
) -> Result<WaveletSpectrogram> {
    let num_frames = magnitude.len();
    if num_frames < 2 {
        return Err(Error::SequenceTooShort(num_frames));
    }
    let bins = magnitude[0].len();
    let mut rows = Vec::with_capacity(bins);
    let mut seq = vec![0.0; num_frames];
    for k in 0..bins {
        for (m, frame) in magnitude.iter().enumerate() {
            seq[m] = frame[k];
        }
        rows.push(dwt1(&seq, bank)?);
    }
    Ok(WaveletSpectrogram { rows, params: *params })
}

/// Scale every detail plane by `alpha`, leaving the approximation untouched.
pub fn scale_detail(mut ws: WaveletSpectrogram, alpha: f64) -> WaveletSpectrogram {
    if alpha == 1.0 {
        return ws;
    }
    for row in &mut ws.rows {
        for d in &mut row.detail {
            *d *= alpha;
        }
    }
    ws
}

/// Row-wise inverse transform without the non-negativity clamp.
pub fn reconstruct_rows_raw(
    ws: &WaveletSpectrogram,
    bank: &BiorFilterBank,
) -> Result<Vec<Vec<f64>>> {
    let num_frames = ws.original_len();
    let bins = ws.num_rows();
    let mut plane = vec![vec![0.0; bins]; num_frames];
    for (k, row) in ws.rows.iter().enumerate() {
        if row.original_len != num_frames {
            return Err(Error::DimensionMismatch(format!(
                "row {k} records length {}, expected {num_frames}",
                row.original_len
            )));
        }
        let seq = idwt1(row, bank)?;
        for (m, &v) in seq.iter().enumerate() {
            plane[m][k] = v;
        }
    }
    Ok(plane)
}

/// Row-wise inverse transform; negative values are clamped to zero so the
/// result stays a magnitude plane.
pub fn reconstruct_rows(ws: &WaveletSpectrogram, bank: &BiorFilterBank) -> Result<Vec<Vec<f64>>> {
    let mut plane = reconstruct_rows_raw(ws, bank)?;
    for frame in &mut plane {
        for v in frame.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    Ok(plane)
}

/// Round the approximation planes through f32, matching the precision of
/// the serialized payload so the in-process `alpha = 0` result is
/// bit-identical to a compress/decompress round trip.
pub fn quantize_approx_f32(ws: &mut WaveletSpectrogram) {
    for row in &mut ws.rows {
        for a in &mut row.approx {
            *a = *a as f32 as f64;
        }
    }
}

/// The full four-step pipeline: STFT, per-row DWT, detail scaling, inverse
/// DWT, resynthesis with the original phase.
pub fn modwd_enhance(noisy: &PcmSignal, cfg: &ModwdConfig) -> Result<PcmSignal> {
    cfg.validate()?;
    let mp = stft(noisy, &cfg.frame_params)?.into_mag_phase();
    if cfg.alpha == 1.0 {
        // the unprocessed baseline: plain STFT round trip
        return istft(&mp, &cfg.frame_params);
    }
    let mut ws = decompose_rows(&mp.magnitude, &cfg.frame_params, &cfg.bank)?;
    ws = scale_detail(ws, cfg.alpha);
    if cfg.alpha == 0.0 {
        quantize_approx_f32(&mut ws);
    }
    let magnitude = reconstruct_rows(&ws, &cfg.bank)?;
    istft(&mp.with_magnitude(magnitude), &cfg.frame_params)
}

const PAYLOAD_HEADER_LEN: usize = 16;

/// Serialize the approximation planes only: a 16-byte header
/// (K, coeff_len, original_len, fft_size as little-endian u32) followed by
/// K rows of coeff_len little-endian f32 values.
pub fn serialize_approximation_payload(ws: &WaveletSpectrogram) -> Vec<u8> {
    let bins = ws.num_rows() as u32;
    let coeff_len = ws.coeff_len() as u32;
    let original_len = ws.original_len() as u32;
    let mut out =
        Vec::with_capacity(PAYLOAD_HEADER_LEN + (bins * coeff_len) as usize * 4);
    out.extend_from_slice(&bins.to_le_bytes());
    out.extend_from_slice(&coeff_len.to_le_bytes());
    out.extend_from_slice(&original_len.to_le_bytes());
    out.extend_from_slice(&(ws.params.fft_size as u32).to_le_bytes());
    for row in &ws.rows {
        for &a in &row.approx {
            out.extend_from_slice(&(a as f32).to_le_bytes());
        }
    }
    out
}

/// Inverse of [`serialize_approximation_payload`]; the detail planes come
/// back as zeros.
pub fn deserialize_approximation_payload(
    bytes: &[u8],
    params: &FrameParams,
) -> Result<WaveletSpectrogram> {
    if bytes.len() < PAYLOAD_HEADER_LEN {
        return Err(Error::VersionError("payload shorter than its header".into()));
    }
    let u32_at = |at: usize| u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]]);
    let bins = u32_at(0) as usize;
    let coeff_len = u32_at(4) as usize;
    let original_len = u32_at(8) as usize;
    let fft_size = u32_at(12) as usize;
    if fft_size != params.fft_size {
        return Err(Error::VersionError(format!(
            "payload fft_size {fft_size} does not match configured {}",
            params.fft_size
        )));
    }
    let expected = PAYLOAD_HEADER_LEN + bins * coeff_len * 4;
    if bytes.len() != expected {
        return Err(Error::VersionError(format!(
            "payload is {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let mut rows = Vec::with_capacity(bins);
    let mut at = PAYLOAD_HEADER_LEN;
    for _ in 0..bins {
        let mut approx = Vec::with_capacity(coeff_len);
        for _ in 0..coeff_len {
            let v = f32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]]);
            approx.push(v as f64);
            at += 4;
        }
        rows.push(WaveletPair { approx, detail: vec![0.0; coeff_len], original_len });
    }
    Ok(WaveletSpectrogram { rows, params: *params })
}

/// The four spectrogram forms produced along the pipeline: the input
/// magnitude plane, the approximation- and detail-coefficient planes, and
/// the reconstructed plane (at the configured `alpha`).
#[derive(Debug, Clone)]
pub struct SpectrogramStages {
    pub original: Vec<Vec<f64>>,
    pub approx: Vec<Vec<f64>>,
    pub detail: Vec<Vec<f64>>,
    pub reconstructed: Vec<Vec<f64>>,
    pub params: FrameParams,
}

pub fn export_spectrogram_stages(noisy: &PcmSignal, cfg: &ModwdConfig) -> Result<SpectrogramStages> {
    cfg.validate()?;
    let mp = stft(noisy, &cfg.frame_params)?.into_mag_phase();
    let ws = decompose_rows(&mp.magnitude, &cfg.frame_params, &cfg.bank)?;
    let coeff_len = ws.coeff_len();
    let bins = ws.num_rows();
    let mut approx = vec![vec![0.0; bins]; coeff_len];
    let mut detail = vec![vec![0.0; bins]; coeff_len];
    for (k, row) in ws.rows.iter().enumerate() {
        for i in 0..coeff_len {
            approx[i][k] = row.approx[i];
            detail[i][k] = row.detail[i];
        }
    }
    let reconstructed = reconstruct_rows(&scale_detail(ws, cfg.alpha), &cfg.bank)?;
    Ok(SpectrogramStages {
        original: mp.magnitude,
        approx,
        detail,
        reconstructed,
        params: cfg.frame_params,
    })
}

/// Write a frames-by-bins plane as CSV, one frame per row, fixed precision
/// so reruns are byte-identical.
pub fn write_plane_csv(path: &std::path::Path, plane: &[Vec<f64>]) -> Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for frame in plane {
        let line: Vec<String> = frame.iter().map(|v| format!("{v:.9e}")).collect();
        writeln!(f, "{}", line.join(","))?;
    }
    Ok(())
}

/// Write a frames-by-bins plane as a raw little-endian f32 grid.
pub fn write_plane_f32(path: &std::path::Path, plane: &[Vec<f64>]) -> Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for frame in plane {
        for &v in frame {
            f.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Rebuild a waveform from a wavelet spectrogram plus the original phase
/// plane. Shared by the in-process `alpha = 0` path and `decompress` so the
/// two stay bit-identical.
pub fn reconstruct_waveform(
    ws: &WaveletSpectrogram,
    phase: &MagPhase,
    bank: &BiorFilterBank,
) -> Result<PcmSignal> {
    let magnitude = reconstruct_rows(ws, bank)?;
    istft(&phase.with_magnitude(magnitude), &ws.params)
}
