//! Client/server transport of the approximation-only spectrogram.
//!
//! `compress` runs the analysis half of the pipeline (STFT, per-row DWT,
//! detail discarded) and writes two files: the f32 approximation payload and
//! an f64 phase-plane sidecar. `decompress` runs the synthesis half. The
//! result is bit-identical to running the in-process pipeline with
//! `alpha = 0`, because both route through the same f32 payload precision
//! and the same reconstruction code.

use crate::dwt::make_bior37;
use crate::error::{Error, Result};
use crate::modwd::{
    deserialize_approximation_payload, quantize_approx_f32, reconstruct_waveform, scale_detail,
    serialize_approximation_payload,
};
use crate::signal::PcmSignal;
use crate::stft::{stft, FrameParams, MagPhase, WindowKind};
use std::io::{Read, Write};
use std::path::Path;

const PHASE_MAGIC: &[u8; 4] = b"MWD1";

/// Write the phase sidecar: magic, sample rate, framing, grid shape, then
/// the L x K phase plane as little-endian f64.
fn write_phase_file(path: &Path, spec: &MagPhase) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(PHASE_MAGIC)?;
    f.write_all(&spec.sample_rate_hz.to_le_bytes())?;
    f.write_all(&(spec.params.frame_len as u32).to_le_bytes())?;
    f.write_all(&(spec.params.hop as u32).to_le_bytes())?;
    f.write_all(&(spec.params.fft_size as u32).to_le_bytes())?;
    let window_tag: u32 = match spec.params.window {
        WindowKind::Hamming => 0,
        WindowKind::HammingPeriodic => 1,
    };
    f.write_all(&window_tag.to_le_bytes())?;
    f.write_all(&(spec.num_frames() as u32).to_le_bytes())?;
    f.write_all(&(spec.num_bins() as u32).to_le_bytes())?;
    for frame in &spec.phase {
        for &p in frame {
            f.write_all(&p.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_phase_file(path: &Path) -> Result<MagPhase> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 32 || &bytes[0..4] != PHASE_MAGIC {
        return Err(Error::VersionError("bad phase file magic".into()));
    }
    let u32_at = |at: usize| u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]]);
    let sample_rate_hz = u32_at(4);
    let frame_len = u32_at(8) as usize;
    let hop = u32_at(12) as usize;
    let fft_size = u32_at(16) as usize;
    let window = match u32_at(20) {
        0 => WindowKind::Hamming,
        1 => WindowKind::HammingPeriodic,
        t => return Err(Error::VersionError(format!("unknown window tag {t}"))),
    };
    let frames = u32_at(24) as usize;
    let bins = u32_at(28) as usize;
    let expected = 32 + frames * bins * 8;
    if bytes.len() != expected {
        return Err(Error::VersionError(format!(
            "phase file is {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let mut phase = Vec::with_capacity(frames);
    let mut at = 32;
    for _ in 0..frames {
        let mut row = Vec::with_capacity(bins);
        for _ in 0..bins {
            let mut b = [0u8; 8];
            b.copy_from_slice(&bytes[at..at + 8]);
            row.push(f64::from_le_bytes(b));
            at += 8;
        }
        phase.push(row);
    }
    Ok(MagPhase {
        magnitude: vec![vec![0.0; bins]; frames],
        phase,
        params: FrameParams { frame_len, hop, fft_size, window },
        sample_rate_hz,
    })
}

/// Client side: analyze the signal and write the approximation payload plus
/// the phase sidecar.
pub fn compress(signal: &PcmSignal, params: &FrameParams, payload_path: &Path, phase_path: &Path) -> Result<()> {
    let bank = make_bior37();
    let mp = stft(signal, params)?.into_mag_phase();
    let ws = crate::modwd::decompose_rows(&mp.magnitude, params, &bank)?;
    let payload = serialize_approximation_payload(&ws);
    std::fs::write(payload_path, payload)?;
    write_phase_file(phase_path, &mp)?;
    Ok(())
}

/// Server side: reconstruct the waveform from the two files.
pub fn decompress(payload_path: &Path, phase_path: &Path) -> Result<PcmSignal> {
    let phase = read_phase_file(phase_path)?;
    let bytes = std::fs::read(payload_path)?;
    let ws = deserialize_approximation_payload(&bytes, &phase.params)?;
    if ws.num_rows() != phase.num_bins() || ws.original_len() != phase.num_frames() {
        return Err(Error::VersionError(format!(
            "payload grid {}x{} does not match phase grid {}x{}",
            ws.original_len(),
            ws.num_rows(),
            phase.num_frames(),
            phase.num_bins()
        )));
    }
    let bank = make_bior37();
    reconstruct_waveform(&ws, &phase, &bank)
}

/// The in-process equivalent of compress-then-decompress, for tests and the
/// `alpha = 0` bit-identity contract.
pub fn alpha_zero_reference(signal: &PcmSignal, params: &FrameParams) -> Result<PcmSignal> {
    let bank = make_bior37();
    let mp = stft(signal, params)?.into_mag_phase();
    let ws = crate::modwd::decompose_rows(&mp.magnitude, params, &bank)?;
    let mut ws = scale_detail(ws, 0.0);
    quantize_approx_f32(&mut ws);
    reconstruct_waveform(&ws, &mp, &bank)
}
