//! Short-time Fourier analysis and weighted overlap-add synthesis.
//!
//! Defaults follow the 8 kHz narrowband convention: 20 ms frames, 10 ms hop,
//! Hamming window, 256-point FFT (129 one-sided bins). Synthesis applies the
//! analysis window a second time and normalizes by the summed squared window,
//! so `istft(stft(x))` is an identity on interior samples.

use crate::error::{Error, Result};
use crate::signal::PcmSignal;
use rustfft::{num_complex::Complex, FftPlanner};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    /// Symmetric Hamming, denominator `n - 1`.
    Hamming,
    /// Periodic Hamming, denominator `n`.
    HammingPeriodic,
}

/// Framing configuration shared by analysis and synthesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameParams {
    pub frame_len: usize,
    pub hop: usize,
    pub fft_size: usize,
    pub window: WindowKind,
}

impl Default for FrameParams {
    fn default() -> Self {
        Self { frame_len: 160, hop: 80, fft_size: 256, window: WindowKind::Hamming }
    }
}

impl FrameParams {
    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 || self.hop > self.frame_len || self.frame_len > self.fft_size {
            return Err(Error::Config(format!(
                "need 0 < hop <= frame_len <= fft_size, got hop={} frame_len={} fft_size={}",
                self.hop, self.frame_len, self.fft_size
            )));
        }
        Ok(())
    }

    /// One-sided bin count.
    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn num_frames(&self, num_samples: usize) -> usize {
        if num_samples < self.frame_len {
            0
        } else {
            (num_samples - self.frame_len) / self.hop + 1
        }
    }

    /// Length of the synthesis output: `(L-1)*hop + frame_len`.
    pub fn output_len(&self, num_frames: usize) -> usize {
        if num_frames == 0 {
            0
        } else {
            (num_frames - 1) * self.hop + self.frame_len
        }
    }

    pub fn window_weights(&self) -> Vec<f64> {
        match self.window {
            WindowKind::Hamming => hamming_window(self.frame_len),
            WindowKind::HammingPeriodic => hamming_window_periodic(self.frame_len),
        }
    }
}

/// Symmetric Hamming window: `w[i] = 0.54 - 0.46 cos(2 pi i / (n-1))`.
pub fn hamming_window(n: usize) -> Vec<f64> {
    assert!(n >= 2, "window needs at least 2 points");
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Periodic Hamming window: denominator `n` instead of `n - 1`.
pub fn hamming_window_periodic(n: usize) -> Vec<f64> {
    assert!(n >= 2, "window needs at least 2 points");
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// One-sided complex spectrogram, frames by bins.
#[derive(Debug, Clone)]
pub struct ComplexSpectrogram {
    pub values: Vec<Vec<Complex<f64>>>,
    pub params: FrameParams,
    pub sample_rate_hz: u32,
}

impl ComplexSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.values.len()
    }

    pub fn num_bins(&self) -> usize {
        self.values.first().map_or(0, |f| f.len())
    }

    pub fn into_mag_phase(self) -> MagPhase {
        let magnitude = self
            .values
            .iter()
            .map(|f| f.iter().map(|c| c.norm()).collect())
            .collect();
        let phase = self
            .values
            .iter()
            .map(|f| f.iter().map(|c| c.arg()).collect())
            .collect();
        MagPhase { magnitude, phase, params: self.params, sample_rate_hz: self.sample_rate_hz }
    }
}

/// Magnitude/phase split of a complex spectrogram.
#[derive(Debug, Clone)]
pub struct MagPhase {
    /// L x K non-negative magnitudes.
    pub magnitude: Vec<Vec<f64>>,
    /// L x K phases in (-pi, pi].
    pub phase: Vec<Vec<f64>>,
    pub params: FrameParams,
    pub sample_rate_hz: u32,
}

impl MagPhase {
    pub fn num_frames(&self) -> usize {
        self.magnitude.len()
    }

    pub fn num_bins(&self) -> usize {
        self.magnitude.first().map_or(0, |f| f.len())
    }

    pub fn recombine(&self) -> Vec<Vec<Complex<f64>>> {
        self.magnitude
            .iter()
            .zip(&self.phase)
            .map(|(mr, pr)| {
                mr.iter()
                    .zip(pr)
                    .map(|(&m, &p)| Complex::from_polar(m, p))
                    .collect()
            })
            .collect()
    }

    /// Replace the magnitude plane, keeping the phase.
    pub fn with_magnitude(&self, magnitude: Vec<Vec<f64>>) -> MagPhase {
        MagPhase {
            magnitude,
            phase: self.phase.clone(),
            params: self.params,
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// Windowed, zero-padded forward STFT keeping the one-sided bins.
pub fn stft(signal: &PcmSignal, params: &FrameParams) -> Result<ComplexSpectrogram> {
    params.validate()?;
    if signal.len() < params.frame_len {
        return Err(Error::SignalTooShort { got: signal.len(), need: params.frame_len });
    }
    let window = params.window_weights();
    let num_frames = params.num_frames(signal.len());
    let bins = params.bins();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(params.fft_size);
    let mut values = Vec::with_capacity(num_frames);
    let mut buf = vec![Complex::new(0.0, 0.0); params.fft_size];
    for m in 0..num_frames {
        let start = m * params.hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = if i < params.frame_len {
                Complex::new(signal.samples[start + i] * window[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        values.push(buf[..bins].to_vec());
    }
    Ok(ComplexSpectrogram { values, params: *params, sample_rate_hz: signal.sample_rate_hz })
}

/// Weighted overlap-add synthesis from a magnitude/phase spectrogram.
pub fn istft(spec: &MagPhase, params: &FrameParams) -> Result<PcmSignal> {
    params.validate()?;
    let bins = params.bins();
    if spec.num_bins() != bins {
        return Err(Error::DimensionMismatch(format!(
            "spectrogram has {} bins, params imply {}",
            spec.num_bins(),
            bins
        )));
    }
    if spec.phase.len() != spec.magnitude.len() {
        return Err(Error::DimensionMismatch("magnitude/phase frame counts differ".into()));
    }
    let num_frames = spec.num_frames();
    let window = params.window_weights();
    let out_len = params.output_len(num_frames);
    let mut out = vec![0.0; out_len];
    let mut norm = vec![0.0; out_len];

    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(params.fft_size);
    let mut buf = vec![Complex::new(0.0, 0.0); params.fft_size];
    let scale = 1.0 / params.fft_size as f64;
    for m in 0..num_frames {
        // conjugate-symmetric extension of the one-sided bins
        for k in 0..bins {
            buf[k] = Complex::from_polar(spec.magnitude[m][k], spec.phase[m][k]);
        }
        for k in bins..params.fft_size {
            buf[k] = buf[params.fft_size - k].conj();
        }
        ifft.process(&mut buf);
        let start = m * params.hop;
        for i in 0..params.frame_len {
            out[start + i] += buf[i].re * scale * window[i];
            norm[start + i] += window[i] * window[i];
        }
    }
    for (o, n) in out.iter_mut().zip(&norm) {
        *o /= n.max(1e-8);
    }
    Ok(PcmSignal::new(out, spec.sample_rate_hz))
}
