//! Multi-band spectral subtraction.
//!
//! The spectrum is split into four contiguous bands. Each band subtracts
//! noise power scaled by an over-subtraction factor that falls off linearly
//! with the band's segmental SNR, times a per-band tweaking factor, and the
//! result is floored at a fraction of the noisy power.

use crate::enhance::noise::NoisePsd;
use crate::error::{Error, Result};
use crate::stft::MagPhase;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsParams {
    /// Over-subtraction at and below `snr_low_db`.
    pub beta_max: f64,
    /// Over-subtraction at and above `snr_high_db`.
    pub beta_min: f64,
    pub snr_low_db: f64,
    pub snr_high_db: f64,
    /// Band tweaking factors: lowest band, interior bands, top band.
    pub delta_low: f64,
    pub delta_mid: f64,
    pub delta_top: f64,
    /// Spectral floor as a fraction of the noisy power.
    pub floor: f64,
}

impl Default for SsParams {
    fn default() -> Self {
        Self {
            beta_max: 4.74,
            beta_min: 1.0,
            snr_low_db: -5.0,
            snr_high_db: 20.0,
            delta_low: 1.0,
            delta_mid: 2.5,
            delta_top: 1.5,
            floor: 0.002,
        }
    }
}

impl SsParams {
    fn beta(&self, snr_db: f64) -> f64 {
        if snr_db <= self.snr_low_db {
            self.beta_max
        } else if snr_db >= self.snr_high_db {
            self.beta_min
        } else {
            let t = (snr_db - self.snr_low_db) / (self.snr_high_db - self.snr_low_db);
            self.beta_max + t * (self.beta_min - self.beta_max)
        }
    }

    fn delta(&self, band: usize, n_bands: usize) -> f64 {
        if band == 0 {
            self.delta_low
        } else if band + 1 == n_bands {
            self.delta_top
        } else {
            self.delta_mid
        }
    }
}

const N_BANDS: usize = 4;

pub fn spectral_subtract_multiband(
    spec: &MagPhase,
    noise: &NoisePsd,
    params: &SsParams,
) -> Result<MagPhase> {
    let bins = spec.num_bins();
    if noise.psd.len() != bins {
        return Err(Error::DimensionMismatch(format!(
            "noise psd has {} bins, spectrogram {bins}",
            noise.psd.len()
        )));
    }
    let edges: Vec<usize> = (0..=N_BANDS).map(|b| b * bins / N_BANDS).collect();
    let mut magnitude = Vec::with_capacity(spec.num_frames());
    for frame in &spec.magnitude {
        let mut out = vec![0.0; bins];
        for b in 0..N_BANDS {
            let (lo, hi) = (edges[b], edges[b + 1]);
            let sig_pow: f64 = frame[lo..hi].iter().map(|m| m * m).sum();
            let noise_pow: f64 = noise.psd[lo..hi].iter().sum();
            let band_snr = 10.0 * (sig_pow.max(1e-300) / noise_pow).log10();
            let sub_scale = params.delta(b, N_BANDS) * params.beta(band_snr);
            for k in lo..hi {
                let p = frame[k] * frame[k];
                let cleaned = p - sub_scale * noise.psd[k];
                out[k] = cleaned.max(params.floor * p).sqrt();
            }
        }
        magnitude.push(out);
    }
    Ok(spec.with_magnitude(magnitude))
}
