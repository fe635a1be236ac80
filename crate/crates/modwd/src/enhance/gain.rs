//! Statistical short-time amplitude estimators: Wiener, MMSE amplitude, and
//! MMSE log-amplitude gains, driven by decision-directed a-priori SNR
//! estimation. Gains are clamped to `[gain_floor, 1]` before application.

use crate::enhance::noise::NoisePsd;
use crate::enhance::special::{bessel_i0e, bessel_i1e, expint_e1};
use crate::error::{Error, Result};
use crate::stft::MagPhase;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainParams {
    /// Decision-directed smoothing constant, typically in [0.9, 0.999].
    pub a_dd: f64,
    /// Lower gain clamp in (0, 0.5].
    pub gain_floor: f64,
}

impl Default for GainParams {
    fn default() -> Self {
        Self { a_dd: 0.98, gain_floor: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainLaw {
    Wiener,
    Stsa,
    LogStsa,
}

/// Wiener gain `xi / (1 + xi)`, unclamped.
pub fn wiener_gain(xi: f64) -> f64 {
    xi / (1.0 + xi)
}

/// The MMSE short-time amplitude gain, unclamped.
///
/// With `nu = xi * gamma / (1 + xi)`:
/// `G = (sqrt(pi)/2) (sqrt(nu)/gamma) exp(-nu/2) [(1+nu) I0(nu/2) + nu I1(nu/2)]`.
/// Above `nu = 700` the estimator is numerically indistinguishable from the
/// Wiener gain, which is used instead.
pub fn stsa_gain(xi: f64, gamma: f64) -> f64 {
    let gamma = gamma.max(1e-12);
    let nu = xi * gamma / (1.0 + xi);
    if nu > 700.0 {
        return wiener_gain(xi);
    }
    if nu == 0.0 {
        return 0.0;
    }
    let half = nu / 2.0;
    // exp(-nu/2) I(nu/2) via the exponentially scaled Bessel functions
    let bracket = (1.0 + nu) * bessel_i0e(half) + nu * bessel_i1e(half);
    (std::f64::consts::PI.sqrt() / 2.0) * (nu.sqrt() / gamma) * bracket
}

/// The MMSE log-amplitude gain `xi/(1+xi) * exp(E1(nu)/2)`, unclamped.
pub fn log_stsa_gain(xi: f64, gamma: f64) -> f64 {
    let gamma = gamma.max(1e-12);
    let nu = (xi * gamma / (1.0 + xi)).max(1e-300);
    wiener_gain(xi) * (0.5 * expint_e1(nu)).exp()
}

fn raw_gain(law: GainLaw, xi: f64, gamma: f64) -> f64 {
    match law {
        GainLaw::Wiener => wiener_gain(xi),
        GainLaw::Stsa => stsa_gain(xi, gamma),
        GainLaw::LogStsa => log_stsa_gain(xi, gamma),
    }
}

/// Run one of the gain laws over the spectrogram with decision-directed
/// a-priori SNR tracking. Frames are processed in order (the recursion uses
/// the previous frame's enhanced power); bins are independent.
pub fn apply_gain_law(
    spec: &MagPhase,
    noise: &NoisePsd,
    params: &GainParams,
    law: GainLaw,
) -> Result<MagPhase> {
    let bins = spec.num_bins();
    if noise.psd.len() != bins {
        return Err(Error::DimensionMismatch(format!(
            "noise psd has {} bins, spectrogram {bins}",
            noise.psd.len()
        )));
    }
    let a_dd = params.a_dd;
    // previous enhanced power starts at the noise level, so xi[0] = a_dd
    // plus the instantaneous term
    let mut prev_power: Vec<f64> = noise.psd.clone();
    let mut magnitude = Vec::with_capacity(spec.num_frames());
    for frame in &spec.magnitude {
        let mut out = vec![0.0; bins];
        for k in 0..bins {
            let gamma = frame[k] * frame[k] / noise.psd[k];
            let xi = a_dd * prev_power[k] / noise.psd[k] + (1.0 - a_dd) * (gamma - 1.0).max(0.0);
            let g = raw_gain(law, xi, gamma).clamp(params.gain_floor, 1.0);
            out[k] = g * frame[k];
            prev_power[k] = out[k] * out[k];
        }
        magnitude.push(out);
    }
    Ok(spec.with_magnitude(magnitude))
}

pub fn wiener_filter(spec: &MagPhase, noise: &NoisePsd, params: &GainParams) -> Result<MagPhase> {
    apply_gain_law(spec, noise, params, GainLaw::Wiener)
}

pub fn stsa_mmse(spec: &MagPhase, noise: &NoisePsd, params: &GainParams) -> Result<MagPhase> {
    apply_gain_law(spec, noise, params, GainLaw::Stsa)
}

pub fn log_stsa(spec: &MagPhase, noise: &NoisePsd, params: &GainParams) -> Result<MagPhase> {
    apply_gain_law(spec, noise, params, GainLaw::LogStsa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enhance::noise::estimate_noise_initial;
    use crate::stft::FrameParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wiener_gain_at_unity_snr() {
        assert_eq!(wiener_gain(1.0), 0.5);
    }

    #[test]
    fn stsa_approaches_wiener_at_high_snr() {
        let gamma = 1000.0;
        let xi = gamma - 1.0;
        let g = stsa_gain(xi, gamma);
        let w = wiener_gain(xi);
        assert!((g / w - 1.0).abs() < 0.01, "stsa {g} wiener {w}");
    }

    #[test]
    fn stsa_reference_point() {
        // nu = 1 at gamma = 2 means xi = 1; scipy-evaluated closed form
        let g = stsa_gain(1.0, 2.0);
        assert!((g - 0.6409597882804283).abs() < 1e-10, "got {g}");
    }

    #[test]
    fn stsa_zero_magnitude_gives_zero() {
        let g = stsa_gain(0.0, 0.0);
        assert_eq!(g, 0.0);
    }

    #[test]
    fn log_stsa_wiener_limit() {
        // E1(nu) -> 0, so the log estimator collapses onto Wiener
        let xi = 50.0;
        let gamma = 51.0; // nu = 50
        let g = log_stsa_gain(xi, gamma);
        assert!((g - wiener_gain(xi)).abs() < 1e-6);
    }

    #[test]
    fn gain_ordering_on_grid() {
        // log-amplitude gain never exceeds the amplitude gain
        for &xi in &[0.01, 0.1, 1.0, 10.0, 100.0] {
            for &gamma in &[0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
                let gl = log_stsa_gain(xi, gamma);
                let gs = stsa_gain(xi, gamma);
                assert!(gl <= gs + 1e-12, "xi {xi} gamma {gamma}: {gl} > {gs}");
            }
        }
    }

    #[test]
    fn gains_monotone_in_xi() {
        for law in [GainLaw::Wiener, GainLaw::Stsa, GainLaw::LogStsa] {
            for &gamma in &[0.5, 1.0, 5.0, 50.0] {
                let mut prev = 0.0;
                for i in 0..60 {
                    let xi = 0.01 * 1.2f64.powi(i);
                    let g = raw_gain(law, xi, gamma);
                    assert!(g >= prev - 1e-12, "{law:?} not monotone at xi {xi} gamma {gamma}");
                    prev = g;
                }
            }
        }
    }

    fn noisy_plane(seed: u64, frames: usize) -> MagPhase {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let magnitude = (0..frames)
            .map(|_| (0..129).map(|_| rng.gen_range(0.0..0.2)).collect())
            .collect();
        MagPhase {
            phase: vec![vec![0.3; 129]; frames],
            magnitude,
            params: FrameParams::default(),
            sample_rate_hz: 8000,
        }
    }

    #[test]
    fn noise_only_input_is_floor_dominated() {
        let spec = noisy_plane(3, 120);
        let noise = estimate_noise_initial(&spec, 6).unwrap();
        let out = wiener_filter(&spec, &noise, &GainParams::default()).unwrap();
        // steady state: skip the first frames while the recursion settles
        let in_pow: f64 = spec.magnitude[40..]
            .iter()
            .flat_map(|f| f.iter().map(|m| m * m))
            .sum();
        let out_pow: f64 = out.magnitude[40..]
            .iter()
            .flat_map(|f| f.iter().map(|m| m * m))
            .sum();
        // within a small factor of the squared gain floor (the recursion
        // keeps some bins slightly above it)
        assert!(out_pow <= in_pow * (0.05f64.powi(2) * 4.0), "ratio {}", out_pow / in_pow);
    }

    #[test]
    fn high_snr_passthrough() {
        let spec = noisy_plane(4, 30);
        let noise = crate::enhance::noise::NoisePsd { psd: vec![1e-12; 129], n_frames_used: 6 };
        let out = stsa_mmse(&spec, &noise, &GainParams::default()).unwrap();
        for (fo, fi) in out.magnitude.iter().zip(&spec.magnitude) {
            for (a, b) in fo.iter().zip(fi) {
                assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn phase_untouched() {
        let spec = noisy_plane(5, 40);
        let noise = estimate_noise_initial(&spec, 6).unwrap();
        for law in [GainLaw::Wiener, GainLaw::Stsa, GainLaw::LogStsa] {
            let out = apply_gain_law(&spec, &noise, &GainParams::default(), law).unwrap();
            assert_eq!(out.phase, spec.phase);
        }
    }

    #[test]
    fn applied_gains_respect_the_clamp() {
        let spec = noisy_plane(6, 60);
        let noise = estimate_noise_initial(&spec, 6).unwrap();
        let params = GainParams::default();
        for law in [GainLaw::Wiener, GainLaw::Stsa, GainLaw::LogStsa] {
            let out = apply_gain_law(&spec, &noise, &params, law).unwrap();
            for (fo, fi) in out.magnitude.iter().zip(&spec.magnitude) {
                for (a, b) in fo.iter().zip(fi) {
                    if *b > 0.0 {
                        let g = a / b;
                        assert!(g >= params.gain_floor - 1e-12 && g <= 1.0 + 1e-12);
                    }
                }
            }
        }
    }
}
