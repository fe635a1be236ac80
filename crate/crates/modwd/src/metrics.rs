//! Objective quality measures: segmental SNR and log-spectral distance,
//! plus a hook for an external scorer binary.
//!
//! Zero lag is assumed: every pipeline in this crate is alignment-preserving,
//! so the processed signal is only trimmed, never searched for a time shift.

use crate::error::{Error, Result};
use crate::signal::PcmSignal;
use crate::stft::{stft, FrameParams};

pub const SEG_SNR_FLOOR_DB: f64 = -10.0;
pub const SEG_SNR_CEIL_DB: f64 = 35.0;
const SEG_FRAME_MS: usize = 20;
const SILENCE_ENERGY: f64 = 1e-10;
const LSD_EPS: f64 = 1e-8;

fn aligned_len(clean: &PcmSignal, processed: &PcmSignal, frame: usize) -> Result<usize> {
    if clean.sample_rate_hz != processed.sample_rate_hz {
        return Err(Error::SampleRateMismatch {
            a: clean.sample_rate_hz,
            b: processed.sample_rate_hz,
        });
    }
    let (a, b) = (clean.len(), processed.len());
    if a.abs_diff(b) > frame {
        return Err(Error::LengthMismatch { a, b });
    }
    Ok(a.min(b))
}

/// Mean of per-frame SNRs over 20 ms non-overlapping frames, each frame
/// clamped to [-10, 35] dB; frames with negligible clean energy are skipped.
pub fn segmental_snr(clean: &PcmSignal, processed: &PcmSignal) -> Result<f64> {
    let frame = clean.sample_rate_hz as usize * SEG_FRAME_MS / 1000;
    let n = aligned_len(clean, processed, frame)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut start = 0;
    while start + frame <= n {
        let c = &clean.samples[start..start + frame];
        let p = &processed.samples[start..start + frame];
        let c_energy: f64 = c.iter().map(|x| x * x).sum();
        if c_energy >= SILENCE_ENERGY {
            let err: f64 = c.iter().zip(p).map(|(x, y)| (x - y).powi(2)).sum();
            let snr = if err == 0.0 {
                SEG_SNR_CEIL_DB
            } else {
                (10.0 * (c_energy / err).log10()).clamp(SEG_SNR_FLOOR_DB, SEG_SNR_CEIL_DB)
            };
            sum += snr;
            count += 1;
        }
        start += frame;
    }
    if count == 0 {
        return Err(Error::AllFramesSilent);
    }
    Ok(sum / count as f64)
}

/// RMS over frames and bins of the log magnitude-spectral error in dB.
pub fn log_spectral_distance(clean: &PcmSignal, processed: &PcmSignal) -> Result<f64> {
    let params = FrameParams::default();
    let n = aligned_len(clean, processed, params.frame_len)?;
    let trim = |s: &PcmSignal| PcmSignal::new(s.samples[..n].to_vec(), s.sample_rate_hz);
    let sc = stft(&trim(clean), &params)?;
    let sp = stft(&trim(processed), &params)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (fc, fp) in sc.values.iter().zip(&sp.values) {
        for (c, p) in fc.iter().zip(fp) {
            let d = 20.0 * ((c.norm() + LSD_EPS) / (p.norm() + LSD_EPS)).log10();
            sum += d * d;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::AllFramesSilent);
    }
    Ok((sum / count as f64).sqrt())
}

/// Run a user-supplied scorer command with `{clean}` and `{processed}`
/// substituted, and parse the first real number in its stdout (or the first
/// capture of `pattern` when given).
pub fn external_score(
    command_template: &str,
    clean_path: &std::path::Path,
    processed_path: &std::path::Path,
    pattern: Option<&str>,
) -> Result<f64> {
    let cmd = command_template
        .replace("{clean}", &clean_path.display().to_string())
        .replace("{processed}", &processed_path.display().to_string());
    let output = std::process::Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .output()
        .map_err(|e| Error::ProcessFailure(format!("{cmd}: {e}")))?;
    if !output.status.success() {
        return Err(Error::ProcessFailure(format!(
            "{cmd}: exit status {:?}",
            output.status.code()
        )));
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    let re = regex::Regex::new(pattern.unwrap_or(r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?"))
        .map_err(|e| Error::Config(format!("bad score pattern: {e}")))?;
    let m = re
        .captures(&stdout)
        .and_then(|c| c.get(1).or_else(|| c.get(0)))
        .ok_or_else(|| Error::ParseFailure(stdout.to_string()))?;
    m.as_str()
        .parse()
        .map_err(|_| Error::ParseFailure(stdout.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::mix_at_snr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(n: usize, seed: u64) -> PcmSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PcmSignal::new((0..n).map(|_| rng.gen_range(-0.5..0.5)).collect(), 8000)
    }

    #[test]
    fn identical_signals_clamp_at_ceiling() {
        let sig = random_signal(4000, 1);
        assert_eq!(segmental_snr(&sig, &sig).unwrap(), 35.0);
        assert_eq!(log_spectral_distance(&sig, &sig).unwrap(), 0.0);
    }

    #[test]
    fn zero_output_is_floor_bounded() {
        let sig = random_signal(4000, 2);
        let silent = PcmSignal::new(vec![0.0; 4000], 8000);
        let snr = segmental_snr(&sig, &silent).unwrap();
        assert!((-10.0..=0.1).contains(&snr), "snr {snr}");
    }

    #[test]
    fn per_frame_controlled_mixture() {
        // add noise scaled to exactly 10 dB below the clean power per frame
        let clean = random_signal(8000, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut proc = clean.clone();
        for start in (0..8000).step_by(160) {
            let frame: Vec<f64> = (0..160).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
            let pc: f64 = clean.samples[start..start + 160].iter().map(|x| x * x).sum();
            let pn: f64 = frame.iter().map(|x| x * x).sum();
            let g = (pc / (pn * 10.0)).sqrt();
            for (i, f) in frame.iter().enumerate() {
                proc.samples[start + i] += g * f;
            }
        }
        let snr = segmental_snr(&clean, &proc).unwrap();
        assert!((snr - 10.0).abs() < 0.5, "snr {snr}");
    }

    #[test]
    fn constant_gain_lsd_closed_form() {
        let clean = random_signal(4000, 5);
        let doubled = PcmSignal::new(clean.samples.iter().map(|s| s * 2.0).collect(), 8000);
        let lsd = log_spectral_distance(&clean, &doubled).unwrap();
        let expected = 20.0 * 2.0f64.log10();
        assert!((lsd - expected).abs() < 0.02, "lsd {lsd} expected {expected}");
    }

    #[test]
    fn seg_snr_decreases_with_noise_power() {
        let clean = random_signal(8000, 6);
        let noise = random_signal(8000, 7);
        let mut prev = f64::INFINITY;
        for &snr_db in &[20.0, 15.0, 10.0, 5.0, 0.0] {
            let noisy = mix_at_snr(&clean, &noise, snr_db).unwrap();
            let s = segmental_snr(&clean, &noisy).unwrap();
            assert!(s < prev, "segSNR not decreasing at {snr_db} dB");
            prev = s;
        }
    }

    #[test]
    fn length_mismatch_beyond_one_frame_rejected() {
        let a = random_signal(4000, 8);
        let b = random_signal(3000, 8);
        assert!(matches!(
            segmental_snr(&a, &b),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn all_silent_rejected() {
        let a = PcmSignal::new(vec![0.0; 2000], 8000);
        let b = PcmSignal::new(vec![0.0; 2000], 8000);
        assert!(matches!(segmental_snr(&a, &b), Err(Error::AllFramesSilent)));
    }

    #[test]
    fn external_scorer_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let clean = dir.path().join("c.wav");
        let proc = dir.path().join("p.wav");
        std::fs::write(&clean, b"x").unwrap();
        std::fs::write(&proc, b"y").unwrap();
        let score = external_score("echo 2.060", &clean, &proc, None).unwrap();
        assert_eq!(score, 2.060);
        assert!(matches!(
            external_score("exit 3", &clean, &proc, None),
            Err(Error::ProcessFailure(_))
        ));
        assert!(matches!(
            external_score("echo no numbers here", &clean, &proc, None),
            Err(Error::ParseFailure(_))
        ));
    }
}
