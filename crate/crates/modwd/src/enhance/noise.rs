//! Initial-silence noise PSD estimation.

use crate::error::{Error, Result};
use crate::stft::MagPhase;

pub const PSD_FLOOR: f64 = 1e-12;

/// Noise power per one-sided bin.
#[derive(Debug, Clone)]
pub struct NoisePsd {
    pub psd: Vec<f64>,
    pub n_frames_used: usize,
}

/// Average the magnitude-squared of the first `n_frames` frames, assumed to
/// be speech-free, flooring each bin at [`PSD_FLOOR`].
pub fn estimate_noise_initial(spec: &MagPhase, n_frames: usize) -> Result<NoisePsd> {
    if spec.num_frames() < n_frames {
        return Err(Error::TooFewFrames { got: spec.num_frames(), need: n_frames });
    }
    let bins = spec.num_bins();
    let mut psd = vec![0.0; bins];
    for frame in spec.magnitude.iter().take(n_frames) {
        for (p, &m) in psd.iter_mut().zip(frame) {
            *p += m * m;
        }
    }
    for p in &mut psd {
        *p = (*p / n_frames as f64).max(PSD_FLOOR);
    }
    Ok(NoisePsd { psd, n_frames_used: n_frames })
}
