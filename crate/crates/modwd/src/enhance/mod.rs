//! Enhancement methods and the cascade combinator.
//!
//! Cascade notation follows the "A-B" convention: method A runs on the
//! waveform first, then method B runs on A's output. Each statistical stage
//! re-estimates noise from its own input, so stages compose as black boxes.

pub mod gain;
pub mod noise;
pub mod special;
pub mod specsub;

pub use gain::{log_stsa, stsa_mmse, wiener_filter, GainParams};
pub use noise::{estimate_noise_initial, NoisePsd};
pub use specsub::{spectral_subtract_multiband, SsParams};

use crate::dwt::make_bior37;
use crate::error::{Error, Result};
use crate::modwd::{modwd_enhance, ModwdConfig};
use crate::signal::PcmSignal;
use crate::stft::{istft, stft, FrameParams, MagPhase};
use gain::GainLaw;

/// Number of leading frames assumed speech-free for noise estimation
/// (60 ms at the default frame rate).
pub const DEFAULT_NOISE_FRAMES: usize = 6;

/// One enhancement stage with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum EnhancerSpec {
    Modwd { alpha: f64 },
    SpectralSubtraction(SsParams),
    Wiener(GainParams),
    Stsa(GainParams),
    LogStsa(GainParams),
}

impl EnhancerSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnhancerSpec::Modwd { alpha } => {
                if !(0.0..=1.0).contains(alpha) {
                    return Err(Error::Config(format!("modwd alpha {alpha} outside [0, 1]")));
                }
            }
            EnhancerSpec::Wiener(p) | EnhancerSpec::Stsa(p) | EnhancerSpec::LogStsa(p) => {
                if !(0.9..=0.999).contains(&p.a_dd) {
                    return Err(Error::Config(format!("a_dd {} outside [0.9, 0.999]", p.a_dd)));
                }
                if !(p.gain_floor > 0.0 && p.gain_floor <= 0.5) {
                    return Err(Error::Config(format!(
                        "gain floor {} outside (0, 0.5]",
                        p.gain_floor
                    )));
                }
            }
            EnhancerSpec::SpectralSubtraction(_) => {}
        }
        Ok(())
    }
}

/// Ordered list of stages; order is significant because every stage is a
/// non-linear waveform-to-waveform map.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSpec {
    pub stages: Vec<EnhancerSpec>,
}

impl CascadeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Config("cascade has no stages".into()));
        }
        self.stages.iter().try_for_each(|s| s.validate())
    }
}

/// Runtime knobs shared by the spectral stages.
#[derive(Debug, Clone, Copy)]
pub struct EnhanceContext {
    pub frame_params: FrameParams,
    pub noise_frames: usize,
}

impl Default for EnhanceContext {
    fn default() -> Self {
        Self { frame_params: FrameParams::default(), noise_frames: DEFAULT_NOISE_FRAMES }
    }
}

fn run_spectral<F>(signal: &PcmSignal, ctx: &EnhanceContext, f: F) -> Result<PcmSignal>
where
    F: FnOnce(&MagPhase, &NoisePsd) -> Result<MagPhase>,
{
    let spec = stft(signal, &ctx.frame_params)?.into_mag_phase();
    let noise = estimate_noise_initial(&spec, ctx.noise_frames)?;
    let cleaned = f(&spec, &noise)?;
    istft(&cleaned, &ctx.frame_params)
}

/// Apply one stage as a full waveform-to-waveform pipeline.
pub fn run_stage(stage: &EnhancerSpec, signal: &PcmSignal, ctx: &EnhanceContext) -> Result<PcmSignal> {
    match stage {
        EnhancerSpec::Modwd { alpha } => {
            let cfg = ModwdConfig {
                alpha: *alpha,
                frame_params: ctx.frame_params,
                bank: make_bior37(),
            };
            modwd_enhance(signal, &cfg)
        }
        EnhancerSpec::SpectralSubtraction(p) => {
            run_spectral(signal, ctx, |s, n| spectral_subtract_multiband(s, n, p))
        }
        EnhancerSpec::Wiener(p) => {
            run_spectral(signal, ctx, |s, n| gain::apply_gain_law(s, n, p, GainLaw::Wiener))
        }
        EnhancerSpec::Stsa(p) => {
            run_spectral(signal, ctx, |s, n| gain::apply_gain_law(s, n, p, GainLaw::Stsa))
        }
        EnhancerSpec::LogStsa(p) => {
            run_spectral(signal, ctx, |s, n| gain::apply_gain_law(s, n, p, GainLaw::LogStsa))
        }
    }
}

/// Run the stages in order; each re-estimates noise on its own input.
pub fn cascade(spec: &CascadeSpec, noisy: &PcmSignal, ctx: &EnhanceContext) -> Result<PcmSignal> {
    spec.validate()?;
    let mut signal = noisy.clone();
    for stage in &spec.stages {
        signal = run_stage(stage, &signal, ctx)?;
    }
    Ok(signal)
}

/// One stage of a method token; `Modwd(None)` means the scaling factor is
/// filled in from the sweep grid at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StageToken {
    Modwd(Option<f64>),
    Ss,
    Wf,
    Stsa,
    LogStsa,
}

/// Parsed "A-B" method token, e.g. `modwd:0.25-ss` or `logstsa-modwd`.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodToken {
    pub stages: Vec<StageToken>,
    pub text: String,
}

impl MethodToken {
    pub fn parse(token: &str) -> Result<Self> {
        let mut stages = Vec::new();
        for part in token.split('-') {
            let part = part.trim();
            let stage = if let Some(rest) = part.strip_prefix("modwd") {
                match rest.strip_prefix(':') {
                    None if rest.is_empty() => StageToken::Modwd(None),
                    Some(a) => {
                        let alpha: f64 = a
                            .parse()
                            .map_err(|_| Error::Config(format!("bad alpha in token {token:?}")))?;
                        if !(0.0..=1.0).contains(&alpha) {
                            return Err(Error::Config(format!(
                                "alpha {alpha} outside [0, 1] in token {token:?}"
                            )));
                        }
                        StageToken::Modwd(Some(alpha))
                    }
                    _ => return Err(Error::Config(format!("unknown stage {part:?}"))),
                }
            } else {
                match part {
                    "ss" => StageToken::Ss,
                    "wf" => StageToken::Wf,
                    "stsa" => StageToken::Stsa,
                    "logstsa" => StageToken::LogStsa,
                    _ => return Err(Error::Config(format!("unknown stage {part:?}"))),
                }
            };
            stages.push(stage);
        }
        if stages.is_empty() {
            return Err(Error::Config("empty method token".into()));
        }
        Ok(Self { stages, text: token.to_string() })
    }

    /// True when some stage needs an alpha from the sweep grid.
    pub fn needs_alpha(&self) -> bool {
        self.stages.iter().any(|s| matches!(s, StageToken::Modwd(None)))
    }

    /// Bind a concrete cascade, filling open alphas with `sweep_alpha`.
    pub fn instantiate(
        &self,
        sweep_alpha: Option<f64>,
        ss: &SsParams,
        gain: &GainParams,
    ) -> Result<CascadeSpec> {
        let stages = self
            .stages
            .iter()
            .map(|s| {
                Ok(match s {
                    StageToken::Modwd(Some(a)) => EnhancerSpec::Modwd { alpha: *a },
                    StageToken::Modwd(None) => {
                        let alpha = sweep_alpha.ok_or_else(|| {
                            Error::Config(format!("token {:?} needs an alpha grid", self.text))
                        })?;
                        EnhancerSpec::Modwd { alpha }
                    }
                    StageToken::Ss => EnhancerSpec::SpectralSubtraction(*ss),
                    StageToken::Wf => EnhancerSpec::Wiener(*gain),
                    StageToken::Stsa => EnhancerSpec::Stsa(*gain),
                    StageToken::LogStsa => EnhancerSpec::LogStsa(*gain),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = CascadeSpec { stages };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn token_parsing() {
        let t = MethodToken::parse("modwd:0-logstsa").unwrap();
        assert_eq!(t.stages, vec![StageToken::Modwd(Some(0.0)), StageToken::LogStsa]);
        let r = MethodToken::parse("logstsa-modwd:0").unwrap();
        assert_eq!(r.stages, vec![StageToken::LogStsa, StageToken::Modwd(Some(0.0))]);
        assert!(MethodToken::parse("modwd:2").is_err());
        assert!(MethodToken::parse("banana").is_err());
        assert!(MethodToken::parse("modwd").unwrap().needs_alpha());
    }

    #[test]
    fn instantiation_requires_alpha_when_open() {
        let t = MethodToken::parse("modwd-ss").unwrap();
        assert!(t.instantiate(None, &SsParams::default(), &GainParams::default()).is_err());
        let spec = t
            .instantiate(Some(0.25), &SsParams::default(), &GainParams::default())
            .unwrap();
        assert_eq!(spec.stages[0], EnhancerSpec::Modwd { alpha: 0.25 });
    }

    #[test]
    fn empty_cascade_rejected() {
        let spec = CascadeSpec { stages: vec![] };
        let sig = PcmSignal::new(vec![0.1; 2000], 8000);
        assert!(matches!(
            cascade(&spec, &sig, &EnhanceContext::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn single_stage_cascade_equals_direct_call() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sig = PcmSignal::new((0..3000).map(|_| rng.gen_range(-0.5..0.5)).collect(), 8000);
        let ctx = EnhanceContext::default();
        let spec = CascadeSpec { stages: vec![EnhancerSpec::Modwd { alpha: 0.25 }] };
        let a = cascade(&spec, &sig, &ctx).unwrap();
        let cfg = ModwdConfig::new(0.25);
        let b = modwd_enhance(&sig, &cfg).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn cascade_order_matters() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let sig = PcmSignal::new((0..4000).map(|_| rng.gen_range(-0.5..0.5)).collect(), 8000);
        let ctx = EnhanceContext::default();
        let ab = CascadeSpec {
            stages: vec![
                EnhancerSpec::Modwd { alpha: 0.0 },
                EnhancerSpec::SpectralSubtraction(SsParams::default()),
            ],
        };
        let ba = CascadeSpec {
            stages: vec![
                EnhancerSpec::SpectralSubtraction(SsParams::default()),
                EnhancerSpec::Modwd { alpha: 0.0 },
            ],
        };
        let x = cascade(&ab, &sig, &ctx).unwrap();
        let y = cascade(&ba, &sig, &ctx).unwrap();
        let n = x.len().min(y.len());
        let rms = (x.samples[..n]
            .iter()
            .zip(&y.samples[..n])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / n as f64)
            .sqrt();
        assert!(rms > 1e-4, "orders unexpectedly agree, rms {rms}");
    }

    #[test]
    fn determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sig = PcmSignal::new((0..3000).map(|_| rng.gen_range(-0.5..0.5)).collect(), 8000);
        let ctx = EnhanceContext::default();
        let spec = MethodToken::parse("ss-wf")
            .unwrap()
            .instantiate(None, &SsParams::default(), &GainParams::default())
            .unwrap();
        let a = cascade(&spec, &sig, &ctx).unwrap();
        let b = cascade(&spec, &sig, &ctx).unwrap();
        assert_eq!(a.samples, b.samples);
    }
}
