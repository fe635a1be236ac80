//! Speech enhancement by temporal-axis wavelet denoising of the magnitude
//! spectrogram (ModWD), together with the classical single-channel
//! enhancers it is evaluated against, objective quality metrics, and a
//! two-file transport of the approximation-only representation.
//!
//! Pipeline: STFT (20 ms Hamming frames, 10 ms hop, 256-point FFT at
//! 8 kHz), one-level bior3.7 DWT along each frequency row's frame axis,
//! detail scaling by `alpha` in [0, 1], inverse DWT, and overlap-add
//! resynthesis with the noisy phase. `alpha = 1` is the unprocessed
//! baseline; `alpha = 0` keeps only the approximation half.

pub mod config;
pub mod dwt;
pub mod enhance;
pub mod error;
pub mod metrics;
pub mod modwd;
pub mod signal;
pub mod stft;
pub mod transport;

pub use config::RunConfig;
pub use dwt::{dwt1, idwt1, make_bior37, BiorFilterBank, WaveletPair};
pub use enhance::{cascade, CascadeSpec, EnhanceContext, EnhancerSpec, MethodToken};
pub use error::{Error, Result};
pub use metrics::{external_score, log_spectral_distance, segmental_snr};
pub use modwd::{modwd_enhance, ModwdConfig, WaveletSpectrogram};
pub use signal::{mix_at_snr, read_wav, write_wav, write_wav_format, PcmSignal, WavEncoding};
pub use stft::{istft, stft, ComplexSpectrogram, FrameParams, MagPhase, WindowKind};
