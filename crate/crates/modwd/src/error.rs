use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a RIFF/WAVE file: {0}")]
    MalformedHeader(String),
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
    #[error("audio stream contains no samples")]
    EmptyAudio,
    #[error("every sample clipped during 16-bit quantization")]
    AllSamplesClipped,
    #[error("input has zero power, cannot set an SNR")]
    SilentInput,
    #[error("signal too short: {got} samples, need at least {need}")]
    SignalTooShort { got: usize, need: usize },
    #[error("sequence too short for one-level DWT: {0} samples")]
    SequenceTooShort(usize),
    #[error("approximation/detail lengths differ: {approx} vs {detail}")]
    InconsistentPair { approx: usize, detail: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("too few frames: {got}, need {need}")]
    TooFewFrames { got: usize, need: usize },
    #[error("signal lengths differ by more than one frame: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("no frames with usable energy")]
    AllFramesSilent,
    #[error("sample rates differ: {a} Hz vs {b} Hz")]
    SampleRateMismatch { a: u32, b: u32 },
    #[error("payload header mismatch: {0}")]
    VersionError(String),
    #[error("external scorer failed: {0}")]
    ProcessFailure(String),
    #[error("could not parse score from scorer output: {0:?}")]
    ParseFailure(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
