//! Flat key-value run configuration.
//!
//! Every numeric constant in the pipeline is overridable by key; the
//! defaults reproduce the standard 8 kHz setup (20 ms / 10 ms Hamming
//! frames, 256-point FFT, bior3.7, alpha sweep {0, 0.25, 0.5, 0.75, 1}).
//!
//! File format: one `key = value` per line, `#` comments, lists comma
//! separated.

use crate::enhance::{GainParams, SsParams, DEFAULT_NOISE_FRAMES};
use crate::error::{Error, Result};
use crate::stft::{FrameParams, WindowKind};
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub clean_dir: Option<PathBuf>,
    pub noise: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub snr_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub methods: Vec<String>,
    pub jobs: Option<usize>,
    pub external_metric: Option<String>,
    pub external_metric_pattern: Option<String>,
    pub frame_params: FrameParams,
    pub noise_frames: usize,
    pub gain: GainParams,
    pub ss: SsParams,
    pub wav_float: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            clean_dir: None,
            noise: None,
            out_dir: None,
            report: None,
            snr_grid: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            alpha_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            methods: vec!["modwd".to_string()],
            jobs: None,
            external_metric: None,
            external_metric_pattern: None,
            frame_params: FrameParams::default(),
            noise_frames: DEFAULT_NOISE_FRAMES,
            gain: GainParams::default(),
            ss: SsParams::default(),
            wav_float: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for key {key:?}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| parse_num(key, v))
        .collect::<Result<Vec<f64>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(Error::Config(format!("empty list for key {key:?}")))
            } else {
                Ok(v)
            }
        })
}

impl RunConfig {
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "clean_dir" => self.clean_dir = Some(v.into()),
            "noise" => self.noise = Some(v.into()),
            "out_dir" => self.out_dir = Some(v.into()),
            "report" => self.report = Some(v.into()),
            "snr" => self.snr_grid = parse_list(key, v)?,
            "alpha" => self.alpha_grid = parse_list(key, v)?,
            "method" => {
                self.methods = v.split(',').map(|m| m.trim().to_string()).collect();
            }
            "jobs" => self.jobs = Some(parse_num(key, v)?),
            "external_metric" => self.external_metric = Some(v.to_string()),
            "external_metric_pattern" => self.external_metric_pattern = Some(v.to_string()),
            "frame_len" => self.frame_params.frame_len = parse_num(key, v)?,
            "hop" => self.frame_params.hop = parse_num(key, v)?,
            "fft_size" => self.frame_params.fft_size = parse_num(key, v)?,
            "window" => {
                self.frame_params.window = match v {
                    "hamming" => WindowKind::Hamming,
                    "hamming-periodic" => WindowKind::HammingPeriodic,
                    _ => return Err(Error::Config(format!("unknown window {v:?}"))),
                }
            }
            "noise_frames" => self.noise_frames = parse_num(key, v)?,
            "a_dd" => self.gain.a_dd = parse_num(key, v)?,
            "gain_floor" => self.gain.gain_floor = parse_num(key, v)?,
            "ss_beta_max" => self.ss.beta_max = parse_num(key, v)?,
            "ss_beta_min" => self.ss.beta_min = parse_num(key, v)?,
            "ss_snr_low_db" => self.ss.snr_low_db = parse_num(key, v)?,
            "ss_snr_high_db" => self.ss.snr_high_db = parse_num(key, v)?,
            "ss_delta_low" => self.ss.delta_low = parse_num(key, v)?,
            "ss_delta_mid" => self.ss.delta_mid = parse_num(key, v)?,
            "ss_delta_top" => self.ss.delta_top = parse_num(key, v)?,
            "ss_floor" => self.ss.floor = parse_num(key, v)?,
            "wav_float" => self.wav_float = parse_num(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &std::path::Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.apply_kv(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_grid.is_empty() {
            return Err(Error::Config("snr grid is empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("method list is empty".into()));
        }
        for &a in &self.alpha_grid {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Config(format!("alpha {a} outside [0, 1]")));
            }
        }
        self.frame_params.validate()
    }
}
