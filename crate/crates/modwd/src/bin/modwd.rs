//! Batch evaluation driver: noisy-mixture generation, enhancement sweeps,
//! approximation-payload transport, and objective-score reports.
//!
//! Exit codes: 0 on success, 1 when any processing cell fails, 2 for
//! configuration or usage errors.

use clap::{Parser, Subcommand};
use modwd::config::RunConfig;
use modwd::enhance::{cascade, EnhanceContext, MethodToken};
use modwd::error::{Error, Result};
use modwd::metrics::{external_score, log_spectral_distance, segmental_snr};
use modwd::signal::{mix_at_snr, read_wav, write_wav_format, PcmSignal, WavEncoding};
use modwd::transport;
use rayon::prelude::*;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "modwd", about = "Wavelet-domain speech enhancement toolkit", version)]
struct Cli {
    /// Key = value configuration file applied before the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mix every clean utterance with the noise file at each SNR.
    Mix {
        /// Directory of clean mono WAV files.
        #[arg(long)]
        clean_dir: Option<PathBuf>,
        /// Noise WAV, tiled to the utterance length.
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Output directory for `<utt>_<snr>dB.wav`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Comma-separated SNR grid in dB.
        #[arg(long)]
        snr: Option<String>,
    },
    /// Run the enhancement sweep over utterances, SNRs, methods, and alphas.
    Enhance {
        #[arg(long)]
        clean_dir: Option<PathBuf>,
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// CSV report path (defaults to `<out_dir>/report.csv`).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Comma-separated method tokens, e.g. `modwd,ss,modwd:0-logstsa`.
        #[arg(long)]
        method: Option<String>,
        /// Comma-separated detail-scaling grid for open `modwd` stages.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        snr: Option<String>,
        /// Worker thread count (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Scorer command with `{clean}` and `{processed}` placeholders.
        #[arg(long)]
        external_metric: Option<String>,
        /// Regex whose first capture (or whole match) is the score.
        #[arg(long)]
        external_metric_pattern: Option<String>,
    },
    /// Analyze a WAV and write the approximation payload plus phase sidecar.
    Compress {
        input: PathBuf,
        payload: PathBuf,
        phase: PathBuf,
    },
    /// Rebuild a WAV from a payload and its phase sidecar.
    Decompress {
        payload: PathBuf,
        phase: PathBuf,
        output: PathBuf,
    },
    /// Score already-processed files against their clean references.
    Report {
        #[arg(long)]
        clean_dir: Option<PathBuf>,
        /// Directory of processed WAVs named `<utt>_...wav`.
        #[arg(long)]
        processed_dir: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        external_metric: Option<String>,
        #[arg(long)]
        external_metric_pattern: Option<String>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::ParseFailure(_) => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.load_file(path)?;
    }
    match cli.command {
        Command::Mix { clean_dir, noise, out_dir, snr } => {
            override_paths(&mut cfg, clean_dir, noise, out_dir)?;
            if let Some(s) = snr {
                cfg.apply_kv("snr", &s)?;
            }
            cfg.validate()?;
            cmd_mix(&cfg)
        }
        Command::Enhance {
            clean_dir,
            noise,
            out_dir,
            report,
            method,
            alpha,
            snr,
            jobs,
            external_metric,
            external_metric_pattern,
        } => {
            override_paths(&mut cfg, clean_dir, noise, out_dir)?;
            if let Some(p) = report {
                cfg.report = Some(p);
            }
            if let Some(s) = method {
                cfg.apply_kv("method", &s)?;
            }
            if let Some(s) = alpha {
                cfg.apply_kv("alpha", &s)?;
            }
            if let Some(s) = snr {
                cfg.apply_kv("snr", &s)?;
            }
            if let Some(j) = jobs {
                cfg.jobs = Some(j);
            }
            if let Some(m) = external_metric {
                cfg.external_metric = Some(m);
            }
            if let Some(p) = external_metric_pattern {
                cfg.external_metric_pattern = Some(p);
            }
            cfg.validate()?;
            in_pool(cfg.jobs, || cmd_enhance(&cfg))
        }
        Command::Compress { input, payload, phase } => {
            cfg.validate()?;
            let signal = read_wav(&input)?;
            transport::compress(&signal, &cfg.frame_params, &payload, &phase)
        }
        Command::Decompress { payload, phase, output } => {
            let signal = transport::decompress(&payload, &phase)?;
            write_signal(&output, &signal, &cfg)
        }
        Command::Report {
            clean_dir,
            processed_dir,
            report,
            external_metric,
            external_metric_pattern,
        } => {
            if let Some(d) = clean_dir {
                cfg.clean_dir = Some(d);
            }
            if let Some(m) = external_metric {
                cfg.external_metric = Some(m);
            }
            if let Some(p) = external_metric_pattern {
                cfg.external_metric_pattern = Some(p);
            }
            if let Some(p) = report {
                cfg.report = Some(p);
            }
            cmd_report(&cfg, &processed_dir)
        }
    }
}

fn override_paths(
    cfg: &mut RunConfig,
    clean_dir: Option<PathBuf>,
    noise: Option<PathBuf>,
    out_dir: Option<PathBuf>,
) -> Result<()> {
    if let Some(d) = clean_dir {
        cfg.clean_dir = Some(d);
    }
    if let Some(n) = noise {
        cfg.noise = Some(n);
    }
    if let Some(d) = out_dir {
        cfg.out_dir = Some(d);
    }
    Ok(())
}

fn in_pool<F: FnOnce() -> Result<()> + Send>(jobs: Option<usize>, f: F) -> Result<()> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build a {n}-thread pool: {e}")))?;
            pool.install(f)
        }
        None => f(),
    }
}

fn require<'a, T>(opt: &'a Option<T>, what: &str) -> Result<&'a T> {
    opt.as_ref()
        .ok_or_else(|| Error::Config(format!("{what} is required (flag or config file)")))
}

/// Clean WAVs in deterministic name order; the utterance id is the file stem.
fn list_wavs(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let is_wav = path
            .extension()
            .map_or(false, |e| e.eq_ignore_ascii_case("wav"));
        if is_wav {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::Config(format!("non-UTF-8 file name in {}", dir.display())))?
                .to_string();
            out.push((stem, path));
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!("no .wav files in {}", dir.display())));
    }
    out.sort();
    Ok(out)
}

/// `5` for integral values, `-2.5` otherwise; used in file names.
fn fmt_snr(snr: f64) -> String {
    if snr.fract() == 0.0 {
        format!("{}", snr as i64)
    } else {
        format!("{snr}")
    }
}

fn write_signal(path: &Path, signal: &PcmSignal, cfg: &RunConfig) -> Result<()> {
    let enc = if cfg.wav_float { WavEncoding::Float32 } else { WavEncoding::Pcm16 };
    let clipped = write_wav_format(path, signal, enc)?;
    if clipped > 0 {
        eprintln!("warning: {} clipped {clipped} samples", path.display());
    }
    Ok(())
}

fn cmd_mix(cfg: &RunConfig) -> Result<()> {
    let clean_dir = require(&cfg.clean_dir, "--clean-dir")?;
    let noise_path = require(&cfg.noise, "--noise")?;
    let out_dir = require(&cfg.out_dir, "--out-dir")?;
    std::fs::create_dir_all(out_dir)?;
    let noise = read_wav(noise_path)?;
    for (stem, path) in list_wavs(clean_dir)? {
        let clean = read_wav(&path)?;
        for &snr in &cfg.snr_grid {
            let noisy = mix_at_snr(&clean, &noise, snr)?;
            let out = out_dir.join(format!("{stem}_{}dB.wav", fmt_snr(snr)));
            write_signal(&out, &noisy, cfg)?;
        }
    }
    Ok(())
}

/// One sweep cell: a (utterance, SNR, method, alpha) combination.
struct Cell {
    utterance: String,
    clean_path: PathBuf,
    snr_db: f64,
    method: MethodToken,
    alpha: Option<f64>,
}

struct Row {
    utterance: String,
    method: String,
    alpha: Option<f64>,
    snr_db: f64,
    seg_snr_db: f64,
    lsd_db: f64,
    external: Option<f64>,
}

impl Row {
    fn csv_line(&self, with_external: bool) -> String {
        let alpha = self.alpha.map_or(String::new(), |a| format!("{a}"));
        let mut line = format!(
            "{},{},{},{},{:.6},{:.6}",
            self.utterance,
            self.method,
            alpha,
            fmt_snr(self.snr_db),
            self.seg_snr_db,
            self.lsd_db
        );
        if with_external {
            line.push(',');
            if let Some(x) = self.external {
                line.push_str(&format!("{x:.6}"));
            }
        }
        line
    }
}

fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| {
        (&a.utterance, &a.method)
            .cmp(&(&b.utterance, &b.method))
            .then(a.alpha.partial_cmp(&b.alpha).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.snr_db.partial_cmp(&b.snr_db).unwrap_or(std::cmp::Ordering::Equal))
    });
}

fn write_report(path: &Path, rows: &[Row], with_external: bool) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = if with_external {
        "utterance_id,method,alpha,snr_db,seg_snr_db,lsd_db,external"
    } else {
        "utterance_id,method,alpha,snr_db,seg_snr_db,lsd_db"
    };
    writeln!(f, "{header}")?;
    for row in rows {
        writeln!(f, "{}", row.csv_line(with_external))?;
    }
    Ok(())
}

fn cell_file_name(cell: &Cell) -> String {
    let method = cell.method.text.replace(':', "");
    match cell.alpha {
        Some(a) => format!("{}_{}dB_{}_a{a}.wav", cell.utterance, fmt_snr(cell.snr_db), method),
        None => format!("{}_{}dB_{}.wav", cell.utterance, fmt_snr(cell.snr_db), method),
    }
}

fn run_cell(cell: &Cell, cfg: &RunConfig, out_dir: &Path, noise: &PcmSignal) -> Result<Row> {
    let clean = read_wav(&cell.clean_path)?;
    let noisy = mix_at_snr(&clean, noise, cell.snr_db)?;
    let spec = cell.method.instantiate(cell.alpha, &cfg.ss, &cfg.gain)?;
    let ctx = EnhanceContext { frame_params: cfg.frame_params, noise_frames: cfg.noise_frames };
    let enhanced = cascade(&spec, &noisy, &ctx)?;
    let out_path = out_dir.join(cell_file_name(cell));
    write_signal(&out_path, &enhanced, cfg)?;
    // score the file that was actually written, so PCM quantization counts
    let processed = read_wav(&out_path)?;
    let seg_snr_db = segmental_snr(&clean, &processed)?;
    let lsd_db = log_spectral_distance(&clean, &processed)?;
    let external = match &cfg.external_metric {
        Some(command) => Some(external_score(
            command,
            &cell.clean_path,
            &out_path,
            cfg.external_metric_pattern.as_deref(),
        )?),
        None => None,
    };
    Ok(Row {
        utterance: cell.utterance.clone(),
        method: cell.method.text.clone(),
        alpha: cell.alpha,
        snr_db: cell.snr_db,
        seg_snr_db,
        lsd_db,
        external,
    })
}

fn cmd_enhance(cfg: &RunConfig) -> Result<()> {
    let clean_dir = require(&cfg.clean_dir, "--clean-dir")?;
    let noise_path = require(&cfg.noise, "--noise")?;
    let out_dir = require(&cfg.out_dir, "--out-dir")?.clone();
    std::fs::create_dir_all(&out_dir)?;
    let noise = read_wav(noise_path)?;
    let methods = cfg
        .methods
        .iter()
        .map(|m| MethodToken::parse(m))
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    for (utterance, clean_path) in list_wavs(clean_dir)? {
        for &snr_db in &cfg.snr_grid {
            for method in &methods {
                let alphas: Vec<Option<f64>> = if method.needs_alpha() {
                    cfg.alpha_grid.iter().map(|&a| Some(a)).collect()
                } else {
                    vec![None]
                };
                for alpha in alphas {
                    cells.push(Cell {
                        utterance: utterance.clone(),
                        clean_path: clean_path.clone(),
                        snr_db,
                        method: method.clone(),
                        alpha,
                    });
                }
            }
        }
    }

    let results: Vec<Result<Row>> = cells
        .par_iter()
        .map(|cell| {
            run_cell(cell, cfg, &out_dir, &noise).map_err(|e| {
                Error::ProcessFailure(format!("cell {}: {e}", cell_file_name(cell)))
            })
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut failed = false;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                eprintln!("error: {e}");
                failed = true;
            }
        }
    }
    sort_rows(&mut rows);
    let report_path = cfg
        .report
        .clone()
        .unwrap_or_else(|| out_dir.join("report.csv"));
    write_report(&report_path, &rows, cfg.external_metric.is_some())?;
    if failed {
        return Err(Error::ProcessFailure("one or more sweep cells failed".into()));
    }
    Ok(())
}

/// Parse `<snr>dB[_<method>[_a<alpha>]]` out of a processed-file suffix.
fn parse_suffix(suffix: &str) -> (f64, String, Option<f64>) {
    let mut parts = suffix.split('_');
    let snr = parts
        .next()
        .and_then(|p| p.strip_suffix("dB"))
        .and_then(|p| p.parse().ok())
        .unwrap_or(f64::NAN);
    let rest: Vec<&str> = parts.collect();
    match rest.split_last() {
        Some((last, head)) if last.starts_with('a') && last[1..].parse::<f64>().is_ok() => {
            (snr, head.join("_"), last[1..].parse().ok())
        }
        _ => (snr, rest.join("_"), None),
    }
}

fn cmd_report(cfg: &RunConfig, processed_dir: &Path) -> Result<()> {
    let clean_dir = require(&cfg.clean_dir, "--clean-dir")?;
    let report_path = require(&cfg.report, "--report")?;
    let mut cleans = list_wavs(clean_dir)?;
    // longest stems first so `spk1_long` wins over `spk1` as a prefix
    cleans.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
    let processed = list_wavs(processed_dir)?;

    let results: Vec<Result<Row>> = processed
        .par_iter()
        .map(|(stem, path)| {
            let (utterance, clean_path, suffix) = cleans
                .iter()
                .find_map(|(cs, cp)| {
                    stem.strip_prefix(cs.as_str())
                        .and_then(|rest| rest.strip_prefix('_'))
                        .map(|rest| (cs.clone(), cp.clone(), rest.to_string()))
                })
                .ok_or_else(|| {
                    Error::ProcessFailure(format!("no clean reference matches {stem:?}"))
                })?;
            let clean = read_wav(&clean_path)?;
            let proc = read_wav(path)?;
            let seg_snr_db = segmental_snr(&clean, &proc)?;
            let lsd_db = log_spectral_distance(&clean, &proc)?;
            let external = match &cfg.external_metric {
                Some(command) => Some(external_score(
                    command,
                    &clean_path,
                    path,
                    cfg.external_metric_pattern.as_deref(),
                )?),
                None => None,
            };
            let (snr_db, method, alpha) = parse_suffix(&suffix);
            Ok(Row { utterance, method, alpha, snr_db, seg_snr_db, lsd_db, external })
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut failed = false;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                eprintln!("error: {e}");
                failed = true;
            }
        }
    }
    sort_rows(&mut rows);
    write_report(report_path, &rows, cfg.external_metric.is_some())?;
    if failed {
        return Err(Error::ProcessFailure("one or more files failed to score".into()));
    }
    Ok(())
}
