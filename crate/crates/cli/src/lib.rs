//! Argument parsing, CSV serialization and subcommand dispatch for the
//! `swp-lmmse` binary. Kept in a library so the integration tests can drive
//! [`run`] without spawning processes.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use swp_lmmse::complexity::{sweep_mads, ComplexityMethod, MadsRow};
use swp_lmmse::geometry::build_ccm;
use swp_lmmse::rng::{StreamKey, StreamRole};
use swp_lmmse::sim::{run_sweep_with_workers, ChannelSampler};
use swp_lmmse::validate::{run_checks, ValidationReport};
use swp_lmmse::{ChannelMode, Complex64, ExperimentConfig, Method, NmseCurve, UcaConfig};

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_ARGS: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// Antenna counts used by `complexity` when `--n` is not given.
pub const DEFAULT_COMPLEXITY_N: [u64; 7] = [16, 32, 64, 128, 256, 512, 1024];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid arguments: {0}")]
    Args(String),
    #[error("validation failed:\n{0}")]
    Validation(String),
    #[error("computation failed: {0}")]
    Compute(#[from] swp_lmmse::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Args(_) => EXIT_ARGS,
            CliError::Validation(_) | CliError::Compute(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn args_err(e: swp_lmmse::Error) -> CliError {
    CliError::Args(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "swp-lmmse", version, about = "LMMSE channel estimation for parallel UCAs under the spherical wave model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo NMSE versus SNR for the selected estimators.
    NmseSweep(SweepArgs),
    /// Closed-form operation counts for the four LMMSE variants.
    Complexity(ComplexityArgs),
    /// Run the numerical self-checks for one scene.
    Validate(ValidateArgs),
    /// Write one channel realization and the first row of its covariance.
    ChannelDump(DumpArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SceneArgs {
    /// Antennas per array.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long = "freq-ghz", default_value_t = 100.0, allow_negative_numbers = true)]
    pub freq_ghz: f64,
    /// Transmit array radius in metres.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub rt: f64,
    /// Receive array radius in metres.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub rr: f64,
    /// Link distance in metres.
    #[arg(long, default_value_t = 100.0, allow_negative_numbers = true)]
    pub d: f64,
}

impl SceneArgs {
    pub fn to_config(&self) -> Result<UcaConfig, CliError> {
        if !(self.freq_ghz.is_finite() && self.freq_ghz > 0.0) {
            return Err(CliError::Args(format!("--freq-ghz must be positive, got {}", self.freq_ghz)));
        }
        UcaConfig::new(self.n, self.rt, self.rr, self.d, self.freq_ghz * 1e9).map_err(args_err)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Observation slots per trial.
    #[arg(long, default_value_t = 10)]
    pub t: usize,
    /// SNR points in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-10,-5,0,5,10,15,20")]
    pub snr: Vec<f64>,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "ls,lmmse-direct-known,lmmse-swp-known,lmmse-swp-unknown,lmmse-direct-unknown")]
    pub methods: Vec<String>,
    #[arg(long = "channel-mode", default_value = "gaussian-prior")]
    pub channel_mode: String,
    /// Simulate pilot transmission with this pilot length (at least N).
    #[arg(long = "pilot-len")]
    pub pilot_len: Option<usize>,
    /// Worker threads; results do not depend on this value.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SweepArgs {
    pub fn to_config(&self) -> Result<ExperimentConfig, CliError> {
        let methods = self
            .methods
            .iter()
            .map(|m| m.parse::<Method>().map_err(args_err))
            .collect::<Result<Vec<_>, _>>()?;
        if self.workers == Some(0) {
            return Err(CliError::Args("--workers must be at least 1".into()));
        }
        let cfg = ExperimentConfig {
            scene: self.scene.to_config()?,
            t_slots: self.t,
            snr_points_db: self.snr.clone(),
            trials: self.trials,
            seed: self.seed,
            channel_mode: self.channel_mode.parse::<ChannelMode>().map_err(args_err)?,
            methods,
            pilot_length: self.pilot_len,
        };
        cfg.validate().map_err(args_err)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ComplexityArgs {
    /// Antenna counts; defaults to 16, 32, ..., 1024.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long, default_value_t = 10)]
    pub t: u64,
    #[arg(long, value_delimiter = ',', default_value = "swp-known,swp-unknown,direct-known,direct-unknown")]
    pub methods: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long = "channel-mode", default_value = "deterministic-los")]
    pub channel_mode: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Channel CSV path. The covariance row goes next to it with a `-ccm` suffix.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn nmse_csv(curve: &NmseCurve, cfg: &ExperimentConfig) -> String {
    let mut s = String::from("method,snr_db,nmse_mean,nmse_stderr,trials,n,t,seed\n");
    for p in &curve.points {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.method, p.snr_db, p.nmse_mean, p.nmse_stderr, p.trials, cfg.scene.n_antennas, cfg.t_slots, cfg.seed
        ));
    }
    s
}

pub fn complexity_csv(rows: &[MadsRow]) -> String {
    let mut s = String::from("method,n,t,additions,multiplications,mads,log10_mads\n");
    for r in rows {
        let p = &r.profile;
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.method, p.n, p.t, p.additions, p.multiplications, p.mads, r.log10_mads
        ));
    }
    s
}

pub fn matrix_csv(m: &swp_lmmse::CMatrix) -> String {
    let mut s = String::from("row,col,re,im\n");
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            s.push_str(&format!("{r},{c},{},{}\n", z.re, z.im));
        }
    }
    s
}

pub fn first_row_csv(row: &[Complex64]) -> String {
    let mut s = String::from("lag,re,im\n");
    for (k, z) in row.iter().enumerate() {
        s.push_str(&format!("{k},{},{}\n", z.re, z.im));
    }
    s
}

/// Writes `contents` to a temporary file in the target directory and renames
/// it into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `out/channel.csv` becomes `out/channel-ccm.csv`.
pub fn ccm_sibling(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-ccm.{}", ext.to_string_lossy()),
        None => format!("{stem}-ccm"),
    };
    path.with_file_name(name)
}

/// Result of a subcommand: text for standard output and files to create.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
}

impl Output {
    fn to(out: &Option<PathBuf>, contents: String) -> Self {
        match out {
            Some(p) => Output {
                stdout: String::new(),
                files: vec![(p.clone(), contents)],
            },
            None => Output {
                stdout: contents,
                files: Vec::new(),
            },
        }
    }
}

pub fn run_nmse_sweep(args: &SweepArgs) -> Result<Output, CliError> {
    let cfg = args.to_config()?;
    let curve = run_sweep_with_workers(&cfg, args.workers)?;
    Ok(Output::to(&args.out, nmse_csv(&curve, &cfg)))
}

pub fn run_complexity(args: &ComplexityArgs) -> Result<Output, CliError> {
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse::<ComplexityMethod>().map_err(args_err))
        .collect::<Result<Vec<_>, _>>()?;
    let n_list: Vec<u64> = if args.n.is_empty() { DEFAULT_COMPLEXITY_N.to_vec() } else { args.n.clone() };
    let rows = sweep_mads(&methods, &n_list, args.t).map_err(args_err)?;
    Ok(Output::to(&args.out, complexity_csv(&rows)))
}

pub fn run_validate(args: &ValidateArgs) -> Result<(Output, ValidationReport), CliError> {
    let cfg = args.scene.to_config()?;
    let report = run_checks(&cfg, args.seed)?;
    Ok((
        Output {
            stdout: report.to_string(),
            files: Vec::new(),
        },
        report,
    ))
}

pub fn run_channel_dump(args: &DumpArgs) -> Result<Output, CliError> {
    let cfg = args.scene.to_config()?;
    let mode: ChannelMode = args.channel_mode.parse().map_err(args_err)?;
    let ccm = build_ccm(&cfg)?;
    let sampler = ChannelSampler::for_mode(mode, &cfg, &ccm)?;
    let h = sampler.sample(&mut StreamKey::new(args.seed, 0, 0, StreamRole::Channel).rng());
    let channel = matrix_csv(h.entries());
    let row = first_row_csv(ccm.first_row());
    Ok(match &args.out {
        Some(p) => Output {
            stdout: String::new(),
            files: vec![(p.clone(), channel), (ccm_sibling(p), row)],
        },
        None => Output {
            stdout: format!("{channel}\n{row}"),
            files: Vec::new(),
        },
    })
}

/// Runs one parsed invocation. Files are written only after the whole
/// computation has succeeded.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let output = match &cli.command {
        Command::NmseSweep(a) => run_nmse_sweep(a)?,
        Command::Complexity(a) => run_complexity(a)?,
        Command::ChannelDump(a) => run_channel_dump(a)?,
        Command::Validate(a) => {
            let (output, report) = run_validate(a)?;
            if !report.passed() {
                return Err(CliError::Validation(output.stdout));
            }
            output
        }
    };
    for (path, contents) in &output.files {
        write_atomic(path, contents)?;
    }
    Ok(output.stdout)
}
