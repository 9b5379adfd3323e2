//! Command-line driver for chaotic analog code simulations.
//!
//! Subcommands: `simulate` (analog ML sweep), `baseline` (digital pipeline
//! sweep), `genie` (genie-aided tent sweep), `segments` (decoder segment
//! table), `rate` (exact code rate). Sweeps emit CSV; every flag can also be
//! supplied from a `key = value` config file, with flags taking precedence.
//!
//! Exit codes: 0 success, 2 configuration error, 1 runtime failure.

use anyhow::Context;
use chaoscode::code::CodeSpec;
use chaoscode::config::load_config;
use chaoscode::decoder::enumerate_segments;
use chaoscode::digital::{ConvCodeSpec, PamSpec, PipelineSpec, QuantizerSpec};
use chaoscode::map::{Sign, TentParam};
use chaoscode::sweep::{run_sweep, write_csv, SimulationConfig, SweepRow, SystemSpec};
use chaoscode::Error;
use clap::{Args, Parser, Subcommand};
use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(name = "chaoscode", version, about = "Chaotic analog code simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Monte Carlo MSE-vs-SNR sweep of an analog code under exact ML decoding
    Simulate {
        #[command(flatten)]
        code: CodeFlags,
        #[command(flatten)]
        sweep: SweepFlags,
    },
    /// Sweep of the digital quantize + convolutional + PAM baseline (1:6 expansion)
    Baseline {
        /// Quantizer resolution in bits (3 or 6 in the experiments)
        #[arg(long)]
        bits: Option<u32>,
        /// PAM order (2 or 4); derived from the 1:6 constraint when omitted
        #[arg(long)]
        pam: Option<usize>,
        #[command(flatten)]
        sweep: SweepFlags,
    },
    /// Genie-aided tent sweep: decode with the true symbolic coding
    Genie {
        /// Orbit length of the tent code
        #[arg(long)]
        n: Option<usize>,
        /// Tent map slope (default 2)
        #[arg(long)]
        beta: Option<f64>,
        #[command(flatten)]
        sweep: SweepFlags,
    },
    /// Print the ML decoder's segment count (and regions) for a code
    Segments {
        #[command(flatten)]
        code: CodeFlags,
        /// Also print each segment's sign pattern and source region
        #[arg(long)]
        regions: bool,
    },
    /// Print the exact code rate
    Rate {
        #[command(flatten)]
        code: CodeFlags,
    },
}

#[derive(Args, Debug)]
struct CodeFlags {
    /// Code family: tent, tent-turbo, baker, baker-turbo
    #[arg(long)]
    code: Option<String>,
    /// Orbit length per component map
    #[arg(long)]
    n: Option<usize>,
    /// Tent map slope (tent families only, default 2)
    #[arg(long)]
    beta: Option<f64>,
    /// Drop the duplicate systematic symbol(s) (turbo families only)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    puncture: Option<bool>,
}

#[derive(Args, Debug)]
struct SweepFlags {
    /// `key = value` config file; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// First SNR point in dB [default: 0]
    #[arg(long)]
    snr_start: Option<f64>,
    /// Last SNR point in dB [default: 20]
    #[arg(long)]
    snr_stop: Option<f64>,
    /// SNR grid spacing in dB [default: 2]
    #[arg(long)]
    snr_step: Option<f64>,
    /// Trials per SNR point; one baseline trial is a 1000-symbol frame [default: 10000]
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed; sweeps are bit-reproducible given the seed [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the trial loop (rayon default when omitted)
    #[arg(long)]
    threads: Option<usize>,
}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    Error::Config(msg.into()).into()
}

/// File-backed fallback for flags: a flag wins, otherwise the config value.
struct Resolver {
    file: HashMap<String, String>,
}

impl Resolver {
    fn new(path: Option<&PathBuf>) -> anyhow::Result<Self> {
        let file = match path {
            Some(p) => load_config(p).with_context(|| format!("reading {}", p.display()))?,
            None => HashMap::new(),
        };
        Ok(Self { file })
    }

    fn get<T: FromStr>(&self, key: &str, flag: Option<T>) -> anyhow::Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| config_err(format!("config key `{key}`: cannot parse `{raw}`"))),
            None => Ok(None),
        }
    }
}

fn build_code_spec(flags: &CodeFlags, r: &Resolver) -> anyhow::Result<CodeSpec> {
    let family = r
        .get("code", flags.code.clone())?
        .ok_or_else(|| config_err("missing --code (tent, tent-turbo, baker, baker-turbo)"))?;
    let n = r
        .get("n", flags.n)?
        .ok_or_else(|| config_err("missing --n (orbit length)"))?;
    let beta = r.get("beta", flags.beta)?;
    let punctured = r.get("puncture", flags.puncture)?.unwrap_or(false);
    let tent_param = match beta {
        Some(b) => TentParam::new(b)?,
        None => TentParam::default(),
    };
    let spec = match family.as_str() {
        "tent" => CodeSpec::tent_with_beta(n, tent_param)?,
        "tent-turbo" => {
            let spec = CodeSpec::TentTurbo { n, beta: tent_param, punctured };
            spec.validate()?;
            spec
        }
        "baker" => CodeSpec::baker(n)?,
        "baker-turbo" => CodeSpec::baker_turbo(n, punctured)?,
        other => {
            return Err(config_err(format!(
                "unknown code family `{other}` (expected tent, tent-turbo, baker, baker-turbo)"
            )))
        }
    };
    match spec {
        CodeSpec::Baker { .. } | CodeSpec::BakerTurbo { .. } if beta.is_some() => {
            return Err(config_err("--beta applies to the tent families only"));
        }
        CodeSpec::Tent { .. } | CodeSpec::Baker { .. } if punctured => {
            return Err(config_err("--puncture applies to the turbo families only"));
        }
        _ => {}
    }
    Ok(spec)
}

fn build_snr_grid(sweep: &SweepFlags, r: &Resolver) -> anyhow::Result<Vec<f64>> {
    let start = r.get("snr-start", sweep.snr_start)?.unwrap_or(0.0);
    let stop = r.get("snr-stop", sweep.snr_stop)?.unwrap_or(20.0);
    let step = r.get("snr-step", sweep.snr_step)?.unwrap_or(2.0);
    if !step.is_finite() || step <= 0.0 {
        return Err(config_err(format!("snr-step must be positive, got {step}")));
    }
    if stop < start {
        return Err(config_err(format!("snr-stop {stop} is below snr-start {start}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn build_sim_config(
    system: SystemSpec,
    sweep: &SweepFlags,
    r: &Resolver,
) -> anyhow::Result<SimulationConfig> {
    Ok(SimulationConfig {
        system,
        snr_db: build_snr_grid(sweep, r)?,
        trials: r.get("trials", sweep.trials)?.unwrap_or(10_000),
        seed: r.get("seed", sweep.seed)?.unwrap_or(1),
        threads: r.get("threads", sweep.threads)?,
    })
}

fn emit(rows: &[SweepRow], sweep: &SweepFlags, r: &Resolver) -> anyhow::Result<()> {
    let out: Option<PathBuf> = r.get("out", sweep.out.clone())?;
    match out {
        Some(path) => {
            let file = std::fs::File::create(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_csv(rows, std::io::BufWriter::new(file))?;
        }
        None => write_csv(rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn sign_str(signs: &[Sign]) -> String {
    signs.iter().map(|s| if s.value() > 0.0 { '+' } else { '-' }).collect()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Simulate { code, sweep } => {
            let r = Resolver::new(sweep.config.as_ref())?;
            let spec = build_code_spec(&code, &r)?;
            let cfg = build_sim_config(SystemSpec::Analog(spec), &sweep, &r)?;
            let rows = run_sweep(&cfg)?;
            emit(&rows, &sweep, &r)
        }
        Cmd::Baseline { bits, pam, sweep } => {
            let r = Resolver::new(sweep.config.as_ref())?;
            let bits = r
                .get("bits", bits)?
                .ok_or_else(|| config_err("missing --bits (quantizer resolution)"))?;
            let pam = match r.get("pam", pam)? {
                Some(order) => order,
                // 1:6 expansion with a rate-1/2 code forces bits/3 coded
                // bits per channel symbol.
                None if bits % 3 == 0 => 1usize << (bits / 3),
                None => {
                    return Err(config_err(format!(
                        "no PAM order satisfies the 1:6 expansion for {bits}-bit \
                         quantization; pass --pam explicitly"
                    )))
                }
            };
            let pipe =
                PipelineSpec::new(QuantizerSpec::new(bits)?, ConvCodeSpec::default(), PamSpec::new(pam)?)?;
            let cfg = build_sim_config(SystemSpec::Digital(pipe), &sweep, &r)?;
            let rows = run_sweep(&cfg)?;
            emit(&rows, &sweep, &r)
        }
        Cmd::Genie { n, beta, sweep } => {
            let r = Resolver::new(sweep.config.as_ref())?;
            let n = r.get("n", n)?.ok_or_else(|| config_err("missing --n (orbit length)"))?;
            let beta = match r.get("beta", beta)? {
                Some(b) => TentParam::new(b)?,
                None => TentParam::default(),
            };
            let spec = CodeSpec::tent_with_beta(n, beta)?;
            let cfg = build_sim_config(SystemSpec::Genie(spec), &sweep, &r)?;
            let rows = run_sweep(&cfg)?;
            emit(&rows, &sweep, &r)
        }
        Cmd::Segments { code, regions } => {
            let r = Resolver::new(None)?;
            let spec = build_code_spec(&code, &r)?;
            let segments = enumerate_segments(&spec)?;
            println!("{}", segments.len());
            if regions {
                for (i, seg) in segments.iter().enumerate() {
                    let signs = seg
                        .signs
                        .iter()
                        .map(|s| sign_str(s.signs()))
                        .collect::<Vec<_>>()
                        .join(" | ");
                    match seg.axis_intervals() {
                        Some(iv) => {
                            let region = iv
                                .iter()
                                .map(|[lo, hi]| format!("[{lo:.6}, {hi:.6}]"))
                                .collect::<Vec<_>>()
                                .join(" x ");
                            println!("segment {i}: signs {signs} region {region}");
                        }
                        None => println!("segment {i}: signs {signs} region empty"),
                    }
                }
            }
            Ok(())
        }
        Cmd::Rate { code } => {
            let r = Resolver::new(None)?;
            let spec = build_code_spec(&code, &r)?;
            println!("{}", spec.rate());
            Ok(())
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::InvalidInput(_) | Error::Domain(_)) => 2,
        Some(Error::Io(_)) => 1,
        // Config-file I/O surfaces through a context wrapper.
        None if err.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some()) => 1,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
