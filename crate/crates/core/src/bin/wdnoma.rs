use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;

use wdnoma::analysis::capacity_user1_first;
use wdnoma::channel::{draw_channel, ChannelModel, TapDelayProfile};
use wdnoma::harness::{
    fmt_sig, interpolate_required_snr, run_bler_sweep, run_evm_experiment, write_required_snr, write_results,
    RequiredSnrRow, Scheme, SimulationConfig, Simulator,
};
use wdnoma::rng::SimRng;
use wdnoma::{selftest, Error, Result};

#[derive(Parser)]
#[command(name = "wdnoma", version, about = "Two-user uplink NOMA link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BLER/BER over the (ΔP, SNR) grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Also write the SNR needed to reach `target_bler`, per ΔP and user.
        #[arg(long)]
        required_snr: Option<PathBuf>,
    },
    /// Hard vs soft reconstruction EVM over SNR and estimation MSE.
    Evm {
        #[command(flatten)]
        common: Common,
    },
    /// Achievable rates on a random channel draw.
    Capacity {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "capacity.csv")]
        out: PathBuf,
        /// Per-subcarrier power of user 1.
        #[arg(long, default_value_t = 1.0)]
        p1: f64,
        #[arg(long, default_value_t = 1.0)]
        p2: f64,
        #[arg(long, default_value_t = 0.1)]
        noise_var: f64,
        #[arg(long, default_value_t = 128)]
        subcarriers: usize,
        /// `awgn` or `selective`.
        #[arg(long, default_value = "selective")]
        channel: String,
        #[arg(long, default_value_t = 10)]
        taps: usize,
    },
    /// Oracle and invariant checks; exits nonzero if any fails.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "selftest.csv")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Flat TOML file; unset keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// `power-domain` or `waveform-domain`.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, conflicts_with = "uncoded")]
    coded: bool,
    #[arg(long)]
    uncoded: bool,
}

impl Common {
    fn simulator(&self) -> Result<Simulator> {
        let mut cfg = match &self.config {
            Some(p) => SimulationConfig::from_file(p)?,
            None => SimulationConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(s) = &self.scheme {
            cfg.scheme = Scheme::parse(s)?;
        }
        if self.coded {
            cfg.coded = true;
        }
        if self.uncoded {
            cfg.coded = false;
        }
        Simulator::new(cfg)
    }
}

fn required_snr_rows(sim: &Simulator, records: &[wdnoma::harness::ResultRecord]) -> Vec<RequiredSnrRow> {
    let cfg = sim.config();
    let mut rows = Vec::new();
    for &dp in &cfg.delta_p_db {
        let mut at: Vec<_> = records.iter().filter(|r| r.delta_p_db == Some(dp)).collect();
        at.sort_by(|a, b| a.snr_db.partial_cmp(&b.snr_db).expect("finite SNR"));
        for user in 0..2 {
            if at.iter().all(|r| r.bler[user].is_none()) {
                continue;
            }
            let curve: Vec<(f64, f64, u64)> = at
                .iter()
                .map(|r| (r.snr_db.unwrap_or(f64::NAN), r.bler[user].unwrap_or(1.0), r.trials))
                .collect();
            rows.push(RequiredSnrRow {
                scheme: cfg.scheme.label().to_string(),
                delta_p_db: dp,
                user,
                target_bler: cfg.target_bler,
                required: interpolate_required_snr(&curve, cfg.target_bler),
            });
        }
    }
    rows
}

fn capacity(
    seed: u64,
    out: &Path,
    (p1, p2, noise): (f64, f64, f64),
    subcarriers: usize,
    channel: &str,
    taps: usize,
) -> Result<()> {
    let model = match channel {
        "awgn" => ChannelModel::Awgn,
        "selective" => ChannelModel::Selective(TapDelayProfile::uniform(taps)?),
        other => return Err(Error::Config(format!("unknown channel `{other}`"))),
    };
    let mut rng = SimRng::seed_from_u64(seed);
    let h1 = draw_channel(&model, subcarriers, &mut rng)?.gains;
    let h2 = draw_channel(&model, subcarriers, &mut rng)?.gains;
    let first = capacity_user1_first(p1, p2, &h1, &h2, noise)?;
    let swapped = capacity_user1_first(p2, p1, &h2, &h1, noise)?;
    let io = |source| Error::Io {
        path: out.to_path_buf(),
        source,
    };
    let mut text = String::from("r1,r2,sum_rate,decode_order\n");
    text += &format!("{},{},{},user1-first\n", fmt_sig(first.r1), fmt_sig(first.r2), fmt_sig(first.sum_rate()));
    // the swapped call reports user 2's rate as its `r1`
    text += &format!(
        "{},{},{},user2-first\n",
        fmt_sig(swapped.r2),
        fmt_sig(swapped.r1),
        fmt_sig(swapped.sum_rate())
    );
    std::fs::write(out, text).map_err(io)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep { common, required_snr } => {
            let sim = common.simulator()?;
            let records = run_bler_sweep(&sim)?;
            write_results(&records, &common.out)?;
            if let Some(path) = required_snr {
                write_required_snr(&required_snr_rows(&sim, &records), &path)?;
            }
        }
        Command::Evm { common } => {
            let sim = common.simulator()?;
            write_results(&run_evm_experiment(&sim)?, &common.out)?;
        }
        Command::Capacity {
            seed,
            out,
            p1,
            p2,
            noise_var,
            subcarriers,
            channel,
            taps,
        } => capacity(seed, &out, (p1, p2, noise_var), subcarriers, &channel, taps)?,
        Command::Selftest { seed, out } => {
            let checks = selftest::run(seed)?;
            selftest::write_checks(&checks, &out)?;
            for c in &checks {
                println!("{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, fmt_sig(c.value));
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
