use rayon::prelude::*;

use super::results::fmt_sig;
use super::{order_label, OperatingPoint, ResultRecord, Simulator, TrialOutcome};
use crate::error::{Error, Result};
use crate::sic::EvmAccumulator;

/// Trials dispatched per parallel batch. Results are merged in trial order and
/// truncated at the stopping trial, so the batch size never changes results.
const BATCH: u64 = 64;

/// Accumulated counts at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub point: OperatingPoint,
    pub trials: u64,
    pub present: [bool; 2],
    pub block_errors: [u64; 2],
    pub bit_errors: [u64; 2],
    pub bits_per_block: usize,
}

impl PointStats {
    pub fn bler(&self, user: usize) -> Option<f64> {
        self.present[user].then(|| self.block_errors[user] as f64 / self.trials as f64)
    }

    pub fn ber(&self, user: usize) -> Option<f64> {
        self.present[user].then(|| self.bit_errors[user] as f64 / (self.trials as f64 * self.bits_per_block as f64))
    }

    fn add(&mut self, o: &TrialOutcome) {
        self.trials += 1;
        for u in 0..2 {
            if let Some(e) = o.block_error[u] {
                self.present[u] = true;
                self.block_errors[u] += u64::from(e);
                self.bit_errors[u] += o.bit_errors[u].unwrap_or(0);
            }
        }
    }

    pub fn to_record(&self, sim: &Simulator) -> ResultRecord {
        let cfg = sim.config();
        ResultRecord {
            scheme: cfg.scheme.label().to_string(),
            delta_p_db: Some(self.point.delta_p_db),
            snr_db: Some(self.point.snr_db),
            trials: self.trials,
            block_errors: [0, 1].map(|u| self.present[u].then_some(self.block_errors[u])),
            bler: [0, 1].map(|u| self.bler(u)),
            ber: [0, 1].map(|u| self.ber(u)),
            evm_db: None,
            decode_order: order_label(self.point.order).to_string(),
            seed: cfg.seed,
        }
    }
}

/// Stream index of a grid point, derived from its coordinates so that the same
/// (ΔP, SNR) sees the same realizations in every sweep and scheme.
pub(crate) fn point_index(delta_p_db: f64, snr_db: f64) -> u64 {
    delta_p_db.to_bits().rotate_left(17) ^ snr_db.to_bits()
}

fn in_pool<T: Send>(sim: &Simulator, f: impl FnOnce() -> T + Send) -> Result<T> {
    match sim.config().workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Runs trials at one point until every present user has the configured
/// number of block errors or the trial limit is reached.
pub fn run_point(sim: &Simulator, point: OperatingPoint) -> Result<PointStats> {
    let cfg = sim.config();
    let mut stats = PointStats {
        point,
        trials: 0,
        present: [false; 2],
        block_errors: [0; 2],
        bit_errors: [0; 2],
        bits_per_block: sim.code().map_or(cfg.subcarriers * cfg.alphabet.bits_per_symbol(), |c| c.message_length()),
    };
    let done = |s: &PointStats| {
        s.trials >= cfg.max_trials
            || (s.trials > 0 && (0..2).all(|u| !s.present[u] || s.block_errors[u] >= cfg.min_block_errors))
    };
    while !done(&stats) {
        let start = stats.trials;
        let end = (start + BATCH).min(cfg.max_trials);
        let outcomes: Vec<Result<TrialOutcome>> = (start..end).into_par_iter().map(|t| sim.run_trial(&point, t)).collect();
        for o in outcomes {
            stats.add(&o?);
            if done(&stats) {
                break;
            }
        }
    }
    Ok(stats)
}

/// BLER/BER at every (ΔP, SNR) grid point.
pub fn run_bler_sweep(sim: &Simulator) -> Result<Vec<ResultRecord>> {
    in_pool(sim, || {
        let cfg = sim.config();
        let mut records = Vec::new();
        for &dp in &cfg.delta_p_db {
            for &snr in &cfg.snr_db {
                let index = point_index(dp, snr);
                let order = sim.resolve_order(index, dp, snr)?;
                let stats = run_point(
                    sim,
                    OperatingPoint {
                        index,
                        delta_p_db: dp,
                        snr_db: snr,
                        order,
                    },
                )?;
                records.push(stats.to_record(sim));
            }
        }
        Ok(records)
    })?
}

/// Mean reconstruction EVM of the first decoded user, hard and soft, for every
/// (ΔP, SNR, σ_e²). Realizations are shared across σ_e² and methods.
///
/// Each record's scheme column reads `<scheme>:<hard|soft>:mse=<σ_e²>`; the
/// block-error columns describe the first decoded user.
pub fn run_evm_experiment(sim: &Simulator) -> Result<Vec<ResultRecord>> {
    in_pool(sim, || {
        let cfg = sim.config();
        let mut records = Vec::new();
        for &dp in &cfg.delta_p_db {
            for &snr in &cfg.snr_db {
                let index = point_index(dp, snr);
                let order = sim.resolve_order(index, dp, snr)?;
                let point = OperatingPoint {
                    index,
                    delta_p_db: dp,
                    snr_db: snr,
                    order,
                };
                let first = super::first_user(order);
                for &mse in &cfg.evm_mse {
                    let mut c = sim.clone();
                    c.cfg.estimation_mse = mse;
                    let outcomes: Vec<Result<TrialOutcome>> =
                        (0..cfg.evm_frames).into_par_iter().map(|t| c.run_evm_trial(&point, t)).collect();
                    let mut acc = [EvmAccumulator::default(); 2];
                    let mut errors = 0u64;
                    for o in outcomes {
                        let o = o?;
                        errors += u64::from(o.block_error[first].unwrap_or(false));
                        if let Some(e) = o.evm {
                            acc[0].merge(&e[0]);
                            acc[1].merge(&e[1]);
                        }
                    }
                    for (method, a) in ["hard", "soft"].iter().zip(&acc) {
                        let mut block_errors = [None; 2];
                        let mut bler = [None; 2];
                        block_errors[first] = Some(errors);
                        bler[first] = Some(errors as f64 / cfg.evm_frames as f64);
                        records.push(ResultRecord {
                            scheme: format!("{}:{method}:mse={}", cfg.scheme.label(), fmt_sig(mse)),
                            delta_p_db: Some(dp),
                            snr_db: Some(snr),
                            trials: cfg.evm_frames,
                            block_errors,
                            bler,
                            ber: [None; 2],
                            evm_db: Some(a.db()?),
                            decode_order: order_label(order).to_string(),
                            seed: cfg.seed,
                        });
                    }
                }
            }
        }
        Ok(records)
    })?
}
