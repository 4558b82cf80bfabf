//! Monte Carlo experiment engine.
//!
//! Conventions:
//! - user 2 always transmits OFDM at `p2 = 1` per subcarrier, so `P2 = N`;
//! - user 1 transmits `P1 = P2·10^(ΔP/10)`, as OFDM (power domain) or OFDM-IM
//!   (waveform domain);
//! - SNR is referenced to user 2: `σ² = 1 / 10^(SNR/10)`.
//!
//! A trial draws both messages, channels and noise from a stream seeded by
//! `(master seed, grid point, trial index)`, so results do not depend on how
//! trials are scheduled across workers.

mod config;
mod results;
mod search;
mod sweep;

pub use config::{ConfigFile, DecodeOrderRule, EstimationTarget, Reconstruction, Scheme, SimulationConfig};
pub use results::{fmt_sig, read_results, write_required_snr, write_results, RequiredSnrRow, ResultRecord, CSV_HEADER};
pub use search::{interpolate_required_snr, required_snr_search, RequiredSnr};
pub use sweep::{run_bler_sweep, run_evm_experiment, run_point, PointStats};

use num_complex::Complex64;

use crate::analysis::DecodingOrder;
use crate::channel::{
    apply_estimation_error, draw_channel, noise_variance_for_snr, superimpose, ChannelEstimate, ReceivedFrame,
};
use crate::error::Result;
use crate::ldpc::{clip_llr, ParityCheckCode, LLR_CLIP};
use crate::modem::{OfdmImConfig, SymbolFrame, Waveform};
use crate::mud::{llr_joint_ofdm_ofdm, llr_ofdm_first, llr_ofdmim_first, llr_single_user, LlrMode, UserView};
use crate::rng::{random_bits, trial_stream, SimRng};
use crate::sic::{cancel, reconstruct_hard, reconstruct_soft, EvmAccumulator};

/// Per-subcarrier power of user 2, the SNR reference.
pub const REFERENCE_POWER: f64 = 1.0;

/// One (ΔP, SNR) grid point with its resolved decoding order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Stream index; distinct points must use distinct indices.
    pub index: u64,
    pub delta_p_db: f64,
    pub snr_db: f64,
    pub order: DecodingOrder,
}

/// What happened to one frame pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrialOutcome {
    /// Per user; `None` when the user is absent.
    pub block_error: [Option<bool>; 2],
    pub bit_errors: [Option<u64>; 2],
    /// Reconstruction error of the first decoded user's frame, hard then soft.
    pub evm: Option<[EvmAccumulator; 2]>,
}

/// A validated configuration with its code and waveforms built.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimulationConfig,
    code: Option<ParityCheckCode>,
    ofdmim: Option<OfdmImConfig>,
}

struct FirstStage {
    total_llr: Vec<f64>,
    message: Vec<u8>,
}

impl Simulator {
    pub fn new(cfg: SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let ofdmim = match cfg.scheme {
            Scheme::WaveformDomain => Some(OfdmImConfig::new(
                cfg.subcarriers,
                cfg.subblock_size,
                cfg.active_per_subblock,
                &cfg.alphabet,
            )?),
            Scheme::PowerDomain => None,
        };
        let code = if cfg.coded {
            Some(ParityCheckCode::construct(cfg.code_length, cfg.code_rate, cfg.code_seed)?)
        } else {
            None
        };
        let sim = Self { cfg, code, ofdmim };
        // both users must fill one codeword per frame
        let w1 = sim.waveform(0, 0.0);
        let w2 = sim.waveform(1, 0.0);
        let expected = sim.codeword_length();
        for w in [&w1, &w2] {
            if w.bits_per_frame() != expected {
                return Err(crate::Error::Config(format!(
                    "frame carries {} bits but the codeword has {expected}",
                    w.bits_per_frame()
                )));
            }
        }
        Ok(sim)
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    pub fn code(&self) -> Option<&ParityCheckCode> {
        self.code.as_ref()
    }

    fn codeword_length(&self) -> usize {
        self.code
            .as_ref()
            .map_or(self.cfg.subcarriers * self.cfg.alphabet.bits_per_symbol(), |c| c.block_length())
    }

    fn message_length(&self) -> usize {
        self.code.as_ref().map_or(self.codeword_length(), |c| c.message_length())
    }

    /// Transmit waveform of `user` (0 or 1) at power imbalance `delta_p_db`.
    pub fn waveform(&self, user: usize, delta_p_db: f64) -> Waveform {
        let n = self.cfg.subcarriers;
        let alphabet = self.cfg.alphabet.clone();
        if user == 1 {
            let power = if self.cfg.single_user { 0.0 } else { REFERENCE_POWER };
            return Waveform::Ofdm {
                alphabet,
                subcarriers: n,
                power,
            };
        }
        let total = n as f64 * REFERENCE_POWER * 10f64.powf(delta_p_db / 10.0);
        match &self.ofdmim {
            Some(config) => Waveform::OfdmIm {
                config: config.clone(),
                alphabet,
                total_power: total,
            },
            None => Waveform::Ofdm {
                alphabet,
                subcarriers: n,
                power: total / n as f64,
            },
        }
    }

    /// Decoding order for a grid point, running the pilot batch when the rule
    /// asks for it.
    pub fn resolve_order(&self, index: u64, delta_p_db: f64, snr_db: f64) -> Result<DecodingOrder> {
        if self.cfg.single_user {
            return Ok(DecodingOrder::User1First);
        }
        match (self.cfg.decode_order, self.cfg.scheme) {
            (DecodeOrderRule::User1First, _) => Ok(DecodingOrder::User1First),
            (DecodeOrderRule::User2First, _) => Ok(DecodingOrder::User2First),
            (DecodeOrderRule::Auto, Scheme::PowerDomain) => Ok(if delta_p_db >= 0.0 {
                DecodingOrder::User1First
            } else {
                DecodingOrder::User2First
            }),
            (DecodeOrderRule::Auto, Scheme::WaveformDomain) => {
                let mut errors = Vec::new();
                for order in [DecodingOrder::User1First, DecodingOrder::User2First] {
                    let point = OperatingPoint {
                        index,
                        delta_p_db,
                        snr_db,
                        order,
                    };
                    let mut first = 0u64;
                    let mut total = 0u64;
                    for t in 0..self.cfg.pilot_trials {
                        let mut rng = trial_stream(self.cfg.seed ^ PILOT_SALT, index, t);
                        let o = self.trial_with_rng(&point, &mut rng, false)?;
                        let f = first_user(order);
                        first += u64::from(o.block_error[f].unwrap_or(false));
                        total += o.block_error.iter().flatten().map(|&e| u64::from(e)).sum::<u64>();
                    }
                    errors.push((first, total));
                }
                Ok(if errors[1] < errors[0] {
                    DecodingOrder::User2First
                } else {
                    DecodingOrder::User1First
                })
            }
        }
    }

    /// Runs trial `trial_index` of `point`.
    pub fn run_trial(&self, point: &OperatingPoint, trial_index: u64) -> Result<TrialOutcome> {
        let mut rng = trial_stream(self.cfg.seed, point.index, trial_index);
        self.trial_with_rng(point, &mut rng, false)
    }

    /// As [`run_trial`](Self::run_trial), also measuring hard and soft
    /// reconstruction EVM of the first decoded user.
    pub fn run_evm_trial(&self, point: &OperatingPoint, trial_index: u64) -> Result<TrialOutcome> {
        let mut rng = trial_stream(self.cfg.seed, point.index, trial_index);
        self.trial_with_rng(point, &mut rng, true)
    }

    fn trial_with_rng(&self, point: &OperatingPoint, rng: &mut SimRng, measure_evm: bool) -> Result<TrialOutcome> {
        let cfg = &self.cfg;
        let n = cfg.subcarriers;
        let waveforms = [self.waveform(0, point.delta_p_db), self.waveform(1, point.delta_p_db)];
        let k = self.message_length();

        let messages = [random_bits(rng, k), random_bits(rng, k)];
        let mut frames = Vec::with_capacity(2);
        for (w, msg) in waveforms.iter().zip(&messages) {
            let bits = match &self.code {
                Some(code) => code.encode(msg)?,
                None => msg.clone(),
            };
            frames.push(w.build(&bits)?);
        }
        if cfg.single_user {
            frames[1] = SymbolFrame::zeros(n);
        }
        let channels = [draw_channel(&cfg.channel, n, rng)?, draw_channel(&cfg.channel, n, rng)?];
        let noise = noise_variance_for_snr(REFERENCE_POWER, point.snr_db);
        let r = superimpose(&frames[0], &channels[0], &frames[1], &channels[1], noise, rng)?;

        let first = first_user(point.order);
        let second = 1 - first;
        let estimates: Vec<ChannelEstimate> = (0..2)
            .map(|u| {
                let mse = match cfg.estimation_target {
                    EstimationTarget::Both => cfg.estimation_mse,
                    EstimationTarget::FirstDecoded if u == first => cfg.estimation_mse,
                    EstimationTarget::FirstDecoded => 0.0,
                };
                apply_estimation_error(&channels[u], mse, rng)
            })
            .collect::<Result<_>>()?;
        let views = [0, 1].map(|u| UserView {
            gains: &estimates[u].gains,
            alphabet: &cfg.alphabet,
            amplitude: waveforms[u].amplitude(),
        });

        // first user: joint demapping against the other user's signal
        let llr = if cfg.single_user {
            self.single_user_llrs(&r, &waveforms[first], views[first])?
        } else {
            match (&self.ofdmim, first) {
                (None, _) => llr_joint_ofdm_ofdm(&r, views[first], views[second], LlrMode::MaxLog)?,
                (Some(im), 0) => llr_ofdmim_first(&r, views[0], im, Some(views[1]), LlrMode::MaxLog, cfg.enumeration_cap)?,
                (Some(_), _) => llr_ofdm_first(&r, views[1], views[0], LlrMode::MaxLog)?,
            }
        };
        let mut stage = self.decode(&llr)?;
        let mut outcome = TrialOutcome::default();
        let (e, b) = compare(&messages[first], &stage.message);
        outcome.block_error[first] = Some(e);
        outcome.bit_errors[first] = Some(b);
        if cfg.single_user {
            return Ok(outcome);
        }
        if cfg.genie_first_user {
            let cw = match &self.code {
                Some(code) => code.encode(&messages[first])?,
                None => messages[first].clone(),
            };
            stage = FirstStage {
                total_llr: cw.iter().map(|&b| if b == 0 { LLR_CLIP } else { -LLR_CLIP }).collect(),
                message: messages[first].clone(),
            };
        }

        let hard = || reconstruct_hard(&stage.message, self.code.as_ref(), &waveforms[first]).map(|f| f.samples);
        let soft = || reconstruct_soft(&stage.total_llr, &waveforms[first], cfg.soft).map(|f| f.samples);
        if measure_evm {
            let mut acc = [EvmAccumulator::default(); 2];
            acc[0].add(&hard()?, &frames[first].samples)?;
            acc[1].add(&soft()?, &frames[first].samples)?;
            outcome.evm = Some(acc);
        }
        let recon: Vec<Complex64> = match cfg.reconstruction {
            Reconstruction::Hard => hard()?,
            Reconstruction::Soft => soft()?,
        };
        let residual = cancel(&r, &recon, &estimates[first].gains)?;
        let llr = self.single_user_llrs(&residual, &waveforms[second], views[second])?;
        let stage2 = self.decode(&llr)?;
        let (e, b) = compare(&messages[second], &stage2.message);
        outcome.block_error[second] = Some(e);
        outcome.bit_errors[second] = Some(b);
        Ok(outcome)
    }

    fn single_user_llrs(&self, r: &ReceivedFrame, waveform: &Waveform, view: UserView) -> Result<Vec<f64>> {
        match waveform {
            Waveform::OfdmIm { config, .. } => {
                llr_ofdmim_first(r, view, config, None, LlrMode::MaxLog, self.cfg.enumeration_cap)
            }
            Waveform::Ofdm { .. } => llr_single_user(r, view, LlrMode::MaxLog),
        }
    }

    fn decode(&self, llr: &[f64]) -> Result<FirstStage> {
        let clipped: Vec<f64> = llr.iter().map(|&l| clip_llr(l)).collect();
        match &self.code {
            Some(code) => {
                let d = code.decode_sum_product(&clipped, self.cfg.max_iterations)?;
                Ok(FirstStage {
                    message: code.extract_message(&d.hard),
                    total_llr: d.total_llr,
                })
            }
            None => Ok(FirstStage {
                message: clipped.iter().map(|&l| u8::from(l < 0.0)).collect(),
                total_llr: clipped,
            }),
        }
    }
}

const PILOT_SALT: u64 = 0x05EE_D0FD_1107;

/// Index (0 or 1) of the user decoded first.
pub fn first_user(order: DecodingOrder) -> usize {
    match order {
        DecodingOrder::User1First => 0,
        DecodingOrder::User2First => 1,
    }
}

pub fn order_label(order: DecodingOrder) -> &'static str {
    match order {
        DecodingOrder::User1First => "user1-first",
        DecodingOrder::User2First => "user2-first",
    }
}

fn compare(truth: &[u8], decoded: &[u8]) -> (bool, u64) {
    let errors = truth.iter().zip(decoded).filter(|(a, b)| a != b).count() as u64;
    (errors > 0, errors)
}
