use std::path::Path;

use serde::Deserialize;

use crate::channel::{ChannelModel, TapDelayProfile};
use crate::error::{Error, Result};
use crate::ldpc::DEFAULT_MAX_ITERATIONS;
use crate::modem::ConstellationAlphabet;
use crate::mud::DEFAULT_ENUMERATION_CAP;
use crate::sic::{IndexSoftMode, SoftOptions, SoftValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// OFDM + OFDM.
    PowerDomain,
    /// OFDM-IM (user 1) + OFDM (user 2).
    WaveformDomain,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::PowerDomain => "power-domain",
            Scheme::WaveformDomain => "waveform-domain",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "power-domain" | "pd" => Ok(Scheme::PowerDomain),
            "waveform-domain" | "wd" => Ok(Scheme::WaveformDomain),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeOrderRule {
    User1First,
    User2First,
    /// Stronger user first (power domain) or pilot-batch choice (waveform
    /// domain).
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reconstruction {
    Hard,
    Soft,
}

impl Reconstruction {
    pub fn label(self) -> &'static str {
        match self {
            Reconstruction::Hard => "hard",
            Reconstruction::Soft => "soft",
        }
    }
}

/// Which users' channel estimates carry estimation error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationTarget {
    Both,
    FirstDecoded,
}

/// Everything a sweep needs.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub scheme: Scheme,
    pub decode_order: DecodeOrderRule,
    pub coded: bool,
    pub alphabet: ConstellationAlphabet,
    pub subcarriers: usize,
    pub subblock_size: usize,
    pub active_per_subblock: usize,
    pub code_length: usize,
    pub code_rate: f64,
    pub code_seed: u64,
    pub max_iterations: usize,
    pub channel: ChannelModel,
    pub estimation_mse: f64,
    pub estimation_target: EstimationTarget,
    pub snr_db: Vec<f64>,
    pub delta_p_db: Vec<f64>,
    pub min_block_errors: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub reconstruction: Reconstruction,
    pub soft: SoftOptions,
    /// Trials per order in the pilot batch of [`DecodeOrderRule::Auto`].
    pub pilot_trials: u64,
    pub enumeration_cap: u128,
    /// User 2 silent; only user 1 is demodulated.
    pub single_user: bool,
    /// Replace the first decoded user's decisions with the truth before
    /// reconstruction.
    pub genie_first_user: bool,
    pub evm_mse: Vec<f64>,
    pub evm_frames: u64,
    pub target_bler: f64,
    pub workers: Option<usize>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::WaveformDomain,
            decode_order: DecodeOrderRule::Auto,
            coded: true,
            alphabet: ConstellationAlphabet::qpsk(),
            subcarriers: 128,
            subblock_size: 4,
            active_per_subblock: 3,
            code_length: 256,
            code_rate: 0.5,
            code_seed: 1,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            channel: ChannelModel::Awgn,
            estimation_mse: 0.0,
            estimation_target: EstimationTarget::Both,
            snr_db: (0..=10).map(|i| 2.0 * i as f64).collect(),
            delta_p_db: vec![0.0],
            min_block_errors: 100,
            max_trials: 100_000,
            seed: 1,
            reconstruction: Reconstruction::Soft,
            soft: SoftOptions::default(),
            pilot_trials: 200,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            single_user: false,
            genie_first_user: false,
            evm_mse: vec![0.0, 0.01, 0.1],
            evm_frames: 200,
            target_bler: 0.01,
            workers: None,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.snr_db.is_empty() || self.delta_p_db.is_empty() {
            return bad("SNR and power-imbalance grids must be nonempty".into());
        }
        if self.snr_db.iter().chain(&self.delta_p_db).any(|x| !x.is_finite()) {
            return bad("grid values must be finite".into());
        }
        if self.max_trials == 0 {
            return bad("max_trials must be at least 1".into());
        }
        if self.evm_frames == 0 {
            return bad("evm_frames must be at least 1".into());
        }
        if !(self.estimation_mse >= 0.0) || self.evm_mse.iter().any(|m| !(*m >= 0.0)) {
            return bad("estimation MSE must be non-negative".into());
        }
        if !(self.target_bler > 0.0 && self.target_bler < 1.0) {
            return bad(format!("target BLER {} outside (0, 1)", self.target_bler));
        }
        if self.single_user && self.decode_order == DecodeOrderRule::User2First {
            return bad("single-user runs decode user 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    /// Reads a flat TOML file over the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(message) => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.apply(Self::default())
    }
}

/// On-disk form of [`SimulationConfig`]: every key optional, unknown keys
/// rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scheme: Option<Scheme>,
    pub decode_order: Option<DecodeOrderRule>,
    pub coded: Option<bool>,
    pub modulation: Option<String>,
    pub subcarriers: Option<usize>,
    pub subblock_size: Option<usize>,
    pub active_per_subblock: Option<usize>,
    pub code_length: Option<usize>,
    pub code_rate: Option<f64>,
    pub code_seed: Option<u64>,
    pub max_iterations: Option<usize>,
    /// `"awgn"` or `"selective"`.
    pub channel: Option<String>,
    pub taps: Option<usize>,
    pub estimation_mse: Option<f64>,
    pub estimation_target: Option<EstimationTarget>,
    pub snr_db: Option<Vec<f64>>,
    pub delta_p_db: Option<Vec<f64>>,
    pub min_block_errors: Option<u64>,
    pub max_trials: Option<u64>,
    pub seed: Option<u64>,
    pub reconstruction: Option<Reconstruction>,
    /// `"expectation"` or `"paper-literal"`.
    pub soft_value: Option<String>,
    /// `"posterior"` or `"hard-mask"`.
    pub index_soft: Option<String>,
    pub pilot_trials: Option<u64>,
    pub enumeration_cap: Option<u64>,
    pub single_user: Option<bool>,
    pub genie_first_user: Option<bool>,
    pub evm_mse: Option<Vec<f64>>,
    pub evm_frames: Option<u64>,
    pub target_bler: Option<f64>,
    pub workers: Option<usize>,
}

impl ConfigFile {
    pub fn apply(self, mut cfg: SimulationConfig) -> Result<SimulationConfig> {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { cfg.$field = v; } )* };
        }
        set!(
            scheme,
            decode_order,
            coded,
            subcarriers,
            subblock_size,
            active_per_subblock,
            code_length,
            code_rate,
            code_seed,
            max_iterations,
            estimation_mse,
            estimation_target,
            snr_db,
            delta_p_db,
            min_block_errors,
            max_trials,
            seed,
            reconstruction,
            pilot_trials,
            single_user,
            genie_first_user,
            evm_mse,
            evm_frames,
            target_bler
        );
        if let Some(m) = self.modulation {
            cfg.alphabet = ConstellationAlphabet::from_name(&m)?;
        }
        if let Some(cap) = self.enumeration_cap {
            cfg.enumeration_cap = cap as u128;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        let taps = self.taps.unwrap_or(10);
        match self.channel.as_deref() {
            None if self.taps.is_some() => cfg.channel = ChannelModel::Selective(TapDelayProfile::uniform(taps)?),
            None => {}
            Some("awgn") => cfg.channel = ChannelModel::Awgn,
            Some("selective") => cfg.channel = ChannelModel::Selective(TapDelayProfile::uniform(taps)?),
            Some(other) => return Err(Error::Config(format!("unknown channel `{other}`"))),
        }
        if let Some(v) = self.soft_value {
            cfg.soft.value = match v.as_str() {
                "expectation" => SoftValue::Expectation,
                "paper-literal" => SoftValue::PaperLiteral,
                other => return Err(Error::Config(format!("unknown soft_value `{other}`"))),
            };
        }
        if let Some(v) = self.index_soft {
            cfg.soft.index_mode = match v.as_str() {
                "posterior" => IndexSoftMode::Posterior,
                "hard-mask" => IndexSoftMode::HardMask,
                other => return Err(Error::Config(format!("unknown index_soft `{other}`"))),
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
