//! Channel realizations, estimation error and the received superposition.
//!
//! Channels are block constant over a frame. A frequency-selective channel is
//! drawn as `L` independent complex Gaussian taps and taken to the `N`
//! subcarriers by a DFT, so `E|h_n|² = Σ tap powers = 1`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::modem::SymbolFrame;
use crate::rng::complex_gaussian;

/// Power delay profile, normalized to unit total power.
#[derive(Debug, Clone, PartialEq)]
pub struct TapDelayProfile {
    powers: Vec<f64>,
}

impl TapDelayProfile {
    /// `taps` equal-power taps.
    pub fn uniform(taps: usize) -> Result<Self> {
        if taps == 0 {
            return Err(Error::Config("tap count must be at least 1".into()));
        }
        Ok(Self {
            powers: vec![1.0 / taps as f64; taps],
        })
    }

    pub fn from_powers(powers: Vec<f64>) -> Result<Self> {
        let total: f64 = powers.iter().sum();
        if powers.is_empty() || powers.iter().any(|&p| !(p >= 0.0)) || !(total > 0.0) {
            return Err(Error::Config("tap powers must be non-negative with a positive sum".into()));
        }
        Ok(Self {
            powers: powers.iter().map(|p| p / total).collect(),
        })
    }

    pub fn taps(&self) -> usize {
        self.powers.len()
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    /// Unit gain on every subcarrier.
    Awgn,
    Selective(TapDelayProfile),
}

/// True per-subcarrier gains of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub gains: Vec<Complex64>,
}

/// Receiver-side gains `h̃ = h + e`, `e ~ CN(0, σ_e²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub gains: Vec<Complex64>,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    pub samples: Vec<Complex64>,
    pub noise_variance: f64,
}

pub fn draw_channel<R: Rng + ?Sized>(model: &ChannelModel, n: usize, rng: &mut R) -> Result<ChannelRealization> {
    match model {
        ChannelModel::Awgn => Ok(ChannelRealization {
            gains: vec![Complex64::new(1.0, 0.0); n],
        }),
        ChannelModel::Selective(profile) => {
            if profile.taps() > n {
                return Err(Error::Config(format!(
                    "{} taps exceed {n} subcarriers",
                    profile.taps()
                )));
            }
            let taps: Vec<Complex64> = profile
                .powers()
                .iter()
                .map(|&p| complex_gaussian(rng, p))
                .collect();
            let w = -2.0 * std::f64::consts::PI / n as f64;
            let gains = (0..n)
                .map(|k| {
                    taps.iter()
                        .enumerate()
                        .map(|(l, &t)| t * Complex64::from_polar(1.0, w * (l * k % n) as f64))
                        .sum()
                })
                .collect();
            Ok(ChannelRealization { gains })
        }
    }
}

/// Corrupts `h` with i.i.d. per-subcarrier estimation error of normalized
/// variance `mse` (the channel is unit-power on average).
pub fn apply_estimation_error<R: Rng + ?Sized>(
    h: &ChannelRealization,
    mse: f64,
    rng: &mut R,
) -> Result<ChannelEstimate> {
    if !(mse >= 0.0) {
        return Err(Error::Config(format!("estimation MSE must be >= 0, got {mse}")));
    }
    let gains = if mse == 0.0 {
        h.gains.clone()
    } else {
        h.gains.iter().map(|&g| g + complex_gaussian(rng, mse)).collect()
    };
    Ok(ChannelEstimate { gains, mse })
}

/// `r_n = h1_n·x1_n + h2_n·x2_n + w_n` with `w_n ~ CN(0, σ²)`.
pub fn superimpose<R: Rng + ?Sized>(
    frame1: &SymbolFrame,
    h1: &ChannelRealization,
    frame2: &SymbolFrame,
    h2: &ChannelRealization,
    noise_variance: f64,
    rng: &mut R,
) -> Result<ReceivedFrame> {
    let n = frame1.len();
    check_len("user 2 frame", n, frame2.len())?;
    check_len("user 1 channel", n, h1.gains.len())?;
    check_len("user 2 channel", n, h2.gains.len())?;
    if !(noise_variance >= 0.0) {
        return Err(Error::Config(format!("noise variance must be >= 0, got {noise_variance}")));
    }
    let samples = (0..n)
        .map(|i| {
            let w = if noise_variance > 0.0 {
                complex_gaussian(rng, noise_variance)
            } else {
                Complex64::new(0.0, 0.0)
            };
            h1.gains[i] * frame1.samples[i] + h2.gains[i] * frame2.samples[i] + w
        })
        .collect();
    Ok(ReceivedFrame {
        samples,
        noise_variance,
    })
}

/// Noise variance giving `snr_db = 10·log10(p / σ²)`.
pub fn noise_variance_for_snr(power_per_subcarrier: f64, snr_db: f64) -> f64 {
    power_per_subcarrier / 10f64.powf(snr_db / 10.0)
}
