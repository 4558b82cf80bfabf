//! Joint multi-user LLR demappers.
//!
//! All demappers return `Λ = metric(bit = 1) − metric(bit = 0)` where a metric
//! is `‖r − h1·u1 − h2·u2‖² / σ²` minimized (max-log) or soft-minimized
//! (exact, `−ln Σ exp(−·)`) over the hypotheses carrying the bit value.
//! Positive LLRs favor bit 0. Outputs are not clipped; clip with
//! [`crate::ldpc::clip_llr`] before decoding.
//!
//! The OFDM-IM demapper enumerates all `c·M^m` subblock realizations of the
//! index-modulated user. The interfering OFDM user's `M^k` symbol vectors are
//! handled per subcarrier: the metric is a sum over subcarriers and the
//! interferer is unconstrained, so minimizing (or marginalizing) each term
//! separately gives the same value as enumerating whole vectors.

use num_complex::Complex64;

use crate::channel::ReceivedFrame;
use crate::error::{check_len, Error, Result};
use crate::modem::{ConstellationAlphabet, OfdmImConfig};

/// Largest OFDM-IM-first hypothesis count accepted by default.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// Per-coded-bit LLRs in codeword order.
pub type LlrVector = Vec<f64>;

/// How per-hypothesis metrics are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlrMode {
    /// Minimum over hypotheses.
    MaxLog,
    /// Log-sum-exp marginal with uniform hypothesis priors.
    Exact,
}

/// What the receiver knows about one user.
#[derive(Debug, Clone, Copy)]
pub struct UserView<'a> {
    /// Channel gains the receiver uses (true or estimated).
    pub gains: &'a [Complex64],
    pub alphabet: &'a ConstellationAlphabet,
    /// Amplitude applied to active unit-energy symbols.
    pub amplitude: f64,
}

impl<'a> UserView<'a> {
    fn scaled_points(&self) -> Vec<Complex64> {
        self.alphabet.points().iter().map(|&s| s * self.amplitude).collect()
    }
}

#[derive(Clone, Copy)]
struct SoftMin {
    mode: LlrMode,
    value: f64,
}

impl SoftMin {
    #[inline]
    fn new(mode: LlrMode) -> Self {
        Self {
            mode,
            value: f64::INFINITY,
        }
    }

    #[inline]
    fn push(&mut self, x: f64) {
        match self.mode {
            LlrMode::MaxLog => {
                if x < self.value {
                    self.value = x;
                }
            }
            LlrMode::Exact => {
                if self.value == f64::INFINITY {
                    self.value = x;
                } else if x != f64::INFINITY {
                    let (lo, hi) = if x < self.value { (x, self.value) } else { (self.value, x) };
                    self.value = lo - (-(hi - lo)).exp().ln_1p();
                }
            }
        }
    }
}

fn check_noise(r: &ReceivedFrame) -> Result<f64> {
    let s = r.noise_variance;
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Config(format!("noise variance must be positive and finite, got {s}")))
    }
}

/// Metric term before the `/σ²` of the max-log path; the exact path scales
/// every term because log-sum-exp is not scale invariant.
#[inline]
fn term(q: f64, mode: LlrMode, noise: f64) -> f64 {
    match mode {
        LlrMode::MaxLog => q,
        LlrMode::Exact => q / noise,
    }
}

#[inline]
fn finish(acc1: f64, acc0: f64, mode: LlrMode, noise: f64) -> f64 {
    match mode {
        LlrMode::MaxLog => acc1 / noise - acc0 / noise,
        LlrMode::Exact => acc1 - acc0,
    }
}

/// Per-subcarrier LLRs of `target` with the interferer marginalized over
/// `interferer_points` (already amplitude scaled).
#[allow(clippy::needless_range_loop)]
fn per_subcarrier(
    r: &ReceivedFrame,
    target: &UserView,
    interferer_gains: &[Complex64],
    interferer_points: &[Complex64],
    mode: LlrMode,
) -> Result<LlrVector> {
    let n = r.samples.len();
    check_len("target channel", n, target.gains.len())?;
    check_len("interferer channel", n, interferer_gains.len())?;
    let noise = check_noise(r)?;
    let points = target.scaled_points();
    let bps = target.alphabet.bits_per_symbol();
    let mut out = Vec::with_capacity(n * bps);
    let mut acc = vec![[SoftMin::new(mode); 2]; bps];
    for sc in 0..n {
        acc.iter_mut().for_each(|a| *a = [SoftMin::new(mode); 2]);
        let (rn, ht, hi) = (r.samples[sc], target.gains[sc], interferer_gains[sc]);
        for (idx, &x) in points.iter().enumerate() {
            let y = rn - ht * x;
            let mut inner = SoftMin::new(mode);
            for &u in interferer_points {
                inner.push(term((y - hi * u).norm_sqr(), mode, noise));
            }
            for (bit, a) in acc.iter_mut().enumerate() {
                a[target.alphabet.label_bit(idx, bit) as usize].push(inner.value);
            }
        }
        out.extend(acc.iter().map(|a| finish(a[1].value, a[0].value, mode, noise)));
    }
    Ok(out)
}

/// Power-domain NOMA: LLRs of `target` with the other OFDM user's symbols
/// marginalized over its full alphabet. Cost `M_t·M_i` per subcarrier.
pub fn llr_joint_ofdm_ofdm(
    r: &ReceivedFrame,
    target: UserView,
    interferer: UserView,
    mode: LlrMode,
) -> Result<LlrVector> {
    per_subcarrier(r, &target, interferer.gains, &interferer.scaled_points(), mode)
}

/// Waveform-domain NOMA with the OFDM user decoded first: the OFDM-IM
/// interferer is marginalized per subcarrier over `S′ = {0} ∪ S`. Cost
/// `(M+1)·M` per subcarrier.
pub fn llr_ofdm_first(
    r: &ReceivedFrame,
    target: UserView,
    interferer_ofdmim: UserView,
    mode: LlrMode,
) -> Result<LlrVector> {
    let points: Vec<Complex64> = interferer_ofdmim
        .alphabet
        .augmented()
        .into_iter()
        .map(|s| s * interferer_ofdmim.amplitude)
        .collect();
    per_subcarrier(r, &target, interferer_ofdmim.gains, &points, mode)
}

/// Single-user OFDM demapping (e.g. after cancellation).
pub fn llr_single_user(r: &ReceivedFrame, target: UserView, mode: LlrMode) -> Result<LlrVector> {
    per_subcarrier(r, &target, target.gains, &[Complex64::new(0.0, 0.0)], mode)
}

/// Nominal hypothesis count per subblock for OFDM-IM demapping: `c·M^m`, times
/// `M^k` when an OFDM interferer is present.
pub fn ofdmim_hypotheses(cfg: &OfdmImConfig, order: usize, interferer_order: Option<usize>) -> u128 {
    let own = cfg.pattern_count() as u128 * (order as u128).pow(cfg.active() as u32);
    match interferer_order {
        Some(mi) => own.saturating_mul((mi as u128).saturating_pow(cfg.subblock_size() as u32)),
        None => own,
    }
}

/// Waveform-domain NOMA with the OFDM-IM user decoded first (or alone, when
/// `interferer` is `None`): per-subblock LLRs of all `Q` bits, index bits
/// first, in codeword order.
pub fn llr_ofdmim_first(
    r: &ReceivedFrame,
    target: UserView,
    cfg: &OfdmImConfig,
    interferer: Option<UserView>,
    mode: LlrMode,
    cap: u128,
) -> Result<LlrVector> {
    let n = cfg.subcarriers();
    check_len("received frame", n, r.samples.len())?;
    check_len("target channel", n, target.gains.len())?;
    check_len("alphabet bits per symbol", cfg.bits_per_symbol(), target.alphabet.bits_per_symbol())?;
    if let Some(i) = &interferer {
        check_len("interferer channel", n, i.gains.len())?;
    }
    let size = ofdmim_hypotheses(cfg, target.alphabet.order(), interferer.map(|i| i.alphabet.order()));
    if size > cap {
        return Err(Error::Capacity { size, cap });
    }
    let noise = check_noise(r)?;

    let order = target.alphabet.order();
    let bps = target.alphabet.bits_per_symbol();
    let k = cfg.subblock_size();
    let m = cfg.active();
    let q1 = cfg.index_bits();
    let q = cfg.bits_per_subblock();
    // hypotheses for one subcarrier of the target: index 0 is the inactive zero
    let own: Vec<Complex64> = target.alphabet.augmented().into_iter().map(|s| s * target.amplitude).collect();
    let interf_points = interferer.map(|i| i.scaled_points());
    let zero = [Complex64::new(0.0, 0.0)];

    // slot of each position under each pattern
    let slots: Vec<Vec<Option<usize>>> = cfg
        .patterns()
        .iter()
        .map(|p| (0..k).map(|i| p.iter().position(|&x| x == i)).collect())
        .collect();
    let combos = order.pow(m as u32);

    let mut out = Vec::with_capacity(cfg.bits_per_frame());
    let mut terms = vec![0.0; k * (order + 1)];
    let mut acc = vec![[SoftMin::new(mode); 2]; q];
    let mut sym = vec![0usize; m];
    for beta in 0..cfg.subblocks() {
        for i in 0..k {
            let sc = cfg.subcarrier(beta, i);
            let rn = r.samples[sc];
            let ht = target.gains[sc];
            let (hi, ipts): (Complex64, &[Complex64]) = match (&interferer, &interf_points) {
                (Some(v), Some(p)) => (v.gains[sc], p),
                _ => (Complex64::new(0.0, 0.0), &zero),
            };
            for (x, &s) in own.iter().enumerate() {
                let y = rn - ht * s;
                let mut inner = SoftMin::new(mode);
                for &u in ipts {
                    inner.push(term((y - hi * u).norm_sqr(), mode, noise));
                }
                terms[i * (order + 1) + x] = inner.value;
            }
        }
        acc.iter_mut().for_each(|a| *a = [SoftMin::new(mode); 2]);
        for (word, slot_of) in slots.iter().enumerate() {
            for t in 0..combos {
                // first slot is the most significant digit
                let mut rest = t;
                for j in (0..m).rev() {
                    sym[j] = rest % order;
                    rest /= order;
                }
                let mut metric = 0.0;
                for (i, slot) in slot_of.iter().enumerate() {
                    let x = slot.map_or(0, |j| sym[j] + 1);
                    metric += terms[i * (order + 1) + x];
                }
                for b in 0..q1 {
                    acc[b][(word >> (q1 - 1 - b)) & 1].push(metric);
                }
                for (j, &s) in sym.iter().enumerate() {
                    for b in 0..bps {
                        acc[q1 + j * bps + b][target.alphabet.label_bit(s, b) as usize].push(metric);
                    }
                }
            }
        }
        out.extend(acc.iter().map(|a| finish(a[1].value, a[0].value, mode, noise)));
    }
    Ok(out)
}

/// Exact log-likelihood-ratio counterparts of the max-log demappers, for
/// validation.
pub mod exact {
    use super::*;

    pub fn joint_ofdm_ofdm(r: &ReceivedFrame, target: UserView, interferer: UserView) -> Result<LlrVector> {
        llr_joint_ofdm_ofdm(r, target, interferer, LlrMode::Exact)
    }

    pub fn ofdm_first(r: &ReceivedFrame, target: UserView, interferer: UserView) -> Result<LlrVector> {
        llr_ofdm_first(r, target, interferer, LlrMode::Exact)
    }

    pub fn ofdmim_first(
        r: &ReceivedFrame,
        target: UserView,
        cfg: &OfdmImConfig,
        interferer: Option<UserView>,
        cap: u128,
    ) -> Result<LlrVector> {
        llr_ofdmim_first(r, target, cfg, interferer, LlrMode::Exact, cap)
    }
}
