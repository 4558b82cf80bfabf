//! Deterministic oracle and invariant checks, runnable from the CLI.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use crate::analysis::{capacity_user1_first, sum_capacity};
use crate::channel::ReceivedFrame;
use crate::error::{Error, Result};
use crate::harness::{interpolate_required_snr, RequiredSnr};
use crate::ldpc::ParityCheckCode;
use crate::modem::{ConstellationAlphabet, OfdmImConfig, Waveform};
use crate::mud::{self, LlrMode, UserView, DEFAULT_ENUMERATION_CAP};
use crate::oracle::{brute_force_llrs, Interference};
use crate::rng::{complex_gaussian, random_bits, SimRng};
use crate::sic::{cancel, reconstruct_hard};

/// One named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

/// Tallies from comparing the fast demappers with the brute-force oracle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LlrComparison {
    pub instances: u64,
    pub llrs: u64,
    /// Max-log LLRs that differ from the oracle in any bit.
    pub mismatches: u64,
    /// Largest `|fast exact − oracle exact|`.
    pub max_exact_error: f64,
    /// Mean `|exact − max-log|`.
    pub mean_maxlog_gap: f64,
    /// Bits where exact and max-log agree in sign, counted on instances at
    /// per-subcarrier SNR of at least 6 dB.
    pub sign_agree: u64,
    pub sign_total: u64,
}

impl LlrComparison {
    fn absorb(&mut self, fast: &[f64], fast_exact: &[f64], oracle: &[f64], oracle_exact: &[f64], high_snr: bool) {
        self.instances += 1;
        for i in 0..oracle.len() {
            self.llrs += 1;
            if fast[i].to_bits() != oracle[i].to_bits() {
                self.mismatches += 1;
            }
            self.max_exact_error = self.max_exact_error.max((fast_exact[i] - oracle_exact[i]).abs());
            let gap = (oracle_exact[i] - oracle[i]).abs();
            self.mean_maxlog_gap += (gap - self.mean_maxlog_gap) / self.llrs as f64;
            if high_snr {
                self.sign_total += 1;
                let agree = oracle[i] == 0.0 && oracle_exact[i].abs() < 1e-9 || (oracle[i] > 0.0) == (oracle_exact[i] > 0.0);
                self.sign_agree += u64::from(agree);
            }
        }
    }

    pub fn sign_agreement(&self) -> f64 {
        if self.sign_total == 0 {
            1.0
        } else {
            self.sign_agree as f64 / self.sign_total as f64
        }
    }
}

fn gains(rng: &mut SimRng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng, 1.0)).collect()
}

/// Whether every target subcarrier sees at least 6 dB received SNR, |h|²a²/σ².
fn above_6db(gains: &[Complex64], amplitude: f64, noise: f64) -> bool {
    gains.iter().all(|h| h.norm_sqr() * amplitude * amplitude / noise >= 10f64.powf(0.6))
}

/// A received vector either of pure noise-like samples or of an actual
/// transmission.
fn received(
    rng: &mut SimRng,
    parts: &[(&[Complex64], Vec<Complex64>)],
    noise: f64,
    random: bool,
) -> ReceivedFrame {
    let n = parts[0].1.len();
    let samples = (0..n)
        .map(|i| {
            if random {
                complex_gaussian(rng, 2.0)
            } else {
                parts.iter().map(|(h, x)| h[i] * x[i]).sum::<Complex64>() + complex_gaussian(rng, noise)
            }
        })
        .collect();
    ReceivedFrame {
        samples,
        noise_variance: noise,
    }
}

fn small_alphabet(rng: &mut SimRng) -> ConstellationAlphabet {
    if rng.random_bool(0.5) {
        ConstellationAlphabet::qpsk()
    } else {
        ConstellationAlphabet::bpsk()
    }
}

/// Compares all three joint demappers, max-log and exact, with the oracle on
/// `per_kind` random small instances each. Every third instance is an actual
/// transmission at 6 to 15 dB; the rest use arbitrary received samples.
pub fn compare_llrs(seed: u64, per_kind: u64) -> Result<LlrComparison> {
    let mut rng = SimRng::seed_from_u64(seed);
    let mut out = LlrComparison::default();
    for t in 0..per_kind {
        let high = t % 3 == 0;
        let snr_db = rng.random_range(6.0..15.0);
        let noise = if high {
            10f64.powf(-snr_db / 10.0)
        } else {
            rng.random_range(0.1..2.0)
        };

        // OFDM + OFDM, one subcarrier
        let (a1, a2) = (small_alphabet(&mut rng), small_alphabet(&mut rng));
        let (p1, p2) = (rng.random_range(0.2..3.0), rng.random_range(0.2..3.0));
        let w1 = Waveform::Ofdm {
            alphabet: a1.clone(),
            subcarriers: 1,
            power: p1,
        };
        let w2 = Waveform::Ofdm {
            alphabet: a2.clone(),
            subcarriers: 1,
            power: p2,
        };
        let (h1, h2) = (gains(&mut rng, 1), gains(&mut rng, 1));
        let x1 = w1.build(&random_bits(&mut rng, w1.bits_per_frame()))?.samples;
        let x2 = w2.build(&random_bits(&mut rng, w2.bits_per_frame()))?.samples;
        let r = received(&mut rng, &[(&h1, x1), (&h2, x2)], noise, !high);
        let v1 = UserView {
            gains: &h1,
            alphabet: &a1,
            amplitude: w1.amplitude(),
        };
        let v2 = UserView {
            gains: &h2,
            alphabet: &a2,
            amplitude: w2.amplitude(),
        };
        let fast = mud::llr_joint_ofdm_ofdm(&r, v1, v2, LlrMode::MaxLog)?;
        let fast_x = mud::exact::joint_ofdm_ofdm(&r, v1, v2)?;
        let inter = Interference::Frames(&w2);
        let o = brute_force_llrs(&r.samples, noise, &h1, &w1, &h2, inter, LlrMode::MaxLog)?;
        let ox = brute_force_llrs(&r.samples, noise, &h1, &w1, &h2, inter, LlrMode::Exact)?;
        out.absorb(&fast, &fast_x, &o, &ox, high && above_6db(&h1, w1.amplitude(), noise));

        // OFDM-IM (k ≤ 4) first, optionally with an OFDM interferer
        let (k, m) = [(2, 1), (4, 1), (4, 2), (4, 3)][rng.random_range(0..4)];
        let a = small_alphabet(&mut rng);
        let cfg = OfdmImConfig::new(k, k, m, &a)?;
        let total = rng.random_range(0.5..6.0);
        let wi = Waveform::OfdmIm {
            config: cfg.clone(),
            alphabet: a.clone(),
            total_power: total,
        };
        let ai = small_alphabet(&mut rng);
        let wo = Waveform::Ofdm {
            alphabet: ai.clone(),
            subcarriers: k,
            power: rng.random_range(0.2..3.0),
        };
        let with_interferer = wo.bits_per_frame() + wi.bits_per_frame() <= 16 && rng.random_bool(0.8);
        let (hi, ho) = (gains(&mut rng, k), gains(&mut rng, k));
        let xi = wi.build(&random_bits(&mut rng, wi.bits_per_frame()))?.samples;
        let xo = if with_interferer {
            wo.build(&random_bits(&mut rng, wo.bits_per_frame()))?.samples
        } else {
            vec![Complex64::new(0.0, 0.0); k]
        };
        let r = received(&mut rng, &[(&hi, xi), (&ho, xo)], noise, !high);
        let vi = UserView {
            gains: &hi,
            alphabet: &a,
            amplitude: wi.amplitude(),
        };
        let vo = UserView {
            gains: &ho,
            alphabet: &ai,
            amplitude: wo.amplitude(),
        };
        let interferer = with_interferer.then_some(vo);
        let fast = mud::llr_ofdmim_first(&r, vi, &cfg, interferer, LlrMode::MaxLog, DEFAULT_ENUMERATION_CAP)?;
        let fast_x = mud::exact::ofdmim_first(&r, vi, &cfg, interferer, DEFAULT_ENUMERATION_CAP)?;
        let inter = if with_interferer {
            Interference::Frames(&wo)
        } else {
            Interference::None
        };
        let o = brute_force_llrs(&r.samples, noise, &hi, &wi, &ho, inter, LlrMode::MaxLog)?;
        let ox = brute_force_llrs(&r.samples, noise, &hi, &wi, &ho, inter, LlrMode::Exact)?;
        out.absorb(&fast, &fast_x, &o, &ox, high && above_6db(&hi, wi.amplitude(), noise));

        // OFDM first against OFDM-IM interference on one subcarrier
        let (at, ai) = (small_alphabet(&mut rng), small_alphabet(&mut rng));
        let wt = Waveform::Ofdm {
            alphabet: at.clone(),
            subcarriers: 1,
            power: rng.random_range(0.2..3.0),
        };
        let amp = rng.random_range(0.3..2.0);
        let (ht, hx) = (gains(&mut rng, 1), gains(&mut rng, 1));
        let xt = wt.build(&random_bits(&mut rng, wt.bits_per_frame()))?.samples;
        let xs = {
            let j = rng.random_range(0..=ai.order());
            vec![if j == 0 { Complex64::new(0.0, 0.0) } else { ai.points()[j - 1] * amp }]
        };
        let r = received(&mut rng, &[(&ht, xt), (&hx, xs)], noise, !high);
        let vt = UserView {
            gains: &ht,
            alphabet: &at,
            amplitude: wt.amplitude(),
        };
        let vx = UserView {
            gains: &hx,
            alphabet: &ai,
            amplitude: amp,
        };
        let fast = mud::llr_ofdm_first(&r, vt, vx, LlrMode::MaxLog)?;
        let fast_x = mud::exact::ofdm_first(&r, vt, vx)?;
        let inter = Interference::Augmented {
            alphabet: &ai,
            amplitude: amp,
        };
        let o = brute_force_llrs(&r.samples, noise, &ht, &wt, &hx, inter, LlrMode::MaxLog)?;
        let ox = brute_force_llrs(&r.samples, noise, &ht, &wt, &hx, inter, LlrMode::Exact)?;
        out.absorb(&fast, &fast_x, &o, &ox, high && above_6db(&ht, wt.amplitude(), noise));
    }
    Ok(out)
}

/// Largest relative deviation of `R1 + R2` from the closed-form sum rate, in
/// both decoding orders, over random instances.
pub fn capacity_identity_error(seed: u64, instances: usize) -> Result<f64> {
    let mut rng = SimRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.random_range(1..64);
        let (h1, h2) = (gains(&mut rng, n), gains(&mut rng, n));
        let p1 = 10f64.powf(rng.random_range(-2.0..2.0));
        let p2 = 10f64.powf(rng.random_range(-2.0..2.0));
        let noise = 10f64.powf(rng.random_range(-3.0..1.0));
        let reference = sum_capacity(p1, p2, &h1, &h2, noise);
        let a = capacity_user1_first(p1, p2, &h1, &h2, noise)?.sum_rate();
        let b = capacity_user1_first(p2, p1, &h2, &h1, noise)?.sum_rate();
        worst = worst.max((a - reference).abs() / reference).max((b - reference).abs() / reference);
    }
    Ok(worst)
}

/// Largest relative error between the post-cancellation residual and
/// `h2·x2 + noise` when the first user's bits and channel are known exactly.
pub fn perfect_sic_residual_error(seed: u64, frames: usize) -> Result<f64> {
    let mut rng = SimRng::seed_from_u64(seed);
    let q = ConstellationAlphabet::qpsk();
    let code = ParityCheckCode::construct(256, 0.5, 1)?;
    let cfg = OfdmImConfig::new(128, 4, 3, &q)?;
    let w1 = Waveform::OfdmIm {
        config: cfg,
        alphabet: q.clone(),
        total_power: 128.0,
    };
    let w2 = Waveform::Ofdm {
        alphabet: q,
        subcarriers: 128,
        power: 1.0,
    };
    let mut worst: f64 = 0.0;
    for _ in 0..frames {
        let msg = random_bits(&mut rng, code.message_length());
        let x1 = w1.build(&code.encode(&msg)?)?.samples;
        let x2 = w2.build(&code.encode(&random_bits(&mut rng, code.message_length()))?)?.samples;
        let (h1, h2) = (gains(&mut rng, 128), gains(&mut rng, 128));
        let noise: Vec<Complex64> = (0..128).map(|_| complex_gaussian(&mut rng, 0.1)).collect();
        let expected: Vec<Complex64> = (0..128).map(|i| h2[i] * x2[i] + noise[i]).collect();
        let r = ReceivedFrame {
            samples: (0..128).map(|i| h1[i] * x1[i] + expected[i]).collect(),
            noise_variance: 0.1,
        };
        let recon = reconstruct_hard(&msg, Some(&code), &w1)?;
        let residual = cancel(&r, &recon.samples, &h1)?;
        let err: f64 = residual.samples.iter().zip(&expected).map(|(a, b)| (a - b).norm_sqr()).sum();
        let refe: f64 = expected.iter().map(|x| x.norm_sqr()).sum();
        worst = worst.max((err / refe).sqrt());
    }
    Ok(worst)
}

/// Fraction of noiseless codewords the decoder returns unchanged.
fn ldpc_noiseless(seed: u64, blocks: usize) -> Result<f64> {
    let mut rng = SimRng::seed_from_u64(seed);
    let code = ParityCheckCode::construct(256, 0.5, 1)?;
    let mut ok = 0;
    for _ in 0..blocks {
        let msg = random_bits(&mut rng, code.message_length());
        let cw = code.encode(&msg)?;
        let llr: Vec<f64> = cw.iter().map(|&b| if b == 0 { 8.0 } else { -8.0 }).collect();
        let d = code.decode_sum_product(&llr, 50)?;
        ok += usize::from(code.extract_message(&d.hard) == msg && d.syndrome_ok);
    }
    Ok(ok as f64 / blocks as f64)
}

/// Runs every check with a fixed seed.
pub fn run(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64, passed: bool| {
        checks.push(Check {
            name: name.to_string(),
            value,
            passed,
        })
    };
    let c = compare_llrs(seed, 120)?;
    push("llr_maxlog_mismatches", c.mismatches as f64, c.mismatches == 0);
    push("llr_exact_max_error", c.max_exact_error, c.max_exact_error < 1e-9);
    push("llr_sign_agreement", c.sign_agreement(), c.sign_agreement() >= 0.99);
    push("llr_mean_maxlog_gap", c.mean_maxlog_gap, c.mean_maxlog_gap.is_finite());
    let e = capacity_identity_error(seed, 200)?;
    push("capacity_identity_rel_error", e, e <= 1e-12);
    let e = perfect_sic_residual_error(seed, 20)?;
    push("perfect_sic_residual_rel_error", e, e <= 1e-12);
    let f = ldpc_noiseless(seed, 50)?;
    push("ldpc_noiseless_success", f, f == 1.0);
    let curve: Vec<(f64, f64, u64)> = (0..=6).map(|i| 5.0 * i as f64).map(|s| (s, 10f64.powf(-s / 10.0), 1000)).collect();
    let x = match interpolate_required_snr(&curve, 1e-2) {
        RequiredSnr::Achieved(x) => x,
        _ => f64::NAN,
    };
    push("required_snr_synthetic_db", x, (x - 20.0).abs() < 1e-9);
    Ok(checks)
}

/// Writes `check,value,passed`.
pub fn write_checks(checks: &[Check], path: &Path) -> Result<()> {
    let io = |e: csv::Error| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["check", "value", "passed"]).map_err(io)?;
    for c in checks {
        w.write_record([c.name.clone(), crate::harness::fmt_sig(c.value), c.passed.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
