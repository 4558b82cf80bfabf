//! Reconstruction of the first decoded user's frame, cancellation and EVM.
//!
//! Hard reconstruction re-encodes and re-modulates the decoded message. Soft
//! reconstruction maps each bit's total LLR to a probability and builds the
//! expected transmitted symbol, so unreliable bits cancel little instead of
//! cancelling the wrong symbol.

use num_complex::Complex64;

use crate::channel::ReceivedFrame;
use crate::error::{check_len, Error, Result};
use crate::ldpc::{ParityCheckCode, LLR_CLIP};
use crate::modem::{ConstellationAlphabet, SymbolFrame, Waveform};

/// EVM reported for an exact reconstruction.
pub const EVM_FLOOR_DB: f64 = -120.0;

/// Mapping from a bit's total LLR to its soft value `ζ = E[1 − 2b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SoftValue {
    /// `ζ = tanh(L/2)`, the posterior expectation under `L = ln(P0/P1)`.
    #[default]
    Expectation,
    /// `ζ = tanh(L)`.
    PaperLiteral,
}

/// How index-bit uncertainty enters an OFDM-IM soft reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexSoftMode {
    /// Posterior mean over every activation pattern.
    #[default]
    Posterior,
    /// Most likely pattern only, soft symbols on its active subcarriers.
    HardMask,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SoftOptions {
    pub value: SoftValue,
    pub index_mode: IndexSoftMode,
}

/// Soft reconstruction of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftSymbolFrame {
    /// Expected transmitted samples, amplitude included.
    pub samples: Vec<Complex64>,
    /// Per-bit soft values `ζ ∈ [−1, 1]`.
    pub soft_bits: Vec<f64>,
}

/// `P(bit = 0)`; LLRs at the clip level are treated as certain.
fn prob_zero(llr: f64, value: SoftValue) -> f64 {
    if llr >= LLR_CLIP {
        1.0
    } else if llr <= -LLR_CLIP {
        0.0
    } else {
        match value {
            SoftValue::Expectation => 1.0 / (1.0 + (-llr).exp()),
            SoftValue::PaperLiteral => 0.5 * (1.0 + llr.tanh()),
        }
    }
}

/// `Σ P(label)·point` for one symbol given the probabilities of its bits.
fn symbol_mean(alphabet: &ConstellationAlphabet, p0: &[f64]) -> Complex64 {
    let mut mean = Complex64::new(0.0, 0.0);
    for (idx, &s) in alphabet.points().iter().enumerate() {
        let p: f64 = p0
            .iter()
            .enumerate()
            .map(|(b, &pz)| if alphabet.label_bit(idx, b) == 0 { pz } else { 1.0 - pz })
            .product();
        if p != 0.0 {
            mean += s * p;
        }
    }
    mean
}

/// Re-encodes (when `code` is given) and re-modulates a decoded message with
/// the transmitter's power scaling.
pub fn reconstruct_hard(message: &[u8], code: Option<&ParityCheckCode>, waveform: &Waveform) -> Result<SymbolFrame> {
    match code {
        Some(code) => {
            check_len("decoded message", code.message_length(), message.len())?;
            waveform.build(&code.encode(message)?)
        }
        None => waveform.build(message),
    }
}

/// Soft reconstruction from per-coded-bit total LLRs.
pub fn reconstruct_soft(total_llr: &[f64], waveform: &Waveform, options: SoftOptions) -> Result<SoftSymbolFrame> {
    if total_llr.len() != waveform.bits_per_frame() {
        return Err(Error::Contract(format!(
            "soft reconstruction needs {} total LLRs, got {}",
            waveform.bits_per_frame(),
            total_llr.len()
        )));
    }
    let p0: Vec<f64> = total_llr.iter().map(|&l| prob_zero(l, options.value)).collect();
    let soft_bits = p0.iter().map(|p| 2.0 * p - 1.0).collect();
    let alphabet = waveform.alphabet();
    let bps = alphabet.bits_per_symbol();
    let amplitude = waveform.amplitude();
    let samples = match waveform {
        Waveform::Ofdm { .. } => p0
            .chunks_exact(bps)
            .map(|group| symbol_mean(alphabet, group) * amplitude)
            .collect(),
        Waveform::OfdmIm { config, .. } => {
            let mut samples = vec![Complex64::new(0.0, 0.0); config.subcarriers()];
            let q1 = config.index_bits();
            for (beta, block) in p0.chunks_exact(config.bits_per_subblock()).enumerate() {
                let (index, data) = block.split_at(q1);
                let slot_means: Vec<Complex64> = data.chunks_exact(bps).map(|g| symbol_mean(alphabet, g)).collect();
                let pattern_probs: Vec<f64> = (0..config.pattern_count())
                    .map(|w| {
                        index
                            .iter()
                            .enumerate()
                            .map(|(b, &pz)| if (w >> (q1 - 1 - b)) & 1 == 0 { pz } else { 1.0 - pz })
                            .product()
                    })
                    .collect();
                let weights: Vec<f64> = match options.index_mode {
                    IndexSoftMode::Posterior => pattern_probs,
                    IndexSoftMode::HardMask => {
                        let best = pattern_probs
                            .iter()
                            .enumerate()
                            .fold((0, f64::NEG_INFINITY), |acc, (w, &p)| if p > acc.1 { (w, p) } else { acc })
                            .0;
                        (0..config.pattern_count()).map(|w| f64::from(u8::from(w == best))).collect()
                    }
                };
                for (w, pattern) in config.patterns().iter().enumerate() {
                    if weights[w] == 0.0 {
                        continue;
                    }
                    for (slot, &pos) in pattern.iter().enumerate() {
                        samples[config.subcarrier(beta, pos)] += slot_means[slot] * weights[w];
                    }
                }
            }
            samples.into_iter().map(|s| s * amplitude).collect()
        }
    };
    Ok(SoftSymbolFrame { samples, soft_bits })
}

/// `r′_n = r_n − h_n·û_n`.
pub fn cancel(r: &ReceivedFrame, recon: &[Complex64], gains: &[Complex64]) -> Result<ReceivedFrame> {
    check_len("reconstruction", r.samples.len(), recon.len())?;
    check_len("cancellation channel", r.samples.len(), gains.len())?;
    Ok(ReceivedFrame {
        samples: r
            .samples
            .iter()
            .zip(recon)
            .zip(gains)
            .map(|((&y, &u), &h)| y - h * u)
            .collect(),
        noise_variance: r.noise_variance,
    })
}

/// Accumulates error and reference energy over frames.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvmAccumulator {
    pub error_energy: f64,
    pub reference_energy: f64,
}

impl EvmAccumulator {
    pub fn add(&mut self, recon: &[Complex64], reference: &[Complex64]) -> Result<()> {
        check_len("EVM reconstruction", reference.len(), recon.len())?;
        self.error_energy += recon.iter().zip(reference).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        self.reference_energy += reference.iter().map(|b| b.norm_sqr()).sum::<f64>();
        Ok(())
    }

    pub fn merge(&mut self, other: &EvmAccumulator) {
        self.error_energy += other.error_energy;
        self.reference_energy += other.reference_energy;
    }

    pub fn db(&self) -> Result<f64> {
        evm_from_energies(self.error_energy, self.reference_energy)
    }
}

fn evm_from_energies(error: f64, reference: f64) -> Result<f64> {
    if !(reference > 0.0) {
        return Err(Error::Contract("EVM reference has zero energy".into()));
    }
    let db = 10.0 * (error / reference).sqrt().log10();
    Ok(db.max(EVM_FLOOR_DB))
}

/// `10·log10(sqrt(Σ|û − u|² / Σ|u|²))`, floored at [`EVM_FLOOR_DB`].
pub fn evm_db(recon: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    let mut acc = EvmAccumulator::default();
    acc.add(recon, reference)?;
    acc.db()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::OfdmImConfig;
    use crate::rng::{random_bits, trial_stream};

    fn qpsk_ofdm(n: usize, p: f64) -> Waveform {
        Waveform::Ofdm {
            alphabet: ConstellationAlphabet::qpsk(),
            subcarriers: n,
            power: p,
        }
    }

    fn ofdmim(n: usize, p: f64) -> Waveform {
        let q = ConstellationAlphabet::qpsk();
        Waveform::OfdmIm {
            config: OfdmImConfig::new(n, 4, 3, &q).unwrap(),
            alphabet: q,
            total_power: p,
        }
    }

    fn saturated(bits: &[u8]) -> Vec<f64> {
        bits.iter().map(|&b| if b == 0 { LLR_CLIP } else { -LLR_CLIP }).collect()
    }

    #[test]
    fn erasure_reconstructs_to_zero() {
        for w in [qpsk_ofdm(16, 2.0), ofdmim(16, 16.0)] {
            let s = reconstruct_soft(&vec![0.0; 32], &w, SoftOptions::default()).unwrap();
            // OFDM-IM: uniform patterns and zero-mean symbols
            assert!(s.samples.iter().all(|x| x.norm() < 1e-15), "{:?}", s.samples);
        }
    }

    #[test]
    fn saturation_matches_hard() {
        let mut rng = trial_stream(1, 0, 0);
        let code = ParityCheckCode::construct(64, 0.5, 3).unwrap();
        for w in [qpsk_ofdm(32, 1.5), ofdmim(32, 40.0)] {
            let msg = random_bits(&mut rng, 32);
            let cw = code.encode(&msg).unwrap();
            let hard = reconstruct_hard(&msg, Some(&code), &w).unwrap();
            for opts in [
                SoftOptions::default(),
                SoftOptions {
                    value: SoftValue::PaperLiteral,
                    index_mode: IndexSoftMode::HardMask,
                },
            ] {
                let soft = reconstruct_soft(&saturated(&cw), &w, opts).unwrap();
                assert_eq!(soft.samples, hard.samples);
            }
        }
    }

    #[test]
    fn bpsk_paper_literal_example() {
        let p = 2.0;
        let w = Waveform::Ofdm {
            alphabet: ConstellationAlphabet::bpsk_one_positive(),
            subcarriers: 1,
            power: p,
        };
        let opts = SoftOptions {
            value: SoftValue::PaperLiteral,
            ..Default::default()
        };
        let s = reconstruct_soft(&[2.0], &w, opts).unwrap();
        let expected = -p.sqrt() * 2f64.tanh();
        assert!((s.samples[0].re - expected).abs() < 1e-12);
        assert!((2f64.tanh() - 0.9640).abs() < 1e-4);
        // the default labeling and convention: +√p·tanh(L/2)
        let w = Waveform::Ofdm {
            alphabet: ConstellationAlphabet::bpsk(),
            subcarriers: 1,
            power: p,
        };
        let s = reconstruct_soft(&[2.0], &w, SoftOptions::default()).unwrap();
        assert!((s.samples[0].re - p.sqrt() * 1f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn qpsk_soft_is_tanh_per_axis() {
        let w = qpsk_ofdm(1, 1.0);
        let s = reconstruct_soft(&[1.2, -0.4], &w, SoftOptions::default()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.samples[0].re - r * 0.6f64.tanh()).abs() < 1e-12);
        assert!((s.samples[0].im - r * (-0.2f64).tanh()).abs() < 1e-12);
    }

    #[test]
    fn soft_magnitude_is_bounded() {
        let mut rng = trial_stream(2, 0, 0);
        for w in [qpsk_ofdm(32, 3.0), ofdmim(32, 30.0)] {
            let llr: Vec<f64> = (0..64).map(|_| crate::rng::complex_gaussian(&mut rng, 25.0).re).collect();
            let s = reconstruct_soft(&llr, &w, SoftOptions::default()).unwrap();
            let limit = w.amplitude() * w.alphabet().max_magnitude() + 1e-12;
            assert!(s.samples.iter().all(|x| x.norm() <= limit));
        }
    }

    #[test]
    fn missing_llrs_violate_contract() {
        let w = qpsk_ofdm(8, 1.0);
        assert!(matches!(reconstruct_soft(&[], &w, SoftOptions::default()), Err(Error::Contract(_))));
    }

    #[test]
    fn hard_reconstruction_properties() {
        let code = ParityCheckCode::construct(64, 0.5, 3).unwrap();
        let w = qpsk_ofdm(32, 1.0);
        let msg = vec![0u8; 32];
        let a = reconstruct_hard(&msg, Some(&code), &w).unwrap();
        assert_eq!(a, reconstruct_hard(&msg, Some(&code), &w).unwrap());
        let mut flipped = msg.clone();
        flipped[5] = 1;
        let b = reconstruct_hard(&flipped, Some(&code), &w).unwrap();
        assert!(a.samples.iter().zip(&b.samples).any(|(x, y)| x != y));
        assert!(reconstruct_hard(&msg[..31], Some(&code), &w).is_err());
    }

    #[test]
    fn cancellation_cases() {
        let r = ReceivedFrame {
            samples: vec![Complex64::new(1.0, 2.0), Complex64::new(-3.0, 0.5)],
            noise_variance: 0.1,
        };
        let h = vec![Complex64::new(0.5, 0.5), Complex64::new(2.0, -1.0)];
        let zero = vec![Complex64::new(0.0, 0.0); 2];
        assert_eq!(cancel(&r, &zero, &h).unwrap().samples, r.samples);
        let over: Vec<Complex64> = r.samples.iter().zip(&h).map(|(y, g)| y / g).collect();
        assert!(cancel(&r, &over, &h).unwrap().samples.iter().all(|x| x.norm() < 1e-12));
        let a = vec![Complex64::new(0.1, 0.2), Complex64::new(0.3, -0.1)];
        let b = vec![Complex64::new(-0.4, 0.0), Complex64::new(0.2, 0.2)];
        let ab: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let one = cancel(&r, &ab, &h).unwrap();
        let two = cancel(&cancel(&r, &a, &h).unwrap(), &b, &h).unwrap();
        for (x, y) in one.samples.iter().zip(&two.samples) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!(cancel(&r, &a[..1], &h).is_err());
    }

    #[test]
    fn evm_cases() {
        let u = vec![Complex64::new(1.0, -1.0), Complex64::new(0.5, 0.2), Complex64::new(0.0, 0.0)];
        assert_eq!(evm_db(&u, &u).unwrap(), EVM_FLOOR_DB);
        let zero = vec![Complex64::new(0.0, 0.0); 3];
        assert!(evm_db(&zero, &u).unwrap().abs() < 1e-12);
        let twice: Vec<Complex64> = u.iter().map(|x| x * 2.0).collect();
        assert!(evm_db(&twice, &u).unwrap().abs() < 1e-12);
        assert!(matches!(evm_db(&u, &zero), Err(Error::Contract(_))));
        // 10·log10(sqrt(0.01)) = −10 dB
        let close: Vec<Complex64> = u.iter().map(|x| x * 1.1).collect();
        assert!((evm_db(&close, &u).unwrap() + 10.0).abs() < 1e-9);
    }
}
