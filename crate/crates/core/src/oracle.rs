//! Brute-force reference demapper.
//!
//! Enumerates every bit word of a small frame, builds the transmit samples
//! through [`Waveform::build`], and scores whole received vectors. It shares no
//! code with [`crate::mud`] beyond the modem, so agreement between the two is
//! evidence that the fast demappers implement the joint metric correctly.
//!
//! To reproduce the fast demappers bit for bit, score one subcarrier per
//! OFDM instance and one subblock (`N = k`) per OFDM-IM instance: the fast
//! code never adds metrics across independent subcarriers, and floating-point
//! addition is only order-preserving, not associative.

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::modem::{ConstellationAlphabet, Waveform};
use crate::mud::LlrMode;

/// Largest number of joint hypotheses the oracle will enumerate.
pub const ORACLE_CAP: u128 = 1 << 22;

/// Hypothesis set of the interfering user.
#[derive(Debug, Clone, Copy)]
pub enum Interference<'a> {
    None,
    /// Every frame the waveform can produce.
    Frames(&'a Waveform),
    /// Each subcarrier independently from `{0} ∪ S`, scaled by `amplitude`.
    Augmented {
        alphabet: &'a ConstellationAlphabet,
        amplitude: f64,
    },
}

fn word_bits(word: usize, len: usize) -> Vec<u8> {
    (0..len).rev().map(|s| ((word >> s) & 1) as u8).collect()
}

fn all_frames(w: &Waveform) -> Result<Vec<Vec<Complex64>>> {
    let b = w.bits_per_frame();
    (0..1usize << b).map(|word| w.build(&word_bits(word, b)).map(|f| f.samples)).collect()
}

fn augmented_frames(alphabet: &ConstellationAlphabet, amplitude: f64, n: usize) -> Vec<Vec<Complex64>> {
    let mut points = vec![Complex64::new(0.0, 0.0)];
    points.extend(alphabet.points().iter().map(|&s| s * amplitude));
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Complex64>| {
                points.iter().map(move |&p| {
                    let mut v = prefix.clone();
                    v.push(p);
                    v
                })
            })
            .collect();
    }
    out
}

/// LLRs of every coded bit of `target` given received samples `r`.
///
/// Metrics are `Σ_n |r_n − h_n x_n − g_n u_n|² / σ²` over whole frames;
/// hypotheses are equally likely.
pub fn brute_force_llrs(
    r: &[Complex64],
    noise_variance: f64,
    target_gains: &[Complex64],
    target: &Waveform,
    interferer_gains: &[Complex64],
    interference: Interference,
    mode: LlrMode,
) -> Result<Vec<f64>> {
    let n = target.subcarriers();
    check_len("received samples", n, r.len())?;
    check_len("target gains", n, target_gains.len())?;
    if !(noise_variance > 0.0) {
        return Err(Error::Config("oracle needs positive noise variance".into()));
    }
    let bits = target.bits_per_frame();
    if bits >= 24 {
        return Err(Error::Capacity {
            size: 1u128 << bits,
            cap: ORACLE_CAP,
        });
    }
    let interferers = match interference {
        Interference::None => vec![vec![Complex64::new(0.0, 0.0); n]],
        Interference::Frames(w) => {
            check_len("interferer subcarriers", n, w.subcarriers())?;
            if w.bits_per_frame() >= 24 {
                return Err(Error::Capacity {
                    size: 1u128 << w.bits_per_frame(),
                    cap: ORACLE_CAP,
                });
            }
            all_frames(w)?
        }
        Interference::Augmented { alphabet, amplitude } => augmented_frames(alphabet, amplitude, n),
    };
    let interferer_gains: Vec<Complex64> = match interference {
        Interference::None => vec![Complex64::new(0.0, 0.0); n],
        _ => {
            check_len("interferer gains", n, interferer_gains.len())?;
            interferer_gains.to_vec()
        }
    };
    let size = (1u128 << bits) * interferers.len() as u128;
    if size > ORACLE_CAP {
        return Err(Error::Capacity { size, cap: ORACLE_CAP });
    }

    let mut best = vec![[f64::INFINITY; 2]; bits];
    let mut sums = vec![[Vec::new(), Vec::new()]; bits];
    for word in 0..1usize << bits {
        let x = target.build(&word_bits(word, bits))?.samples;
        for u in &interferers {
            let mut metric = 0.0;
            for i in 0..n {
                let e = match interference {
                    Interference::None => r[i] - target_gains[i] * x[i],
                    _ => r[i] - target_gains[i] * x[i] - interferer_gains[i] * u[i],
                };
                metric += e.norm_sqr();
            }
            let scaled = metric / noise_variance;
            for (b, slot) in best.iter_mut().enumerate() {
                let v = (word >> (bits - 1 - b)) & 1;
                match mode {
                    LlrMode::MaxLog => slot[v] = slot[v].min(scaled),
                    LlrMode::Exact => sums[b][v].push(scaled),
                }
            }
        }
    }
    Ok(match mode {
        LlrMode::MaxLog => best.iter().map(|m| m[1] - m[0]).collect(),
        LlrMode::Exact => sums.iter().map(|s| neg_log_sum_exp(&s[1]) - neg_log_sum_exp(&s[0])).collect(),
    })
}

/// `−ln Σ exp(−x)`, shifted by the minimum for stability.
fn neg_log_sum_exp(xs: &[f64]) -> f64 {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    if lo == f64::INFINITY {
        return lo;
    }
    lo - xs.iter().map(|&x| (lo - x).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_enumeration_counts() {
        let q = ConstellationAlphabet::qpsk();
        let w = Waveform::Ofdm {
            alphabet: q.clone(),
            subcarriers: 2,
            power: 1.0,
        };
        assert_eq!(all_frames(&w).unwrap().len(), 16);
        assert_eq!(augmented_frames(&q, 1.0, 3).len(), 125);
    }

    #[test]
    fn log_sum_exp_is_stable() {
        assert!((neg_log_sum_exp(&[1000.0, 1000.0]) - (1000.0 - 2f64.ln())).abs() < 1e-9);
        assert_eq!(neg_log_sum_exp(&[]), f64::INFINITY);
    }
}
