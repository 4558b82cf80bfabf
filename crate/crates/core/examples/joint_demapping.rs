//! The three joint max-log demappers on one received subblock, checked
//! against brute-force enumeration.

use num_complex::Complex64;
use rand::SeedableRng;
use wdnoma::channel::ReceivedFrame;
use wdnoma::modem::{ConstellationAlphabet, OfdmImConfig, Waveform};
use wdnoma::mud::{self, LlrMode, UserView, DEFAULT_ENUMERATION_CAP};
use wdnoma::oracle::{brute_force_llrs, Interference};
use wdnoma::rng::{complex_gaussian, random_bits, SimRng};

fn main() -> wdnoma::Result<()> {
    let mut rng = SimRng::seed_from_u64(5);
    let qpsk = ConstellationAlphabet::qpsk();
    let cfg = OfdmImConfig::new(4, 4, 3, &qpsk)?;
    let w1 = Waveform::OfdmIm {
        config: cfg.clone(),
        alphabet: qpsk.clone(),
        total_power: 4.0,
    };
    let w2 = Waveform::Ofdm {
        alphabet: qpsk.clone(),
        subcarriers: 4,
        power: 1.0,
    };
    let h1: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
    let h2: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
    let x1 = w1.build(&random_bits(&mut rng, 8))?.samples;
    let x2 = w2.build(&random_bits(&mut rng, 8))?.samples;
    let noise = 0.05;
    let r = ReceivedFrame {
        samples: (0..4)
            .map(|i| h1[i] * x1[i] + h2[i] * x2[i] + complex_gaussian(&mut rng, noise))
            .collect(),
        noise_variance: noise,
    };
    let v1 = UserView {
        gains: &h1,
        alphabet: &qpsk,
        amplitude: w1.amplitude(),
    };
    let v2 = UserView {
        gains: &h2,
        alphabet: &qpsk,
        amplitude: w2.amplitude(),
    };

    let first = mud::llr_ofdmim_first(&r, v1, &cfg, Some(v2), LlrMode::MaxLog, DEFAULT_ENUMERATION_CAP)?;
    let oracle = brute_force_llrs(&r.samples, noise, &h1, &w1, &h2, Interference::Frames(&w2), LlrMode::MaxLog)?;
    println!("OFDM-IM first ({} hypotheses):", mud::ofdmim_hypotheses(&cfg, 4, Some(4)));
    println!("  fast   {:?}", rounded(&first));
    println!("  oracle {:?}", rounded(&oracle));

    let second = mud::llr_ofdm_first(&r, v2, v1, LlrMode::MaxLog)?;
    println!("OFDM first, OFDM-IM marginalized over {{0}} + S:");
    println!("  {:?}", rounded(&second));

    let exact = mud::exact::ofdm_first(&r, v2, v1)?;
    println!("  exact  {:?}", rounded(&exact));
    Ok(())
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 100.0).round() / 100.0).collect()
}
