use num_complex::Complex64;
use proptest::prelude::*;

use wdnoma::channel::ReceivedFrame;
use wdnoma::modem::{ConstellationAlphabet, OfdmImConfig, Waveform};
use wdnoma::mud::{self, LlrMode, UserView, DEFAULT_ENUMERATION_CAP};
use wdnoma::oracle::{brute_force_llrs, Interference};
use wdnoma::selftest::compare_llrs;
use wdnoma::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn frame(samples: Vec<Complex64>, noise: f64) -> ReceivedFrame {
    ReceivedFrame {
        samples,
        noise_variance: noise,
    }
}

#[test]
fn qpsk_pair_matches_hand_enumeration() {
    // r = 1.2, h1 = h2 = 1, p1 = p2 = 1, σ² = 1
    let q = ConstellationAlphabet::qpsk();
    let ones = [c(1.0, 0.0)];
    let v = UserView {
        gains: &ones,
        alphabet: &q,
        amplitude: 1.0,
    };
    let r = frame(vec![c(1.2, 0.0)], 1.0);
    let fast = mud::llr_joint_ofdm_ofdm(&r, v, v, LlrMode::MaxLog).unwrap();
    let s = 1.0 / 2f64.sqrt();
    let pts = [c(s, s), c(s, -s), c(-s, s), c(-s, -s)];
    let mut best = [f64::INFINITY; 2];
    for (i, &u1) in pts.iter().enumerate() {
        // bit 0 is the sign of the real part: labels 0x are positive
        let bit0 = i >> 1;
        for &u2 in &pts {
            let m = (c(1.2, 0.0) - u1 - u2).norm_sqr();
            best[bit0] = best[bit0].min(m);
        }
    }
    assert!((fast[0] - (best[1] - best[0])).abs() < 1e-12);
    assert!(fast[0] > 0.0);
}

#[test]
fn bpsk_two_subcarrier_ofdmim_matches_sixteen_hypotheses() {
    let b = ConstellationAlphabet::bpsk();
    let cfg = OfdmImConfig::new(2, 2, 1, &b).unwrap();
    assert_eq!(cfg.pattern_count(), 2);
    let h1 = [c(0.9, 0.2), c(-0.4, 1.1)];
    let h2 = [c(0.3, -0.7), c(1.2, 0.1)];
    let w1 = Waveform::OfdmIm {
        config: cfg.clone(),
        alphabet: b.clone(),
        total_power: 2.0,
    };
    let w2 = Waveform::Ofdm {
        alphabet: b.clone(),
        subcarriers: 2,
        power: 1.0,
    };
    let r = frame(vec![c(0.7, -0.3), c(-1.1, 0.8)], 0.5);
    let v1 = UserView {
        gains: &h1,
        alphabet: &b,
        amplitude: w1.amplitude(),
    };
    let v2 = UserView {
        gains: &h2,
        alphabet: &b,
        amplitude: 1.0,
    };
    let fast = mud::llr_ofdmim_first(&r, v1, &cfg, Some(v2), LlrMode::MaxLog, DEFAULT_ENUMERATION_CAP).unwrap();
    let o = brute_force_llrs(&r.samples, 0.5, &h1, &w1, &h2, Interference::Frames(&w2), LlrMode::MaxLog).unwrap();
    assert_eq!(fast.len(), 2);
    assert_eq!(fast, o);
}

#[test]
fn ofdm_first_without_interferer_channel_is_single_user() {
    let q = ConstellationAlphabet::qpsk();
    let h = [c(0.8, -0.5), c(0.1, 1.3), c(-1.0, 0.2)];
    let zero = [c(0.0, 0.0); 3];
    let r = frame(vec![c(0.3, 0.9), c(-0.2, -0.4), c(1.5, 0.0)], 0.3);
    let t = UserView {
        gains: &h,
        alphabet: &q,
        amplitude: 1.0,
    };
    let i = UserView {
        gains: &zero,
        alphabet: &q,
        amplitude: 1.3,
    };
    assert_eq!(
        mud::llr_ofdm_first(&r, t, i, LlrMode::MaxLog).unwrap(),
        mud::llr_single_user(&r, t, LlrMode::MaxLog).unwrap()
    );
}

#[test]
fn enumeration_cap_is_enforced() {
    let q = ConstellationAlphabet::qpsk();
    let cfg = OfdmImConfig::new(4, 4, 3, &q).unwrap();
    assert_eq!(mud::ofdmim_hypotheses(&cfg, 4, Some(4)), 65536);
    let h = [c(1.0, 0.0); 4];
    let v = UserView {
        gains: &h,
        alphabet: &q,
        amplitude: 1.0,
    };
    let r = frame(vec![c(0.0, 0.0); 4], 1.0);
    let err = mud::llr_ofdmim_first(&r, v, &cfg, Some(v), LlrMode::MaxLog, 65535).unwrap_err();
    assert!(matches!(err, Error::Capacity { size: 65536, cap: 65535 }));
}

#[test]
fn high_snr_exact_and_maxlog_agree_in_sign() {
    let cmp = compare_llrs(11, 400).unwrap();
    assert_eq!(cmp.mismatches, 0);
    assert!(cmp.max_exact_error < 1e-9, "{}", cmp.max_exact_error);
    assert!(cmp.sign_agreement() >= 0.99, "{}", cmp.sign_agreement());
    assert!(cmp.mean_maxlog_gap.is_finite() && cmp.mean_maxlog_gap > 0.0);
}

fn gain() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
}

fn gains(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(gain(), n)
}

fn alphabet() -> impl Strategy<Value = ConstellationAlphabet> {
    prop::bool::ANY.prop_map(|q| if q { ConstellationAlphabet::qpsk() } else { ConstellationAlphabet::bpsk() })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn joint_ofdm_matches_oracle(
        a1 in alphabet(), a2 in alphabet(),
        p1 in 0.1..4.0f64, p2 in 0.1..4.0f64,
        h1 in gains(1), h2 in gains(1), r in gains(1),
        noise in 0.05..3.0f64,
    ) {
        let w1 = Waveform::Ofdm { alphabet: a1.clone(), subcarriers: 1, power: p1 };
        let w2 = Waveform::Ofdm { alphabet: a2.clone(), subcarriers: 1, power: p2 };
        let v1 = UserView { gains: &h1, alphabet: &a1, amplitude: w1.amplitude() };
        let v2 = UserView { gains: &h2, alphabet: &a2, amplitude: w2.amplitude() };
        let rf = frame(r.clone(), noise);
        for mode in [LlrMode::MaxLog, LlrMode::Exact] {
            let fast = mud::llr_joint_ofdm_ofdm(&rf, v1, v2, mode).unwrap();
            let o = brute_force_llrs(&r, noise, &h1, &w1, &h2, Interference::Frames(&w2), mode).unwrap();
            match mode {
                LlrMode::MaxLog => prop_assert_eq!(&fast, &o),
                LlrMode::Exact => for (a, b) in fast.iter().zip(&o) { prop_assert!((a - b).abs() < 1e-9) },
            }
        }
    }

    #[test]
    fn ofdm_first_matches_oracle(
        a1 in alphabet(), a2 in alphabet(),
        p in 0.1..4.0f64, amp in 0.1..2.0f64,
        h1 in gains(1), h2 in gains(1), r in gains(1),
        noise in 0.05..3.0f64,
    ) {
        let wt = Waveform::Ofdm { alphabet: a2.clone(), subcarriers: 1, power: p };
        let t = UserView { gains: &h2, alphabet: &a2, amplitude: wt.amplitude() };
        let i = UserView { gains: &h1, alphabet: &a1, amplitude: amp };
        let fast = mud::llr_ofdm_first(&frame(r.clone(), noise), t, i, LlrMode::MaxLog).unwrap();
        let inter = Interference::Augmented { alphabet: &a1, amplitude: amp };
        let o = brute_force_llrs(&r, noise, &h2, &wt, &h1, inter, LlrMode::MaxLog).unwrap();
        prop_assert_eq!(fast, o);
    }

    #[test]
    fn ofdmim_first_matches_oracle(
        shape in prop::sample::select(vec![(2usize, 1usize), (4, 1), (4, 2), (4, 3)]),
        a1 in alphabet(), a2 in alphabet(),
        total in 0.2..6.0f64, p2 in 0.1..3.0f64,
        h1 in gains(4), h2 in gains(4), r in gains(4),
        noise in 0.05..3.0f64,
        interfered in prop::bool::ANY,
    ) {
        let (k, m) = shape;
        let cfg = OfdmImConfig::new(k, k, m, &a1).unwrap();
        let w1 = Waveform::OfdmIm { config: cfg.clone(), alphabet: a1.clone(), total_power: total };
        let w2 = Waveform::Ofdm { alphabet: a2.clone(), subcarriers: k, power: p2 };
        let interfered = interfered && w1.bits_per_frame() + w2.bits_per_frame() <= 16;
        let (h1, h2, r) = (&h1[..k], &h2[..k], &r[..k]);
        let v1 = UserView { gains: h1, alphabet: &a1, amplitude: w1.amplitude() };
        let v2 = UserView { gains: h2, alphabet: &a2, amplitude: w2.amplitude() };
        let fast = mud::llr_ofdmim_first(
            &frame(r.to_vec(), noise), v1, &cfg, interfered.then_some(v2), LlrMode::MaxLog, DEFAULT_ENUMERATION_CAP,
        ).unwrap();
        let inter = if interfered { Interference::Frames(&w2) } else { Interference::None };
        let o = brute_force_llrs(r, noise, h1, &w1, h2, inter, LlrMode::MaxLog).unwrap();
        prop_assert_eq!(fast, o);
    }
}
