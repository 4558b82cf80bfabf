use num_complex::Complex64;
use rand::SeedableRng;

use wdnoma::channel::{apply_estimation_error, draw_channel, ChannelModel, TapDelayProfile};
use wdnoma::modem::{demap_ofdmim_frame_hard, ConstellationAlphabet, OfdmImConfig, Waveform};
use wdnoma::rng::{random_bits, SimRng};

#[test]
fn ofdmim_round_trip_and_power() {
    let q = ConstellationAlphabet::qpsk();
    let cfg = OfdmImConfig::new(128, 4, 3, &q).unwrap();
    let p1 = 128.0 * 10f64.powf(0.3);
    let w = Waveform::OfdmIm {
        config: cfg.clone(),
        alphabet: q.clone(),
        total_power: p1,
    };
    let mut rng = SimRng::seed_from_u64(3);
    let mut power = 0.0;
    let frames = 10_000;
    for _ in 0..frames {
        let bits = random_bits(&mut rng, 256);
        let f = w.build(&bits).unwrap();
        // exactly m of k subcarriers active per subblock
        assert_eq!(f.samples.iter().filter(|x| x.norm_sqr() > 0.0).count(), 96);
        let unit: Vec<Complex64> = f.samples.iter().map(|x| x / f.amplitude).collect();
        assert_eq!(demap_ofdmim_frame_hard(&unit, &cfg, &q).unwrap(), bits);
        power += f.power();
    }
    let mean = power / frames as f64;
    assert!((mean / p1 - 1.0).abs() < 0.01, "{mean} vs {p1}");
}

#[test]
fn ofdm_round_trip_and_power() {
    let mut rng = SimRng::seed_from_u64(4);
    for alphabet in [
        ConstellationAlphabet::bpsk(),
        ConstellationAlphabet::qpsk(),
        ConstellationAlphabet::qam16(),
    ] {
        let w = Waveform::Ofdm {
            alphabet: alphabet.clone(),
            subcarriers: 64,
            power: 2.0,
        };
        let mut power = 0.0;
        for _ in 0..2_000 {
            let bits = random_bits(&mut rng, w.bits_per_frame());
            let f = w.build(&bits).unwrap();
            let unit: Vec<Complex64> = f.samples.iter().map(|x| x / f.amplitude).collect();
            assert_eq!(wdnoma::modem::demap_qam_hard(&unit, &alphabet), bits);
            power += f.power();
        }
        let mean = power / 2_000.0 / 64.0;
        assert!((mean / 2.0 - 1.0).abs() < 0.01, "{} {mean}", alphabet.name());
    }
}

#[test]
fn selective_channel_has_unit_average_gain() {
    let model = ChannelModel::Selective(TapDelayProfile::uniform(10).unwrap());
    let mut rng = SimRng::seed_from_u64(5);
    let draws = 10_000;
    let mut energy = 0.0;
    for _ in 0..draws {
        let h = draw_channel(&model, 128, &mut rng).unwrap();
        energy += h.gains.iter().map(|g| g.norm_sqr()).sum::<f64>() / 128.0;
    }
    let mean = energy / draws as f64;
    assert!((mean - 1.0).abs() < 0.02, "{mean}");
}

#[test]
fn selective_channel_is_frequency_correlated() {
    // adjacent subcarriers of a 10-tap channel over 128 subcarriers are
    // strongly correlated; subcarriers 64 apart much less so
    let model = ChannelModel::Selective(TapDelayProfile::uniform(10).unwrap());
    let mut rng = SimRng::seed_from_u64(6);
    let (mut near, mut far) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for _ in 0..4_000 {
        let h = draw_channel(&model, 128, &mut rng).unwrap().gains;
        near += h[0] * h[1].conj();
        far += h[0] * h[64].conj();
    }
    assert!(near.norm() / 4_000.0 > 0.9);
    assert!(far.norm() / 4_000.0 < 0.1);
}

#[test]
fn estimation_error_variance_is_calibrated() {
    let model = ChannelModel::Selective(TapDelayProfile::uniform(10).unwrap());
    let mut rng = SimRng::seed_from_u64(7);
    for mse in [0.01, 0.1] {
        let (mut err, mut count) = (0.0, 0usize);
        while count < 100_000 {
            let h = draw_channel(&model, 128, &mut rng).unwrap();
            let e = apply_estimation_error(&h, mse, &mut rng).unwrap();
            err += h.gains.iter().zip(&e.gains).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
            count += 128;
        }
        let measured = err / count as f64;
        assert!((measured / mse - 1.0).abs() < 0.03, "{measured} vs {mse}");
    }
}

#[test]
fn zero_mse_estimate_is_exact() {
    let mut rng = SimRng::seed_from_u64(8);
    let h = draw_channel(&ChannelModel::Selective(TapDelayProfile::uniform(4).unwrap()), 16, &mut rng).unwrap();
    assert_eq!(apply_estimation_error(&h, 0.0, &mut rng).unwrap().gains, h.gains);
}
