use rand::SeedableRng;

use wdnoma::channel::{superimpose, ChannelModel, ChannelRealization};
use wdnoma::ldpc::{clip_llr, ParityCheckCode};
use wdnoma::modem::{ConstellationAlphabet, SymbolFrame, Waveform};
use wdnoma::mud::{llr_single_user, LlrMode, UserView};
use wdnoma::rng::{random_bits, SimRng};

fn awgn(n: usize) -> ChannelRealization {
    wdnoma::channel::draw_channel(&ChannelModel::Awgn, n, &mut SimRng::seed_from_u64(0)).unwrap()
}

/// Block errors over `blocks` QPSK transmissions of 128 information bits at
/// `eb_n0_db`, with or without the rate-1/2 code.
fn block_errors(code: Option<&ParityCheckCode>, eb_n0_db: f64, blocks: usize, seed: u64) -> usize {
    let q = ConstellationAlphabet::qpsk();
    let coded_bits = if code.is_some() { 256 } else { 128 };
    let n = coded_bits / 2;
    let w = Waveform::Ofdm {
        alphabet: q.clone(),
        subcarriers: n,
        power: 1.0,
    };
    // Es = 1 carries 2·R information bits
    let rate = 128.0 / coded_bits as f64;
    let noise = 1.0 / (2.0 * rate * 10f64.powf(eb_n0_db / 10.0));
    let h = awgn(n);
    let mut rng = SimRng::seed_from_u64(seed);
    let mut errors = 0;
    for _ in 0..blocks {
        let msg = random_bits(&mut rng, 128);
        let bits = match code {
            Some(c) => c.encode(&msg).unwrap(),
            None => msg.clone(),
        };
        let x = w.build(&bits).unwrap();
        let r = superimpose(&x, &h, &SymbolFrame::zeros(n), &h, noise, &mut rng).unwrap();
        let view = UserView {
            gains: &h.gains,
            alphabet: &q,
            amplitude: 1.0,
        };
        let llr: Vec<f64> = llr_single_user(&r, view, LlrMode::MaxLog).unwrap().into_iter().map(clip_llr).collect();
        let decided = match code {
            Some(c) => c.extract_message(&c.decode_sum_product(&llr, 50).unwrap().hard),
            None => llr.iter().map(|&l| u8::from(l < 0.0)).collect(),
        };
        errors += usize::from(decided != msg);
    }
    errors
}

#[test]
fn coded_beats_uncoded_at_4db() {
    let code = ParityCheckCode::construct(256, 0.5, 1).unwrap();
    let blocks = 1_000;
    let coded = block_errors(Some(&code), 4.0, blocks, 21);
    let uncoded = block_errors(None, 4.0, blocks, 21);
    assert!(coded < uncoded, "coded {coded} uncoded {uncoded}");
    // uncoded BER ~1.25e-2 at 4 dB makes almost every 128-bit block fail
    assert!(uncoded > 700, "{uncoded}");
}

#[test]
fn code_structure() {
    let code = ParityCheckCode::construct(256, 0.5, 1).unwrap();
    assert_eq!(code.message_length(), 128);
    assert!(code.girth().unwrap_or(usize::MAX) >= 6);
    assert!(code.variable_neighbors().iter().all(|v| v.len() == 3));
    assert!(code.check_neighbors().iter().all(|c| c.len() == 6));
}
