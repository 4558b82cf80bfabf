//! Encodes with the (256, 128) code and decodes over a BPSK AWGN channel.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use wdnoma::ldpc::ParityCheckCode;
use wdnoma::rng::{random_bits, SimRng};

fn main() -> wdnoma::Result<()> {
    let code = ParityCheckCode::construct(256, 0.5, 1)?;
    println!(
        "n={} k={} checks={} girth={:?}",
        code.block_length(),
        code.message_length(),
        code.checks(),
        code.girth()
    );

    let mut rng = SimRng::seed_from_u64(7);
    let sigma: f64 = 0.8;
    let noise = Normal::new(0.0, sigma).expect("valid deviation");
    let (mut failures, blocks) = (0, 200);
    let mut iterations = 0;
    for _ in 0..blocks {
        let msg = random_bits(&mut rng, code.message_length());
        let cw = code.encode(&msg)?;
        // bit 0 -> +1; LLR = 2y/σ²
        let llr: Vec<f64> = cw
            .iter()
            .map(|&b| {
                let y = 1.0 - 2.0 * f64::from(b) + noise.sample(&mut rng);
                2.0 * y / (sigma * sigma)
            })
            .collect();
        let d = code.decode_sum_product(&llr, 50)?;
        iterations += d.iterations;
        failures += usize::from(code.extract_message(&d.hard) != msg);
    }
    println!(
        "sigma {sigma}: {failures}/{blocks} block errors, mean {:.1} iterations",
        iterations as f64 / blocks as f64
    );
    Ok(())
}
