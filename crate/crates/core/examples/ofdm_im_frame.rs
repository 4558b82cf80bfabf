//! Builds an OFDM-IM frame (N=128, k=4, m=3, QPSK) and reads it back.

use rand::SeedableRng;
use wdnoma::modem::{demap_ofdmim_frame_hard, ConstellationAlphabet, OfdmImConfig, Waveform};
use wdnoma::rng::{random_bits, SimRng};

fn main() -> wdnoma::Result<()> {
    let qpsk = ConstellationAlphabet::qpsk();
    let cfg = OfdmImConfig::new(128, 4, 3, &qpsk)?;
    println!(
        "{} subblocks, {} patterns, {} index + {} symbol bits per subblock",
        cfg.subblocks(),
        cfg.pattern_count(),
        cfg.index_bits(),
        cfg.modulation_bits()
    );
    for (word, p) in cfg.patterns().iter().enumerate() {
        println!("  index word {word:02b} -> active positions {p:?}");
    }

    let waveform = Waveform::OfdmIm {
        config: cfg.clone(),
        alphabet: qpsk.clone(),
        total_power: 128.0,
    };
    let bits = random_bits(&mut SimRng::seed_from_u64(1), cfg.bits_per_frame());
    let frame = waveform.build(&bits)?;
    println!("frame power {:.3} (target 128), amplitude {:.4}", frame.power(), frame.amplitude);

    let unit: Vec<_> = frame.samples.iter().map(|x| x / frame.amplitude).collect();
    let back = demap_ofdmim_frame_hard(&unit, &cfg, &qpsk)?;
    println!("noiseless round trip: {}", if back == bits { "ok" } else { "MISMATCH" });
    Ok(())
}
