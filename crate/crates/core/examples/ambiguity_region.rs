//! Uncoded AWGN: SNR needed for BLER 1e-2 as the power imbalance varies.

use wdnoma::harness::{required_snr_search, RequiredSnr, Scheme, SimulationConfig, Simulator};

fn main() -> wdnoma::Result<()> {
    for scheme in [Scheme::PowerDomain, Scheme::WaveformDomain] {
        let cfg = SimulationConfig {
            scheme,
            coded: false,
            snr_db: (0..=8).map(|i| 5.0 * i as f64).collect(),
            min_block_errors: 30,
            max_trials: 1_000,
            ..SimulationConfig::default()
        };
        let sim = Simulator::new(cfg)?;
        println!("{}", scheme.label());
        for dp in [-2.0, -1.0, 0.0, 2.0, 5.0] {
            let (req, _) = required_snr_search(&sim, 1e-2, dp)?;
            let show = |r: Option<RequiredSnr>| match r.and_then(RequiredSnr::value) {
                Some(x) => format!("{x:5.1}"),
                None => "   NA".to_string(),
            };
            println!("  dP {dp:+4.1} dB: user 1 {}  user 2 {}", show(req[0]), show(req[1]));
        }
    }
    Ok(())
}
