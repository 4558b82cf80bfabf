//! Coded BLER of both schemes at equal power over a 10-tap channel, written
//! to `bler_sweep.csv`.

use wdnoma::channel::{ChannelModel, TapDelayProfile};
use wdnoma::harness::{run_bler_sweep, write_results, Scheme, SimulationConfig, Simulator};

fn main() -> wdnoma::Result<()> {
    let mut records = Vec::new();
    for scheme in [Scheme::PowerDomain, Scheme::WaveformDomain] {
        let cfg = SimulationConfig {
            scheme,
            channel: ChannelModel::Selective(TapDelayProfile::uniform(10)?),
            snr_db: vec![8.0, 10.0, 12.0],
            min_block_errors: 30,
            max_trials: 500,
            ..SimulationConfig::default()
        };
        records.extend(run_bler_sweep(&Simulator::new(cfg)?)?);
    }
    for r in &records {
        println!(
            "{:16} {:>4} dB  BLER u1 {:.4}  u2 {:.4}  ({})",
            r.scheme,
            r.snr_db.unwrap_or(f64::NAN),
            r.bler[0].unwrap_or(f64::NAN),
            r.bler[1].unwrap_or(f64::NAN),
            r.decode_order
        );
    }
    write_results(&records, std::path::Path::new("bler_sweep.csv"))
}
