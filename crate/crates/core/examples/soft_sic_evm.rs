//! Hard vs soft reconstruction EVM of the first decoded user.

use wdnoma::channel::{ChannelModel, TapDelayProfile};
use wdnoma::harness::{run_evm_experiment, DecodeOrderRule, SimulationConfig, Simulator};

fn main() -> wdnoma::Result<()> {
    let cfg = SimulationConfig {
        decode_order: DecodeOrderRule::User1First,
        channel: ChannelModel::Selective(TapDelayProfile::uniform(10)?),
        snr_db: vec![8.0, 12.0],
        evm_mse: vec![0.0, 0.1],
        evm_frames: 50,
        ..SimulationConfig::default()
    };
    for r in run_evm_experiment(&Simulator::new(cfg)?)? {
        println!(
            "{:32} snr {:>4} dB  first-user BLER {:.2}  EVM {:7.2} dB",
            r.scheme,
            r.snr_db.unwrap_or(f64::NAN),
            r.bler[0].unwrap_or(f64::NAN),
            r.evm_db.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
