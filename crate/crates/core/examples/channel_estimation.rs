//! Draws a 10-tap frequency-selective channel and a noisy estimate of it.

use rand::SeedableRng;
use wdnoma::channel::{apply_estimation_error, draw_channel, ChannelModel, TapDelayProfile};
use wdnoma::rng::SimRng;

fn main() -> wdnoma::Result<()> {
    let model = ChannelModel::Selective(TapDelayProfile::uniform(10)?);
    let mut rng = SimRng::seed_from_u64(3);
    let h = draw_channel(&model, 128, &mut rng)?;
    for n in (0..128).step_by(16) {
        println!("subcarrier {n:3}: |h| = {:.3}", h.gains[n].norm());
    }
    for mse in [0.0, 0.01, 0.1] {
        let e = apply_estimation_error(&h, mse, &mut rng)?;
        let err: f64 = h.gains.iter().zip(&e.gains).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / 128.0;
        println!("mse {mse}: measured {err:.4}");
    }
    Ok(())
}
