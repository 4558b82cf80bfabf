//! Achievable rates of both decoding orders on one channel draw.

use rand::SeedableRng;
use wdnoma::analysis::{capacity_user1_first, sum_capacity};
use wdnoma::channel::{draw_channel, ChannelModel, TapDelayProfile};
use wdnoma::rng::SimRng;

fn main() -> wdnoma::Result<()> {
    let model = ChannelModel::Selective(TapDelayProfile::uniform(10)?);
    let mut rng = SimRng::seed_from_u64(11);
    let h1 = draw_channel(&model, 128, &mut rng)?.gains;
    let h2 = draw_channel(&model, 128, &mut rng)?.gains;
    let noise = 0.1;
    for dp in [-3.0, 0.0, 3.0] {
        let p1 = 10f64.powf(dp / 10.0);
        let a = capacity_user1_first(p1, 1.0, &h1, &h2, noise)?;
        let b = capacity_user1_first(1.0, p1, &h2, &h1, noise)?;
        println!(
            "dP {dp:+} dB: user 1 first R1={:.1} R2={:.1}; user 2 first R1={:.1} R2={:.1}; sum {:.3} = {:.3}",
            a.r1,
            a.r2,
            b.r2,
            b.r1,
            a.sum_rate(),
            sum_capacity(p1, 1.0, &h1, &h2, noise)
        );
    }
    Ok(())
}
