//! Erasure-coded superposition over the broadcast channel: receiver 1 gets
//! the middle levels uncoded, receiver 2 decodes the rest from whatever
//! levels its fading lets through.

use qdnet::codingsim::{bc_payload_failure_rate, bc_superposition_sim};
use qdnet::{BcChannel, FadingPmf};

fn main() -> qdnet::Result<()> {
    let ch = BcChannel::new(6, 4, FadingPmf::uniform(6))?;
    let r = bc_superposition_sim(&ch, 2, 2048, 100, 1)?;
    println!(
        "i0 = {}: R1 = {}, R2 = {:.3} (target {:.3}) at failure rate {}",
        r.i0, r.r1_achieved, r.r2_achieved, r.r2_target, r.failure_rate
    );
    let over = (1.1 * r.r2_target * 2048.0) as usize;
    println!(
        "payload 10% above target: failure rate {}",
        bc_payload_failure_rate(&ch, 2, 2048, over, 50, 1)?
    );
    Ok(())
}
