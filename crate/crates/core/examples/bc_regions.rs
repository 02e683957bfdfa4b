//! Superposition operating points of the semi-deterministic broadcast
//! channel, and the weighted-sum outer value they meet.

use qdnet::regions::{bc_inner_sweep, bc_outer_value};
use qdnet::{BcChannel, FadingPmf};

fn main() -> qdnet::Result<()> {
    let ch = BcChannel::new(6, 4, FadingPmf::uniform(6))?;
    println!("i0    R1      R2");
    let sweep = bc_inner_sweep(&ch);
    for p in &sweep {
        println!("{:<5} {:<7} {:.4}", p.i0, p.r1, p.r2);
    }
    println!();
    for mu in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let outer = bc_outer_value(&ch, mu)?;
        let inner = sweep
            .iter()
            .map(|p| p.r1 + mu * p.r2)
            .fold(f64::NEG_INFINITY, f64::max);
        println!(
            "mu {mu:<4} outer {:.4} (i0 = {})  best inner {inner:.4}",
            outer.value, outer.i0
        );
    }
    Ok(())
}
