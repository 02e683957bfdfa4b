//! Random linear network coding on the diamond, swept across the cut-set
//! value of 1.75 bits per timestep.

use qdnet::codingsim::{simulate_random_coding, SimConfig};
use qdnet::network::{cutset_bound_exact, parse_network};

fn main() -> qdnet::Result<()> {
    let net = parse_network(include_str!("nets/diamond.net"))?;
    println!("cut-set bound {}", cutset_bound_exact(&net)?.value);
    println!("rate  errors/trials  effective rate");
    for rate in [1.0, 1.4, 1.6, 1.75, 1.9, 2.2] {
        let cfg = SimConfig {
            seed: 3,
            ..SimConfig::new(&net, rate, 64, 8, 100)
        };
        let r = simulate_random_coding(&net, &cfg)?;
        println!(
            "{rate:<5} {:>6}/{:<7} {:.3}",
            r.decode_errors, r.trials, r.effective_rate
        );
    }
    Ok(())
}
