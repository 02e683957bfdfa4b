//! The unstructured scheme: every node applies a fresh random function per
//! block and the sink tries all 2^(nRB) messages. Compared with the linear
//! scheme on a two-hop line whose cut-set value is 1/2.

use qdnet::codingsim::{simulate_random_coding, Scheme, SimConfig};
use qdnet::network::parse_network;

fn main() -> qdnet::Result<()> {
    let net = parse_network(include_str!("nets/line.net"))?;
    for (rate, n) in [(0.125, 8), (0.25, 8), (1.0, 4)] {
        for scheme in [Scheme::LookupRandom, Scheme::LinearRandom] {
            let cfg = SimConfig {
                scheme,
                seed: 5,
                ..SimConfig::new(&net, rate, n, 4, 40)
            };
            let r = simulate_random_coding(&net, &cfg)?;
            println!(
                "R = {rate:<5} n = {n}  {scheme:<13} error rate {:.3}",
                r.error_rate
            );
        }
    }
    Ok(())
}
