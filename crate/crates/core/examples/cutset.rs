//! Cut-set bound of a network file, exactly and by Monte Carlo.
//!
//! cargo run --example cutset -- crates/core/examples/nets/parallel.net

use qdnet::network::{cutset_bound_exact, cutset_bound_mc, parse_network};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/examples/nets/diamond.net").into()
    });
    let net = parse_network(&std::fs::read_to_string(&path)?)?;
    let exact = cutset_bound_exact(&net)?;
    let mc = cutset_bound_mc(&net, 50_000, 1)?;
    println!("{:<12} {:>8} {:>16}", "cut", "exact", "monte carlo");
    for (e, m) in exact.per_cut.iter().zip(&mc.per_cut) {
        println!(
            "{:<12} {:>8.4} {:>9.4} +- {:.4}",
            e.label, e.expected_rank, m.mean, m.stderr
        );
    }
    println!(
        "bound {:.4} at {{{}}}",
        exact.value,
        net.cut_label(&exact.argmin)
    );
    Ok(())
}
