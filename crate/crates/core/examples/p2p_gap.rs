//! Bit-level model of a fading point-to-point link against its Gaussian
//! counterpart.
//!
//! cargo run --example p2p_gap -- "3:0.5,1023:0.5"

use qdnet::fading::{pmf_from_snr, SnrDistribution};
use qdnet::regions::gaussian_p2p_rate;

fn main() -> qdnet::Result<()> {
    let law: SnrDistribution = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "10:0.25,100:0.5,5000:0.25".into())
        .parse()?;
    let pmf = pmf_from_snr(&law);
    let model = pmf.expectation();
    let gauss = gaussian_p2p_rate(&law);
    println!("levels      {pmf}");
    println!("E[M]        {model:.4}");
    println!("E[rate]     {gauss:.4}");
    println!("difference  {:.4}", model - gauss);
    Ok(())
}
