//! MAC capacity region and its distance from the Gaussian MAC.

use qdnet::fading::{pmf_from_snr, SnrDistribution};
use qdnet::regions::{gaussian_mac_region, mac_region, region_gap};
use qdnet::MacChannel;

fn main() -> qdnet::Result<()> {
    let snr1: SnrDistribution = "1023:0.5,255:0.5".parse()?;
    let snr2: SnrDistribution = "63:0.7,3:0.3".parse()?;
    let model = mac_region(&MacChannel::from_pmfs(
        pmf_from_snr(&snr1),
        pmf_from_snr(&snr2),
    ));
    let gauss = gaussian_mac_region(&snr1, &snr2);
    println!("{:>8} {:>8} {:>8}", "", "model", "gauss");
    for (name, (m, g)) in ["R1", "R2", "R1+R2"]
        .iter()
        .zip(model.constraints().iter().zip(gauss.constraints()))
    {
        println!("{name:>8} {:>8.4} {:>8.4}", m.bound, g.bound);
    }
    println!(
        "gap over 256 directions: {:.4}",
        region_gap(&model, &gauss, 256)?
    );
    Ok(())
}
