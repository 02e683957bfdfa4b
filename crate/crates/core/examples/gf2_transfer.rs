//! Shift-truncate blocks and the two-user MAC written as one GF(2) matrix.

use qdnet::gf2::{shift_truncate_block, Gf2Matrix, LevelVector};
use qdnet::FadingPmf;
use qdnet::MacChannel;

fn main() -> qdnet::Result<()> {
    let (m1, m2) = (3, 2);
    let m_hat = m1.max(m2);
    let a = shift_truncate_block(4, m1, m_hat)?.hconcat(&shift_truncate_block(3, m2, m_hat)?)?;
    println!("[B(4,{m1},{m_hat}) | B(3,{m2},{m_hat})] =\n{a:?}");
    println!("rank {}", a.rank());

    let ch = MacChannel::new(4, 3, FadingPmf::uniform(4), FadingPmf::uniform(3))?;
    let x1: LevelVector = "1011".parse()?;
    let x2: LevelVector = "110".parse()?;
    let y = ch.output(&x1, &x2, m1, m2)?;
    println!("x1 = {x1}, x2 = {x2} -> y = {y}");
    assert_eq!(y, a.mat_vec_mul(&x1.concat(&x2))?);

    let m = Gf2Matrix::from_bit_strings(&["110", "011", "111"])?;
    let target: LevelVector = "101".parse()?;
    match m.solve(&target)? {
        Some(s) => println!("solve: x = {} (nullity {})", s.x, s.nullity),
        None => println!("solve: inconsistent"),
    }
    Ok(())
}
