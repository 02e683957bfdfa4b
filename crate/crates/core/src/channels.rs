//! Single-hop bit-level channels: truncation, shift-XOR MAC and the
//! semi-deterministic broadcast channel.

use crate::error::{invalid, Error, Result};
use crate::fading::FadingPmf;
use crate::gf2::{shift_truncate_block, LevelVector};

fn check_len(context: &'static str, expected: usize, x: &LevelVector) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            actual: x.len(),
        });
    }
    Ok(())
}

fn check_level(name: &str, m: usize, n: usize) -> Result<()> {
    if m > n {
        return Err(invalid(format!("{name} = {m} exceeds input length {n}")));
    }
    Ok(())
}

/// Point-to-point channel passing the top `M` of `n` input levels.
#[derive(Clone, Debug, PartialEq)]
pub struct P2pChannel {
    n: usize,
    pmf: FadingPmf,
}

impl P2pChannel {
    pub fn new(n: usize, pmf: FadingPmf) -> Result<Self> {
        check_level("pmf support", pmf.max_support(), n)?;
        Ok(Self { n, pmf })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pmf(&self) -> &FadingPmf {
        &self.pmf
    }

    pub fn output(&self, x: &LevelVector, m: usize) -> Result<LevelVector> {
        check_len("point-to-point input", self.n, x)?;
        check_level("fading level", m, self.n)?;
        Ok(x.prefix(m))
    }

    /// `E[M]` bits per channel use.
    pub fn capacity(&self) -> f64 {
        self.pmf.expectation()
    }
}

/// Two-user MAC with independent fading levels `M1`, `M2`.
#[derive(Clone, Debug, PartialEq)]
pub struct MacChannel {
    n1: usize,
    n2: usize,
    pmf1: FadingPmf,
    pmf2: FadingPmf,
}

impl MacChannel {
    pub fn new(n1: usize, n2: usize, pmf1: FadingPmf, pmf2: FadingPmf) -> Result<Self> {
        check_level("pmf1 support", pmf1.max_support(), n1)?;
        check_level("pmf2 support", pmf2.max_support(), n2)?;
        Ok(Self { n1, n2, pmf1, pmf2 })
    }

    /// Input lengths default to the largest level of each pmf.
    pub fn from_pmfs(pmf1: FadingPmf, pmf2: FadingPmf) -> Self {
        Self {
            n1: pmf1.max_level(),
            n2: pmf2.max_level(),
            pmf1,
            pmf2,
        }
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn pmf1(&self) -> &FadingPmf {
        &self.pmf1
    }

    pub fn pmf2(&self) -> &FadingPmf {
        &self.pmf2
    }

    /// Receiver output for levels `(m1, m2)`: `m̂ = max(m1, m2)` bits, bit `i`
    /// being `x1^{i-(m̂-m1)} ⊕ x2^{i-(m̂-m2)}` with out-of-range levels read as 0.
    pub fn output(
        &self,
        x1: &LevelVector,
        x2: &LevelVector,
        m1: usize,
        m2: usize,
    ) -> Result<LevelVector> {
        check_len("MAC input 1", self.n1, x1)?;
        check_len("MAC input 2", self.n2, x2)?;
        check_level("fading level m1", m1, self.n1)?;
        check_level("fading level m2", m2, self.n2)?;
        let m_hat = m1.max(m2);
        let (eta1, eta2) = ((m_hat - m1) as isize, (m_hat - m2) as isize);
        Ok(LevelVector::new(
            (1..=m_hat as isize)
                .map(|i| {
                    let a = i - eta1 <= m1 as isize && x1.level(i - eta1);
                    let b = i - eta2 <= m2 as isize && x2.level(i - eta2);
                    a ^ b
                })
                .collect(),
        ))
    }

    /// The same map written as `[B(n1,m1,m̂) | B(n2,m2,m̂)] · [x1; x2]`.
    pub fn output_via_matrix(
        &self,
        x1: &LevelVector,
        x2: &LevelVector,
        m1: usize,
        m2: usize,
    ) -> Result<LevelVector> {
        check_len("MAC input 1", self.n1, x1)?;
        check_len("MAC input 2", self.n2, x2)?;
        let m_hat = m1.max(m2);
        let a = shift_truncate_block(self.n1, m1, m_hat)?
            .hconcat(&shift_truncate_block(self.n2, m2, m_hat)?)?;
        a.mat_vec_mul(&x1.concat(x2))
    }
}

/// Semi-deterministic broadcast channel: receiver 1 always sees the top
/// `m1` levels, receiver 2 the top `M2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BcChannel {
    n: usize,
    m1: usize,
    pmf2: FadingPmf,
}

impl BcChannel {
    pub fn new(n: usize, m1: usize, pmf2: FadingPmf) -> Result<Self> {
        if m1 == 0 || m1 >= n {
            return Err(invalid(format!(
                "receiver-1 level must satisfy 0 < m1 < n, got m1 = {m1}, n = {n}"
            )));
        }
        check_level("pmf2 support", pmf2.max_support(), n)?;
        Ok(Self { n, m1, pmf2 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn pmf2(&self) -> &FadingPmf {
        &self.pmf2
    }

    pub fn outputs(&self, x: &LevelVector, m2: usize) -> Result<(LevelVector, LevelVector)> {
        check_len("broadcast input", self.n, x)?;
        check_level("fading level m2", m2, self.n)?;
        Ok((x.prefix(self.m1), x.prefix(m2)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn bits(s: &str) -> LevelVector {
        s.parse().unwrap()
    }

    fn all_inputs(n: usize) -> impl Iterator<Item = LevelVector> {
        (0u32..1 << n).map(move |v| LevelVector::new((0..n).map(|i| v >> i & 1 == 1).collect()))
    }

    #[test]
    fn p2p_examples() {
        let ch = P2pChannel::new(5, FadingPmf::uniform(5)).unwrap();
        let x = bits("10110");
        assert_eq!(ch.output(&x, 3).unwrap(), bits("101"));
        assert!(ch.output(&x, 0).unwrap().is_empty());
        assert_eq!(ch.output(&x, 5).unwrap(), x);
        assert!(ch.output(&x, 6).is_err());
        assert!(ch.output(&bits("101"), 1).is_err());
    }

    #[test]
    fn p2p_capacity_examples() {
        let full = P2pChannel::new(4, FadingPmf::point_mass(4)).unwrap();
        assert_eq!(full.capacity(), 4.0);
        let half = P2pChannel::new(2, "1:0.5,2:0.5".parse().unwrap()).unwrap();
        assert_eq!(half.capacity(), 1.5);
        let user1 = P2pChannel::new(6, FadingPmf::point_mass(5)).unwrap();
        assert_eq!(user1.capacity(), 5.0);
        assert!(P2pChannel::new(1, FadingPmf::point_mass(2)).is_err());
    }

    #[test]
    fn mac_examples() {
        let ch = MacChannel::new(3, 2, FadingPmf::uniform(3), FadingPmf::uniform(2)).unwrap();
        // m̂=3: bit1 = x1^1, bit2 = x1^2 ⊕ x2^1, bit3 = x1^3 ⊕ x2^2
        assert_eq!(
            ch.output(&bits("101"), &bits("11"), 3, 2).unwrap(),
            bits("110")
        );
        assert!(ch
            .output(&bits("101"), &bits("11"), 0, 0)
            .unwrap()
            .is_empty());
        for m1 in 0..=3 {
            for m2 in 0..=m1.min(2) {
                let y = ch.output(&bits("101"), &bits("00"), m1, m2).unwrap();
                assert_eq!(y, bits("101").prefix(m1));
            }
        }
        assert!(ch.output(&bits("101"), &bits("11"), 4, 0).is_err());
    }

    #[test]
    fn bc_examples() {
        let ch = BcChannel::new(4, 2, FadingPmf::uniform(4)).unwrap();
        let x = bits("1011");
        assert_eq!(ch.outputs(&x, 3).unwrap(), (bits("10"), bits("101")));
        assert_eq!(
            ch.outputs(&x, 0).unwrap(),
            (bits("10"), LevelVector::default())
        );
        assert_eq!(ch.outputs(&x, 4).unwrap(), (bits("10"), x.clone()));
        assert!(ch.outputs(&x, 5).is_err());
        assert!(BcChannel::new(4, 0, FadingPmf::uniform(4)).is_err());
        assert!(BcChannel::new(4, 4, FadingPmf::uniform(4)).is_err());
    }

    #[test]
    fn p2p_outputs_are_prefixes() {
        let ch = P2pChannel::new(4, FadingPmf::uniform(4)).unwrap();
        for x in all_inputs(4) {
            for m in 0..=4 {
                for m2 in m..=4 {
                    let short = ch.output(&x, m).unwrap();
                    let long = ch.output(&x, m2).unwrap();
                    assert_eq!(&long.bits()[..m], short.bits());
                }
            }
        }
    }

    #[test]
    fn bc_degraded_given_states() {
        let ch = BcChannel::new(4, 2, FadingPmf::uniform(4)).unwrap();
        for x in all_inputs(4) {
            for m2 in 2..=4 {
                let (y1, y2) = ch.outputs(&x, m2).unwrap();
                assert_eq!(&y2.bits()[..2], y1.bits());
            }
        }
    }

    #[test]
    fn mac_matches_matrix_form_exhaustively() {
        for n1 in 0..=4 {
            for n2 in 0..=4 {
                let ch =
                    MacChannel::new(n1, n2, FadingPmf::point_mass(0), FadingPmf::point_mass(0))
                        .unwrap();
                for m1 in 0..=n1 {
                    for m2 in 0..=n2 {
                        for x1 in all_inputs(n1) {
                            for x2 in all_inputs(n2) {
                                assert_eq!(
                                    ch.output(&x1, &x2, m1, m2).unwrap(),
                                    ch.output_via_matrix(&x1, &x2, m1, m2).unwrap()
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn mac_output_entropy_per_state_is_max_level() {
        for n1 in 0..=4 {
            for n2 in 0..=4 {
                let ch =
                    MacChannel::new(n1, n2, FadingPmf::point_mass(0), FadingPmf::point_mass(0))
                        .unwrap();
                for m1 in 0..=n1 {
                    for m2 in 0..=n2 {
                        let mut counts: HashMap<LevelVector, usize> = HashMap::new();
                        for x1 in all_inputs(n1) {
                            for x2 in all_inputs(n2) {
                                *counts
                                    .entry(ch.output(&x1, &x2, m1, m2).unwrap())
                                    .or_default() += 1;
                            }
                        }
                        let total = (1usize << (n1 + n2)) as f64;
                        let h: f64 = counts
                            .values()
                            .map(|&c| {
                                let p = c as f64 / total;
                                -p * p.log2()
                            })
                            .sum();
                        assert!((h - m1.max(m2) as f64).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
