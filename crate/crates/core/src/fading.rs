//! Integer fading levels.
//!
//! A fading level `M` is the number of most significant input bits that
//! reach a receiver in one channel use. Its law is a [`FadingPmf`] over
//! `{0, ..., n}`; receivers know the realization, transmitters only the law.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::CounterStream;

/// Tolerance on `Σ p_i = 1`.
pub const PROB_TOLERANCE: f64 = 1e-12;

/// Largest fading level accepted from text input.
pub const MAX_LEVEL: usize = 4096;

/// Probability mass function of an integer fading level over `{0..=n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FadingPmf {
    probs: Vec<f64>,
}

impl FadingPmf {
    /// `probs[i]` is `P[M = i]`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf("empty probability vector".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidPmf(format!(
                "P[M={i}] = {p} is not a probability"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidPmf(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn point_mass(level: usize) -> Self {
        let mut probs = vec![0.0; level + 1];
        probs[level] = 1.0;
        Self { probs }
    }

    /// Uniform over `{0..=n}`.
    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / (n + 1) as f64; n + 1],
        }
    }

    /// Builds a pmf from `(level, probability)` atoms.
    pub fn from_atoms(atoms: &[(usize, f64)]) -> Result<Self> {
        let n = atoms
            .iter()
            .map(|&(l, _)| l)
            .max()
            .ok_or_else(|| Error::InvalidPmf("no atoms".into()))?;
        if n > MAX_LEVEL {
            return Err(Error::InvalidPmf(format!("level {n} exceeds {MAX_LEVEL}")));
        }
        let mut probs = vec![0.0; n + 1];
        let mut seen = vec![false; n + 1];
        for &(level, p) in atoms {
            if std::mem::replace(&mut seen[level], true) {
                return Err(Error::InvalidPmf(format!("level {level} listed twice")));
            }
            probs[level] = p;
        }
        Self::new(probs)
    }

    /// Largest level in the representation (`n`).
    pub fn max_level(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn prob(&self, level: usize) -> f64 {
        self.probs.get(level).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Levels with positive probability.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, p)| p > 0.0)
    }

    /// Largest level with positive probability.
    pub fn max_support(&self) -> usize {
        self.support().map(|(l, _)| l).last().unwrap_or(0)
    }

    /// `P[M ≤ level]`.
    pub fn cdf(&self, level: usize) -> f64 {
        fsum(self.probs.iter().take(level + 1).copied())
    }

    /// `P[M ≥ level]`.
    pub fn tail(&self, level: usize) -> f64 {
        fsum(self.probs.iter().skip(level).copied())
    }

    /// `E[M]`.
    pub fn expectation(&self) -> f64 {
        fsum(self.probs.iter().enumerate().map(|(i, p)| i as f64 * p))
    }

    /// Inverse-CDF draw from a uniform `u ∈ [0,1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (level, p) in self.support() {
            acc += p;
            if u < acc {
                return level;
            }
        }
        self.max_support()
    }

    /// Draw number `index` of the stream keyed by `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> usize {
        self.sample_with(CounterStream::new(seed).uniform(index))
    }
}

impl FromStr for FadingPmf {
    type Err = Error;

    /// Parses `level:prob,level:prob,...`.
    fn from_str(s: &str) -> Result<Self> {
        let atoms = s
            .split(',')
            .map(|atom| {
                let (l, p) = atom
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidPmf(format!("atom '{atom}' is not level:prob")))?;
                let level = l
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidPmf(format!("level '{l}': {e}")))?;
                let prob = p
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidPmf(format!("probability '{p}': {e}")))?;
                Ok((level, prob))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_atoms(&atoms)
    }
}

impl fmt::Display for FadingPmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self.support().map(|(l, p)| format!("{l}:{p}")).collect();
        f.write_str(&atoms.join(","))
    }
}

impl Serialize for FadingPmf {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Compensated (Neumaier) summation.
pub(crate) fn fsum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `E[max_k M_k]` for independent levels, via the product of CDFs.
pub fn expectation_max(pmfs: &[FadingPmf]) -> Result<f64> {
    if pmfs.is_empty() {
        return Err(Error::InvalidArgument(
            "expectation of a maximum needs at least one pmf".into(),
        ));
    }
    let n = pmfs.iter().map(FadingPmf::max_level).max().unwrap_or(0);
    let joint_cdf = |k: usize| pmfs.iter().map(|p| p.cdf(k)).product::<f64>();
    // E[max] = Σ_{k≥1} P[max ≥ k] = Σ_{k=0}^{n-1} (1 - F(k))
    Ok(fsum((0..n).map(|k| 1.0 - joint_cdf(k))))
}

/// One realization of every fading level in a network or channel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StateSample {
    pub levels: Vec<usize>,
    /// Seed path this sample was derived from (master seed first).
    pub seed_path: Vec<u64>,
}

impl StateSample {
    pub fn new(levels: Vec<usize>) -> Self {
        Self {
            levels,
            seed_path: Vec::new(),
        }
    }

    /// Draws one level per pmf: pmf `e` uses counter `index * pmfs.len() + e`
    /// of the stream keyed by `seed`.
    pub fn draw(pmfs: &[&FadingPmf], seed: u64, index: u64) -> Self {
        let mut stream = CounterStream::new(seed);
        let k = pmfs.len() as u64;
        let levels = pmfs
            .iter()
            .enumerate()
            .map(|(e, p)| p.sample_with(stream.uniform(index * k + e as u64)))
            .collect();
        Self {
            levels,
            seed_path: vec![seed, index],
        }
    }
}

/// A discrete distribution of received SNR values, each at least 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SnrDistribution {
    atoms: Vec<(f64, f64)>,
}

impl SnrDistribution {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidSnr("no atoms".into()));
        }
        for &(snr, p) in &atoms {
            if !snr.is_finite() || snr < 1.0 {
                return Err(Error::InvalidSnr(format!(
                    "SNR {snr} is outside the high-SNR regime (SNR >= 1)"
                )));
            }
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidSnr(format!("probability {p} is invalid")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidSnr(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { atoms })
    }

    /// A single SNR value with probability one.
    pub fn deterministic(snr: f64) -> Result<Self> {
        Self::new(vec![(snr, 1.0)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `E[g(SNR)]`.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        fsum(self.atoms.iter().map(|&(s, p)| p * g(s)))
    }
}

impl FromStr for SnrDistribution {
    type Err = Error;

    /// Parses `snr:prob,snr:prob,...`; a bare number means probability one.
    fn from_str(s: &str) -> Result<Self> {
        let atoms = s
            .split(',')
            .map(|atom| {
                let (v, p) = atom.split_once(':').unwrap_or((atom, "1"));
                let parse = |t: &str| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidSnr(format!("'{t}': {e}")))
                };
                Ok((parse(v)?, parse(p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }
}

/// Level delivered at a given SNR: `⌈½ lg(1 + SNR)⌉`.
pub fn snr_to_level(snr: f64) -> usize {
    (0.5 * (1.0 + snr).log2()).ceil() as usize
}

/// Maps each SNR atom to its integer level and aggregates the probabilities.
pub fn pmf_from_snr(dist: &SnrDistribution) -> FadingPmf {
    let n = dist
        .atoms()
        .iter()
        .map(|&(s, _)| snr_to_level(s))
        .max()
        .unwrap_or(0);
    let mut probs = vec![0.0; n + 1];
    for &(s, p) in dist.atoms() {
        probs[snr_to_level(s)] += p;
    }
    FadingPmf { probs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pmf(s: &str) -> FadingPmf {
        s.parse().unwrap()
    }

    /// Oracle: E[max] by enumerating the joint support.
    fn expectation_max_brute(pmfs: &[FadingPmf]) -> f64 {
        let mut total = 0.0;
        let mut idx = vec![0usize; pmfs.len()];
        loop {
            let p: f64 = idx.iter().zip(pmfs).map(|(&i, f)| f.prob(i)).product();
            total += p * *idx.iter().max().unwrap() as f64;
            let mut k = 0;
            loop {
                if k == pmfs.len() {
                    return total;
                }
                idx[k] += 1;
                if idx[k] <= pmfs[k].max_level() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(FadingPmf::point_mass(5).expectation(), 5.0);
        assert_eq!(pmf("0:0.5,1:0.5").expectation(), 0.5);
        assert_eq!(pmf("1:0.5,2:0.5").expectation(), 1.5);
    }

    #[test]
    fn expectation_max_examples() {
        let p = pmf("1:0.5,2:0.5");
        assert_eq!(expectation_max(std::slice::from_ref(&p)).unwrap(), 1.5);
        let det = [FadingPmf::point_mass(5), FadingPmf::point_mass(3)];
        assert_eq!(expectation_max(&det).unwrap(), 5.0);
        assert_eq!(expectation_max(&[p.clone(), p]).unwrap(), 1.75);
        assert!(expectation_max(&[]).is_err());
    }

    #[test]
    fn pmf_validation() {
        assert!(FadingPmf::new(vec![0.5, 0.4]).is_err());
        assert!(FadingPmf::new(vec![1.5, -0.5]).is_err());
        assert!(FadingPmf::new(vec![]).is_err());
        assert!("1:0.5,1:0.5".parse::<FadingPmf>().is_err());
        assert!("1-0.5".parse::<FadingPmf>().is_err());
        assert!("x:1".parse::<FadingPmf>().is_err());
        let p = pmf("2:0.25, 0:0.75");
        assert_eq!(p.max_level(), 2);
        assert_eq!(p.to_string(), "0:0.75,2:0.25");
    }

    #[test]
    fn sampling_point_mass_is_constant() {
        let p = FadingPmf::point_mass(2);
        for i in 0..100 {
            assert_eq!(p.sample(17, i), 2);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = pmf("0:0.2,1:0.3,3:0.5");
        for i in 0..50 {
            assert_eq!(p.sample(4, i), p.sample(4, i));
        }
    }

    #[test]
    fn sampling_law_of_large_numbers() {
        let p = pmf("0:0.5,1:0.5");
        let mut stream = CounterStream::new(2024);
        let n = 100_000;
        let sum: usize = (1..=n).map(|i| p.sample_with(stream.uniform(i))).sum();
        let mean = sum as f64 / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn snr_mapping_examples() {
        let one = pmf_from_snr(&SnrDistribution::deterministic(1.0).unwrap());
        assert_eq!(one, FadingPmf::point_mass(1));
        let five = pmf_from_snr(&SnrDistribution::deterministic(1023.0).unwrap());
        assert_eq!(five, FadingPmf::point_mass(5));
        let d: SnrDistribution = "3:0.5,15:0.5".parse().unwrap();
        assert_eq!(pmf_from_snr(&d), pmf("1:0.5,2:0.5"));
    }

    #[test]
    fn snr_below_one_rejected() {
        assert!(SnrDistribution::deterministic(0.5).is_err());
        assert!(SnrDistribution::deterministic(0.0).is_err());
        assert!("3:0.5,15:0.4".parse::<SnrDistribution>().is_err());
    }

    fn arb_pmf(max_n: usize) -> impl Strategy<Value = FadingPmf> {
        proptest::collection::vec(0.0f64..1.0, 1..=max_n + 1).prop_filter_map("all zero", |w| {
            let total: f64 = w.iter().sum();
            (total > 0.0).then(|| FadingPmf::new(w.iter().map(|x| x / total).collect()).ok())?
        })
    }

    proptest! {
        #[test]
        fn expectation_max_bounds(pmfs in proptest::collection::vec(arb_pmf(6), 1..=3)) {
            let e = expectation_max(&pmfs).unwrap();
            let each: Vec<f64> = pmfs.iter().map(FadingPmf::expectation).collect();
            let max = each.iter().cloned().fold(0.0, f64::max);
            prop_assert!(e >= max - 1e-12);
            prop_assert!(e <= each.iter().sum::<f64>() + 1e-12);
            prop_assert!((e - expectation_max_brute(&pmfs)).abs() < 1e-12);
        }

        #[test]
        fn pmf_from_snr_is_valid(raw in proptest::collection::vec((1.0f64..1e6, 0.01f64..1.0), 1..8)) {
            let total: f64 = raw.iter().map(|a| a.1).sum();
            let atoms: Vec<_> = raw.iter().map(|&(s, p)| (s, p / total)).collect();
            let d = SnrDistribution::new(atoms).unwrap();
            let p = pmf_from_snr(&d);
            prop_assert!(FadingPmf::new(p.probs().to_vec()).is_ok());
        }

        #[test]
        fn display_roundtrips(p in arb_pmf(8)) {
            let back: FadingPmf = p.to_string().parse().unwrap();
            for l in 0..=p.max_level() {
                prop_assert_eq!(back.prob(l), p.prob(l));
            }
        }
    }
}
