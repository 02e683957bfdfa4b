//! Capacity regions of the single-hop models and their Gaussian references.

use serde::Serialize;

use crate::channels::{BcChannel, MacChannel};
use crate::error::{invalid, Error, Result};
use crate::fading::{expectation_max, fsum, SnrDistribution};

const FEAS_TOL: f64 = 1e-9;

/// Largest dimension accepted by the vertex-enumeration support function.
pub const MAX_REGION_DIM: usize = 6;

/// `coeffs · R ≤ bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

/// A bounded polyhedron `{R ≥ 0 : coeffs_k · R ≤ bound_k for all k}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRegion {
    dim: usize,
    constraints: Vec<Constraint>,
}

impl RateRegion {
    pub fn new(dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if dim == 0 || dim > MAX_REGION_DIM {
            return Err(invalid(format!(
                "region dimension must be in 1..={MAX_REGION_DIM}, got {dim}"
            )));
        }
        for c in &constraints {
            if c.coeffs.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "constraint coefficients",
                    expected: dim,
                    actual: c.coeffs.len(),
                });
            }
            if c.coeffs.iter().any(|a| !a.is_finite() || *a < 0.0) {
                return Err(invalid("constraint coefficients must be nonnegative"));
            }
            if !c.bound.is_finite() || c.bound < 0.0 {
                return Err(invalid(format!(
                    "constraint bound {} must be >= 0",
                    c.bound
                )));
            }
        }
        for axis in 0..dim {
            if !constraints.iter().any(|c| c.coeffs[axis] > 0.0) {
                return Err(invalid(format!("rate {} is unbounded", axis + 1)));
            }
        }
        Ok(Self { dim, constraints })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Bound of the first constraint whose coefficients equal `coeffs`.
    pub fn bound_for(&self, coeffs: &[f64]) -> Option<f64> {
        self.constraints
            .iter()
            .find(|c| c.coeffs == coeffs)
            .map(|c| c.bound)
    }

    pub fn contains(&self, rates: &[f64]) -> bool {
        rates.len() == self.dim
            && rates.iter().all(|&r| r >= -FEAS_TOL)
            && self
                .constraints
                .iter()
                .all(|c| dot(&c.coeffs, rates) <= c.bound + FEAS_TOL * (1.0 + c.bound.abs()))
    }

    /// `max { w · R : R in region }`.
    ///
    /// The region is bounded, so the maximum sits at a vertex; vertices are
    /// enumerated as feasible intersections of `dim` tight hyperplanes drawn
    /// from the constraints and the axes `R_i = 0`.
    pub fn support(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "support direction",
                expected: self.dim,
                actual: w.len(),
            });
        }
        let d = self.dim;
        let mut planes: Vec<(Vec<f64>, f64)> = self
            .constraints
            .iter()
            .map(|c| (c.coeffs.clone(), c.bound))
            .collect();
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            planes.push((e, 0.0));
        }
        let mut best = f64::NEG_INFINITY;
        for subset in combinations(planes.len(), d) {
            let a: Vec<&[f64]> = subset.iter().map(|&k| planes[k].0.as_slice()).collect();
            let b: Vec<f64> = subset.iter().map(|&k| planes[k].1).collect();
            if let Some(x) = solve_dense(&a, &b) {
                if self.contains(&x) {
                    best = best.max(dot(w, &x));
                }
            }
        }
        // the origin is always feasible, so some vertex was found
        Ok(best)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_dense(a: &[&[f64]], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.to_vec();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            if r != col && f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// MAC capacity region: `R1 ≤ E[M1]`, `R2 ≤ E[M2]`, `R1+R2 ≤ E[max(M1,M2)]`.
pub fn mac_region(ch: &MacChannel) -> RateRegion {
    let e1 = ch.pmf1().expectation();
    let e2 = ch.pmf2().expectation();
    let emax = expectation_max(&[ch.pmf1().clone(), ch.pmf2().clone()]).expect("two pmfs supplied");
    polymatroid2(e1, e2, emax)
}

fn polymatroid2(r1: f64, r2: f64, sum: f64) -> RateRegion {
    RateRegion::new(
        2,
        vec![
            Constraint {
                coeffs: vec![1.0, 0.0],
                bound: r1,
            },
            Constraint {
                coeffs: vec![0.0, 1.0],
                bound: r2,
            },
            Constraint {
                coeffs: vec![1.0, 1.0],
                bound: sum,
            },
        ],
    )
    .expect("nonnegative finite bounds")
}

/// `½ lg(1 + snr)`.
pub fn gaussian_rate(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// `E[½ lg(1 + SNR)]` over a discrete SNR law.
pub fn gaussian_p2p_rate(dist: &SnrDistribution) -> f64 {
    dist.expect(gaussian_rate)
}

/// Fading Gaussian MAC region with independent SNR laws.
pub fn gaussian_mac_region(snr1: &SnrDistribution, snr2: &SnrDistribution) -> RateRegion {
    let sum: f64 = snr1
        .atoms()
        .iter()
        .flat_map(|&(s1, p1)| {
            snr2.atoms()
                .iter()
                .map(move |&(s2, p2)| p1 * p2 * gaussian_rate(s1 + s2))
        })
        .sum();
    polymatroid2(gaussian_p2p_rate(snr1), gaussian_p2p_rate(snr2), sum)
}

/// Weight directions on the simplex: the axes, the all-ones direction and
/// `count` points of an additive-recurrence low-discrepancy sequence.
pub fn gap_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(count + dim + 1);
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        dirs.push(e);
    }
    dirs.push(vec![1.0 / dim as f64; dim]);
    if dim == 1 {
        return dirs;
    }
    let k = dim - 1;
    // generalized golden ratio: unique positive root of x^(k+1) = x + 1
    let mut g = 2.0f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (k + 1) as f64);
    }
    let alpha: Vec<f64> = (1..=k).map(|j| (1.0 / g.powi(j as i32)).fract()).collect();
    for i in 1..=count {
        let mut u: Vec<f64> = alpha.iter().map(|a| (0.5 + a * i as f64).fract()).collect();
        u.sort_by(f64::total_cmp);
        let mut w = Vec::with_capacity(dim);
        let mut prev = 0.0;
        for x in u {
            w.push(x - prev);
            prev = x;
        }
        w.push(1.0 - prev);
        dirs.push(w);
    }
    dirs
}

/// Largest support-function difference over [`gap_directions`].
pub fn region_gap(a: &RateRegion, b: &RateRegion, directions: usize) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "region gap dimensions",
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    if directions == 0 {
        return Err(invalid("region gap needs at least one direction"));
    }
    let mut gap = 0.0f64;
    for w in gap_directions(a.dim(), directions) {
        gap = gap.max((a.support(&w)? - b.support(&w)?).abs());
    }
    Ok(gap)
}

/// Superposition split: the top `i0` and bottom `n − m1` levels carry `V`
/// (receiver 2), levels `i0+1..=m1` carry `U` (receiver 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BcOperatingPoint {
    pub i0: usize,
    pub r1: f64,
    pub r2: f64,
}

/// Number of `V` levels seen by receiver 2 when `M2 = m2`.
pub fn v_levels_received(ch: &BcChannel, i0: usize, m2: usize) -> usize {
    let m1 = ch.m1();
    if m2 <= i0 {
        m2
    } else if m2 <= m1 {
        i0
    } else {
        i0 + (m2 - m1)
    }
}

/// `(i0, m1 − i0, E[#V levels received])` for every split `i0 = 0..=m1`.
pub fn bc_inner_sweep(ch: &BcChannel) -> Vec<BcOperatingPoint> {
    (0..=ch.m1())
        .map(|i0| BcOperatingPoint {
            i0,
            r1: (ch.m1() - i0) as f64,
            r2: fsum(
                ch.pmf2()
                    .support()
                    .map(|(m2, p)| p * v_levels_received(ch, i0, m2) as f64),
            ),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BcOuterValue {
    pub mu: f64,
    pub value: f64,
    pub i0: usize,
}

/// Maximum of `R1 + μ R2` with independent uniform levels.
///
/// Level `j ≤ m1` contributes `max(1, μ q(j))` where `q(j) = P[M2 ≥ j]`; it
/// goes to `V` when `μ q(j) ≥ 1` (ties included). Levels below `m1` always
/// go to `V` and contribute `μ q(j)`.
pub fn bc_outer_value(ch: &BcChannel, mu: f64) -> Result<BcOuterValue> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(invalid(format!(
            "weight mu must be finite and >= 0, got {mu}"
        )));
    }
    let q = |j: usize| ch.pmf2().tail(j);
    let mut value = 0.0;
    let mut i0 = 0;
    for j in 1..=ch.m1() {
        let v = mu * q(j);
        if v >= 1.0 {
            value += v;
            i0 = j;
        } else {
            value += 1.0;
        }
    }
    value += (ch.m1() + 1..=ch.n()).map(|j| mu * q(j)).sum::<f64>();
    Ok(BcOuterValue { mu, value, i0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::{pmf_from_snr, FadingPmf};
    use proptest::prelude::*;

    fn region(r1: f64, r2: f64, s: f64) -> RateRegion {
        polymatroid2(r1, r2, s)
    }

    #[test]
    fn mac_region_examples() {
        let ch = MacChannel::from_pmfs(FadingPmf::point_mass(5), FadingPmf::point_mass(3));
        assert_eq!(mac_region(&ch), region(5.0, 3.0, 5.0));

        let p: FadingPmf = "1:0.5,2:0.5".parse().unwrap();
        let silent = MacChannel::from_pmfs(p.clone(), FadingPmf::point_mass(0));
        assert_eq!(mac_region(&silent), region(1.5, 0.0, 1.5));

        let iid = MacChannel::from_pmfs(p.clone(), p);
        assert_eq!(mac_region(&iid), region(1.5, 1.5, 1.75));
    }

    #[test]
    fn support_function_of_mac_pentagon() {
        let r = region(5.0, 3.0, 5.0);
        assert_eq!(r.support(&[1.0, 0.0]).unwrap(), 5.0);
        assert_eq!(r.support(&[0.0, 1.0]).unwrap(), 3.0);
        // corner (2, 3)
        assert!((r.support(&[0.25, 0.75]).unwrap() - 2.75).abs() < 1e-12);
        let box_only = RateRegion::new(
            2,
            vec![
                Constraint {
                    coeffs: vec![1.0, 0.0],
                    bound: 1.0,
                },
                Constraint {
                    coeffs: vec![0.0, 1.0],
                    bound: 2.0,
                },
            ],
        )
        .unwrap();
        assert_eq!(box_only.support(&[0.5, 0.5]).unwrap(), 1.5);
    }

    #[test]
    fn region_validation() {
        assert!(RateRegion::new(
            2,
            vec![Constraint {
                coeffs: vec![1.0, 0.0],
                bound: 1.0
            }]
        )
        .is_err());
        assert!(RateRegion::new(
            1,
            vec![Constraint {
                coeffs: vec![1.0],
                bound: -1.0
            }]
        )
        .is_err());
        assert!(RateRegion::new(
            1,
            vec![Constraint {
                coeffs: vec![1.0, 1.0],
                bound: 1.0
            }]
        )
        .is_err());
        assert!(RateRegion::new(0, vec![]).is_err());
    }

    #[test]
    fn gaussian_p2p_examples() {
        let d = |s: &str| s.parse::<SnrDistribution>().unwrap();
        assert_eq!(gaussian_p2p_rate(&d("1")), 0.5);
        assert_eq!(gaussian_p2p_rate(&d("1023")), 5.0);
        assert_eq!(gaussian_p2p_rate(&d("3:0.5,15:0.5")), 1.5);
    }

    #[test]
    fn gaussian_mac_examples() {
        let one = SnrDistribution::deterministic(1.0).unwrap();
        let r = gaussian_mac_region(&one, &one);
        assert_eq!(r, region(0.5, 0.5, 0.5 * 3f64.log2()));

        let r = gaussian_mac_region(
            &SnrDistribution::deterministic(1023.0).unwrap(),
            &SnrDistribution::deterministic(63.0).unwrap(),
        );
        assert_eq!(r, region(5.0, 3.0, 0.5 * 1087f64.log2()));
        assert!(SnrDistribution::deterministic(0.0).is_err());
    }

    #[test]
    fn region_gap_examples() {
        let a = region(1.5, 1.5, 1.75);
        assert_eq!(region_gap(&a, &a, 32).unwrap(), 0.0);
        let shifted = region(2.5, 2.5, 2.75);
        assert!((region_gap(&a, &shifted, 32).unwrap() - 1.0).abs() < 1e-12);

        let model = mac_region(&MacChannel::from_pmfs(
            FadingPmf::point_mass(5),
            FadingPmf::point_mass(3),
        ));
        let gauss = gaussian_mac_region(
            &SnrDistribution::deterministic(1023.0).unwrap(),
            &SnrDistribution::deterministic(63.0).unwrap(),
        );
        assert!(region_gap(&model, &gauss, 64).unwrap() <= 1.5);

        let one_d = RateRegion::new(
            1,
            vec![Constraint {
                coeffs: vec![1.0],
                bound: 1.0,
            }],
        )
        .unwrap();
        assert!(region_gap(&a, &one_d, 8).is_err());
        assert!(region_gap(&a, &a, 0).is_err());
    }

    #[test]
    fn directions_lie_on_simplex() {
        for d in 1..=4 {
            let dirs = gap_directions(d, 50);
            assert_eq!(dirs.len(), 50 * usize::from(d > 1) + d + 1);
            for w in dirs {
                assert!(w.iter().all(|&x| x >= 0.0));
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    fn worked_bc() -> BcChannel {
        BcChannel::new(6, 4, FadingPmf::uniform(6)).unwrap()
    }

    #[test]
    fn bc_inner_sweep_examples() {
        let sweep = bc_inner_sweep(&worked_bc());
        assert_eq!(sweep.len(), 5);
        let p = sweep[2];
        assert_eq!((p.i0, p.r1), (2, 2.0));
        assert!((p.r2 - 2.0).abs() < 1e-12);
        // i0 = 0: only levels 5, 6 go to V: (1 + 2) / 7
        assert!((sweep[0].r2 - 3.0 / 7.0).abs() < 1e-12);
        assert_eq!(sweep[0].r1, 4.0);

        let full = BcChannel::new(6, 4, FadingPmf::point_mass(6)).unwrap();
        let last = *bc_inner_sweep(&full).last().unwrap();
        assert_eq!((last.i0, last.r1, last.r2), (4, 0.0, 6.0));
    }

    #[test]
    fn bc_outer_examples() {
        let ch = worked_bc();
        let zero = bc_outer_value(&ch, 0.0).unwrap();
        assert_eq!((zero.value, zero.i0), (4.0, 0));

        // q(j) = (7-j)/7; levels 1..3 go to V; value = 1 + 30/7 + 2(2/7 + 1/7)
        let two = bc_outer_value(&ch, 2.0).unwrap();
        assert_eq!(two.i0, 3);
        assert!((two.value - 43.0 / 7.0).abs() < 1e-12);
        let inner_best = bc_inner_sweep(&ch)
            .iter()
            .map(|p| p.r1 + 2.0 * p.r2)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((inner_best - 43.0 / 7.0).abs() < 1e-12);

        let big = bc_outer_value(&ch, 1e6).unwrap();
        assert_eq!(big.i0, 4);
        let r2_max = bc_inner_sweep(&ch).last().unwrap().r2;
        assert!((big.value - 1e6 * r2_max).abs() / big.value < 1e-12);

        assert!(bc_outer_value(&ch, -0.1).is_err());
    }

    #[test]
    fn bc_outer_tie_goes_to_receiver_two() {
        // q(1) = 1/2, μ = 2 → μ q(1) = 1 exactly
        let ch = BcChannel::new(2, 1, "0:0.5,2:0.5".parse().unwrap()).unwrap();
        assert_eq!(bc_outer_value(&ch, 2.0).unwrap().i0, 1);
    }

    fn arb_bc() -> impl Strategy<Value = BcChannel> {
        (2usize..=10).prop_flat_map(|n| {
            (
                1..n,
                proptest::collection::vec(0.0f64..1.0, n + 1)
                    .prop_filter("zero", |w| w.iter().sum::<f64>() > 1e-3),
            )
                .prop_map(move |(m1, w)| {
                    let t: f64 = w.iter().sum();
                    let pmf = FadingPmf::new(w.iter().map(|x| x / t).collect()).unwrap();
                    BcChannel::new(n, m1, pmf).unwrap()
                })
        })
    }

    fn arb_snr() -> impl Strategy<Value = SnrDistribution> {
        proptest::collection::vec((1.0f64..1e4, 0.05f64..1.0), 1..5).prop_map(|raw| {
            let t: f64 = raw.iter().map(|a| a.1).sum();
            SnrDistribution::new(raw.iter().map(|&(s, p)| (s, p / t)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn inner_meets_outer(ch in arb_bc(), mu in 0.0f64..20.0) {
            let inner = bc_inner_sweep(&ch)
                .iter()
                .map(|p| p.r1 + mu * p.r2)
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((inner - bc_outer_value(&ch, mu).unwrap().value).abs() < 1e-9);
        }

        #[test]
        fn sweep_shape(ch in arb_bc()) {
            let sweep = bc_inner_sweep(&ch);
            for w in sweep.windows(2) {
                prop_assert!(w[1].r1 < w[0].r1);
                prop_assert!(w[1].r2 >= w[0].r2 - 1e-12);
                prop_assert!(w[1].r2 - w[0].r2 <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn mac_region_is_polymatroid(a in arb_snr(), b in arb_snr()) {
            let ch = MacChannel::from_pmfs(pmf_from_snr(&a), pmf_from_snr(&b));
            let r = mac_region(&ch);
            let (r1, r2, s) = (r.bound_for(&[1.0, 0.0]).unwrap(), r.bound_for(&[0.0, 1.0]).unwrap(), r.bound_for(&[1.0, 1.0]).unwrap());
            prop_assert!(s <= r1 + r2 + 1e-12);
            prop_assert!(s >= r1.max(r2) - 1e-12);
        }

        #[test]
        fn p2p_gap_at_most_one(d in arb_snr()) {
            let model = pmf_from_snr(&d).expectation();
            prop_assert!((model - gaussian_p2p_rate(&d)).abs() <= 1.0);
        }

        #[test]
        fn mac_gap_at_most_one_and_a_half(a in arb_snr(), b in arb_snr()) {
            let model = mac_region(&MacChannel::from_pmfs(pmf_from_snr(&a), pmf_from_snr(&b)));
            let gauss = gaussian_mac_region(&a, &b);
            prop_assert!(region_gap(&model, &gauss, 64).unwrap() <= 1.5);
        }

        #[test]
        fn gap_is_a_metric(a in arb_snr(), b in arb_snr(), c in arb_snr()) {
            let ra = gaussian_mac_region(&a, &b);
            let rb = mac_region(&MacChannel::from_pmfs(pmf_from_snr(&a), pmf_from_snr(&b)));
            let rc = gaussian_mac_region(&c, &a);
            let ab = region_gap(&ra, &rb, 32).unwrap();
            prop_assert!((ab - region_gap(&rb, &ra, 32).unwrap()).abs() < 1e-12);
            prop_assert!(region_gap(&ra, &rc, 32).unwrap() <= ab + region_gap(&rb, &rc, 32).unwrap() + 1e-9);
        }
    }
}
